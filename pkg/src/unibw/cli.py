"""Command-line entry point.

Every subcommand accepts ``--config``, ``--out``, ``--seed`` and
``--threads``. Results go to stdout as JSON (or CSV for ``grid``); with
``--out`` a JSON envelope plus companion CSV tables are written instead.
Exit status: 0 success, 1 runtime error, 2 usage error.
"""
import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import harness, io
from .config import experiment_from_flat, load_config
from .errors import UnibwError
from .geometry import extreme_point, gram
from .grids import make_bandwidth_grid
from .kde import band_cor11, expected_kde, kde
from .kernels import make_kernel
from .process import eval_Gn
from .sample import Sample
from .selectors import plugin_density, sheather_jones, silverman


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value experiment file")
    common.add_argument("--out", help="write a JSON envelope (and CSV tables) here")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--threads", type=int, help="worker threads for replications")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="CSV sample with header x1,...,xd (real-data mode)")
    data.add_argument("--n", type=int, default=1000, help="simulated sample size when --data is absent")

    kern = argparse.ArgumentParser(add_help=False)
    kern.add_argument("--kernel", default=None, help="uniform | triangular | indicator | polynomial")
    kern.add_argument("--coeffs", type=_floats, default=None, help="kernel coefficients")

    p = argparse.ArgumentParser(prog="unibw", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("grid", parents=[common], help="geometric bandwidth net")
    g.add_argument("--hlo", type=float, required=True)
    g.add_argument("--hhi", type=float, required=True)
    g.add_argument("--rho", type=float, required=True)

    g = sub.add_parser("gn", parents=[common, data, kern], help="local empirical process at one (h, z)")
    g.add_argument("--h", type=float, required=True, help="window volume")
    g.add_argument("--z", type=_floats, required=True)

    g = sub.add_parser("kde", parents=[common, data, kern], help="kernel density estimates")
    g.add_argument("--h", type=float, required=True, help="window volume")
    g.add_argument("--z", type=_floats, required=True, help="points (d = 1) or one point (d > 1)")

    g = sub.add_parser("band", parents=[common, data, kern], help="uniform-in-bandwidth confidence band")
    g.add_argument("--h", type=float, required=True, help="window volume")
    g.add_argument("--z", type=_floats, required=True)
    g.add_argument("--fz", type=float, default=None, help="density value at z (default: true or plug-in)")

    sub.add_parser("selectors", parents=[common, data], help="rule-of-thumb and plug-in bandwidths")

    v = sub.add_parser("verify", help="Monte-Carlo verification studies")
    vs = v.add_subparsers(dest="study", required=True, metavar="STUDY")
    study = argparse.ArgumentParser(add_help=False)
    study.add_argument("--n", type=_ints, default=None, help="sample sizes, comma-separated")
    study.add_argument("--R", type=int, default=None, help="replications")
    for name in ("thm1-i", "cor11", "poissonize"):
        vs.add_parser(name, parents=[common, study])
    g = vs.add_parser("thm1-ii", parents=[common, study])
    g.add_argument("--direction", type=_floats, default=None, help="direction for the boundary target (default e1)")
    g = vs.add_parser("conc", parents=[common, study])
    g.add_argument("--ratios", type=_floats, default=None)
    g.add_argument("--c", type=float, default=None, help="constant multiplying the threshold")
    g.add_argument("--levels", type=int, default=None)
    g = vs.add_parser("chernoff", parents=[common])
    g.add_argument("--n", type=_ints, required=True)
    g = vs.add_parser("covering", parents=[common])
    g.add_argument("--eps", type=_floats, default=[0.2, 0.3, 0.5])
    g.add_argument("--m-probe", type=int, default=1000)
    return p


def _experiment(args):
    flat = load_config(args.config) if getattr(args, "config", None) else {}
    cfg = experiment_from_flat(flat)
    kw = {}
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        kw["threads"] = args.threads
    return replace(cfg, **kw)


def _kernel(args, cfg):
    if getattr(args, "kernel", None):
        return make_kernel(args.kernel, cfg.density.dim, args.coeffs)
    return cfg.kernel


def _sample(args, cfg):
    """Real data from ``--data`` or a seeded draw of ``--n`` points from the config density."""
    if getattr(args, "data", None):
        return io.load_sample(args.data), "data"
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0,)))
    return Sample(cfg.density.sample(rng, args.n), cfg.density.dim), "simulated"


def _points(z, d):
    z = np.asarray(z, dtype=float)
    if d == 1:
        return z.reshape(-1, 1)
    if z.size % d:
        raise UnibwError(f"--z needs a multiple of {d} coordinates")
    return z.reshape(-1, d)


def _emit(args, payload, config=None):
    if args.out:
        io.emit_report(payload, args.out, config=config, seed=getattr(args, "seed", None))
    else:
        json.dump(io.payload_of(payload), sys.stdout, indent=2)
        sys.stdout.write("\n")


def cmd_grid(args):
    g = make_bandwidth_grid(args.hlo, args.hhi, args.rho)
    if args.out:
        payload = {"h_lo": g.h_lo, "h_hi": g.h_hi, "rho": g.rho, "R": g.R,
                   "rows": [{"level": i, "h": h} for i, h in enumerate(g.levels)]}
        io.emit_report(payload, args.out, seed=args.seed)
    else:
        sys.stdout.write("h\n" + "".join(f"{h!r}\n" for h in g.levels))


def cmd_gn(args):
    cfg = _experiment(args)
    K = _kernel(args, cfg)
    sample, mode = _sample(args, cfg)
    rows = [{"z": z.tolist(), "G_n": eval_Gn(sample, K, args.h, z, cfg.density)} for z in _points(args.z, K.dim)]
    _emit(args, {"mode": mode, "n": sample.n, "h": args.h, "kernel": K.to_mapping(),
                 "density": cfg.density.to_mapping(), "rows": rows}, cfg.to_mapping())


def cmd_kde(args):
    cfg = _experiment(args)
    K = _kernel(args, cfg)
    sample, mode = _sample(args, cfg)
    rows = []
    for z in _points(args.z, K.dim):
        row = {"z": z.tolist(), "f_n": kde(sample, K, args.h, z).value}
        if mode == "simulated":
            row["E_f_n"] = expected_kde(cfg.density, K, args.h, z)
        rows.append(row)
    _emit(args, {"mode": mode, "n": sample.n, "h": args.h, "kernel": K.to_mapping(), "rows": rows},
          cfg.to_mapping())


def cmd_band(args):
    cfg = _experiment(args)
    K = _kernel(args, cfg)
    sample, mode = _sample(args, cfg)
    rows = []
    for z in _points(args.z, K.dim):
        est = kde(sample, K, args.h, z)
        if args.fz is not None:
            fz, source = args.fz, {"method": "user"}
        elif mode == "simulated":
            fz, source = float(cfg.density.pdf(z)), {"method": "true density"}
        else:
            vals, source = plugin_density(sample, z)
            fz = float(vals[0])
        b = band_cor11(est, fz, K)
        rows.append({"z": z.tolist(), "f_n": est.value, "half_width": b.half_width, "lower": b.lower,
                     "upper": b.upper, "f_z": fz, "f_source": source["method"]})
    _emit(args, {"mode": mode, "n": sample.n, "h": args.h, "level": "asymptotic-exact (a.s. limit)",
                 "kernel": K.to_mapping(), "rows": rows}, cfg.to_mapping())


def cmd_selectors(args):
    cfg = _experiment(args)
    sample, mode = _sample(args, cfg)
    rows = []
    for fn in (silverman, sheather_jones):
        res = fn(sample)
        rows.append({"method": res.method, "h_star": res.h_star})
    _emit(args, {"mode": mode, "n": sample.n, "rows": rows}, cfg.to_mapping())


def cmd_verify(args):
    if args.study == "chernoff":
        _emit(args, harness.chernoff_check(args.n))
        return
    cfg = _experiment(args)
    if args.study == "covering":
        from .densities import UniformDensity
        d = cfg.family.dim
        probe = UniformDensity([0.0] * d, [1.0] * d)
        rep = harness.estimate_covering(cfg.family, args.eps, probe, args.m_probe, cfg.seed)
        _emit(args, rep, cfg.to_mapping())
        return
    over = {}
    if args.n:
        over["n_list"] = tuple(args.n)
        over["conc_n"] = args.n[-1]
        over["pois_n"] = args.n[-1]
    if args.R is not None:
        over["R"] = args.R
    if args.study == "conc":
        if args.ratios:
            over["conc_ratios"] = tuple(args.ratios)
        if args.c is not None:
            over["conc_c"] = args.c
        if args.levels is not None:
            over["conc_levels"] = args.levels
    cfg = replace(cfg, **over)
    if args.study == "thm1-i":
        rep = harness.run_thm1_i(cfg)
    elif args.study == "thm1-ii":
        E = gram(cfg.family)
        direction = args.direction or [1.0] + [0.0] * (len(cfg.family) - 1)
        rep = harness.run_thm1_ii(cfg, extreme_point(E, direction, cfg.family))
    elif args.study == "cor11":
        rep = harness.run_cor11(cfg)
    elif args.study == "conc":
        rep = harness.run_concentration(cfg)
    else:
        rep = harness.poissonization_gap(cfg)
    _emit(args, rep)


COMMANDS = {"grid": cmd_grid, "gn": cmd_gn, "kde": cmd_kde, "band": cmd_band,
            "selectors": cmd_selectors, "verify": cmd_verify}


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        COMMANDS[args.command](args)
    except (UnibwError, OSError) as exc:
        sys.stderr.write(f"unibw: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
