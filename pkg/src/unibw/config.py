"""Flat ``key = value`` experiment files with dotted keys.

Example::

    # uniform design on [0, 2]
    density.kind = uniform
    density.lo = [0.0]
    density.hi = [2.0]
    family.s = [0, 0.25, 0.5, 0.75]
    kernel.shape = uniform
    region.lo = [0.5]
    region.hi = [1.5]
    bandwidth.a_lo = 0.3
    bandwidth.a_hi = 0.7
    grid.rho = 1.1
    grid.delta = 0.5
    study.n = [1000, 10000, 100000]
    study.replications = 50
    study.seed = 0

Values are JSON scalars or lists (``true``/``false``, numbers, quoted or bare
strings). Lines starting with ``#`` or ``;`` are comments.
"""
import configparser
import json

from .densities import density_from_mapping
from .errors import ConfigInvalid, ParseError
from .grids import Box
from .harness import ExperimentConfig
from .kernels import Kernel, KernelFamily, indicator_family

_SECTION = "unibw"

# dotted key -> ExperimentConfig field
_SCALARS = {
    "bandwidth.a_lo": "a_lo",
    "bandwidth.a_hi": "a_hi",
    "grid.rho": "rho",
    "grid.delta": "delta",
    "study.n": "n_list",
    "study.replications": "R",
    "study.seed": "seed",
    "conc.n": "conc_n",
    "conc.levels": "conc_levels",
    "conc.c": "conc_c",
    "conc.ratios": "conc_ratios",
    "poisson.n": "pois_n",
    "poisson.h": "pois_h",
    "poisson.quantile": "pois_quantile",
    "poisson.threshold": "pois_threshold",
}


def _value(raw):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except ValueError:
        pass
    if raw.startswith("[") and raw.endswith("]"):
        inner = raw[1:-1].strip()
        return [] if not inner else [_value(p) for p in inner.split(",")]
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "'\"":
        return raw[1:-1]
    if raw.lower() in ("true", "yes", "on"):
        return True
    if raw.lower() in ("false", "no", "off"):
        return False
    return raw


def parse_config(text):
    """Parse config text into a flat ``{dotted.key: value}`` dict."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
                                   strict=True, empty_lines_in_values=False)
    cp.optionxform = str
    lines = text.splitlines()
    for i, line in enumerate(lines, 1):
        s = line.strip()
        if s and not s.startswith(("#", ";")) and "=" not in s:
            raise ParseError(f"expected 'key = value', got {s!r}", line=i)
        if s.startswith("["):
            raise ParseError("sections are not used; write dotted keys instead", line=i)
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r}", line=(exc.lineno or 1) - 1) from None
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None
    return {k: _value(v) for k, v in cp.items(_SECTION)}


def serialize_config(flat):
    """Inverse of ``parse_config`` for flat dicts of JSON-representable values."""
    out = []
    for k in flat:
        if not k or "=" in k or k.strip() != k:
            raise ConfigInvalid(f"invalid key {k!r}")
        out.append(f"{k} = {json.dumps(flat[k])}")
    return "\n".join(out) + "\n"


def load_config(path):
    from .io import read_text
    return parse_config(read_text(path))


def _family(flat, d):
    if "family.s" in flat:
        return indicator_family(flat["family.s"], nodes=int(flat.get("family.nodes", 0)))
    if "family.s_grid_size" in flat:
        m = int(flat["family.s_grid_size"])
        if m < 1:
            raise ConfigInvalid("family.s_grid_size must be >= 1")
        return indicator_family([i / m for i in range(m)], nodes=int(flat.get("family.nodes", 0)))
    if "family.shapes" in flat:
        shapes = flat["family.shapes"]
        coeffs = flat.get("family.coeffs", [[] for _ in shapes])
        if len(coeffs) != len(shapes):
            raise ConfigInvalid("family.coeffs needs one entry per shape")
        return KernelFamily(tuple(Kernel(s, d, tuple(c)) for s, c in zip(shapes, coeffs)),
                            nodes=int(flat.get("family.nodes", 0)))
    return None


def experiment_from_flat(flat, base=None):
    """Build an ``ExperimentConfig`` from a flat dict; unknown keys are rejected."""
    base = base or ExperimentConfig()
    known = set(_SCALARS) | {"density.kind", "density.lo", "density.hi", "density.mean", "density.sd",
                             "density.weights", "density.means", "density.sds", "family.s",
                             "family.s_grid_size", "family.shapes", "family.coeffs", "family.nodes",
                             "kernel.shape", "kernel.coeffs", "kernel.scale", "region.lo", "region.hi",
                             "study.threads"}
    unknown = sorted(set(flat) - known)
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {', '.join(unknown)}")
    kw = {}
    try:
        dens = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith("density.")}
        if dens:
            kw["density"] = density_from_mapping(dens)
        d = kw["density"].dim if "density" in kw else base.density.dim
        fam = _family(flat, d)
        if fam is not None:
            kw["family"] = fam
        if "kernel.shape" in flat:
            kw["kernel"] = Kernel(flat["kernel.shape"], d, tuple(flat.get("kernel.coeffs", [])),
                                  float(flat.get("kernel.scale", 1.0)))
        if "region.lo" in flat or "region.hi" in flat:
            kw["H"] = Box(flat.get("region.lo", base.H.lo.tolist()), flat.get("region.hi", base.H.hi.tolist()))
        for key, name in _SCALARS.items():
            if key in flat:
                kw[name] = flat[key]
        if "study.threads" in flat:
            kw["threads"] = int(flat["study.threads"])
        cfg = ExperimentConfig(**{**_fields(base), **kw})
    except (TypeError, KeyError) as exc:
        raise ConfigInvalid(f"malformed config: {exc}") from None
    return cfg


def _fields(cfg):
    from dataclasses import fields
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def experiment_to_flat(cfg):
    """Flat dict describing ``cfg``; ``experiment_from_flat`` inverts it."""
    flat = {}
    for k, v in cfg.density.to_mapping().items():
        flat[f"density.{k}"] = v
    fam = cfg.family
    if fam.is_indicator_family:
        s = fam.thresholds()
        flat["family.s"] = s[:, 0].tolist() if fam.dim == 1 else s.tolist()
    else:
        flat["family.shapes"] = [k.shape for k in fam]
        flat["family.coeffs"] = [list(k.params) for k in fam]
    flat["family.nodes"] = fam.nodes
    flat["kernel.shape"] = cfg.kernel.shape
    flat["kernel.coeffs"] = list(cfg.kernel.params)
    flat["kernel.scale"] = cfg.kernel.scale
    flat["region.lo"] = cfg.H.lo.tolist()
    flat["region.hi"] = cfg.H.hi.tolist()
    for key, name in _SCALARS.items():
        v = getattr(cfg, name)
        flat[key] = list(v) if isinstance(v, tuple) else v
    return flat
