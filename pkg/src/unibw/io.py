"""Sample CSV files, JSON result envelopes and companion tables."""
import csv
import datetime as _dt
import io
import json
import math
import os

import numpy as np

from . import __version__
from .errors import FileMissing, IoFailure, ParseError
from .sample import Sample

TOOL = "unibw"


def read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except FileNotFoundError:
        raise FileMissing(f"no such file: {path}") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None


def load_sample(path):
    """Read a CSV with header ``x1,...,xd`` and one observation per row."""
    text = read_text(path)
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ParseError("empty file, header row required", line=1)
    header = [h.strip() for h in rows[0]]
    d = len(header)
    if d == 0 or any(h != f"x{k + 1}" for k, h in enumerate(header)):
        raise ParseError(f"header must be x1,...,xd, got {','.join(header)!r}", line=1)
    pts = []
    for i, row in enumerate(rows[1:], 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d:
            raise ParseError(f"expected {d} fields, got {len(row)}", line=i)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ParseError(f"not a decimal number in {row!r}", line=i) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", line=i)
        pts.append(vals)
    return Sample(np.array(pts, dtype=float).reshape(-1, d), d)


def write_sample(path, sample):
    """Write a sample so that ``load_sample`` reads back the identical floats."""
    pts = sample.points if isinstance(sample, Sample) else np.asarray(sample, dtype=float).reshape(len(sample), -1)
    d = pts.shape[1]
    lines = [",".join(f"x{k + 1}" for k in range(d))]
    lines += [",".join(f"{v:.17g}" for v in row) for row in pts]
    _write(path, "\n".join(lines) + "\n")


def _write(path, text):
    try:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None


def _plain(obj):
    """Convert numpy scalars/arrays and tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def payload_of(report):
    return _plain(report.payload() if hasattr(report, "payload") else report)


def payload_bytes(report):
    """Canonical bytes of a payload; equal for reruns with the same inputs."""
    return json.dumps(payload_of(report), sort_keys=True, separators=(",", ":")).encode("utf-8")


def envelope(report, config=None, seed=None):
    payload = payload_of(report)
    if config is None and isinstance(payload, dict):
        config = payload.get("config")
    if seed is None and isinstance(payload, dict):
        seed = payload.get("seed")
    env = {
        "tool": TOOL,
        "version": __version__,
        "config": _plain(config),
        "seed": seed,
        "payload": payload,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if hasattr(report, "wall_time"):
        env["wall_time"] = report.wall_time
    return env


def tables_of(payload):
    """Flat tables derived from a payload: ``{suffix: (columns, rows)}``."""
    tables = {}
    if not isinstance(payload, dict):
        return tables
    if "stats" in payload and "n_list" in payload:
        rows = []
        for name, per_n in payload["stats"].items():
            for k, vals in enumerate(per_n):
                n = payload["n_list"][k] if k < len(payload["n_list"]) else k
                for r, v in enumerate(vals):
                    rows.append([payload["study"], name, n, r, v])
        tables["stats"] = (["study", "statistic", "n", "replication", "value"], rows)
        summ = payload.get("summary", {})
        srows = []
        cols = ["count", "mean", "median", "sd", "q05", "q25", "q75", "q95", "se_mean", "se_median"]
        for name, per_n in summ.items():
            if not isinstance(per_n, list) or not per_n or not isinstance(per_n[0], dict) or "count" not in per_n[0]:
                continue
            for k, s in enumerate(per_n):
                n = payload["n_list"][k] if k < len(payload["n_list"]) else k
                srows.append([name, n] + [s.get(c) for c in cols])
        if srows:
            tables["summary"] = (["statistic", "n"] + cols, srows)
        for key in ("levels", "fits"):
            if isinstance(summ.get(key), list) and summ[key]:
                cols2 = list(summ[key][0].keys())
                tables[key] = (cols2, [[row.get(c) for c in cols2] for row in summ[key]])
    if isinstance(payload.get("rows"), list) and payload["rows"] and isinstance(payload["rows"][0], dict):
        cols = list(payload["rows"][0].keys())
        tables["rows"] = (cols, [[row.get(c) for c in cols] for row in payload["rows"]])
    return tables


def write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if v is None else (f"{v:.17g}" if isinstance(v, float) else v) for v in row])
    _write(path, buf.getvalue())


def emit_report(report, path, config=None, seed=None, tables=True):
    """Write the JSON envelope to ``path`` and one CSV per table next to it.

    Companion files are named ``<stem>_<table>.csv``. Returns the list of
    written paths.
    """
    env = envelope(report, config, seed)
    _write(path, json.dumps(env, indent=2, sort_keys=False) + "\n")
    written = [path]
    if tables:
        stem, _ = os.path.splitext(path)
        for suffix, (cols, rows) in tables_of(env["payload"]).items():
            p = f"{stem}_{suffix}.csv"
            write_csv(p, cols, rows)
            written.append(p)
    return written


def read_envelope(path):
    try:
        return json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
