"""Readers and writers for the on-disk artifacts.

All tables are comma-separated with a single header line and 17 significant
digits, so values round-trip exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .functionals import DiagnosticsRecord, diagnostics_header

FMT = "%.17g"


def _write_table(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    rows = np.asarray(rows, dtype=float).reshape(-1, len(header))
    np.savetxt(path, rows, fmt=FMT, delimiter=",", header=",".join(header), comments="")
    return path


def read_table(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data.reshape(-1, len(header))


def write_snapshot(path, x, u) -> Path:
    return _write_table(path, ["x", "u"], np.column_stack([x, u]))


def read_snapshot(path) -> tuple[np.ndarray, np.ndarray]:
    header, data = read_table(path)
    if header != ["x", "u"]:
        raise ValueError(f"{path}: not a snapshot file")
    return data[:, 0], data[:, 1]


def write_diagnostics(path, records: Sequence[DiagnosticsRecord], n_alpha: int) -> Path:
    return _write_table(path, diagnostics_header(n_alpha), [r.row() for r in records])


def write_region(path, rows) -> Path:
    return _write_table(path, ["alpha", "theta", "lhs_value", "admissible"], rows)


def _json_float(x: float):
    return None if not math.isfinite(x) else float(x)


def write_ensemble_report(path, estimates: dict) -> Path:
    """One JSON record per line; undefined standard errors are written as null."""
    path = Path(path)
    with path.open("w") as fh:
        for name, est in estimates.items():
            rec = {"functional": name, "mean": _json_float(est.mean), "se": _json_float(est.se), "n": est.n}
            fh.write(json.dumps(rec) + "\n")
    return path


def read_ensemble_report(path) -> list[dict]:
    with Path(path).open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_scaling_report(path, rows: Iterable) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("lambda,functional,mean,se,slope_window\n")
        for r in rows:
            fh.write(f"{r.scale:.17g},{r.functional},{r.mean:.17g},{r.se:.17g},{r.slope:.17g}\n")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n")
    return path


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
