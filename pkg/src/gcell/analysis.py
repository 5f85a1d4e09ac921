"""Scaling transforms, asymptotic-law fits, and text tables for sweep output."""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InsufficientData, MissingColumn

LAWS = ("sqrt_log", "linear", "d_squared")


@dataclass(frozen=True)
class SweepRecord:
    model: str
    P_m: float
    P_n: float
    A: float
    d: float
    value: float
    grid_n: int = 0
    residual: float = float("nan")
    steps: int = 0
    wall_time_s: float = float("nan")
    config_hash: str = ""
    error: str = ""


def scale_column(records, law):
    """Attach the law's scaled column; natural log throughout.

    sqrt_log: value / sqrt(log A) (rows with A <= 1 are rejected),
    linear:   value / A,
    d_squared: -value / d^2.
    Returns (records, scaled_values, column_name).
    """
    if law not in LAWS:
        raise ValueError(f"unknown scaling law '{law}'")
    records = list(records)
    if law == "sqrt_log":
        bad = [r for r in records if r.A <= 1.0]
        if bad:
            raise ValueError(f"sqrt_log scaling rejects A <= 1 rows: "
                             f"{sorted(set(r.A for r in bad))}")
        scaled = [r.value / math.sqrt(math.log(r.A)) for r in records]
        name = "value_over_sqrt_log_A"
    elif law == "linear":
        scaled = [r.value / r.A for r in records]
        name = "value_over_A"
    else:
        scaled = [-r.value / r.d**2 for r in records]
        name = "minus_value_over_d2"
    return records, scaled, name


def unscale_column(records, scaled, law):
    """Inverse of scale_column, recovering the raw values."""
    if law == "sqrt_log":
        return [s * math.sqrt(math.log(r.A)) for r, s in zip(records, scaled)]
    if law == "linear":
        return [s * r.A for r, s in zip(records, scaled)]
    return [-s * r.d**2 for r, s in zip(records, scaled)]


def fit_scaling(records, min_records=4, min_decades=1.0):
    """Least-squares prefactor of value ~ c sqrt(log A) on the largest-A half.

    The fit deliberately drops the smaller half of the intensity range: the
    law is asymptotic and moderate-A rows still drift.  Returns (c, relative
    rms residual over the fitted rows).
    """
    rows = sorted((r for r in records if not r.error), key=lambda r: r.A)
    if len(rows) < min_records:
        raise InsufficientData(f"need at least {min_records} records")
    if rows[0].A <= 1.0:
        raise InsufficientData("sqrt_log fit needs A > 1")
    if math.log10(rows[-1].A / rows[0].A) < min_decades:
        raise InsufficientData("records must span at least one decade in A")
    tail = rows[len(rows) // 2:]
    x = np.array([math.sqrt(math.log(r.A)) for r in tail])
    y = np.array([r.value for r in tail])
    c = float(np.dot(x, y) / np.dot(x, x))
    rms = float(np.linalg.norm(y - c * x) / np.linalg.norm(y))
    return c, rms


def _fmt(x):
    return f"{x:.4e}"


def _require(records, attr):
    for r in records:
        if not hasattr(r, attr) or getattr(r, attr) is None:
            raise MissingColumn(f"records lack column '{attr}'")


def render_table(records, layout="custom", columns=None):
    """Fixed-width text table in the tables' five-significant-digit style.

    table1: d, -lambda_bar, -lambda_bar/d^2 (expects limit-problem rows).
    table2/table3: one row per A; per-d pairs of value and value/sqrt(log A).
    custom: echoes the given column names in order.
    """
    records = [r for r in records if not r.error]
    if layout == "table1":
        _require(records, "d")
        lines = [f"{'d':>10} {'-lambda_bar':>14} {'-lambda_bar/d^2':>16}"]
        for r in sorted(records, key=lambda r: -r.d):
            lines.append(f"{r.d:>10.0e} {_fmt(-r.value):>14} "
                         f"{_fmt(-r.value / r.d**2):>16}")
        return "\n".join(lines)
    if layout in ("table2", "table3"):
        _require(records, "A")
        ds = sorted({r.d for r in records}, reverse=True)
        As = sorted({r.A for r in records})
        by_cell = {(r.d, r.A): r.value for r in records}
        head = f"{'A':>6}"
        for d in ds:
            head += f" {'Hbar(d=%g)' % d:>14} {'ratio':>12}"
        lines = [head]
        for A in As:
            if A <= 1.0:
                raise ValueError("sqrt_log layouts need A > 1")
            row = f"{A:>6.0f}"
            for d in ds:
                v = by_cell.get((d, A))
                if v is None:
                    row += f" {'-':>14} {'-':>12}"
                else:
                    row += f" {v:>14.5g} {_fmt(v / math.sqrt(math.log(A))):>12}"
            lines.append(row)
        return "\n".join(lines)
    if layout == "custom":
        columns = columns or ["model", "A", "d", "value"]
        for c in columns:
            _require(records, c)
        lines = [" ".join(f"{c:>14}" for c in columns)]
        for r in records:
            cells = []
            for c in columns:
                v = getattr(r, c)
                cells.append(f"{_fmt(v):>14}" if isinstance(v, float)
                             else f"{str(v):>14}")
            lines.append(" ".join(cells))
        return "\n".join(lines)
    raise ValueError(f"unknown layout '{layout}'")
