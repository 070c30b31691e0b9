"""Sweep CSV emission and parsing.

The CSV is the source of truth for sweep output: floats are written with
shortest round-trip representation, so parsing an emitted file reproduces
the SweepRow values bit for bit.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .sweep import SweepRow

SWEEP_COLUMNS = (
    "b",
    "m",
    "mode",
    "t_star",
    "s1_star",
    "s2_star",
    "sigma1_star",
    "sigma2_star",
    "q1",
    "q2",
    "W1_nash",
    "W2_nash",
    "W1_lf",
    "W2_lf",
    "dW1",
    "dW2",
    "dW",
    "feasible",
    "binding_constraint",
)

_FLOAT_COLUMNS = tuple(
    c for c in SWEEP_COLUMNS if c not in ("mode", "feasible", "binding_constraint")
)


def _format_cell(name: str, value) -> str:
    if name == "mode":
        return value
    if name == "feasible":
        return "true" if value else "false"
    if name == "binding_constraint":
        return value
    return repr(float(value))


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(_format_cell(c, getattr(row, c)) for c in SWEEP_COLUMNS)
    return path


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    rows: list[SweepRow] = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != list(SWEEP_COLUMNS):
            raise ValueError(f"unexpected sweep CSV header: {reader.fieldnames}")
        for record in reader:
            kwargs = {name: float(record[name]) for name in _FLOAT_COLUMNS}
            kwargs["mode"] = record["mode"]
            kwargs["feasible"] = record["feasible"] == "true"
            kwargs["binding_constraint"] = record["binding_constraint"]
            rows.append(SweepRow(**kwargs))
    return rows
