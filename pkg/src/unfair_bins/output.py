"""CSV serialization of experiment artifacts.

Every file starts with '#'-prefixed header comments carrying the kind,
schema version, and a one-line JSON echo of the producing parameters
(seeds included), so each artifact is self-describing. Formatting is
locale-independent: integers as decimal strings, floats via ``repr``
(shortest round-trip form), rationals as ``p/q``. Files are UTF-8 with
LF line endings and a terminating newline.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .theory import power_law_load, prediction_curve

AGGREGATE_COLUMNS = (
    "rank", "label_mode", "load_mean", "load_std",
    "q05", "q25", "q50", "q75", "q95",
    "predicted", "abs_err", "rel_err",
)
FIGURE_COLUMNS = ("position", "load_mean", "predicted")
PREDICTION_COLUMNS = ("rank", "expected_load", "power_law", "difference")
ORACLE_COLUMNS = ("profile", "probability")
GAPS_COLUMNS = ("t", "gap")


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write(path: Path, header: list[str], columns: tuple[str, ...], rows, footer=()):
    lines = [f"# {h}" for h in header]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    lines.extend(f"# {f}" for f in footer)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _header(kind: str, meta: dict) -> list[str]:
    lines = [
        f"unfair-bins {kind} v1",
        "spec: " + json.dumps(meta, sort_keys=True, separators=(",", ":")),
    ]
    if "seed" in meta:
        lines.append(
            "seed derivation: uint64 from SeedSequence([seed, trial, crc32(purpose)])"
        )
    return lines


def write_aggregate_csv(path, meta: dict, aggregate, curve, report) -> None:
    """Per-rank trial statistics with the prediction and error columns."""
    q = aggregate.quantiles
    rows = (
        (
            rank + 1,
            aggregate.label_mode[rank],
            aggregate.mean[rank],
            aggregate.std[rank],
            q[5][rank], q[25][rank], q[50][rank], q[75][rank], q[95][rank],
            curve.values[rank],
            report.abs_error[rank],
            report.rel_error[rank],
        )
        for rank in range(aggregate.config.n)
    )
    _write(Path(path), _header("aggregate", meta), AGGREGATE_COLUMNS, rows)


def write_figure_csv(path, meta: dict, aggregate, curve) -> None:
    """Figure-mode data: bins sorted most- to least-loaded, prediction overlaid."""
    n = aggregate.config.n
    rows = (
        (pos + 1, aggregate.mean[n - 1 - pos], curve.values[n - 1 - pos])
        for pos in range(n)
    )
    _write(Path(path), _header("figure", meta), FIGURE_COLUMNS, rows)


def write_prediction_csv(path, n: int, d: int, m: int, meta: dict) -> None:
    """Exact per-rank prediction next to its power-law approximation."""
    curve = prediction_curve(n, d, m)
    approx = [power_law_load(i / n, d, m, n) for i in range(1, n + 1)]
    rows = (
        (i + 1, curve.values[i], approx[i], curve.values[i] - approx[i])
        for i in range(n)
    )
    footer = (
        "column_totals: expected_load="
        + _fmt(float(curve.values.sum()))
        + " power_law="
        + _fmt(float(sum(approx))),
    )
    _write(Path(path), _header("prediction", meta), PREDICTION_COLUMNS, rows, footer)


def write_oracle_csv(path, dist, means, meta: dict) -> None:
    """Exact profile probabilities as p/q strings, sorted means in the footer."""
    rows = (
        ('"' + " ".join(str(x) for x in profile) + '"', dist.support[profile])
        for profile in sorted(dist.support)
    )
    footer = tuple(
        f"sorted_mean_rank_{i + 1}: {means[i]}" for i in range(len(means))
    )
    _write(Path(path), _header("oracle", meta), ORACLE_COLUMNS, rows, footer)


def write_gaps_csv(path, meta: dict, series) -> None:
    """Load-gap trajectory of one bin pair over the snapshot times."""
    header = _header("gaps", meta)
    header.append(f"pair: labels ({series.label_a}, {series.label_b})")
    rows = zip(series.times.tolist(), series.gaps.tolist())
    _write(Path(path), header, GAPS_COLUMNS, rows)
