"""Locality metrics for scan orders, computed by direct enumeration.

Three complementary measures:

* continuity fraction: how often consecutive sequence steps move to a
  Manhattan-adjacent cell;
* adjacent index gaps: how far apart in the sequence grid-adjacent cells
  end up (max and mean over all 4-neighbor pairs);
* locality measure: the worst squared-Euclidean distance per unit of
  index separation over cell pairs, a Gotsman-Lindenbaum-style ratio.

All three are exact enumerations at desk scale; the pairwise locality
measure falls back to a fixed-seed uniform pair sample on very large
grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .curves import CurveSpec, ScanOrder, build_order
from .errors import LengthMismatch, ShapeMismatch

# exact O(L^2) pair enumeration up to this many cells, sampling above
EXACT_PAIR_LIMIT = 4096
SAMPLE_PAIRS = 1 << 17
_SAMPLE_SEED = 0

CSV_HEADER = "kind,direction,shift,continuity,max_adj_gap,mean_adj_gap,gl_measure"


def continuity_fraction(order: ScanOrder) -> float:
    """Fraction of the L-1 consecutive steps that are Manhattan-adjacent."""
    if order.length < 2:
        raise LengthMismatch("continuity needs an order with at least 2 cells")
    steps = np.abs(np.diff(order.forward, axis=0)).sum(axis=1)
    return int((steps == 1).sum()) / (order.length - 1)


def adjacent_index_gaps(order: ScanOrder) -> tuple[int, float]:
    """Max and mean |i - j| over all unordered 4-neighbor cell pairs."""
    if order.length < 2:
        raise LengthMismatch("adjacent gaps need an order with at least 2 cells")
    inv = order.inverse
    horizontal = np.abs(inv[:, 1:] - inv[:, :-1]).ravel()
    vertical = np.abs(inv[1:, :] - inv[:-1, :]).ravel()
    gaps = np.concatenate([horizontal, vertical])
    return int(gaps.max()), float(gaps.mean())


def locality_measure(order: ScanOrder) -> float:
    """Worst squaredEuclidean(forward[i], forward[j]) / (j - i) over i < j.

    Exact for orders up to EXACT_PAIR_LIMIT cells.  Above that, a
    fixed-seed uniform sample of SAMPLE_PAIRS index pairs yields a
    deterministic lower bound on the exact value.  Single-cell orders
    return 0 by convention.
    """
    length = order.length
    if length < 2:
        return 0.0
    fwd = order.forward.astype(np.float64)
    if length <= EXACT_PAIR_LIMIT:
        worst = 0.0
        for i in range(length - 1):
            dist2 = ((fwd[i + 1 :] - fwd[i]) ** 2).sum(axis=1)
            gaps = np.arange(1, length - i, dtype=np.float64)
            worst = max(worst, float((dist2 / gaps).max()))
        return worst
    rng = np.random.default_rng(_SAMPLE_SEED)
    i = rng.integers(0, length, SAMPLE_PAIRS)
    j = rng.integers(0, length, SAMPLE_PAIRS)
    keep = i != j
    i, j = i[keep], j[keep]
    dist2 = ((fwd[j] - fwd[i]) ** 2).sum(axis=1)
    return float((dist2 / np.abs(j - i)).max())


@dataclass(frozen=True)
class LocalityReport:
    """Metric bundle for one realized scan order."""

    spec: CurveSpec
    continuity: float
    max_adj_gap: int
    mean_adj_gap: float
    gl_measure: float


def analyze_order(order: ScanOrder) -> LocalityReport:
    max_gap, mean_gap = adjacent_index_gaps(order)
    return LocalityReport(
        spec=order.spec,
        continuity=continuity_fraction(order),
        max_adj_gap=max_gap,
        mean_adj_gap=mean_gap,
        gl_measure=locality_measure(order),
    )


def compare_orders(specs: list[CurveSpec]) -> list[LocalityReport]:
    """One LocalityReport per spec, in the given order.

    All specs must realize to the same grid shape.
    """
    if not specs:
        raise ValueError("at least one curve spec is required")
    orders = [build_order(spec) for spec in specs]
    shapes = {(o.spec.shape.rows, o.spec.shape.cols) for o in orders}
    if len(shapes) > 1:
        raise ShapeMismatch(f"specs cover different shapes: {sorted(shapes)}")
    return [analyze_order(order) for order in orders]


def report_to_dict(report: LocalityReport) -> dict:
    spec = report.spec
    return {
        "kind": spec.kind,
        "direction": spec.direction,
        "shift": spec.shift,
        "continuity": report.continuity,
        "max_adj_gap": report.max_adj_gap,
        "mean_adj_gap": report.mean_adj_gap,
        "gl_measure": report.gl_measure,
    }


def reports_to_csv(reports: list[LocalityReport]) -> bytes:
    rows = [CSV_HEADER]
    for rep in reports:
        spec = rep.spec
        rows.append(
            f"{spec.kind},{spec.direction},{spec.shift},{rep.continuity!r},"
            f"{rep.max_adj_gap},{rep.mean_adj_gap!r},{rep.gl_measure!r}"
        )
    return ("\n".join(rows) + "\n").encode("utf-8")


def reports_to_json(reports: list[LocalityReport]) -> bytes:
    doc = [report_to_dict(rep) for rep in reports]
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")
