"""Greedy covering numbers in the graph metric and their growth exponent."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .metric import MetricGraph

__all__ = ["CoverReport", "greedy_cover", "exponent_sweep", "write_cover_csv"]


@dataclass(frozen=True)
class CoverReport:
    radius: float
    count: int
    centers: list[int]
    exponent_fit: float | None = None
    sweep: list[tuple[float, int]] = field(default_factory=list)


def greedy_cover(graph: MetricGraph, radius: float) -> CoverReport:
    """Cover the nodes with graph-metric balls of ``radius``.

    The lowest-index uncovered node becomes the next center. Centers end up
    pairwise farther apart than ``radius``, so the count is also a packing
    number and sits between the covering numbers at ``radius`` and
    ``radius / 2``.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    n = graph.n_nodes
    if n == 0:
        raise ValueError("empty graph")
    covered = np.zeros(n, dtype=bool)
    centers: list[int] = []
    csr = graph.csr
    nxt = 0
    while nxt < n:
        centers.append(nxt)
        reach = dijkstra(csr, directed=True, indices=nxt, limit=radius)
        covered |= reach <= radius
        rest = np.flatnonzero(~covered[nxt:])
        nxt = nxt + int(rest[0]) if rest.size else n
    return CoverReport(float(radius), len(centers), centers)


def exponent_sweep(graph: MetricGraph, radii: Sequence[float]) -> CoverReport:
    """Fit the slope of log(count) against log(1/radius) over a radius sweep.

    Needs at least three distinct radii spanning a factor of ten or more.
    The returned report describes the smallest radius and carries the whole
    sweep.
    """
    radii = sorted({float(r) for r in radii})
    if len(radii) < 3 or radii[0] <= 0 or radii[-1] / radii[0] < 10:
        raise ValueError("degenerate sweep: need >= 3 positive radii spanning a decade")
    reports = [greedy_cover(graph, r) for r in radii]
    x = np.log(1.0 / np.array(radii))
    y = np.log([rep.count for rep in reports])
    slope = float(np.polyfit(x, y, 1)[0])
    first = reports[0]
    return CoverReport(first.radius, first.count, first.centers, slope,
                       [(rep.radius, rep.count) for rep in reports])


def write_cover_csv(report: CoverReport, path) -> Path:
    path = Path(path)
    rows = report.sweep or [(report.radius, report.count)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["radius", "count"])
        for r, c in rows:
            w.writerow([f"{r:.12g}", c])
    return path
