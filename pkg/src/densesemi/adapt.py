"""Choosing (h, alpha, sigma) on a held-out validation split."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Literal, Sequence

import numpy as np

from .metric import MetricParams, attach_queries
from .regress import HyperParams, LabeledSample, Regressor, fit, fit_supervised, kernel_average

__all__ = [
    "HyperParams",
    "ParamGrid",
    "CvReport",
    "split",
    "select",
    "oracle_gap",
    "geometric_grid",
    "default_grid",
]


def _check_list(name: str, values: Sequence[float], positive: bool) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ValueError(f"{name} must be nonempty")
    if len(set(vals)) != len(vals):
        raise ValueError(f"{name} contains duplicates")
    bad = [v for v in vals if not (v > 0 if positive else v >= 0)]
    if bad:
        raise ValueError(f"{name} has invalid entries {bad}")
    return vals


@dataclass(frozen=True)
class ParamGrid:
    """Finite grid over bandwidths, density sensitivities and KDE bandwidths.

    With ``h_scale="diameter"`` the ``hs`` are multipliers of the largest
    finite distance in the fitted metric graph (recomputed for every
    ``(alpha, sigma)``), which keeps one grid meaningful across alphas whose
    distance scales differ by orders of magnitude.
    """

    hs: tuple[float, ...]
    alphas: tuple[float, ...]
    sigmas: tuple[float, ...]
    h_scale: Literal["absolute", "diameter"] = "absolute"

    def __post_init__(self):
        object.__setattr__(self, "hs", _check_list("hs", self.hs, True))
        object.__setattr__(self, "alphas", _check_list("alphas", self.alphas, False))
        object.__setattr__(self, "sigmas", _check_list("sigmas", self.sigmas, True))
        if self.h_scale not in ("absolute", "diameter"):
            raise ValueError("h_scale must be 'absolute' or 'diameter'")

    @property
    def size(self) -> int:
        return len(self.hs) * len(self.alphas) * len(self.sigmas)

    def __iter__(self):
        for sigma, alpha, h in product(self.sigmas, self.alphas, self.hs):
            yield HyperParams(h, alpha, sigma)


def geometric_grid(lo: float, hi: float, num: int) -> tuple[float, ...]:
    if num == 1:
        return (float(lo),)
    return tuple(float(v) for v in np.geomspace(lo, hi, num))


def default_grid(euclidean_diameter: float = 1.0) -> ParamGrid:
    """alphas {0, 1, 2, 4, 8, 16}; 8 geometric h in [0.01, 2] and sigma in {0.05, 0.1, 0.2}, both times the diameter."""
    s = float(euclidean_diameter)
    if not s > 0:
        raise ValueError("diameter must be positive")
    return ParamGrid(tuple(h * s for h in geometric_grid(0.01, 2.0, 8)),
                     (0.0, 1.0, 2.0, 4.0, 8.0, 16.0),
                     (0.05 * s, 0.1 * s, 0.2 * s))


@dataclass(frozen=True)
class CvReport:
    selected: HyperParams
    table: list[tuple[HyperParams, float]] = field(repr=False)
    split_seed: int

    @property
    def selected_risk(self) -> float:
        return dict(self.table)[self.selected]

    def risks(self) -> dict[HyperParams, float]:
        return dict(self.table)


def split(labeled: LabeledSample, seed: int) -> tuple[LabeledSample, LabeledSample]:
    """Random split into a training part of size ceil(n/2) and a validation part."""
    n = len(labeled)
    if n < 2:
        raise ValueError("cannot split: need at least 2 labeled points")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = math.ceil(n / 2)
    return labeled.subset(np.sort(perm[:n_train])), labeled.subset(np.sort(perm[n_train:]))


def argmin_theta(table: Iterable[tuple[HyperParams, float]]) -> HyperParams:
    """Lowest risk; ties go to the smaller alpha, then h, then sigma."""
    return min(table, key=lambda row: (row[1], row[0].sort_key()))[0]


def _finite_max(dist: np.ndarray) -> float:
    finite = dist[np.isfinite(dist)]
    return float(finite.max()) if finite.size else 0.0


def metric_diameter(model: Regressor) -> float:
    """Largest finite graph distance between any labeled point and any node."""
    return _finite_max(model.source_dist)


def select(unlabeled, labeled: LabeledSample, grid: ParamGrid,
           metric_params: MetricParams | None = None, seed: int = 0, *,
           density_kernel="boxcar", fallback="global_mean", kernel="boxcar",
           supervised: bool = False) -> CvReport:
    """Fit one estimator per grid element on the training split, keep the best on validation.

    With ``supervised=True`` the estimators ignore ``unlabeled`` and build
    their graph and density from the training points alone.

    Fits that share ``sigma`` share the graph topology and density samples;
    fits that share ``(alpha, sigma)`` share all shortest-path work, so the
    cost is dominated by ``len(sigmas) * len(alphas)`` Dijkstra sweeps.
    """
    train, valid = split(labeled, seed)
    metric_params = metric_params or MetricParams()
    table: list[tuple[HyperParams, float]] = []
    for sigma in grid.sigmas:
        first = HyperParams(grid.hs[0] if grid.h_scale == "absolute" else 1.0, grid.alphas[0], sigma)
        try:
            opts = dict(density_kernel=density_kernel, fallback=fallback, kernel=kernel)
            if supervised:
                base = fit_supervised(train, first, metric_params, **opts)
            else:
                base = fit(unlabeled, train, first, metric_params, **opts)
        except ValueError as exc:
            raise ValueError(f"fit failed for sigma={sigma}: {exc}") from exc
        overlay = attach_queries(base.graph, valid.xs)
        for alpha in grid.alphas:
            try:
                model = base.with_alpha(alpha)
                dist = model.query_distances(valid.xs, overlay.with_alpha(alpha))
            except ValueError as exc:
                raise ValueError(f"fit failed for alpha={alpha}, sigma={sigma}: {exc}") from exc
            scale = 1.0 if grid.h_scale == "absolute" else metric_diameter(model)
            for h_rel in grid.hs:
                h = h_rel * scale if scale > 0 else h_rel
                preds = model.combine(dist, h)
                risk = float(np.mean((preds - valid.ys) ** 2))
                table.append((HyperParams(h, alpha, sigma), risk))
    return CvReport(argmin_theta(table), table, seed)


def oracle_gap(report: CvReport, truth_risks) -> float:
    """Excess risk of the selected element minus the best excess risk over the grid."""
    truth = dict(truth_risks)
    missing = [theta for theta, _ in report.table if theta not in truth]
    if missing:
        raise ValueError(f"truth_risks missing {len(missing)} grid elements, e.g. {missing[0]}")
    best = min(truth[theta] for theta, _ in report.table)
    return float(truth[report.selected] - best)


__all__ += ["argmin_theta", "metric_diameter", "kernel_average"]
