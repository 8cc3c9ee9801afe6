"""Nadaraya-Watson regression in the density-sensitive graph metric."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .density import as_point_array, fit_density
from .metric import (
    MetricGraph,
    MetricParams,
    QueryOverlay,
    attach_queries,
    build_graph,
    distance_matrix,
)

__all__ = [
    "LabeledSample",
    "HyperParams",
    "Regressor",
    "fit",
    "fit_supervised",
    "predict",
    "predict_batch",
    "empirical_risk",
    "kernel_average",
]

Fallback = Literal["global_mean", "nearest_label", "error"]
_FALLBACKS = ("global_mean", "nearest_label", "error")
_QKERNELS = ("boxcar", "epanechnikov")


@dataclass(frozen=True)
class LabeledSample:
    xs: np.ndarray
    ys: np.ndarray
    y_bound: float | None = None

    def __post_init__(self):
        xs = as_point_array(self.xs) if len(self.xs) else np.empty((0, 0))
        ys = np.asarray(self.ys, dtype=float).reshape(-1)
        if xs.shape[0] != ys.shape[0]:
            raise ValueError("xs and ys differ in length")
        bound = self.y_bound
        if bound is None:
            bound = float(np.max(np.abs(ys))) if ys.size else 0.0
        elif ys.size and np.max(np.abs(ys)) > bound:
            raise ValueError(f"|y| exceeds y_bound={bound}")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "y_bound", float(bound))

    def __len__(self):
        return self.ys.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    def subset(self, idx) -> "LabeledSample":
        idx = np.asarray(idx, dtype=np.intp)
        return LabeledSample(self.xs[idx], self.ys[idx], self.y_bound)


@dataclass(frozen=True, order=True)
class HyperParams:
    """One grid element: bandwidth ``h``, density sensitivity ``alpha``, KDE bandwidth ``sigma``."""

    h: float
    alpha: float
    sigma: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def sort_key(self):
        return (self.alpha, self.h, self.sigma)


def kernel_average(dist: np.ndarray, ys: np.ndarray, h: float, kernel: str = "boxcar"):
    """Kernel-weighted label average per row of ``dist``.

    Returns ``(values, empty)`` where ``empty`` flags rows with zero total
    weight; their value is NaN.
    """
    u = dist / h
    if kernel == "boxcar":
        w = (u <= 1.0).astype(float)
    elif kernel == "epanechnikov":
        w = np.maximum(0.0, 1.0 - u * u)
    else:
        raise ValueError(f"unknown regression kernel {kernel!r}")
    den = w.sum(axis=1)
    num = w @ ys
    empty = den == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(empty, np.nan, num / np.where(empty, 1.0, den))
    return vals, empty


@dataclass(frozen=True)
class Regressor:
    graph: MetricGraph
    labeled: LabeledSample
    bandwidth: float
    fallback: Fallback = "global_mean"
    kernel: str = "boxcar"
    labeled_nodes: np.ndarray = field(default=None, repr=False)
    source_dist: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if self.fallback not in _FALLBACKS:
            raise ValueError(f"fallback must be one of {_FALLBACKS}")
        if self.kernel not in _QKERNELS:
            raise ValueError(f"kernel must be one of {_QKERNELS}")
        if self.source_dist is None:
            object.__setattr__(self, "source_dist", distance_matrix(self.graph, self.labeled_nodes))
        self.source_dist.setflags(write=False)

    @property
    def alpha(self) -> float:
        return self.graph.params.alpha

    def with_bandwidth(self, h: float) -> "Regressor":
        return replace(self, bandwidth=h)

    def with_alpha(self, alpha: float) -> "Regressor":
        """Same graph topology re-weighted for ``alpha``; distances recomputed."""
        if alpha == self.alpha:
            return self
        return replace(self, graph=self.graph.with_alpha(alpha), source_dist=None)

    def overlay(self, xs) -> QueryOverlay:
        return attach_queries(self.graph, xs)

    def query_distances(self, xs, overlay: QueryOverlay | None = None) -> np.ndarray:
        """Distances from each query to each labeled point, shape (q, n).

        Queries that coincide with a graph node reuse that node's distances.
        """
        xs = _queries(xs, self.graph.dim)
        out = np.empty((xs.shape[0], len(self.labeled)))
        hit = _node_lookup(self.graph, xs)
        on_node = hit >= 0
        if on_node.any():
            out[on_node] = self.source_dist[:, hit[on_node]].T
        if (~on_node).any():
            if overlay is None:
                overlay = attach_queries(self.graph, xs[~on_node])
            else:
                # caller-supplied overlays cover every query
                overlay = overlay.take(~on_node)
            out[~on_node] = overlay.distances(self.source_dist)
        return out

    def combine(self, dist: np.ndarray, h: float | None = None) -> np.ndarray:
        """Predictions from a (q, n) query-to-label distance matrix."""
        h = self.bandwidth if h is None else h
        ys = self.labeled.ys
        vals, empty = kernel_average(dist, ys, h, self.kernel)
        if empty.any():
            if self.fallback == "error":
                raise ValueError("empty kernel neighborhood")
            if self.fallback == "global_mean":
                vals[empty] = ys.mean()
            else:
                vals[empty] = ys[np.argmin(dist[empty], axis=1)]
        return np.clip(vals, ys.min(), ys.max())


def _queries(xs, dim: int) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return np.empty((0, dim))
    if xs.ndim == 1:
        xs = xs[:, None] if dim == 1 else xs[None, :]
    if xs.ndim != 2 or xs.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}-vectors")
    return xs


def _node_lookup(graph: MetricGraph, xs: np.ndarray) -> np.ndarray:
    """Index of the lowest-numbered node equal to each query, or -1."""
    table = getattr(graph, "_node_index", None)
    if table is None:
        table = {}
        for i, row in enumerate(graph.nodes):
            table.setdefault(row.tobytes(), i)
        graph._node_index = table
    return np.array([table.get(np.ascontiguousarray(x).tobytes(), -1) for x in xs], dtype=np.intp)


def _graph_over(density, nodes: np.ndarray, metric_params: MetricParams) -> MetricGraph:
    k = min(metric_params.k_neighbors, nodes.shape[0] - 1)
    if k < 1:
        # a lone node: nothing to connect
        empty = np.empty(0, dtype=np.intp)
        return MetricGraph(np.array(nodes, dtype=float), empty, empty, np.empty(0),
                           metric_params, density)
    return build_graph(density, nodes, replace(metric_params, k_neighbors=k))


def fit(unlabeled, labeled: LabeledSample, params: HyperParams,
        metric_params: MetricParams | None = None, *, density_kernel="boxcar",
        fallback: Fallback = "global_mean", kernel: str = "boxcar") -> Regressor:
    """Fit the semisupervised estimator.

    The density is estimated from ``unlabeled`` with bandwidth
    ``params.sigma``; the graph spans unlabeled and labeled points and uses
    ``params.alpha`` (overriding ``metric_params.alpha``). When the graph has
    fewer than ``k + 1`` nodes, ``k`` is reduced to ``n_nodes - 1``.
    """
    if len(labeled) == 0:
        raise ValueError("no labeled data")
    metric_params = (metric_params or MetricParams()).with_alpha(params.alpha)
    density = fit_density(unlabeled, density_kernel, params.sigma)
    if labeled.dim != density.dim:
        raise ValueError("dimension mismatch between labeled and unlabeled points")
    nodes = np.vstack([density.points, labeled.xs])
    graph = _graph_over(density, nodes, metric_params)
    labeled_nodes = np.arange(density.m, density.m + len(labeled))
    return Regressor(graph, labeled, params.h, fallback, kernel, labeled_nodes)


def fit_supervised(labeled: LabeledSample, params: HyperParams,
                   metric_params: MetricParams | None = None, *, density_kernel="boxcar",
                   fallback: Fallback = "global_mean", kernel: str = "boxcar") -> Regressor:
    """Baseline that never sees unlabeled data: graph and density use labeled points only."""
    if len(labeled) == 0:
        raise ValueError("no labeled data")
    metric_params = (metric_params or MetricParams()).with_alpha(params.alpha)
    density = fit_density(labeled.xs, density_kernel, params.sigma)
    graph = _graph_over(density, labeled.xs, metric_params)
    return Regressor(graph, labeled, params.h, fallback, kernel, np.arange(len(labeled)))


def predict_batch(model: Regressor, xs) -> np.ndarray:
    return model.combine(model.query_distances(xs))


def predict(model: Regressor, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != model.graph.dim:
        raise ValueError(f"dimension mismatch: expected a {model.graph.dim}-vector")
    return float(predict_batch(model, x[None, :])[0])


def empirical_risk(model: Regressor, eval_set: LabeledSample) -> float:
    """Mean squared prediction error over ``eval_set``."""
    if len(eval_set) == 0:
        raise ValueError("empty evaluation set")
    resid = predict_batch(model, eval_set.xs) - eval_set.ys
    return float(np.mean(resid ** 2))
