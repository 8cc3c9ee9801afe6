"""Density-sensitive path metric on a k-nearest-neighbour graph.

Each straight edge ``a -> b`` costs the line integral of
``exp(-alpha * p(x))`` along the segment, approximated by the composite
trapezoid rule. Graph distances are shortest-path sums of these costs,
a polygonal surrogate for the infimum over all curves.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial.distance import cdist

from .density import as_point_array

__all__ = [
    "MetricParams",
    "MetricGraph",
    "PathDistance",
    "edge_weight",
    "build_graph",
    "shortest_distance",
    "distances_from",
    "distance_matrix",
    "QueryOverlay",
    "attach_queries",
]

_DENSITY_CHUNK = 4096


@dataclass(frozen=True)
class MetricParams:
    alpha: float = 0.0
    k_neighbors: int = 20
    quadrature_segments: int = 16

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")
        if int(self.k_neighbors) != self.k_neighbors or self.k_neighbors < 1:
            raise ValueError("k_neighbors must be a positive integer")
        if int(self.quadrature_segments) != self.quadrature_segments or self.quadrature_segments < 1:
            raise ValueError("quadrature_segments must be a positive integer")

    def with_alpha(self, alpha: float) -> "MetricParams":
        return MetricParams(alpha, self.k_neighbors, self.quadrature_segments)


@dataclass(frozen=True)
class PathDistance:
    value: float
    path: list[int] | None

    @property
    def reachable(self) -> bool:
        return self.path is not None


def _segment_samples(a: np.ndarray, b: np.ndarray, segments: int) -> np.ndarray:
    """Equally spaced points on each segment, shape (E, segments + 1, d)."""
    t = np.arange(segments + 1) / segments
    return a[:, None, :] + (b - a)[:, None, :] * t[None, :, None]


def _sample_density(density, a: np.ndarray, b: np.ndarray, segments: int) -> np.ndarray:
    if a.shape[0] == 0:
        return np.empty((0, segments + 1))
    pts = _segment_samples(a, b, segments).reshape(-1, a.shape[1])
    vals = np.concatenate([
        np.asarray(density(pts[s:s + _DENSITY_CHUNK]), dtype=float)
        for s in range(0, pts.shape[0], _DENSITY_CHUNK)
    ])
    return vals.reshape(a.shape[0], segments + 1)


def _trapezoid(lengths: np.ndarray, dens: np.ndarray | None, alpha: float) -> np.ndarray:
    if alpha == 0:
        # integrand is identically one
        return lengths.copy()
    f = np.exp(-alpha * dens)
    segments = f.shape[1] - 1
    inner = f[:, 1:-1].sum(axis=1) if segments > 1 else np.zeros(f.shape[0])
    mean = (0.5 * f[:, 0] + inner + 0.5 * f[:, -1]) / segments
    return lengths * mean


def _lengths(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # one fixed formula for every Euclidean length, so alpha = 0 weights are reproducible bit for bit
    diff = b - a
    return np.sqrt(np.sum(diff * diff, axis=-1))


def edge_weight(density, a, b, alpha: float, segments: int = 16) -> float:
    """Trapezoid approximation of the exponential-metric cost of segment ``a -> b``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != (density.dim,) or b.shape != (density.dim,):
        raise ValueError(f"dimension mismatch: expected {density.dim}-vectors")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if segments < 1:
        raise ValueError("segments must be positive")
    length = _lengths(a[None], b[None])
    if length[0] == 0:
        return 0.0
    dens = None if alpha == 0 else _sample_density(density, a[None], b[None], segments)
    return float(_trapezoid(length, dens, alpha)[0])


class MetricGraph:
    """Undirected kNN graph with density-weighted edges.

    Edges are stored once with ``edge_i < edge_j``; :attr:`adjacency` and
    :attr:`csr` expose both directions. The per-edge density samples are kept
    so that :meth:`with_alpha` can re-weight the same topology cheaply.
    """

    def __init__(self, nodes, edge_i, edge_j, lengths, params: MetricParams, density,
                 samples: np.ndarray | None = None, n_bridges: int = 0):
        self.nodes = nodes
        self.edge_i = edge_i
        self.edge_j = edge_j
        self.lengths = lengths
        self.params = params
        self.density = density
        self.n_bridges = n_bridges
        self._samples = samples
        if params.alpha > 0 and samples is None:
            self._samples = _sample_density(density, nodes[edge_i], nodes[edge_j],
                                            params.quadrature_segments)
        self.weights = _trapezoid(lengths, self._samples, params.alpha)
        self._csr = None
        self._adjacency = None

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edge_i.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def with_alpha(self, alpha: float) -> "MetricGraph":
        """Same nodes and edges, weights recomputed for a new ``alpha``."""
        params = self.params.with_alpha(alpha)
        samples = self._samples
        if alpha > 0 and samples is None:
            samples = _sample_density(self.density, self.nodes[self.edge_i],
                                      self.nodes[self.edge_j], params.quadrature_segments)
            self._samples = samples
        return MetricGraph(self.nodes, self.edge_i, self.edge_j, self.lengths, params,
                           self.density, samples, self.n_bridges)

    @property
    def csr(self) -> csr_matrix:
        if self._csr is None:
            n = self.n_nodes
            rows = np.concatenate([self.edge_i, self.edge_j])
            cols = np.concatenate([self.edge_j, self.edge_i])
            data = np.concatenate([self.weights, self.weights])
            # explicit zeros (coincident nodes) must stay as edges
            self._csr = csr_matrix((data, (rows, cols)), shape=(n, n))
        return self._csr

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        if self._adjacency is None:
            adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n_nodes)]
            for i, j, w in zip(self.edge_i.tolist(), self.edge_j.tolist(), self.weights.tolist()):
                adj[i].append((j, w))
                adj[j].append((i, w))
            for row in adj:
                row.sort()
            self._adjacency = adj
        return self._adjacency

    def weight(self, i: int, j: int) -> float | None:
        for k, w in self.adjacency[i]:
            if k == j:
                return w
        return None

    def __repr__(self):
        return (f"MetricGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges}, "
                f"alpha={self.params.alpha}, k={self.params.k_neighbors})")


def _knn(nodes: np.ndarray, k: int, dist: np.ndarray | None = None) -> np.ndarray:
    """Indices of the k nearest other nodes per row; ties go to the smaller index."""
    if dist is None:
        dist = cdist(nodes, nodes)
    d = dist.copy()
    np.fill_diagonal(d, np.inf)
    return np.argsort(d, axis=1, kind="stable")[:, :k]


def _bridges(dist: np.ndarray, labels: np.ndarray, n_comp: int) -> list[tuple[int, int]]:
    """Minimum-length edges joining the components into one spanning tree (Kruskal)."""
    best: dict[tuple[int, int], tuple[float, int, int]] = {}
    members = [np.flatnonzero(labels == c) for c in range(n_comp)]
    for a in range(n_comp):
        for b in range(a + 1, n_comp):
            sub = dist[np.ix_(members[a], members[b])]
            flat = int(np.argmin(sub))
            r, c = divmod(flat, sub.shape[1])
            i, j = int(members[a][r]), int(members[b][c])
            best[(a, b)] = (float(sub[r, c]), min(i, j), max(i, j))
    parent = list(range(n_comp))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = []
    for (a, b), (_, i, j) in sorted(best.items(), key=lambda kv: kv[1]):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            out.append((i, j))
    return out


def build_graph(density, nodes, params: MetricParams) -> MetricGraph:
    """Build the symmetrised kNN graph over ``nodes`` with density-weighted edges.

    Directed kNN edges are united into an undirected edge set. Disconnected
    pieces are joined by the shortest Euclidean bridges along a minimum
    spanning tree over components, so every pair of nodes is reachable.
    """
    nodes = as_point_array(nodes)
    if nodes.shape[0] == 0:
        raise ValueError("no nodes")
    if nodes.shape[1] != density.dim:
        raise ValueError(f"dimension mismatch: expected {density.dim}-vectors")
    n = nodes.shape[0]
    k = params.k_neighbors
    if k >= n:
        raise ValueError(f"k too large: k_neighbors={k} with {n} nodes")
    nodes = np.array(nodes, dtype=float)
    nodes.setflags(write=False)

    dist = cdist(nodes, nodes)
    nbrs = _knn(nodes, k, dist)
    src = np.repeat(np.arange(n), k)
    dst = nbrs.ravel()
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)

    adj = csr_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    n_comp, labels = connected_components(adj, directed=False)
    bridges = _bridges(dist, labels, n_comp) if n_comp > 1 else []
    if bridges:
        pairs = np.unique(np.vstack([pairs, np.array(bridges)]), axis=0)

    edge_i = pairs[:, 0].astype(np.intp)
    edge_j = pairs[:, 1].astype(np.intp)
    lengths = _lengths(nodes[edge_i], nodes[edge_j])
    return MetricGraph(nodes, edge_i, edge_j, lengths, params, density, n_bridges=len(bridges))


def shortest_distance(graph: MetricGraph, source: int, target: int) -> PathDistance:
    """Heap-based Dijkstra with path recovery.

    Among equal-cost routes the predecessor with the smaller index wins, so
    the returned path is deterministic.
    """
    n = graph.n_nodes
    if not (0 <= source < n and 0 <= target < n):
        raise IndexError("node index out of range")
    adj = graph.adjacency
    dist = [float("inf")] * n
    pred = [-1] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            break
        for v, w in adj[u]:
            if done[v]:
                continue
            nd = d + w
            if nd < dist[v] or (nd == dist[v] and u < pred[v]):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    if dist[target] == float("inf"):
        return PathDistance(float("inf"), None)
    path = [target]
    while path[-1] != source:
        path.append(pred[path[-1]])
    return PathDistance(dist[target], path[::-1])


def distances_from(graph: MetricGraph, source: int) -> np.ndarray:
    """Single-source shortest-path distances to every node."""
    if not 0 <= source < graph.n_nodes:
        raise IndexError("node index out of range")
    return distance_matrix(graph, [source])[0]


def distance_matrix(graph: MetricGraph, sources: Sequence[int] | None = None) -> np.ndarray:
    """Rows of shortest-path distances, one per source (all nodes by default)."""
    if sources is None:
        sources = np.arange(graph.n_nodes)
    sources = np.asarray(sources, dtype=np.intp)
    if sources.size == 0:
        return np.empty((0, graph.n_nodes))
    return dijkstra(graph.csr, directed=True, indices=sources)


@dataclass(frozen=True)
class QueryOverlay:
    """Private edges from query points to their nearest existing graph nodes.

    The graph itself is never modified. Density samples along the overlay
    edges are kept so :meth:`with_alpha` can re-weight without re-sampling.
    """

    neighbors: np.ndarray  # (q, k) node indices
    lengths: np.ndarray  # (q, k) Euclidean edge lengths
    weights: np.ndarray  # (q, k) edge costs at ``alpha``
    alpha: float
    samples: np.ndarray | None = None  # (q * k, segments + 1) or None when never needed
    graph: MetricGraph | None = None
    xs: np.ndarray | None = None

    def __len__(self):
        return self.neighbors.shape[0]

    def take(self, mask) -> "QueryOverlay":
        mask = np.asarray(mask)
        rows = np.flatnonzero(mask) if mask.dtype == bool else mask
        samples = None
        if self.samples is not None:
            k = self.neighbors.shape[1]
            samples = self.samples.reshape(len(self), k, -1)[rows].reshape(len(rows) * k, -1)
        return QueryOverlay(self.neighbors[rows], self.lengths[rows], self.weights[rows],
                            self.alpha, samples, self.graph,
                            None if self.xs is None else self.xs[rows])

    def with_alpha(self, alpha: float) -> "QueryOverlay":
        if alpha == self.alpha:
            return self
        samples = self.samples
        if alpha > 0 and samples is None:
            samples = self._sample()
        w = _overlay_weights(self.lengths, samples, alpha)
        return QueryOverlay(self.neighbors, self.lengths, w, alpha, samples, self.graph, self.xs)

    def _sample(self) -> np.ndarray:
        k = self.neighbors.shape[1]
        a = np.repeat(self.xs, k, axis=0)
        b = self.graph.nodes[self.neighbors.ravel()]
        return _sample_density(self.graph.density, a, b, self.graph.params.quadrature_segments)

    def distances(self, node_dist: np.ndarray) -> np.ndarray:
        """Query-to-source distances given node-to-source distances.

        ``node_dist`` has shape (s, n_nodes); the result has shape (q, s).
        A shortest path from a query leaves through one of its overlay edges
        and then stays in the base graph.
        """
        if len(self) == 0:
            return np.empty((0, node_dist.shape[0]))
        via = self.weights[:, :, None] + node_dist.T[self.neighbors]
        return via.min(axis=1)


def _overlay_weights(lengths: np.ndarray, samples: np.ndarray | None, alpha: float) -> np.ndarray:
    w = _trapezoid(lengths.ravel(), samples, alpha).reshape(lengths.shape)
    w[lengths == 0] = 0.0
    return w


def attach_queries(graph: MetricGraph, xs) -> QueryOverlay:
    """Connect each query to its ``k`` nearest graph nodes without touching the graph."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        empty = np.empty((0, 0))
        return QueryOverlay(empty.astype(np.intp), empty, empty, graph.params.alpha,
                            None, graph, np.empty((0, graph.dim)))
    if xs.ndim == 1:
        xs = xs[None, :] if graph.dim > 1 or xs.shape[0] == 1 else xs[:, None]
    if xs.shape[1] != graph.dim:
        raise ValueError(f"dimension mismatch: expected {graph.dim}-vectors")
    k = min(graph.params.k_neighbors, graph.n_nodes)
    nbrs = np.argsort(cdist(xs, graph.nodes), axis=1, kind="stable")[:, :k]
    a = np.repeat(xs, k, axis=0)
    b = graph.nodes[nbrs.ravel()]
    lengths = _lengths(a, b).reshape(nbrs.shape)
    alpha = graph.params.alpha
    samples = None
    if alpha > 0:
        samples = _sample_density(graph.density, a, b, graph.params.quadrature_segments)
    return QueryOverlay(nbrs, lengths, _overlay_weights(lengths, samples, alpha), alpha,
                        samples, graph, xs)
