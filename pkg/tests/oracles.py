"""Slow, independent reference implementations used only by the tests."""
from __future__ import annotations

import math
from itertools import permutations

import numpy as np


def literal_kde(points, x, sigma, profile):
    """Term-by-term average of sigma^-d K(|x - X_i| / sigma)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x = np.asarray(x, dtype=float)
    d = points.shape[1]
    total = 0.0
    for p in points:
        u = math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(x, p))) / sigma
        total += profile(u) / sigma ** d
    return total / len(points)


def boxcar(u):
    return 1.0 if u <= 1.0 else 0.0


def epanechnikov(u):
    return max(0.0, 1.0 - u * u)


def fine_quadrature(fn, a, b, n=1_000_000):
    """Trapezoid rule of ``fn`` over the segment a -> b with ``n`` pieces, times its length."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    t = np.linspace(0.0, 1.0, n + 1)
    vals = fn(a[None, :] + t[:, None] * (b - a)[None, :])
    mean = (vals.sum() - 0.5 * vals[0] - 0.5 * vals[-1]) / n
    return float(np.linalg.norm(b - a) * mean)


def brute_knn_pairs(nodes, k):
    """Undirected edge set of the union of directed kNN edges, ties by index."""
    nodes = np.asarray(nodes, float)
    n = len(nodes)
    pairs = set()
    for i in range(n):
        cand = sorted((float(np.linalg.norm(nodes[i] - nodes[j])), j) for j in range(n) if j != i)
        for _, j in cand[:k]:
            pairs.add((min(i, j), max(i, j)))
    return pairs


def all_simple_path_distances(n, edges):
    """Minimum weight over every simple path between every pair (inf when none)."""
    adj = {i: {} for i in range(n)}
    for i, j, w in edges:
        adj[i][j] = min(w, adj[i].get(j, math.inf))
        adj[j][i] = adj[i][j]
    best = np.full((n, n), math.inf)
    np.fill_diagonal(best, 0.0)

    def walk(start, node, seen, acc):
        for nxt, w in adj[node].items():
            if nxt in seen:
                continue
            total = acc + w
            if total < best[start, nxt]:
                best[start, nxt] = total
            walk(start, nxt, seen | {nxt}, total)

    for s in range(n):
        walk(s, s, {s}, 0.0)
    return best


def floyd_warshall(n, edges):
    d = np.full((n, n), math.inf)
    np.fill_diagonal(d, 0.0)
    for i, j, w in edges:
        d[i, j] = min(d[i, j], w)
        d[j, i] = min(d[j, i], w)
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def loop_predict(dist_row, ys, h):
    """Boxcar Nadaraya-Watson for one query, global-mean fallback, written as a plain loop."""
    num = den = 0.0
    for d, y in zip(dist_row, ys):
        if d <= h:
            num += y
            den += 1.0
    if den == 0:
        return float(sum(ys) / len(ys))
    return num / den


def segment_distance(pts, lo, hi, axis_point):
    """Distance from points to the segment [lo, hi] x {axis_point} along the first axis."""
    pts = np.asarray(pts, float)
    proj = np.clip(pts[:, 0], lo, hi)
    rest = pts[:, 1:] - axis_point
    return np.sqrt((pts[:, 0] - proj) ** 2 + (rest ** 2).sum(axis=1))


def ks_uniform(samples, lo, hi):
    """Kolmogorov-Smirnov statistic against Uniform(lo, hi), computed from the sorted sample."""
    u = np.sort((np.asarray(samples) - lo) / (hi - lo))
    n = len(u)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


__all__ = [name for name in dir() if not name.startswith("_") and name not in ("math", "np", "permutations")]
