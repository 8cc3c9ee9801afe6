"""Compact-support kernel density estimation of the smoothed marginal.

The estimate at ``x`` is the plain average

    p(x) = (1 / m) * sum_i sigma**-d * K(||x - X_i|| / sigma)

over the ``m`` reference points. ``K`` is a radial profile with compact
support and is *not* normalised to integrate to one. Reference points
outside the support ball of a query are skipped with a KD-tree; the
remaining terms are summed exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "SmoothingKernel",
    "DensityModel",
    "KERNELS",
    "register_kernel",
    "get_kernel",
    "fit_density",
    "evaluate",
    "evaluate_batch",
]


@dataclass(frozen=True)
class SmoothingKernel:
    """Radial kernel profile ``K(u)`` for ``u >= 0``, zero beyond ``support_radius``."""

    name: str
    profile: Callable[[np.ndarray], np.ndarray]
    support_radius: float = 1.0

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.asarray(self.profile(u), dtype=float)
        return np.where(u > self.support_radius, 0.0, out)


def _boxcar(u):
    return (u <= 1.0).astype(float)


def _epanechnikov(u):
    return np.maximum(0.0, 1.0 - u * u)


KERNELS: dict[str, SmoothingKernel] = {}


def register_kernel(kernel: SmoothingKernel, n_check: int = 1001) -> SmoothingKernel:
    """Add ``kernel`` to the registry after checking it is a valid profile.

    The profile must be nonnegative and nonincreasing on
    ``[0, support_radius]``; this is checked on ``n_check`` grid points.
    """
    if not kernel.support_radius > 0:
        raise ValueError("support_radius must be positive")
    grid = np.linspace(0.0, kernel.support_radius, n_check)
    vals = kernel(grid)
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ValueError(f"kernel {kernel.name!r} has negative or non-finite values")
    if np.any(np.diff(vals) > 0):
        raise ValueError(f"kernel {kernel.name!r} is not nonincreasing")
    KERNELS[kernel.name] = kernel
    return kernel


BOXCAR = register_kernel(SmoothingKernel("boxcar", _boxcar, 1.0))
EPANECHNIKOV = register_kernel(SmoothingKernel("epanechnikov", _epanechnikov, 1.0))


def get_kernel(kernel: str | SmoothingKernel) -> SmoothingKernel:
    if isinstance(kernel, SmoothingKernel):
        return kernel
    try:
        return KERNELS[kernel]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; known: {sorted(KERNELS)}") from None


def _as_points(points) -> np.ndarray:
    """Coerce a list of vectors to an (m, d) float array, rejecting ragged input."""
    if isinstance(points, np.ndarray):
        arr = points.astype(float, copy=False)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("dimension mismatch")
        return arr
    rows = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
    if not rows:
        return np.empty((0, 0))
    dims = {r.shape for r in rows}
    if len(dims) != 1 or rows[0].ndim != 1:
        raise ValueError("dimension mismatch")
    return np.vstack(rows)


@dataclass(frozen=True)
class DensityModel:
    kernel: SmoothingKernel
    sigma: float
    points: np.ndarray = field(repr=False)
    dim: int
    _tree: cKDTree = field(default=None, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def support(self) -> float:
        """Radius beyond which a single reference point contributes nothing."""
        return self.sigma * self.kernel.support_radius

    def __call__(self, xs):
        return evaluate_batch(self, xs)


def fit_density(points, kernel: str | SmoothingKernel = "boxcar", sigma: float = 0.1) -> DensityModel:
    """Fit the kernel density estimate on the unlabeled ``points``.

    Raises ``ValueError`` for an empty point set ("no unlabeled data"),
    ragged input ("dimension mismatch") or ``sigma <= 0`` ("invalid bandwidth").
    """
    arr = _as_points(points)
    if arr.shape[0] == 0:
        raise ValueError("no unlabeled data")
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValueError("invalid bandwidth")
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return DensityModel(get_kernel(kernel), float(sigma), arr, arr.shape[1], cKDTree(arr))


def _query_array(model: DensityModel, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return np.empty((0, model.dim))
    if xs.ndim == 1:
        xs = xs[:, None] if model.dim == 1 else xs[None, :]
    if xs.ndim != 2 or xs.shape[1] != model.dim:
        raise ValueError(f"dimension mismatch: expected {model.dim}-vectors")
    return xs


def _profile_sums(model: DensityModel, xs: np.ndarray) -> np.ndarray:
    """Sum of kernel profile values per query, over reference points in the support ball.

    Pairs are visited in (query, reference) order, so a row's sum does not
    depend on which other queries share the batch.
    """
    out = np.zeros(xs.shape[0])
    reach = model.support * (1.0 + 1e-9) + 1e-300
    pairs = cKDTree(xs).sparse_distance_matrix(model._tree, reach, output_type="coo_matrix").tocsr()
    pairs.sort_indices()
    if pairs.nnz == 0:
        return out
    vals = model.kernel(pairs.data / model.sigma)
    starts = pairs.indptr[:-1]
    hit = np.flatnonzero(np.diff(pairs.indptr) > 0)
    out[hit] = np.add.reduceat(vals, starts[hit])
    return out


def evaluate_batch(model: DensityModel, xs) -> np.ndarray:
    """Density at every row of ``xs``; elementwise equal to :func:`evaluate`."""
    xs = _query_array(model, xs)
    if xs.shape[0] == 0:
        return np.empty(0)
    return _profile_sums(model, xs) / (model.m * model.sigma ** model.dim)


def evaluate(model: DensityModel, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != model.dim:
        raise ValueError(f"dimension mismatch: expected a {model.dim}-vector")
    return float(evaluate_batch(model, x[None, :])[0])


def as_point_array(points: Sequence) -> np.ndarray:
    """Public wrapper used by the other modules to normalise point lists."""
    return _as_points(points)
