"""Synthetic data: a swiss roll, the tendril family, and simple supports."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable

import numpy as np

from .regress import LabeledSample

__all__ = [
    "Dataset",
    "SwissRollConfig",
    "TendrilConfig",
    "PointMasses",
    "SegmentTube",
    "swiss_roll",
    "tendril_sample",
    "atoms_and_tubes",
    "tendril_support_distance",
    "tendril_component",
    "write_dataset_csv",
    "read_dataset_csv",
    "read_dataset_table",
]


@dataclass(frozen=True)
class Dataset:
    """Points in original draw order plus the labeled/unlabeled partition.

    ``truth_values`` holds the regression function at every point (exact,
    from the latent draw), ``truth`` evaluates it at arbitrary locations.
    """

    points: np.ndarray
    ys: np.ndarray  # NaN where unlabeled
    is_labeled: np.ndarray
    truth_values: np.ndarray
    truth: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    y_bound: float | None = None
    latent: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def unlabeled(self) -> np.ndarray:
        return self.points[~self.is_labeled]

    @property
    def labeled(self) -> LabeledSample:
        return LabeledSample(self.points[self.is_labeled], self.ys[self.is_labeled], self.y_bound)

    @property
    def n_total(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _label(rng: np.random.Generator, n_total: int, n_labeled: int) -> np.ndarray:
    # drawn as a full permutation so nested label sets share a prefix
    perm = rng.permutation(n_total)
    mask = np.zeros(n_total, dtype=bool)
    mask[perm[:n_labeled]] = True
    return mask


# --- swiss roll -----------------------------------------------------------

@dataclass(frozen=True)
class SwissRollConfig:
    """Swiss roll: a spiral in the (x_1, x_3) plane swept along a height axis x_2.

    ``height=0`` drops the height axis and gives a planar spiral in two
    dimensions. Coordinates are scaled so the roll fits the unit cube
    (jitter aside).
    """

    n_total: int = 400
    t_range: tuple[float, float] = (1.5 * math.pi, 4.5 * math.pi)
    jitter_sd: float = 0.01
    noise_sd: float = 0.05
    height: float = 1.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.t_range
        if not hi > lo:
            raise ValueError("t_range must be a nonempty interval")
        if self.jitter_sd < 0 or self.noise_sd < 0:
            raise ValueError("standard deviations must be nonnegative")
        if not 0 <= self.height <= 1:
            raise ValueError("height must lie in [0, 1]")
        if self.n_total < 1:
            raise ValueError("n_total must be positive")

    @property
    def dim(self) -> int:
        return 3 if self.height > 0 else 2

    @property
    def scale(self) -> float:
        """Divisor that maps the spiral into the unit square (before centring)."""
        return 2.0 * max(abs(self.t_range[0]), abs(self.t_range[1]))

    def embed(self, t, u=None) -> np.ndarray:
        """Map angles ``t`` (and heights ``u`` in [0, 1]) to points."""
        t = np.asarray(t, dtype=float)
        a = 0.5 + t * np.cos(t) / self.scale
        b = 0.5 + t * np.sin(t) / self.scale
        if self.dim == 2:
            return np.stack([a, b], axis=-1)
        u = np.zeros_like(t) if u is None else np.asarray(u, dtype=float)
        return np.stack([a, self.height * u, b], axis=-1)

    def response(self, t) -> np.ndarray:
        lo, hi = self.t_range
        return (np.asarray(t, dtype=float) - lo) / (hi - lo)


def _spiral_truth(config: SwissRollConfig, resolution: int = 20001):
    ts = np.linspace(*config.t_range, resolution)
    curve = config.embed(ts)[:, [0, -1]]

    def truth(xs):
        # nearest spiral angle, ignoring the height axis
        xs = np.atleast_2d(np.asarray(xs, dtype=float))[:, [0, -1]]
        d2 = ((xs[:, None, :] - curve[None, :, :]) ** 2).sum(axis=2)
        return config.response(ts[np.argmin(d2, axis=1)])

    return truth


def swiss_roll(config: SwissRollConfig, n_labeled: int) -> Dataset:
    """Swiss roll with response equal to the normalised spiral angle.

    Draw order is fixed (angles, heights, jitter, response noise, label
    permutation), so the same seed with different ``n_labeled`` gives the
    same points and nested labeled subsets.
    """
    if not 0 <= n_labeled <= config.n_total:
        raise ValueError(f"n_labeled={n_labeled} must lie in [0, n_total={config.n_total}]")
    rng = np.random.default_rng(config.seed)
    n = config.n_total
    t = rng.uniform(*config.t_range, size=n)
    u = rng.uniform(0.0, 1.0, size=n)
    points = config.embed(t, u) + rng.normal(0.0, config.jitter_sd, size=(n, config.dim))
    truth_values = config.response(t)
    noise = rng.normal(0.0, config.noise_sd, size=n)
    mask = _label(rng, n, n_labeled)
    ys = np.where(mask, truth_values + noise, np.nan)
    return Dataset(points, ys, mask, truth_values, _spiral_truth(config), latent=t)


# --- tendrils -------------------------------------------------------------

@dataclass(frozen=True)
class TendrilConfig:
    """Two opposite cube faces joined by one-dimensional tendrils.

    Tendril ``j`` sits at horizontal position ``s_j * epsilon`` for
    ``s_j`` in ``{0, ..., 1/epsilon - 1}^(d-1)`` (lexicographic order) and is
    attached to the top face when ``omega[j] == 1``, else to the bottom.
    """

    dim: int = 4
    epsilon: float = 0.25
    omega: tuple[int, ...] | None = None
    lipschitz: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        inv = 1.0 / self.epsilon
        if abs(inv - round(inv)) > 1e-9:
            raise ValueError("1/epsilon must be an integer")
        if self.lipschitz <= 0:
            raise ValueError("lipschitz must be positive")
        q = self.q
        if self.omega is None:
            object.__setattr__(self, "omega", tuple(j % 2 for j in range(q)))
        elif len(self.omega) != q or any(b not in (0, 1) for b in self.omega):
            raise ValueError(f"omega must be a bit vector of length q={q}")

    @property
    def per_axis(self) -> int:
        return int(round(1.0 / self.epsilon))

    @property
    def q(self) -> int:
        return self.per_axis ** (self.dim - 1)

    @property
    def positions(self) -> np.ndarray:
        """Horizontal coordinates of every tendril, shape (q, d - 1)."""
        grid = product(range(self.per_axis), repeat=self.dim - 1)
        return np.array(list(grid), dtype=float) * self.epsilon

    @property
    def high_value(self) -> float:
        return self.lipschitz * self.epsilon / 8.0


def _face_distance(xs: np.ndarray, height: float) -> np.ndarray:
    out = np.maximum(0.0, np.maximum(-xs[:, :-1], xs[:, :-1] - 1.0))
    return np.sqrt((out ** 2).sum(axis=1) + (xs[:, -1] - height) ** 2)


def _tendril_distances(config: TendrilConfig, xs) -> tuple[np.ndarray, np.ndarray]:
    """Distances to the top face, bottom face, and each extended tendril."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    eps = config.epsilon
    pos = config.positions
    omega = np.asarray(config.omega)
    lo = np.where(omega == 1, eps, 0.0)
    hi = np.where(omega == 1, 1.0, 1.0 - eps)
    horiz = ((xs[:, None, :-1] - pos[None, :, :]) ** 2).sum(axis=2)
    z = xs[:, -1:]
    vert = np.maximum(0.0, np.maximum(lo[None, :] - z, z - hi[None, :]))
    tend = np.sqrt(horiz + vert ** 2)
    faces = np.stack([_face_distance(xs, 1.0), _face_distance(xs, 0.0)], axis=1)
    return faces, tend


def tendril_support_distance(config: TendrilConfig, xs) -> np.ndarray:
    faces, tend = _tendril_distances(config, xs)
    return np.minimum(faces.min(axis=1), tend.min(axis=1))


def tendril_component(config: TendrilConfig, xs) -> np.ndarray:
    """1 for the component holding the top face, 0 for the other (nearest piece wins)."""
    faces, tend = _tendril_distances(config, xs)
    pieces = np.concatenate([faces, tend], axis=1)
    comp = np.concatenate([[1, 0], np.asarray(config.omega)])
    return comp[np.argmin(pieces, axis=1)]


def tendril_sample(config: TendrilConfig, n_total: int, n_labeled: int) -> Dataset:
    """Draw from the tendril mixture: 1/4 top face, 1/4 bottom face, 1/2 tendrils.

    A tendril is picked uniformly and the point is uniform along its length
    ``1 - epsilon``. Labels are the noiseless regression function.
    """
    if n_total < 1 or not 0 <= n_labeled <= n_total:
        raise ValueError("need n_total >= 1 and 0 <= n_labeled <= n_total")
    rng = np.random.default_rng(config.seed)
    d, eps = config.dim, config.epsilon
    omega = np.asarray(config.omega)
    part = rng.choice(3, size=n_total, p=[0.25, 0.25, 0.5])
    face_pts = rng.uniform(0.0, 1.0, size=(n_total, d - 1))
    which = rng.integers(config.q, size=n_total)
    along = rng.uniform(0.0, 1.0 - eps, size=n_total)

    points = np.empty((n_total, d))
    comp = np.empty(n_total, dtype=int)
    top, bottom, tend = part == 0, part == 1, part == 2
    points[top, :-1] = face_pts[top]
    points[top, -1] = 1.0
    comp[top] = 1
    points[bottom, :-1] = face_pts[bottom]
    points[bottom, -1] = 0.0
    comp[bottom] = 0
    j = which[tend]
    points[tend, :-1] = config.positions[j]
    points[tend, -1] = along[tend] + np.where(omega[j] == 1, eps, 0.0)
    comp[tend] = omega[j]

    truth_values = config.high_value * comp
    mask = _label(rng, n_total, n_labeled)
    ys = np.where(mask, truth_values, np.nan)

    def truth(xs):
        return config.high_value * tendril_component(config, xs)

    return Dataset(points, ys, mask, truth_values, truth, y_bound=config.high_value)


# --- simple supports for covering numbers ---------------------------------

@dataclass(frozen=True)
class PointMasses:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("point_masses needs k >= 1")

    def atoms(self, dim: int) -> np.ndarray:
        if dim == 1:
            return np.linspace(0.1, 0.9, self.k)[:, None] if self.k > 1 else np.array([[0.5]])
        angles = 2 * np.pi * np.arange(self.k) / self.k
        out = np.full((self.k, dim), 0.5)
        out[:, 0] += 0.35 * np.cos(angles)
        out[:, 1] += 0.35 * np.sin(angles)
        return out


@dataclass(frozen=True)
class SegmentTube:
    """Uniform points on ``[0, 1]^r x {1/2}^(d-r)``, each displaced inside a ball of radius ``gamma``."""

    r: int = 1
    gamma: float = 0.0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("segment_tube needs r >= 1")
        if self.gamma < 0:
            raise ValueError("segment_tube needs gamma >= 0")


def atoms_and_tubes(kind, n: int, seed: int = 0, dim: int = 2) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    if isinstance(kind, PointMasses):
        atoms = kind.atoms(dim)
        return atoms[rng.integers(kind.k, size=n)]
    if isinstance(kind, SegmentTube):
        if kind.r >= dim:
            raise ValueError("segment_tube needs r < d")
        pts = np.full((n, dim), 0.5)
        pts[:, :kind.r] = rng.uniform(0.0, 1.0, size=(n, kind.r))
        if kind.gamma > 0:
            direction = rng.normal(size=(n, dim))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            radius = kind.gamma * rng.uniform(size=n) ** (1.0 / dim)
            pts += direction * radius[:, None]
        return pts
    raise ValueError(f"unknown support kind {kind!r}")


# --- CSV ------------------------------------------------------------------

def write_dataset_csv(dataset: Dataset, path) -> Path:
    path = Path(path)
    d = dataset.dim
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x_{i + 1}" for i in range(d)] + ["y", "is_labeled"])
        for x, y, lab in zip(dataset.points, dataset.ys, dataset.is_labeled):
            w.writerow([f"{v:.17g}" for v in x] + [f"{y:.17g}" if lab else "", int(lab)])
    return path


def read_dataset_table(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(points, ys, is_labeled)`` in file row order; ``ys`` is NaN where unlabeled."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    xcols = [c for c in rows[0] if c.startswith("x_")]
    if not xcols or "y" not in rows[0] or "is_labeled" not in rows[0]:
        raise ValueError(f"{path}: expected columns x_1..x_d, y, is_labeled")
    pts = np.array([[float(r[c]) for c in xcols] for r in rows])
    lab = np.array([r["is_labeled"].strip() == "1" for r in rows])
    ys = np.array([float(r["y"]) if r["y"].strip() else np.nan for r in rows])
    return pts, ys, lab


def read_dataset_csv(path) -> tuple[np.ndarray, LabeledSample]:
    """Return ``(unlabeled_points, labeled_sample)`` from a dataset CSV."""
    pts, ys, lab = read_dataset_table(path)
    return pts[~lab], LabeledSample(pts[lab], ys[lab])
