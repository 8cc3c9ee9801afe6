"""Monte-Carlo risk sweeps over labeled sample size and density sensitivity."""
from __future__ import annotations

import logging
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from ..adapt import ParamGrid, argmin_theta, metric_diameter, select
from ..regress import HyperParams, fit, fit_supervised
from ..synth import Dataset, swiss_roll, tendril_sample
from .config import ExperimentConfig

__all__ = [
    "RiskRow",
    "RiskReport",
    "run_experiment",
    "compare_supervised",
    "summarize",
    "repetition_seeds",
]

log = logging.getLogger(__name__)

SEMI = "semisupervised"
SUPERVISED = "supervised"
Z95 = 1.959963984540054


@dataclass(frozen=True)
class RiskRow:
    n: int
    alpha: float
    mean_mse: float
    ci_low: float
    ci_high: float
    reps: int
    method: str = SEMI
    failures: int = 0
    ratio: float | None = None


@dataclass
class RiskReport:
    rows: list[RiskRow]
    metadata: dict = field(default_factory=dict)
    # (n, alpha, method, repetition, mse) for every successful cell
    per_rep: list[tuple[int, float, str, int, float]] = field(default_factory=list)

    def row(self, n: int, alpha: float, method: str = SEMI) -> RiskRow:
        for r in self.rows:
            if r.n == n and r.alpha == alpha and r.method == method:
                return r
        raise KeyError((n, alpha, method))


def summarize(mses) -> tuple[float, float, float]:
    """Mean and normal-approximation 95% interval over repetition MSEs."""
    arr = np.asarray(mses, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, mean, mean
    half = Z95 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, mean - half, mean + half


def repetition_seeds(master_seed: int, rep: int) -> tuple[int, int]:
    """(data seed, split seed) for one repetition, independent of every grid."""
    state = np.random.SeedSequence([master_seed, rep]).generate_state(2)
    return int(state[0]), int(state[1])


def _draw(config: ExperimentConfig, seed: int, n: int) -> Dataset:
    if config.generator == "swiss_roll":
        return swiss_roll(config.swiss_roll_config(seed), n)
    return tendril_sample(config.tendril_config(seed), config.n_total, n)


def _sigmas(config: ExperimentConfig, points: np.ndarray) -> tuple[float, ...]:
    diam = float(pdist(points).max()) if points.shape[0] > 1 else 1.0
    return tuple(s * diam for s in config.sigma_grid)


def _mse(model, h: float, ds: Dataset) -> float:
    preds = model.combine(model.query_distances(ds.points), h)
    return float(np.mean((preds - ds.truth_values) ** 2))


def _choose(config: ExperimentConfig, ds: Dataset, sigmas, alphas, split_seed: int,
            supervised: bool) -> dict[float, HyperParams]:
    """Per-alpha (h, sigma) by validation, or the fixed rule."""
    if config.h_rule == "fixed":
        return {a: HyperParams(config.h_fixed, a, sigmas[0]) for a in alphas}
    grid = ParamGrid(config.h_grid, alphas, sigmas, h_scale=config.h_scale)
    report = select(ds.unlabeled, ds.labeled, grid, config.metric_params, split_seed,
                    density_kernel=config.density_kernel, supervised=supervised)
    by_alpha = defaultdict(list)
    for theta, risk in report.table:
        by_alpha[theta.alpha].append((theta, risk))
    return {a: argmin_theta(by_alpha[a]) for a in alphas}


def _cells(config: ExperimentConfig, ds: Dataset, sigmas, split_seed: int,
           supervised: bool) -> dict[float, float]:
    alphas = (0.0,) if supervised else config.alpha_grid
    thetas = _choose(config, ds, sigmas, alphas, split_seed, supervised)
    out = {}
    for sigma in sorted({t.sigma for t in thetas.values()}):
        group = [a for a in alphas if thetas[a].sigma == sigma]
        start = HyperParams(1.0, group[0], sigma)
        if supervised:
            base = fit_supervised(ds.labeled, start, config.metric_params,
                                  density_kernel=config.density_kernel)
        else:
            base = fit(ds.unlabeled, ds.labeled, start, config.metric_params,
                       density_kernel=config.density_kernel)
        for a in group:
            model = base.with_alpha(a)
            h = thetas[a].h
            if config.h_rule == "fixed" and config.h_scale == "diameter":
                h *= metric_diameter(model) or 1.0
            out[a] = _mse(model, h, ds)
    return out


def _one_repetition(args) -> list[tuple[int, float, str, float | None, str]]:
    config, rep, with_supervised = args
    data_seed, split_seed = repetition_seeds(config.master_seed, rep)
    results = []
    for n in config.n_grid:
        ds = _draw(config, data_seed, n)
        sigmas = _sigmas(config, ds.points)
        methods = [(SEMI, False)] + ([(SUPERVISED, True)] if with_supervised else [])
        for method, supervised in methods:
            alphas = (0.0,) if supervised else config.alpha_grid
            try:
                cell = _cells(config, ds, sigmas, split_seed, supervised)
                results.extend((n, a, method, cell[a], "") for a in alphas)
            except ValueError as exc:
                log.warning("rep %d n=%d %s failed: %s", rep, n, method, exc)
                results.extend((n, a, method, None, str(exc)) for a in alphas)
    return results


def _sweep(config: ExperimentConfig, with_supervised: bool) -> RiskReport:
    started = time.perf_counter()
    jobs = [(config, r, with_supervised) for r in range(config.repetitions)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            outcomes = list(pool.map(_one_repetition, jobs))
    else:
        outcomes = [_one_repetition(job) for job in jobs]

    mses: dict[tuple[int, float, str], list[float]] = defaultdict(list)
    failures: dict[tuple[int, float, str], int] = defaultdict(int)
    per_rep = []
    errors = []
    for rep, outcome in enumerate(outcomes):
        for n, a, method, mse, err in outcome:
            key = (n, a, method)
            if mse is None:
                failures[key] += 1
                errors.append(f"rep={rep} n={n} alpha={a} {method}: {err}")
            else:
                mses[key].append(mse)
                per_rep.append((n, a, method, rep, mse))

    rows = []
    for n in config.n_grid:
        keys = [(n, a, SEMI) for a in config.alpha_grid]
        if with_supervised:
            keys.append((n, 0.0, SUPERVISED))
        sup = summarize(mses[(n, 0.0, SUPERVISED)])[0] if with_supervised and mses[(n, 0.0, SUPERVISED)] else None
        for key in keys:
            if not mses[key]:
                rows.append(RiskRow(key[0], key[1], math.nan, math.nan, math.nan, 0, key[2], failures[key]))
                continue
            mean, lo, hi = summarize(mses[key])
            ratio = None
            if key[2] == SEMI and sup is not None:
                ratio = mean / sup if sup > 0 else math.nan
            rows.append(RiskRow(key[0], key[1], mean, lo, hi, len(mses[key]), key[2], failures[key], ratio))

    meta = {
        "config_hash": config.digest(),
        "master_seed": config.master_seed,
        "wall_time_s": round(time.perf_counter() - started, 3),
        "failures": sum(failures.values()),
        "errors": errors[:50],
        "config": config.to_dict(),
    }
    return RiskReport(rows, meta, per_rep)


def run_experiment(config: ExperimentConfig) -> RiskReport:
    """Mean squared error against the true regression function for every (n, alpha) cell.

    Repetition ``r`` draws its data and validation split from seeds derived
    from ``(master_seed, r)`` alone. Within a repetition the labeled sets are
    nested across ``n``. A cell whose fit raises is counted in ``failures``
    and left out of the mean.
    """
    return _sweep(config, with_supervised=False)


def compare_supervised(config: ExperimentConfig) -> RiskReport:
    """:func:`run_experiment` plus a baseline fitted on labeled points only.

    The baseline uses ``alpha = 0`` and a graph over the labeled points, so
    no unlabeled data enters. Each semisupervised row carries
    ``ratio = mean_mse / baseline mean_mse`` for its ``n``.
    """
    return _sweep(config, with_supervised=True)
