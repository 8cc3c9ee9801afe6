"""Command-line entry point: ``densesemi {simulate,compare,cover,distance,dataset}``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..cover import exponent_sweep, write_cover_csv
from ..density import fit_density
from ..metric import MetricParams, build_graph, distance_matrix
from ..synth import (PointMasses, SegmentTube, atoms_and_tubes, read_dataset_table,
                     swiss_roll, tendril_sample, write_dataset_csv)
from .config import ExperimentConfig, load_config, parse_config_text
from .experiment import compare_supervised, run_experiment
from .report import emit

log = logging.getLogger("densesemi")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.set:
        cfg = parse_config_text("\n".join(args.set), base=cfg)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    if getattr(args, "fast", False):
        cfg = cfg.fast()
    if getattr(args, "workers", None):
        cfg = replace(cfg, workers=args.workers)
    return cfg


def _sweep(args, runner) -> int:
    cfg = _config(args)
    log.info("config %s, %d repetitions, output %s", cfg.digest(), cfg.repetitions, cfg.output_dir)
    report = runner(cfg)
    for path in emit(report, cfg.output_dir):
        print(path)
    failures = report.metadata.get("failures", 0)
    if failures:
        print(f"warning: {failures} failed cells excluded (see meta.json)", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    return _sweep(args, run_experiment)


def cmd_compare(args) -> int:
    return _sweep(args, compare_supervised)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _cover_points(args) -> np.ndarray:
    if args.support == "segment":
        return atoms_and_tubes(SegmentTube(1, args.gamma), args.n, args.seed, args.dim)
    if args.support == "tube":
        return atoms_and_tubes(SegmentTube(args.r, args.gamma), args.n, args.seed, args.dim)
    if args.support == "atoms":
        return atoms_and_tubes(PointMasses(args.atoms), args.n, args.seed, args.dim)
    return np.random.default_rng(args.seed).uniform(size=(args.n, args.dim))


def cmd_cover(args) -> int:
    pts = _cover_points(args)
    density = fit_density(pts, args.kernel, args.sigma)
    graph = build_graph(density, pts, MetricParams(args.alpha, args.k))
    radii = _floats(args.radii) if args.radii else list(np.geomspace(args.rmin, args.rmax, args.num))
    report = exponent_sweep(graph, radii)
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    path = write_cover_csv(report, out / "cover.csv")
    print(path)
    print(f"fitted exponent {report.exponent_fit:.4f}")
    return 0


def _distance_input(args) -> tuple[np.ndarray, np.ndarray]:
    if args.data:
        pts, _, lab = read_dataset_table(args.data)
        return pts, lab
    cfg = _config(args)
    ds = _dataset(cfg, args.n_labeled)
    return ds.points, ds.is_labeled


def _dataset(cfg: ExperimentConfig, n_labeled: int):
    if cfg.generator == "swiss_roll":
        return swiss_roll(cfg.swiss_roll_config(cfg.master_seed), n_labeled)
    return tendril_sample(cfg.tendril_config(cfg.master_seed), cfg.n_total, n_labeled)


def cmd_distance(args) -> int:
    pts, _ = _distance_input(args)
    density = fit_density(pts, args.kernel, args.sigma)
    graph = build_graph(density, pts, MetricParams(args.alpha, args.k, args.segments))
    dist = distance_matrix(graph)
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "distance.csv"
    iu, ju = np.triu_indices(len(pts), k=1)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "distance"])
        for i, j, d in zip(iu, ju, dist[iu, ju]):
            w.writerow([int(i), int(j), f"{d:.12g}"])
    print(path)
    return 0


def cmd_dataset(args) -> int:
    cfg = _config(args)
    ds = _dataset(cfg, args.n_labeled)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(write_dataset_csv(ds, out / "dataset.csv"))
    return 0


def _common(p: argparse.ArgumentParser, fast: bool = True) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory")
    if fast:
        p.add_argument("--fast", action="store_true", help="50 repetitions instead of the configured count")
        p.add_argument("--workers", type=int, help="worker processes for repetitions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="densesemi",
                                     description="Density-sensitive semisupervised kernel regression experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="risk sweep over (n, alpha); writes risk.csv and risk.svg")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="sweep plus a supervised baseline; adds compare.csv")
    _common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cover", help="greedy covering numbers over a radius sweep; writes cover.csv")
    p.add_argument("--support", choices=["segment", "square", "atoms", "tube"], default="segment")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--r", type=int, default=1, help="tube dimension")
    p.add_argument("--gamma", type=float, default=0.0, help="tube radius")
    p.add_argument("--atoms", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--kernel", default="boxcar")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--radii", help="comma-separated radii (overrides --rmin/--rmax/--num)")
    p.add_argument("--rmin", type=float, default=0.01)
    p.add_argument("--rmax", type=float, default=0.2)
    p.add_argument("--num", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("distance", help="all pairwise graph distances; writes distance.csv")
    _common(p, fast=False)
    p.add_argument("--data", help="dataset CSV (x_1..x_d, y, is_labeled); default draws from the config")
    p.add_argument("--n-labeled", type=int, default=20)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--kernel", default="boxcar")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--segments", type=int, default=16)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("dataset", help="draw one synthetic dataset; writes dataset.csv")
    _common(p, fast=False)
    p.add_argument("--n-labeled", type=int, default=20)
    p.set_defaults(func=cmd_dataset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"densesemi {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
