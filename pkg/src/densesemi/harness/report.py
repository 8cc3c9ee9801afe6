"""CSV and SVG output for risk reports."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .experiment import SEMI, SUPERVISED, RiskReport, RiskRow

__all__ = ["emit", "read_risk_csv", "render_svg", "RISK_COLUMNS", "COMPARE_COLUMNS"]

RISK_COLUMNS = ["n", "alpha", "mean_mse", "ci_low", "ci_high", "reps"]
COMPARE_COLUMNS = ["n", "alpha", "method", "mean_mse", "ci_low", "ci_high", "reps", "ratio"]
_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"]


def _num(x: float) -> str:
    return f"{x:.12g}"


def _risk_line(row: RiskRow) -> list[str]:
    return [str(row.n), _num(row.alpha), _num(row.mean_mse), _num(row.ci_low),
            _num(row.ci_high), str(row.reps)]


def _write_csv(path: Path, header, lines) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(lines)


def emit(report: RiskReport, output_dir) -> list[Path]:
    """Write ``risk.csv`` and ``risk.svg`` (plus ``compare.csv``, ``reps.csv`` and ``meta.json``).

    ``risk.csv`` holds the semisupervised rows only and depends on nothing
    but the rows, so identical reports give identical bytes.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    semi = [r for r in report.rows if r.method == SEMI]
    path = out / "risk.csv"
    _write_csv(path, RISK_COLUMNS, [_risk_line(r) for r in semi])
    written.append(path)

    if any(r.method == SUPERVISED for r in report.rows):
        path = out / "compare.csv"
        lines = [[str(r.n), _num(r.alpha), r.method, _num(r.mean_mse), _num(r.ci_low),
                  _num(r.ci_high), str(r.reps), "" if r.ratio is None else _num(r.ratio)]
                 for r in report.rows]
        _write_csv(path, COMPARE_COLUMNS, lines)
        written.append(path)

    path = out / "risk.svg"
    path.write_text(render_svg(report.rows), encoding="utf-8")
    written.append(path)

    if report.per_rep:
        path = out / "reps.csv"
        _write_csv(path, ["n", "alpha", "method", "rep", "mse"],
                   [[str(n), _num(a), m, str(rep), f"{mse:.17g}"] for n, a, m, rep, mse in report.per_rep])
        written.append(path)

    if report.metadata:
        path = out / "meta.json"
        path.write_text(json.dumps(report.metadata, indent=2, sort_keys=True, default=str) + "\n",
                        encoding="utf-8")
        written.append(path)
    return written


def read_risk_csv(path) -> list[RiskRow]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames)[:6] != RISK_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [RiskRow(int(r["n"]), float(r["alpha"]), float(r["mean_mse"]), float(r["ci_low"]),
                        float(r["ci_high"]), int(r["reps"])) for r in reader]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(rows: list[RiskRow], width: int = 640, height: int = 420) -> str:
    """MSE against n (log axis) with one polyline and error bars per series."""
    left, right, top, bottom = 70, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
             f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    good = [r for r in rows if r.reps > 0 and math.isfinite(r.mean_mse)]
    if not good:
        parts.append(f'<text x="{width / 2}" y="{height / 2}" text-anchor="middle">no data</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    ns = sorted({r.n for r in good})
    lx0, lx1 = math.log(ns[0]), math.log(ns[-1])
    if lx1 == lx0:
        lx0, lx1 = lx0 - 1, lx1 + 1
    ymax = max(r.ci_high for r in good) or 1.0
    ymax *= 1.05

    def px(n):
        return left + (math.log(n) - lx0) / (lx1 - lx0) * pw

    def py(v):
        return top + ph - max(v, 0.0) / ymax * ph

    parts.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>')
    parts.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>')
    for n in ns:
        x = _fmt(px(n))
        parts.append(f'<line x1="{x}" y1="{top + ph}" x2="{x}" y2="{top + ph + 4}" stroke="black"/>')
        parts.append(f'<text x="{x}" y="{top + ph + 16}" text-anchor="middle">{n}</text>')
    for i in range(6):
        v = ymax * i / 5
        y = _fmt(py(v))
        parts.append(f'<line x1="{left - 4}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
        parts.append(f'<text x="{left - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">{v:.3g}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">labeled sample size n</text>')
    parts.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {top + ph / 2})">mean squared error</text>')

    series: dict[tuple[str, float], list[RiskRow]] = {}
    for r in good:
        series.setdefault((r.method, r.alpha), []).append(r)
    for idx, ((method, alpha), pts) in enumerate(sorted(series.items(), key=lambda kv: (kv[0][0] != SEMI, kv[0][1]))):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = sorted(pts, key=lambda r: r.n)
        dash = ' stroke-dasharray="5,3"' if method == SUPERVISED else ""
        coords = " ".join(f"{_fmt(px(r.n))},{_fmt(py(r.mean_mse))}" for r in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        for r in pts:
            x = _fmt(px(r.n))
            parts.append(f'<line x1="{x}" y1="{_fmt(py(r.ci_low))}" x2="{x}" y2="{_fmt(py(r.ci_high))}" '
                         f'stroke="{color}"/>')
            parts.append(f'<circle cx="{x}" cy="{_fmt(py(r.mean_mse))}" r="2.5" fill="{color}"/>')
        ly = top + 14 * idx
        label = "supervised" if method == SUPERVISED else f"alpha={alpha:g}"
        parts.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"{dash}/>')
        parts.append(f'<text x="{left + pw + 36}" y="{ly}" dominant-baseline="middle">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
