import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densesemi.cover import exponent_sweep, greedy_cover, write_cover_csv
from densesemi.density import fit_density
from densesemi.metric import MetricParams, build_graph, distance_matrix
from densesemi.synth import PointMasses, SegmentTube, atoms_and_tubes
from factories import random_graph, weighted_graph


def graph_on(pts, alpha=0.0, k=10, sigma=0.05):
    return build_graph(fit_density(pts, "boxcar", sigma), pts, MetricParams(alpha, k))


def test_radius_at_least_diameter():
    rng = np.random.default_rng(0)
    g = graph_on(rng.uniform(size=(60, 2)), k=5)
    diam = distance_matrix(g).max()
    rep = greedy_cover(g, diam)
    assert rep.count == 1 and rep.centers == [0]


def test_two_points_on_a_line():
    g = graph_on(np.array([[0.0], [1.0]]), k=1)
    assert greedy_cover(g, 0.6).count == 2


def test_three_atoms():
    pts = atoms_and_tubes(PointMasses(3), 90, seed=1, dim=2)
    g = graph_on(pts, k=5)
    for r in (1e-6, 0.01, 0.1, 0.3):
        assert greedy_cover(g, r).count <= 3


def test_errors():
    g = weighted_graph(2, [(0, 1, 1.0)])
    with pytest.raises(ValueError):
        greedy_cover(g, 0.0)
    with pytest.raises(ValueError, match="degenerate"):
        exponent_sweep(g, [0.1, 0.2, 0.5])
    with pytest.raises(ValueError, match="degenerate"):
        exponent_sweep(g, [0.01, 0.1])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_cover_packing_and_monotonicity(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, alpha=0.0, n_max=30)
    d = distance_matrix(g)
    finite = d[np.isfinite(d)]
    radii = np.geomspace(max(finite.max(), 1e-3) / 50, max(finite.max(), 1e-3), 5)
    prev = None
    for r in radii:
        rep = greedy_cover(g, float(r))
        c = np.array(rep.centers)
        assert (d[c].min(axis=0) <= r).all()
        off = d[np.ix_(c, c)][~np.eye(len(c), dtype=bool)]
        assert (off > r).all()
        if prev is not None:
            assert rep.count <= prev
        prev = rep.count
    # more density sensitivity shrinks distances, so never more centers
    r = float(radii[1])
    counts = [greedy_cover(g.with_alpha(a), r).count for a in (0.0, 1.0, 5.0)]
    assert counts == sorted(counts, reverse=True)


def test_segment_slope():
    pts = atoms_and_tubes(SegmentTube(1, 0.0), 1000, seed=0, dim=2)
    rep = exponent_sweep(graph_on(pts), np.geomspace(0.01, 0.2, 8))
    assert abs(rep.exponent_fit - 1.0) < 0.3
    assert [c for _, c in rep.sweep] == sorted([c for _, c in rep.sweep], reverse=True)


def test_atom_slope_is_flat():
    pts = atoms_and_tubes(PointMasses(3), 300, seed=0, dim=2)
    rep = exponent_sweep(graph_on(pts), np.geomspace(0.01, 0.3, 8))
    assert abs(rep.exponent_fit) < 0.2


def test_cover_csv(tmp_path):
    pts = atoms_and_tubes(SegmentTube(1, 0.0), 200, seed=0, dim=2)
    rep = exponent_sweep(graph_on(pts), [0.01, 0.05, 0.1, 0.2])
    path = write_cover_csv(rep, tmp_path / "cover.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "radius,count" and len(lines) == 5
    assert lines[1].split(",")[0] == "0.01"
