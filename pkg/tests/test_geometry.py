import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcpverify.geometry import (
    Point,
    ball_measure,
    chebyshev_dist,
    constant_speed_path,
    contains,
    intrinsic_distance,
    intrinsic_distances,
    is_geodesic,
)
from mcpverify.spaces import cone_space, suspension_space

X = cone_space()
Y = suspension_space()


def test_chebyshev_examples():
    assert chebyshev_dist((0, 0), (3, 4)) == 4
    assert chebyshev_dist((-3, 0.5), (-3, -0.5)) == 1
    assert chebyshev_dist((-math.pi / 2, 0), (math.pi / 2, 0)) == math.pi


def test_metric_axioms_bulk():
    # dyadic coordinates keep every difference and sum exact in floats
    rng = np.random.default_rng(1)
    pts = rng.integers(-2560, 2561, size=(10000, 3, 2)) / 256.0
    d = lambda a, b: np.maximum(np.abs(a[:, 0] - b[:, 0]), np.abs(a[:, 1] - b[:, 1]))
    p, q, r = pts[:, 0], pts[:, 1], pts[:, 2]
    assert np.all(d(p, q) >= 0)
    assert np.all(d(p, q) == d(q, p))
    assert np.all(d(p, r) <= d(p, q) + d(q, r))


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_chebyshev_symmetry(a, b, c, d):
    assert chebyshev_dist((a, b), (c, d)) == chebyshev_dist((c, d), (a, b))


def test_contains_boundary_points():
    assert contains(X, (-3, 1), 0.0)          # on the wedge boundary
    assert not contains(X, (-3, 1.01), 0.0)
    assert contains(Y, (0, 1 / 36), 0.0)      # on the lens boundary
    assert contains(X, (2, 0), 0.0)
    assert not contains(X, (2, 0.001), 0.0)
    assert contains(X, (2, 0.001), 0.0011)    # within tolerance of the ray


def test_constant_speed_reparam_breakpoints():
    p = constant_speed_path([(1, 0), (0, 0), (-3, 1)])
    assert p.length == 4.0
    assert p.breakpoints == (0.0, 0.25, 1.0)
    p2 = constant_speed_path([(0, 0), (1, 0)])
    assert p2.at(0.5) == Point(0.5, 0.0)
    p3 = constant_speed_path([(-4, 0), (-2, 0.4), (-1, 0.2)])
    assert p3.length == 3.0
    assert abs(p3.breakpoints[1] - 2 / 3) < 1e-15


def test_constant_speed_rejects_degenerate():
    with pytest.raises(ValueError):
        constant_speed_path([(0, 0)])
    with pytest.raises(ValueError):
        constant_speed_path([(0, 0), (0, 0)])
    with pytest.raises(ValueError):
        constant_speed_path([(1, 2), (1, 2), (3, 4)])


def test_path_endpoints_exact():
    p = constant_speed_path([(0.1, 0.2), (-1.7, 0.3), (-2.9, -0.4)])
    assert p.at(0.0) == Point(0.1, 0.2)
    assert p.at(1.0) == Point(-2.9, -0.4)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=2, max_size=5),
       st.floats(0, 1), st.floats(0, 1))
def test_reparam_is_one_lipschitz(verts, s, t):
    cleaned = [verts[0]]
    for v in verts[1:]:
        if chebyshev_dist(cleaned[-1], v) > 1e-6:
            cleaned.append(v)
    if len(cleaned) < 2:
        return
    p = constant_speed_path(cleaned)
    d = chebyshev_dist(p.at(s), p.at(t))
    assert d <= abs(s - t) * p.length + 1e-9


def test_is_geodesic_examples():
    straight = constant_speed_path([(2, 0), (5, 0)])
    assert is_geodesic(X, straight)
    broken = constant_speed_path([(1, 0), (0, 0), (-3, 1)])
    assert is_geodesic(X, broken)
    # leaves the wedge
    outside = constant_speed_path([(1, 0), (0, 0), (-1, 0.5)])
    assert not is_geodesic(X, outside)
    # backtracks along the ray
    backtrack = constant_speed_path([(2, 0), (0.5, 0), (1.5, 0)])
    assert not is_geodesic(X, backtrack)


def test_intrinsic_distance_examples():
    d = intrinsic_distance(X, (1, 0), (-3, 1), 0.05)
    assert abs(d - 4.0) < 3 * 0.05
    d2 = intrinsic_distance(Y, (-math.pi / 2, 0), (math.pi / 2, 0), 0.0025)
    assert abs(d2 - math.pi) < 3 * 0.0025
    assert intrinsic_distance(X, (2, 0), (2, 0), 0.05) == 0.0


def test_intrinsic_never_shortens():
    rng = np.random.default_rng(7)
    pairs = []
    for _ in range(40):
        x1 = -float(rng.uniform(0.5, 5.5))
        p = (x1, float(rng.uniform(-1, 1)) * abs(x1) / 3)
        q = (float(rng.uniform(0.1, 5.5)), 0.0)
        pairs.append((p, q))
    ds = intrinsic_distances(X, pairs, 0.05)
    for (p, q), d in zip(pairs, ds):
        assert d >= chebyshev_dist(p, q) - 1e-12


def test_intrinsic_rejects_outside_points():
    with pytest.raises(ValueError):
        intrinsic_distance(X, (1, 1), (2, 0), 0.05)


def test_intrinsic_disconnected_reports_infinite():
    from mcpverify.geometry import PlanarSpace
    from mcpverify.spaces import suspension_space

    segs = suspension_space().segments  # two components, no lens between them
    split = PlanarSpace(regions=(), segments=segs, tag="split")
    assert intrinsic_distance(split, (-1, 0), (1, 0), 0.01) == math.inf


def test_ball_measure_segment_interval():
    # 1D part has unit density: the ball is an interval of length 1
    assert abs(ball_measure(X, (2, 0), 0.5, 0.01) - 1.0) < 1e-12


def brute_force_region_mass(region, center, radius, n=400):
    xs = np.linspace(center[0] - radius, center[0] + radius, n + 1)
    ys = np.linspace(center[1] - radius, center[1] + radius, n + 1)
    xm = 0.5 * (xs[:-1] + xs[1:])
    ym = 0.5 * (ys[:-1] + ys[1:])
    XX, YY = np.meshgrid(xm, ym, indexing="ij")
    h = region.half_height(np.clip(XX, region.x_lo, region.x_hi))
    inside = (XX >= region.x_lo) & (XX <= region.x_hi) & (np.abs(YY) <= h)
    dens = np.where(inside, region.density_profile(np.where(inside, XX, -1.0)), 0.0)
    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    return float(np.sum(dens) * cell)


def test_ball_measure_matches_double_integral():
    got = ball_measure(X, (-3, 0), 0.25, 0.001)
    want = brute_force_region_mass(X.regions[0], (-3, 0), 0.25)
    assert abs(got - want) / want < 5e-3


def test_ball_measure_quadratic_scaling_in_region():
    # interior 2D point: mass scales like r^2 (slope-2 log-log fit)
    radii = [0.2, 0.1, 0.05, 0.025]
    masses = [ball_measure(X, (-3, 0), r, r / 64) for r in radii]
    slope = np.polyfit(np.log(radii), np.log(masses), 1)[0]
    assert abs(slope - 2.0) < 0.05
    assert masses[-1] < masses[0] / 50  # mass vanishes with the radius
