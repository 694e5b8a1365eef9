import math

import numpy as np
import pytest

from mcpverify.contraction import DistortionParams, build_contraction
from mcpverify.spaces import cone_space, suspension_space
from mcpverify.verifier import (
    MassEscapeError,
    _cone_cell_mass,
    _entropy,
    _fps_net,
    _gh_estimate,
    _reference_cone_shape,
    _suspension_ball_shape,
    _tv,
    cd_failure_search,
    diameter,
    diameter_check,
    dimension_check,
    dimension_exponent,
    discrete_convexity_max_bound,
    f_check,
    geodesicity_suite,
    large_l_chain_check,
    lemma_f,
    lemma_f_dd,
    tangent_blowup_compare,
    transport_density_field,
    verify_mcp,
)
from mcpverify.geometry import PlanarSpace

X = cone_space()
Y = suspension_space()
P03 = DistortionParams(0.0, 3.0)
P23 = DistortionParams(2.0, 3.0)


# ---------------------------------------------------------------------------
# density field oracle
# ---------------------------------------------------------------------------

def test_density_field_endpoint_consistency():
    plan = build_contraction(X, (2, 0), (3.0, 3.3, -1.0, 1.0), bin_size=0.03)
    fld = transport_density_field(X, plan, 1.0, P03)
    q, wit = fld.max_quotient()
    # at t = 1 deposits sit exactly on their own bins: quotient is sigma = 1
    assert abs(q - 1.0) < 1e-12
    assert abs(fld.total_raw - 1.0) < 1e-12


def test_density_field_midtime_quotient():
    plan = build_contraction(X, (2, 0), (3.0, 4.0, -1.0, 1.0), bin_size=0.03)
    fld = transport_density_field(X, plan, 0.5, P03)
    q, _ = fld.max_quotient()
    # one-dimensional transport: quotient approaches t^2 from below
    assert 0.15 < q <= 0.25 + 1e-9
    assert abs(fld.total_raw - 1.0) < 1e-12


def test_density_field_small_time_vanishes():
    plan = build_contraction(X, (2, 0), (3.0, 4.0, -1.0, 1.0), bin_size=0.03)
    q, _ = transport_density_field(X, plan, 0.02, P03).max_quotient()
    assert q < 0.01


def test_density_field_mass_conservation_sweep():
    plan = build_contraction(Y, (-0.1, 0.01), (0.5, 0.51, -1.0, 1.0), bin_size=0.0025)
    for t in (0.05, 0.3, 0.77, 1.0):
        fld = transport_density_field(Y, plan, t, P23)
        assert abs(fld.total_raw - 1.0) < 1e-12


def test_density_field_escape_detection():
    plan = build_contraction(X, (2, 0), (3.0, 3.3, -1.0, 1.0), bin_size=0.03)
    plan.verts[:, :, 1] += 5.0  # push every ray far outside the space
    with pytest.raises(MassEscapeError):
        transport_density_field(X, plan, 0.5, P03)


# ---------------------------------------------------------------------------
# contraction sweeps (trimmed; the full sweeps run in the acceptance suite)
# ---------------------------------------------------------------------------

def test_verify_mcp_rejects_wrong_params():
    with pytest.raises(ValueError):
        verify_mcp(X, P23, min_configs=1)
    with pytest.raises(ValueError):
        verify_mcp(Y, P03, min_configs=1)


def test_verify_mcp_small_sweeps_pass():
    rep, rows = verify_mcp(X, P03, min_configs=30, rng=np.random.default_rng(5))
    assert rep.passed()
    assert rep.details["raw_mass_imbalance"] < 1e-12
    assert len(rows) > 30
    rep, _ = verify_mcp(Y, P23, min_configs=30, bin_size=0.0025,
                        rng=np.random.default_rng(5))
    assert rep.passed()


# ---------------------------------------------------------------------------
# auxiliary lemmas
# ---------------------------------------------------------------------------

def test_lemma_f_values():
    assert lemma_f(0.0, 0.5) == 0.0
    assert lemma_f(1.0, 0.5) == 0.0
    assert abs(lemma_f(0.5, 0.5) - (-0.04606461459629972)) < 1e-15
    # second derivative formula at a spot-check point, against finite differences
    t, l, h = 0.3, 0.4, 1e-5
    fd = (lemma_f(t + h, l) - 2 * lemma_f(t, l) + lemma_f(t - h, l)) / h ** 2
    assert abs(lemma_f_dd(t, l) - fd) < 1e-5


def test_f_check_passes():
    rep, rows = f_check()
    assert rep.passed()
    assert rep.details["max_f"] <= 1e-12
    assert rep.details["endpoint0"] == 0.0 and rep.details["endpoint1"] == 0.0
    assert rep.details["min_fdd"] >= -1e-12
    assert len(rows) == 4


def test_convexity_endpoint_crosscheck():
    # zero-endpoint grid functions with nonnegative second differences stay
    # nonpositive; ties the two f_check outputs together
    t = np.linspace(0.0, 1.0, 401)
    for l in (0.1, 0.3, 0.5):
        vals = lemma_f(t, l)
        d2 = np.diff(vals, 2)
        slack = max(0.0, float(-d2.min()))
        bound = discrete_convexity_max_bound(vals, slack)
        assert float(vals.max()) <= bound + 1e-15


def test_large_l_chain_passes():
    rep, rows = large_l_chain_check()
    assert rep.passed()
    assert rep.details["middle_equality"] <= 1e-12
    assert rep.details["arrival_time_excess"] <= 1e-12
    assert rep.details["fan_stage_coverage"] <= 1e-12
    names = {r[1] for r in rows}
    assert "sine_le_chord" in names and "arrival_time_bound" in names


def test_large_l_single_point_degenerate():
    # at t = 0 every chain term vanishes
    assert lemma_f(0.0, 1.0) == 0.0


# ---------------------------------------------------------------------------
# diameter
# ---------------------------------------------------------------------------

def test_diameter_suspension():
    value, witness = diameter(Y, sample_count=20, resolution=0.0025)
    assert math.pi - 3 * 0.0025 <= value <= math.pi + 1e-9
    xs = sorted((witness[0].x, witness[1].x))
    assert abs(xs[0] + math.pi / 2) < 1e-12 and abs(xs[1] - math.pi / 2) < 1e-12
    rep, _ = diameter_check(Y, resolution=0.0025)
    assert rep.passed()


def test_diameter_lens_only():
    lens_only = PlanarSpace(regions=Y.regions, segments=(), tag="lens",
                            gluing_points=())
    value, witness = diameter(lens_only, sample_count=10, resolution=0.002)
    assert abs(value - 0.5) < 3 * 0.002


# ---------------------------------------------------------------------------
# entropy convexity failure
# ---------------------------------------------------------------------------

def test_cd_failure_negative_margin():
    rep, rows = cd_failure_search(X, resolution=1 / 200)
    assert rep.passed()
    assert rep.details["best_margin"] <= -1e-3
    assert rep.details["curvature_crit"] < 0
    assert len(rows) == 3


def test_cd_failure_stability_under_refinement():
    coarse, _ = cd_failure_search(X, resolution=1 / 200)
    fine, _ = cd_failure_search(X, resolution=1 / 400)
    m1, m2 = coarse.details["best_margin"], fine.details["best_margin"]
    assert m2 <= 0.8 * m1  # the violation does not shrink toward zero


def test_cd_failure_inconclusive_verdict():
    # a far-out pair with tiny displacement cannot certify failure
    rep, _ = cd_failure_search(
        X, candidates=[((-5.0, 0.1), (-5.0, 0.1), 0.04)], resolution=1 / 200)
    assert rep.verdict in ("inconclusive", "fail")
    assert not rep.passed()


def test_cd_identical_measures_zero_margin():
    rep, _ = cd_failure_search(
        X, candidates=[((-3.0, 0.5), (-3.0, 0.5), 0.04)], resolution=1 / 200)
    assert abs(rep.details["best_margin"]) < 1e-12


def test_cd_slice_fraction_control():
    # fraction-preserving horizontal transport of full-slice columns keeps the
    # relative entropy constant: the projection behaves like the flat line
    res = 1 / 200
    x0, x1 = -3.0 + res / 2, -2.0 + res / 2

    def column(x):
        h = abs(x) / 3.0
        n = int(2 * h / res)
        ys = (np.arange(n) - n / 2 + 0.5) * res
        atoms = np.stack([np.full(n, x), ys], axis=1)
        return atoms, np.full(n, 1.0 / n)

    a0, m0 = column(x0)
    a1, m1 = column(x1)
    am, mm = column(0.5 * (x0 + x1))
    margin = 0.5 * (_entropy(a0, m0, res) + _entropy(a1, m1, res)) - _entropy(am, mm, res)
    assert abs(margin) < 0.02


# ---------------------------------------------------------------------------
# dimension
# ---------------------------------------------------------------------------

def test_dimension_exponents():
    assert abs(dimension_exponent(X, (2.0, 0.0), [0.4, 0.2, 0.1, 0.05]) - 1.0) < 0.1
    assert abs(dimension_exponent(X, (-3.0, 0.0), [0.4, 0.2, 0.1, 0.05]) - 2.0) < 0.1
    assert abs(dimension_exponent(Y, (0.0, 0.0), [0.012, 0.006, 0.003]) - 2.0) < 0.1


def test_dimension_straddle_flagged():
    with pytest.raises(ValueError):
        dimension_exponent(X, (0.5, 0.0), [1.0, 0.5])  # ball reaches the apex


def test_dimension_check_both_spaces():
    for space in (X, Y):
        rep, rows = dimension_check(space)
        assert rep.passed()
        assert len(rows) == 10


# ---------------------------------------------------------------------------
# tangent comparison
# ---------------------------------------------------------------------------

def test_tangent_sequence_decreases():
    rep, rows = tangent_blowup_compare()
    assert rep.passed()
    seq = rep.witness["sequence"]
    assert all(b < a for a, b in zip(seq, seq[1:]))
    assert seq[-1] <= 0.5 * seq[0]
    assert min(rep.witness["control"]) >= 5.0 * seq[-1]


def test_tangent_self_distance_zero():
    shape = _reference_cone_shape()
    net = _fps_net(shape.cloud(), 150)
    assert _gh_estimate(net, net) == 0.0
    assert _tv(shape, shape) == 0.0


def test_tangent_rescaled_ball_matches_cone_exactly():
    # at admissible scales the rescaled neighbourhood coincides with the cone
    # up to one rounding ulp in the boundary profile
    for s in (0.25, 0.125, 0.0625):
        shape = _suspension_ball_shape(0.25, s)
        target = _reference_cone_shape()
        assert _gh_estimate(_fps_net(shape.cloud(), 150),
                            _fps_net(target.cloud(), 150)) < 1e-14


def test_tangent_rejects_large_scale():
    with pytest.raises(ValueError):
        tangent_blowup_compare(scales=(0.5, 0.25))


# ---------------------------------------------------------------------------
# geodesicity
# ---------------------------------------------------------------------------

def test_geodesicity_both_spaces():
    rep, _ = geodesicity_suite(X, pair_count=120, resolution=0.02,
                               rng=np.random.default_rng(2))
    assert rep.passed()
    assert rep.details["worst_ratio"] <= 1 + 2 * 0.02 + 1e-9
    rep, _ = geodesicity_suite(Y, pair_count=120, resolution=0.0025,
                               rng=np.random.default_rng(2))
    assert rep.passed()


# ---------------------------------------------------------------------------
# projected one-dimensional model inequality (supports the analytic route)
# ---------------------------------------------------------------------------

def test_projected_model_inequality():
    xs = np.linspace(-math.pi / 2, math.pi / 2, 121)
    worst = -math.inf
    for a in xs:
        for b in xs:
            if b <= a or b - a >= math.pi - 1e-9:
                continue
            l = b - a
            for t in np.linspace(0.05, 1.0, 25):
                xt = a + t * (b - a)
                g = math.cos(b) ** 2 * math.sin(t * l) ** 2 \
                    - math.cos(xt) ** 2 * math.sin(l) ** 2
                worst = max(worst, g)
    assert worst <= 1e-12


def test_essential_chain_links_short_lengths():
    # height quotient <= (5/4 - t/4) <= model bound, each link separately
    h = lambda x: (0.25 - abs(x)) / 9.0
    rng = np.random.default_rng(3)
    for _ in range(4000):
        sx = rng.uniform(-0.25, 0.25)
        bound = (0.25 + 4 * sx) / 5
        if bound <= sx:
            continue
        tx = rng.uniform(sx, min(bound, 0.25))
        if tx <= sx:
            continue
        l = tx - sx
        if l <= 0 or l > 0.5:
            continue
        for t in np.linspace(0.05, 1.0, 15):
            xt = sx + t * (tx - sx)
            assert h(xt) <= (1.25 - 0.25 * t) * h(tx) + 1e-12
            assert (1.25 - 0.25 * t) * math.sin(t * l) ** 2 <= t * math.sin(l) ** 2 + 1e-12
