"""Acceptance suite: every exit criterion at its stated tolerance.

Run with -s to see one PASS/FAIL line per criterion.  Criteria 1 and 2 are
the full contraction sweeps and take the bulk of the runtime (well under
their five-minute budgets).
"""

import math
import time

import numpy as np
import pytest

from mcpverify.contraction import (
    CONE_CASES,
    SUSPENSION_CASES,
    DistortionParams,
    distortion_coefficient,
)
from mcpverify.spaces import cone_space, suspension_space
from mcpverify.verifier import (
    cd_failure_search,
    diameter,
    dimension_check,
    f_check,
    geodesicity_suite,
    large_l_chain_check,
    tangent_blowup_compare,
    verify_mcp,
)

X = cone_space()
Y = suspension_space()


def report_line(number, label, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {number:>2} ({label}): {detail}")
    assert ok, f"criterion {number} ({label}): {detail}"


def run_mcp_criterion(number, space, params, bin_size, case_universe):
    start = time.perf_counter()
    rep, _ = verify_mcp(space, params, t_count=50, bin_size=bin_size,
                        tol_analytic=1e-9, tol_bins=0.05,
                        rng=np.random.default_rng(0), min_configs=200)
    elapsed = time.perf_counter() - start
    analytic = rep.details["worst_analytic"]
    empirical = rep.details["worst_empirical_excess"]
    covered = set(rep.details["case_counts"])
    ok = (
        rep.grid["configs"] >= 200
        and covered == {c.value for c in case_universe}
        and analytic <= 1e-9
        and empirical <= 0.05
        and rep.details["raw_mass_imbalance"] <= 1e-12
        and elapsed <= 300.0
    )
    report_line(number, rep.name, ok,
                f"configs={rep.grid['configs']} analytic={analytic:.3e} "
                f"empirical_excess={empirical:.3e} cases={len(covered)} "
                f"elapsed={elapsed:.1f}s")


def test_criterion_1_contraction_cone():
    run_mcp_criterion(1, X, DistortionParams(0.0, 3.0), 0.03, CONE_CASES)


def test_criterion_2_contraction_suspension():
    run_mcp_criterion(2, Y, DistortionParams(2.0, 3.0), 0.0025, SUSPENSION_CASES)


def test_criterion_3_f_lemma():
    start = time.perf_counter()
    rep, _ = f_check(t_count=1001, l_count=500, tol_interior=1e-12,
                     tol_endpoint=1e-14, tol_convexity=1e-12)
    elapsed = time.perf_counter() - start
    ok = (
        rep.details["max_f"] <= 1e-12
        and abs(rep.details["endpoint0"]) <= 1e-14
        and abs(rep.details["endpoint1"]) <= 1e-14
        and rep.details["min_fdd"] >= -1e-12
        and elapsed <= 60.0
    )
    report_line(3, "f-lemma", ok,
                f"max_f={rep.details['max_f']:.3e} min_fdd={rep.details['min_fdd']:.3e} "
                f"elapsed={elapsed:.2f}s")


def test_criterion_4_large_l_chain():
    rep, _ = large_l_chain_check(t_count=101, l_count=400, tol=1e-12)
    ok = (
        rep.details["worst_link_value"] <= 1e-12
        and rep.details["middle_equality"] <= 1e-12
        and rep.details["arrival_time_excess"] <= 1e-12
        and rep.details["fan_stage_coverage"] <= 1e-12
    )
    report_line(4, "large-l chain", ok,
                f"worst_link={rep.details['worst_link_value']:.3e} "
                f"middle_eq={rep.details['middle_equality']:.3e} "
                f"t0_excess={rep.details['arrival_time_excess']:.3e}")


def test_criterion_5_diameter():
    resolution = 1 / 400
    value, witness = diameter(Y, sample_count=40, resolution=resolution,
                              rng=np.random.default_rng(0))
    xs = sorted((witness[0].x, witness[1].x))
    witness_ok = (abs(xs[0] + math.pi / 2) < 1e-9 and abs(xs[1] - math.pi / 2) < 1e-9
                  and abs(witness[0].y) < 1e-9 and abs(witness[1].y) < 1e-9)
    ok = (math.pi - 3 * resolution <= value <= math.pi + 1e-9) and witness_ok
    report_line(5, "diameter", ok,
                f"value={value:.12f} target={math.pi:.12f} witness={witness}")


def test_criterion_6_dimension_split():
    worst = {}
    ok = True
    for space in (X, Y):
        rep, rows = dimension_check(space, halvings=5, tol=0.1)
        seg_rows = [r for r in rows if r[1] == "target=1"]
        reg_rows = [r for r in rows if r[1] == "target=2"]
        ok &= len(seg_rows) == 5 and len(reg_rows) == 5 and rep.passed()
        worst[space.tag] = rep.details["worst_excess"]
    report_line(6, "dimension split", ok,
                f"worst |slope-target|-0.1: cone={worst['cone']:.3e} "
                f"suspension={worst['suspension']:.3e}")


def test_criterion_7_cd_failure():
    coarse, _ = cd_failure_search(X, resolution=1 / 200, tol=1e-3)
    fine, _ = cd_failure_search(X, resolution=1 / 400, tol=1e-3)
    m1 = coarse.details["best_margin"]
    m2 = fine.details["best_margin"]
    ok = m1 <= -1e-3 and m2 <= -1e-3 and m2 <= 0.8 * m1
    report_line(7, "cd failure", ok,
                f"margin@1/200={m1:.5f} margin@1/400={m2:.5f} "
                f"K_crit={fine.details['curvature_crit']:.3f}")


def test_criterion_8_tangent():
    rep, _ = tangent_blowup_compare(scales=tuple(2.0 ** -k for k in range(2, 7)))
    seq = rep.witness["sequence"]
    control = rep.witness["control"]
    ok = (
        all(b < a for a, b in zip(seq, seq[1:]))
        and seq[-1] <= 0.5 * seq[0]
        and min(control) >= 5.0 * seq[-1]
    )
    report_line(8, "tangent blow-up", ok,
                f"sequence={['%.4f' % v for v in seq]} control_min={min(control):.3f}")


def test_criterion_9_geodesicity():
    results = {}
    ok = True
    for space, resolution in ((X, 0.02), (Y, 0.0025)):
        rep, _ = geodesicity_suite(space, pair_count=500, resolution=resolution,
                                   tol=1e-9, rng=np.random.default_rng(0))
        ratio = rep.details["worst_ratio"]
        ok &= ratio <= 1 + 2 * resolution + 1e-9
        ok &= rep.details["min_intrinsic_minus_extrinsic"] >= -1e-12
        results[space.tag] = ratio
    report_line(9, "geodesicity", ok,
                f"worst ratios: cone={results['cone']:.6f} "
                f"suspension={results['suspension']:.6f}")


def test_criterion_10_distortion_identities():
    ts = np.linspace(0.0, 1.0, 41)
    ds = np.concatenate([np.linspace(0.0, 3.0, 25), [0.0]])
    exact = True
    for d in ds:
        for params in (DistortionParams(0.0, 3.0), DistortionParams(2.0, 3.0),
                       DistortionParams(-1.5, 2.0)):
            if params.curvature > 0 and d >= math.pi:
                continue
            exact &= distortion_coefficient(params, 1.0, d) == 1.0
            exact &= distortion_coefficient(params, 0.0, d) == 0.0
    zero_curvature = all(
        distortion_coefficient(DistortionParams(0.0, n), t, d) == t ** n
        for n in (2.0, 3.0) for t in ts for d in (0.0, 0.5, 2.0))
    near_zero = max(
        abs(distortion_coefficient(DistortionParams(k, 3.0), t, d) - t ** 3)
        for k in (1e-8, -1e-8) for t in ts for d in np.linspace(0.0, 2.5, 15))
    ok = exact and zero_curvature and near_zero <= 1e-6
    report_line(10, "distortion identities", ok,
                f"endpoints_exact={exact} zero_curvature_exact={zero_curvature} "
                f"near_zero_max_err={near_zero:.2e}")
