"""Certification suites: contraction inequalities, auxiliary lemmas, diameter,
entropy-convexity failure search, dimension exponents, tangent comparison and
geodesicity.

Every check is a pure function of immutable inputs returning a CheckReport
plus per-configuration margin rows; sweeps merge worst cases
deterministically.  Margins are signed and a check passes when its margin
is at most its declared tolerance (uniformly "<= 0 passes" after folding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .contraction import (
    CaseLabel,
    ContractionPlan,
    DistortionParams,
    analytic_density_ratio,
    build_contraction,
    distortion_coefficients,
    select_geodesic_cone,
    select_geodesic_suspension,
)
from .geometry import (
    PlanarSpace,
    Point,
    ball_measure,
    chebyshev_dist,
    intrinsic_distances,
    _GridGraph,
)
from .spaces import LENS_SLOPE, LENS_TIP


@dataclass
class CheckReport:
    """Outcome of one certification suite.

    margin is signed; the verdict is pass iff margin <= tolerance.  The
    witness locates the worst case so failures are reproducible from the
    report alone.
    """

    name: str
    margin: float
    tolerance: float
    witness: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    verdict: str = ""

    def __post_init__(self):
        if not self.verdict:
            self.verdict = "pass" if self.margin <= self.tolerance else "fail"

    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_jsonable(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "grid": self.grid,
            "details": self.details,
        }


def _row(check, case, source, target, t, margin):
    sx, sy = (source[0], source[1]) if source is not None else ("", "")
    tx, ty = (target[0], target[1]) if target is not None else ("", "")
    return (check, case, sx, sy, tx, ty, t if t is not None else "", margin)


# ---------------------------------------------------------------------------
# Empirical density field (brute-force contraction oracle)
# ---------------------------------------------------------------------------

class MassEscapeError(RuntimeError):
    """Transported mass landed in a bin with zero reference mass."""


@dataclass(eq=False)
class DensityField:
    """Binned pushforward of a plan at one time against the reference measure.

    Region bins live in slice-fraction coordinates, so reference masses are
    exact closed forms; deposits use cloud-in-cell splitting to keep comb
    aliasing far below the tolerance.  ``raw`` masses sum to one.
    """

    cell: float
    n_v: int
    buckets: list
    total_raw: float

    def max_quotient(self):
        worst = -math.inf
        witness = {}
        for b in self.buckets:
            ref = b["reference"]
            contracted = b["contracted"]
            live = contracted > 0.0
            if not np.any(live):
                continue
            if np.any(live & (ref <= 0.0)):
                raise MassEscapeError(f"mass in zero-reference bin of {b['name']}")
            q = np.where(live, contracted / np.where(ref > 0, ref, 1.0), -math.inf)
            k = int(np.argmax(q))
            if q.flat[k] > worst:
                worst = float(q.flat[k])
                witness = {"bucket": b["name"], "cell_center": b["center_of"](k)}
        return worst, witness


def _cic_1d(g):
    """Cloud-in-cell fractions: cell indices (k, k+1) and weights for grid coords."""
    a = g - 0.5
    k0 = np.floor(a).astype(np.int64)
    w1 = a - k0
    return k0, 1.0 - w1, k0 + 1, w1


def transport_density_field(space: PlanarSpace, plan: ContractionPlan, t: float,
                            params: DistortionParams, cell: float = None) -> DensityField:
    """Push the plan to time t, weight by the distortion coefficient, and bin.

    The contraction condition holds on the sample iff every bin quotient
    (contracted mass over reference mass) is at most one.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    cell = float(cell if cell is not None else plan.bin_size)
    pts = plan.positions_at(t)
    sigma = distortion_coefficients(params, t, plan.lengths)
    raw_w = plan.weights
    con_w = plan.weights * sigma * plan.total_target_mass
    n_v = plan.n_v

    x, y = pts[:, 0], pts[:, 1]
    assigned = np.zeros(len(pts), dtype=bool)
    buckets = []
    for r in space.regions:
        h = np.asarray(r.half_height(np.clip(x, r.x_lo, r.x_hi)), dtype=float)
        ok = (~assigned) & (x >= r.x_lo - 1e-12) & (x <= r.x_hi + 1e-12)
        ok &= (h > 1e-12) & (np.abs(y) <= h * (1.0 + 1e-9) + 1e-12)
        assigned |= ok
        if not np.any(ok):
            continue
        v = np.clip(y[ok] / h[ok], -1.0, 1.0)
        kx_lo = math.floor(r.x_lo / cell + 1e-9)
        kx_hi = math.ceil(r.x_hi / cell - 1e-9) - 1
        kxa, wxa, kxb, wxb = _cic_1d(x[ok] / cell)
        kva, wva, kvb, wvb = _cic_1d((v + 1.0) * n_v / 2.0)
        kxa = np.clip(kxa, kx_lo, kx_hi)
        kxb = np.clip(kxb, kx_lo, kx_hi)
        kva = np.clip(kva, 0, n_v - 1)
        kvb = np.clip(kvb, 0, n_v - 1)
        nx = kx_hi - kx_lo + 1
        size = nx * n_v
        raw = np.zeros(size)
        con = np.zeros(size)
        for kx, wx in ((kxa, wxa), (kxb, wxb)):
            for kv, wv in ((kva, wva), (kvb, wvb)):
                idx = (kx - kx_lo) * n_v + kv
                raw += np.bincount(idx, weights=raw_w[ok] * wx * wv, minlength=size)
                con += np.bincount(idx, weights=con_w[ok] * wx * wv, minlength=size)
        ref = np.repeat(
            np.array([r.mass(k * cell, (k + 1) * cell) for k in range(kx_lo, kx_hi + 1)]),
            n_v,
        ) / n_v
        center_of = (lambda k, lo=kx_lo, reg=r: (
            (lo + k // n_v + 0.5) * cell,
            float(reg.half_height((lo + k // n_v + 0.5) * cell))
            * (-1.0 + (k % n_v + 0.5) * 2.0 / n_v),
        ))
        buckets.append({"name": r.name, "raw": raw, "contracted": con,
                        "reference": ref, "center_of": center_of})
    for s in space.segments:
        ok = (~assigned) & (np.abs(y - s.y) <= 1e-10)
        ok &= (x >= s.x_lo - 1e-9) & (x <= s.x_hi + 1e-9)
        assigned |= ok
        if not np.any(ok):
            continue
        kx_lo = math.floor(s.x_lo / cell + 1e-9)
        kx_hi = math.ceil(s.x_hi / cell - 1e-9) - 1
        kxa, wxa, kxb, wxb = _cic_1d(x[ok] / cell)
        kxa = np.clip(kxa, kx_lo, kx_hi)
        kxb = np.clip(kxb, kx_lo, kx_hi)
        size = kx_hi - kx_lo + 1
        raw = np.zeros(size)
        con = np.zeros(size)
        for kx, wx in ((kxa, wxa), (kxb, wxb)):
            idx = kx - kx_lo
            raw += np.bincount(idx, weights=raw_w[ok] * wx, minlength=size)
            con += np.bincount(idx, weights=con_w[ok] * wx, minlength=size)
        ref = np.array([s.mass(k * cell, (k + 1) * cell) for k in range(kx_lo, kx_hi + 1)])
        center_of = (lambda k, lo=kx_lo, seg=s: ((lo + k + 0.5) * cell, seg.y))
        buckets.append({"name": s.name, "raw": raw, "contracted": con,
                        "reference": ref, "center_of": center_of})
    if not np.all(assigned):
        bad = int(np.argmin(assigned))
        raise MassEscapeError(f"transported point {tuple(pts[bad])} left the space")
    total = float(sum(b["raw"].sum() for b in buckets))
    return DensityField(cell=cell, n_v=n_v, buckets=buckets, total_raw=total)


# ---------------------------------------------------------------------------
# Contraction sweep
# ---------------------------------------------------------------------------

def expected_params(tag: str) -> DistortionParams:
    return DistortionParams(0.0, 3.0) if tag == "cone" else DistortionParams(2.0, 3.0)


def default_configs(space: PlanarSpace, rng, min_configs: int = 200, bin_size: float = None):
    """Deterministic (source, slice-band) sweep covering every transport case."""
    if bin_size is None:
        (bx0, bx1), (by0, by1) = space.bounds()
        bin_size = max(bx1 - bx0, by1 - by0) / 400.0
    half_band = 1.5 * bin_size
    (bx0, bx1), _ = space.bounds()
    configs = []

    def add(src, center):
        center = min(max(center, bx0 + 2.0 * half_band), bx1 - 2.0 * half_band)
        configs.append((Point(*src), center - half_band, center + half_band))

    if space.tag == "cone":
        ray_sources = [(2.0, 0.0), (1.0, 0.0), (0.5, 0.0), (3.5, 0.0)]
        cone_sources = [(-1.0, 0.1), (-2.0, -0.3), (-4.0, 0.0), (-3.0, 0.8),
                        (-0.9, -0.2), (-5.0, 1.2), (-1.5, 0.4), (-2.5, 0.0)]
        for src in ray_sources:
            for c in (src[0] + 1.0, src[0] + 2.5, 0.9 * src[0]):
                add(src, c)  # stays on the ray
            for c in (-0.6, -1.5, -3.0):
                add(src, c)  # into the cone
        for src in cone_sources:
            sx = src[0]
            for frac in (1.3, 1.1, 0.7, 0.5):   # away (incl. near-vertical), toward-near
                add(src, frac * sx)
            for frac in (0.45, 0.3):            # toward-far
                c = frac * sx
                if abs(c) >= 0.35:
                    add(src, c)
            for c in (0.8, 2.0, 4.0):           # onto the ray
                add(src, c)
        while len(configs) < min_configs:
            sx = -float(rng.uniform(0.8, 5.0))
            sy = float(rng.uniform(-1.0, 1.0)) * abs(sx) / 3.0
            choice = rng.integers(0, 6)
            centers = {0: 1.25 * sx, 1: 1.12 * sx, 2: 0.7 * sx, 3: 0.5 * sx,
                       4: max(0.45 * sx, -abs(sx) + 0.35) if abs(sx) > 0.8 else 0.45 * sx,
                       5: float(rng.uniform(0.6, 4.5))}
            c = centers[int(choice)]
            if 0.0 > c > -0.35:
                c = -0.45
            add((sx, sy), c)
    else:
        cap = math.pi / 2 - 0.2
        seg_sources = [(-1.2, 0.0), (-0.9, 0.0), (-1.35, 0.0), (0.3, 0.0),
                       (0.6, 0.0), (1.2, 0.0), (-0.3, 0.0), (-0.5, 0.0)]
        lens_sources = [(0.0, 0.0), (-0.1, 0.01), (0.2, 0.0), (-0.2, -0.005),
                        (0.05, 0.02), (-0.125, 0.0), (0.15, -0.005), (-0.06, 0.012)]
        for src in seg_sources:
            sx = src[0]
            same = sx + math.copysign(0.35, sx)
            if abs(same) <= cap:
                add(src, same)
            add(src, -math.copysign(0.8, sx))
            add(src, -math.copysign(1.3, sx))
            for c in (0.0, 0.12 * math.copysign(1.0, -sx), -0.2 * math.copysign(1.0, sx)):
                add(src, c)
        for src in lens_sources:
            sx = src[0]
            s_star = max(0.0, (LENS_TIP + 4.0 * sx) / 5.0)
            add(src, (sx + s_star) / 2.0 if s_star > sx + 0.01 else sx + 0.01)
            add(src, (s_star + LENS_TIP) / 2.0)
            for c in (0.4, 0.8, 1.3, -0.6):
                add(src, c)
        while len(configs) < min_configs:
            if rng.integers(0, 2):
                sx = float(rng.uniform(-cap, cap))
                sx = math.copysign(max(abs(sx), LENS_TIP + 0.02), sx)
                src = (sx, 0.0)
            else:
                sx = float(rng.uniform(-0.23, 0.23))
                sy = float(rng.uniform(-0.9, 0.9)) * LENS_SLOPE * (LENS_TIP - abs(sx))
                src = (sx, sy)
            c = float(rng.uniform(-cap, cap))
            if abs(c - src[0]) < 0.02:
                c = src[0] + math.copysign(0.05, c - src[0] if c != src[0] else 1.0)
            add(src, c)
    return configs, bin_size


def _analytic_reps(space, x_lo, x_hi):
    center = 0.5 * (x_lo + x_hi)
    reps = []
    for r in space.regions:
        if r.x_lo <= center <= r.x_hi:
            h = float(r.half_height(center))
            if h > 0:
                reps = [Point(center, v * h) for v in (-0.8, 0.0, 0.8)]
            break
    if not reps:
        for s in space.segments:
            if s.x_lo <= center <= s.x_hi:
                reps = [Point(center, s.y)]
                break
    return reps


def verify_mcp(space: PlanarSpace, params: DistortionParams, configs=None,
               t_count: int = 50, bin_size: float = None, tol_analytic: float = 1e-9,
               tol_bins: float = 0.05, rng=None, min_configs: int = 200,
               analytic_probes=None):
    """Sweep (source, target-slice) configurations through both verification
    routes: the closed-form ratio ceilings and the binned pushforward.

    Returns (CheckReport, margin rows).  The folded report margin is
    max(analytic - tol_analytic, empirical - tol_bins); <= 0 passes.
    """
    want = expected_params(space.tag)
    if params != want:
        raise ValueError(f"{space.tag} space certifies parameters {want}")
    rng = np.random.default_rng(0) if rng is None else rng
    if configs is None:
        configs, bin_size = default_configs(space, rng, min_configs, bin_size)
    elif bin_size is None:
        (bx0, bx1), (by0, by1) = space.bounds()
        bin_size = max(bx1 - bx0, by1 - by0) / 400.0
    if analytic_probes is None and space.tag == "suspension":
        # endpoint-anchored transports are the near-maximal-length regime where
        # the ceiling is attained at every time; closed-form margins only, the
        # vanishing endpoint density is too steep for the binned route
        pole = Point(-math.pi / 2, 0.0)
        analytic_probes = [(pole, [(-0.5, 0.0), (0.0, 0.0), (0.0, 0.022),
                                   (0.7, 0.0), (math.pi / 2 - 0.05, 0.0)])]
    select = select_geodesic_cone if space.tag == "cone" else select_geodesic_suspension
    t_grid = np.linspace(0.02, 1.0, t_count)

    rows = []
    case_counts = {}
    worst_analytic = (-math.inf, {})
    worst_empirical = (-math.inf, {})
    raw_balance = 0.0

    def analytic_sweep(src, reps):
        nonlocal worst_analytic
        for rep in reps:
            if chebyshev_dist(src, rep) < 1e-9:
                continue
            path, case = select(src, rep)
            case_counts[case.value] = case_counts.get(case.value, 0) + 1
            distortion_coefficients(params, 1.0, np.array([path.length]))  # domain check
            margins = np.empty(len(t_grid))
            for i, t in enumerate(t_grid):
                ratio = analytic_density_ratio(space.tag, case, src, rep, float(t))
                sig_t = distortion_coefficients(params, float(t), np.array([path.length]))[0]
                margins[i] = ratio * sig_t - 1.0
            k = int(np.argmax(margins))
            rows.append(_row("mcp-analytic", case.value, src, rep, float(t_grid[k]),
                             float(margins[k])))
            if margins[k] > worst_analytic[0]:
                worst_analytic = (float(margins[k]), {
                    "source": list(src), "target": list(rep),
                    "t": float(t_grid[k]), "case": case.value})

    for src, x_lo, x_hi in configs:
        analytic_sweep(src, _analytic_reps(space, x_lo, x_hi))
        plan = build_contraction(space, src, (x_lo, x_hi, -1e9, 1e9), bin_size=bin_size)
        worst_cfg = (-math.inf, None, {})
        for t in t_grid:
            fld = transport_density_field(space, plan, float(t), params)
            raw_balance = max(raw_balance, abs(fld.total_raw - 1.0))
            q, wit = fld.max_quotient()
            if q - 1.0 > worst_cfg[0]:
                worst_cfg = (q - 1.0, float(t), wit)
        rows.append(_row("mcp-empirical", plan.labels[0].value, src,
                         (0.5 * (x_lo + x_hi), 0.0), worst_cfg[1], worst_cfg[0]))
        if worst_cfg[0] > worst_empirical[0]:
            worst_empirical = (worst_cfg[0], {
                "source": list(src), "slice": [x_lo, x_hi],
                "t": worst_cfg[1], **worst_cfg[2]})
    for src, rep_list in (analytic_probes or []):
        analytic_sweep(Point(*src), [Point(*r) for r in rep_list])

    margin = max(worst_analytic[0] - tol_analytic, worst_empirical[0] - tol_bins)
    report = CheckReport(
        name=f"mcp-{space.tag}",
        margin=margin,
        tolerance=0.0,
        witness={"analytic": worst_analytic[1], "empirical": worst_empirical[1]},
        grid={"configs": len(configs), "t_count": t_count, "bin_size": bin_size,
              "tol_analytic": tol_analytic, "tol_bins": tol_bins},
        details={"worst_analytic": worst_analytic[0],
                 "worst_empirical_excess": worst_empirical[0],
                 "raw_mass_imbalance": raw_balance,
                 "case_counts": case_counts},
    )
    return report, rows


# ---------------------------------------------------------------------------
# Auxiliary analytic lemmas
# ---------------------------------------------------------------------------

def lemma_f(t, l):
    """(5/4 - t/4) sin^2(t l) - t sin^2(l); nonpositive on [0,1] x (0,1/2]."""
    t = np.asarray(t, dtype=float)
    l = np.asarray(l, dtype=float)
    return (1.25 - 0.25 * t) * np.sin(t * l) ** 2 - t * np.sin(l) ** 2


def lemma_f_dd(t, l):
    """Second t-derivative of lemma_f: -(l/2) sin(2tl) + (5-t)(l^2/2) cos(2tl)."""
    t = np.asarray(t, dtype=float)
    l = np.asarray(l, dtype=float)
    return -(l / 2.0) * np.sin(2.0 * t * l) + (5.0 - t) * (l ** 2 / 2.0) * np.cos(2.0 * t * l)


def discrete_convexity_max_bound(values, d2_slack: float) -> float:
    """Upper bound for a grid function with zero endpoints and second
    differences >= -d2_slack: max <= d2_slack * m^2 / 8."""
    m = len(values) - 1
    return d2_slack * m * m / 8.0


def f_check(t_count: int = 1001, l_count: int = 500, tol_interior: float = 1e-12,
            tol_endpoint: float = 1e-14, tol_convexity: float = 1e-12):
    """Grid verification of the auxiliary concavity lemma."""
    t = np.linspace(0.0, 1.0, t_count)
    l = 0.5 * np.arange(1, l_count + 1) / l_count
    T, L = np.meshgrid(t, l, indexing="ij")
    F = lemma_f(T, L)
    Fdd = lemma_f_dd(T, L)
    f0 = float(np.max(np.abs(lemma_f(0.0, l))))
    f1 = float(np.max(np.abs(lemma_f(1.0, l))))
    kmax = np.unravel_index(int(np.argmax(F)), F.shape)
    kmin = np.unravel_index(int(np.argmin(Fdd)), Fdd.shape)
    max_f = float(F[kmax])
    min_dd = float(Fdd[kmin])
    margin = max(max_f - tol_interior, f0 - tol_endpoint, f1 - tol_endpoint,
                 -min_dd - tol_convexity)
    rows = [_row("f-lemma", "max_f", None, (float(L[kmax]), 0.0), float(T[kmax]), max_f),
            _row("f-lemma", "min_f_dd", None, (float(L[kmin]), 0.0), float(T[kmin]), min_dd),
            _row("f-lemma", "endpoint0", None, None, 0.0, f0),
            _row("f-lemma", "endpoint1", None, None, 1.0, f1)]
    report = CheckReport(
        name="f-lemma",
        margin=margin,
        tolerance=0.0,
        witness={"argmax_f": {"t": float(T[kmax]), "l": float(L[kmax])},
                 "argmin_fdd": {"t": float(T[kmin]), "l": float(L[kmin])}},
        grid={"t_count": t_count, "l_count": l_count},
        details={"max_f": max_f, "endpoint0": f0, "endpoint1": f1, "min_fdd": min_dd},
    )
    return report, rows


def large_l_chain_check(t_count: int = 101, l_count: int = 400, tol: float = 1e-12):
    """Pointwise verification of the long-transport inequality chain and the
    bound on the slice-arrival time."""
    t = np.linspace(0.0, 0.2, t_count)
    l_hi = math.pi / 2 + 0.25
    l = 0.5 + (l_hi - 0.5) * np.arange(1, l_count + 1) / l_count
    T, L = np.meshgrid(t, l, indexing="ij")
    s2 = np.sin(T * L) ** 2
    links = {
        "damped_le_plain": (1.25 - T / 4.0) * s2 - 1.25 * s2,
        "sine_le_chord": 1.25 * s2 - 1.25 * (T * L) ** 2,
        "chord_le_linear": 1.25 * (T * L) ** 2 - 0.25 * T * L ** 2,
        "linear_le_target": 0.25 * T * L ** 2 - T * np.sin(L) ** 2,
    }
    worst = (-math.inf, None, None)
    rows = []
    for name, vals in links.items():
        k = np.unravel_index(int(np.argmax(vals)), vals.shape)
        v = float(vals[k])
        rows.append(_row("large-l", name, None, (float(L[k]), 0.0), float(T[k]), v))
        if v > worst[0]:
            worst = (v, name, {"t": float(T[k]), "l": float(L[k])})
    # the middle link degenerates to equality at t = 1/5
    mid_eq = float(np.max(np.abs(1.25 * (0.2 * l) ** 2 - 0.25 * 0.2 * l ** 2)))
    rows.append(_row("large-l", "middle_equality_at_fifth", None, None, 0.2, mid_eq))
    # arrival-time estimate chain over source positions and far targets, and
    # the lemma inequality up to the actual slice-arrival time (the estimate
    # chain alone presumes the equidistant slice is right of the center)
    xs = np.linspace(-LENS_TIP, LENS_TIP, 51)
    txs = np.linspace(LENS_TIP + 0.26, math.pi / 2, 25)
    t0_worst = -math.inf
    cover_worst = -math.inf
    t0_wit = (0.0, 0.0)
    cover_wit = (0.0, 0.0)
    for sx in xs:
        for tx in txs:
            length = tx - sx
            if length <= 0.5:
                continue
            chain_a = ((LENS_TIP + 4.0 * sx) / 5.0 - sx) / length
            chain_b = 2.0 * (LENS_TIP - sx) / 5.0
            excess = max(chain_a - chain_b, chain_b - 0.2)
            if excess > t0_worst:
                t0_worst = excess
                t0_wit = (sx, tx)
            t0_actual = (max(0.0, (LENS_TIP + 4.0 * sx) / 5.0) - sx) / length
            fan_ts = np.linspace(0.0, t0_actual, 40)
            cover = float(np.max(lemma_f(fan_ts, length)))
            if cover > cover_worst:
                cover_worst = cover
                cover_wit = (sx, tx)
    rows.append(_row("large-l", "arrival_time_bound", (t0_wit[0], 0.0),
                     (t0_wit[1], 0.0), "", t0_worst))
    rows.append(_row("large-l", "fan_stage_coverage", (cover_wit[0], 0.0),
                     (cover_wit[1], 0.0), "", cover_worst))
    margin = max(worst[0] - tol, mid_eq - tol, t0_worst - tol, cover_worst - tol)
    report = CheckReport(
        name="large-l",
        margin=margin,
        tolerance=0.0,
        witness={"link": worst[1], "at": worst[2]},
        grid={"t_count": t_count, "l_count": l_count},
        details={"worst_link_value": worst[0], "middle_equality": mid_eq,
                 "arrival_time_excess": t0_worst,
                 "fan_stage_coverage": cover_worst},
    )
    return report, rows


# ---------------------------------------------------------------------------
# Diameter
# ---------------------------------------------------------------------------

def sample_point(space: PlanarSpace, rng) -> Point:
    """Reference-measure-weighted random point of the space."""
    comps = [(r.mass(r.x_lo, r.x_hi), "r", r) for r in space.regions]
    comps += [(s.mass(s.x_lo, s.x_hi), "s", s) for s in space.segments]
    masses = np.array([c[0] for c in comps])
    k = rng.choice(len(comps), p=masses / masses.sum())
    _, kind, obj = comps[k]
    grid = np.linspace(obj.x_lo, obj.x_hi, 513)
    cdf = (obj.marginal_cdf(grid) if kind == "r" else obj.mass_cdf(grid))
    cdf = np.asarray(cdf, dtype=float)
    u = rng.uniform(cdf[0], cdf[-1])
    x = float(np.interp(u, cdf, grid))
    if kind == "s":
        return Point(x, obj.y)
    h = float(obj.half_height(x))
    return Point(x, float(rng.uniform(-1.0, 1.0)) * h)


def extreme_points(space: PlanarSpace):
    pts = []
    for r in space.regions:
        for xe in (r.x_lo, r.x_hi, r.peak_x):
            h = float(r.half_height(xe))
            pts += [Point(xe, 0.0), Point(xe, h), Point(xe, -h)]
    for s in space.segments:
        pts += [Point(s.x_lo, s.y), Point(s.x_hi, s.y)]
    seen, out = set(), []
    for p in pts:
        key = (round(p.x, 12), round(p.y, 12))
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def diameter(space: PlanarSpace, sample_count: int = 40, resolution: float = 0.0025,
             rng=None):
    """Max intrinsic distance over sampled pairs including all extreme points."""
    rng = np.random.default_rng(0) if rng is None else rng
    ext = extreme_points(space)
    pairs = [(ext[i], ext[j]) for i in range(len(ext)) for j in range(i + 1, len(ext))]
    samples = [sample_point(space, rng) for _ in range(sample_count)]
    pairs += [(samples[i], samples[j]) for i in range(0, len(samples) - 1, 2)
              for j in (i + 1,)]
    ds = intrinsic_distances(space, pairs, resolution)
    k = int(np.argmax(ds))
    return float(ds[k]), pairs[k]


def diameter_check(space: PlanarSpace, resolution: float = 0.0025, sample_count: int = 40,
                   rng=None, slack: float = 1e-9):
    """Suspension diameter certificate: value within [pi - 3 res, pi + slack]."""
    value, witness = diameter(space, sample_count, resolution, rng)
    margin = max(math.pi - 3.0 * resolution - value, value - math.pi - slack)
    rows = [_row("diameter", "", witness[0], witness[1], "", value - math.pi)]
    report = CheckReport(
        name="diameter",
        margin=margin,
        tolerance=0.0,
        witness={"pair": [list(witness[0]), list(witness[1])], "value": value},
        grid={"resolution": resolution, "sample_count": sample_count},
        details={"value": value, "target": math.pi},
    )
    return report, rows


# ---------------------------------------------------------------------------
# Entropy-convexity failure search
# ---------------------------------------------------------------------------

DEFAULT_CD_CANDIDATES = (
    ((-1.0, 0.25), (-1.4, -0.15), 0.04),
    ((-3.0, 0.8), (-3.2, 0.6), 0.04),
    ((-0.5, 0.125), (-0.7, -0.075), 0.04),
)


def _square_atoms(center, side, res):
    n = max(int(round(side / res)), 1)
    lo_x = center[0] - side / 2.0
    lo_y = center[1] - side / 2.0
    xs = lo_x + (np.arange(n) + 0.5) * res
    ys = lo_y + (np.arange(n) + 0.5) * res
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def _cone_cell_mass(x_center, res):
    # integral of the cone weight over one grid cell fully inside the wedge
    x0, x1 = x_center - res / 2.0, x_center + res / 2.0
    return res * 1.5 * (np.log(-x0) - np.log(-x1))


def _entropy(atoms, masses, res):
    cell_mass = _cone_cell_mass(atoms[:, 0], res)
    return float(np.sum(masses * np.log(masses / cell_mass)))


def cd_failure_search(space, candidates=None, resolution: float = 1 / 200,
                      curvature: float = 0.0, tol: float = 1e-3):
    """Search diagonal square-to-square transports inside the wedge for a
    midpoint entropy above the convexity allowance.

    For exactly diagonal displacements every point pair has a unique
    geodesic (the euclidean segment), so the midpoint of the optimal plan
    is forced and a negative margin certifies failure for the tested
    curvature.  Distances come from the local grid graph and are
    cross-checked against the closed-form Chebyshev values.
    """
    if candidates is None:
        candidates = DEFAULT_CD_CANDIDATES
    rows = []
    best = (math.inf, None, {})
    for c0, c1, side in candidates:
        a0 = _square_atoms(c0, side, resolution)
        a1 = _square_atoms(c1, side, resolution)
        n0, n1 = len(a0), len(a1)
        D = np.maximum(np.abs(a0[:, 0][:, None] - a1[:, 0][None, :]),
                       np.abs(a0[:, 1][:, None] - a1[:, 1][None, :]))
        _crosscheck_grid_metric(space, a0, a1, D, resolution)
        cost = (D ** 2).ravel()
        mu = np.full(n0, 1.0 / n0)
        nu = np.full(n1, 1.0 / n1)
        ii = np.repeat(np.arange(n0), n1)
        jj = np.tile(np.arange(n1), n0)
        var = np.arange(n0 * n1)
        A = coo_matrix(
            (np.ones(2 * n0 * n1),
             (np.concatenate([ii, n0 + jj]), np.concatenate([var, var]))),
            shape=(n0 + n1, n0 * n1),
        ).tocsr()
        res_lp = linprog(cost, A_eq=A, b_eq=np.concatenate([mu, nu]),
                         method="highs", bounds=(0, None))
        if not res_lp.success:
            raise RuntimeError(f"transport LP failed: {res_lp.message}")
        plan = res_lp.x.reshape(n0, n1)
        w2sq = float(np.sum(plan * D ** 2))
        keep = plan > 1e-9 / (n0 * n1)
        pi_idx, pj_idx = np.nonzero(keep)
        mids = 0.5 * (a0[pi_idx] + a1[pj_idx])
        # snap midpoints to the atom lattice (cell centers)
        mids = (np.floor(mids / resolution) + 0.5) * resolution
        pm = plan[keep]
        uniq, inv = np.unique(mids, axis=0, return_inverse=True)
        pm_u = np.bincount(inv, weights=pm, minlength=len(uniq))
        e0 = _entropy(a0, mu, resolution)
        e1 = _entropy(a1, nu, resolution)
        em = _entropy(uniq, pm_u, resolution)
        margin = 0.5 * (e0 + e1) - curvature / 8.0 * w2sq - em
        k_crit = 8.0 * (0.5 * (e0 + e1) - em) / w2sq if w2sq > 0 else 0.0
        rows.append(_row("cd-failure", f"side={side}", c0, c1, "", margin))
        if margin < best[0]:
            best = (margin, (c0, c1, side), {
                "entropy_endpoints": [e0, e1], "entropy_midpoint": em,
                "w2_squared": w2sq, "curvature_crit": k_crit})
    verdict = ""
    if best[0] >= 0.0:
        verdict = "inconclusive"
    report = CheckReport(
        name="cd-failure",
        margin=best[0] + tol,
        tolerance=0.0,
        witness={"pair": [list(best[1][0]), list(best[1][1]), best[1][2]]
                 if best[1] else []},
        grid={"resolution": resolution, "curvature": curvature, "tol": tol},
        details={"best_margin": best[0], **best[2]},
        verdict=verdict,
    )
    return report, rows


def _crosscheck_grid_metric(space, a0, a1, D, resolution, sample: int = 8):
    """Verify the closed-form Chebyshev distances against the grid graph on a
    local window (the squares sit deep inside a convex piece)."""
    lo = np.minimum(a0.min(axis=0), a1.min(axis=0)) - 4 * resolution
    hi = np.maximum(a0.max(axis=0), a1.max(axis=0)) + 4 * resolution
    clipped = _clip_space(space, lo, hi)
    # nodes on the atom lattice (cell centers), so snapping is exact
    g = _GridGraph(clipped, resolution, origin=(resolution / 2.0, resolution / 2.0))
    idx0 = [g.snap(p) for p in a0[:sample]]
    idx1 = [g.snap(p) for p in a1]
    Dg = g.distances_from(idx0)[:, idx1]
    err = float(np.max(np.abs(Dg - D[:sample])))
    if err > 1e-9:
        raise AssertionError(f"grid metric disagrees with closed form by {err}")


def _clip_space(space, lo, hi):
    from dataclasses import replace
    regions = []
    for r in space.regions:
        if r.x_hi < lo[0] or r.x_lo > hi[0]:
            continue
        regions.append(replace(r, x_lo=max(r.x_lo, lo[0]), x_hi=min(r.x_hi, hi[0])))
    segments = [s for s in space.segments if s.x_hi >= lo[0] and s.x_lo <= hi[0]]
    return PlanarSpace(regions=tuple(regions), segments=tuple(segments),
                       tag=space.tag, gluing_points=space.gluing_points)


# ---------------------------------------------------------------------------
# Dimension exponents
# ---------------------------------------------------------------------------

def dimension_exponent(space: PlanarSpace, point, radii, resolution_frac: float = 1 / 64):
    """Least-squares slope of log ball mass against log radius."""
    radii = sorted(float(r) for r in radii)
    if space.gluing_points:
        d_glue = min(chebyshev_dist(point, g) for g in space.gluing_points)
        if radii[-1] >= d_glue:
            raise ValueError("radii straddle the gluing locus; fit would mix dimensions")
    masses = [ball_measure(space, point, r, r * resolution_frac) for r in radii]
    if min(masses) <= 0:
        raise ValueError("empty ball in dimension fit")
    slope = float(np.polyfit(np.log(radii), np.log(masses), 1)[0])
    return slope


def default_dimension_points(space: PlanarSpace):
    """(point, expected slope, base radius) probes on segment and region interiors."""
    if space.tag == "cone":
        seg = [((1.5, 0.0), 0.4), ((2.0, 0.0), 0.4), ((3.0, 0.0), 0.4),
               ((4.0, 0.0), 0.4), ((5.0, 0.0), 0.3)]
        reg = [((-3.0, 0.0), 0.4), ((-2.0, 0.3), 0.3), ((-4.0, -0.5), 0.4),
               ((-1.5, 0.2), 0.15), ((-5.0, 1.0), 0.3)]
    else:
        seg = [((1.0, 0.0), 0.2), ((-1.0, 0.0), 0.2), ((0.6, 0.0), 0.15),
               ((-0.8, 0.0), 0.2), ((1.2, 0.0), 0.15)]
        reg = [((0.0, 0.0), 0.012), ((0.1, 0.005), 0.005), ((-0.12, 0.0), 0.0065),
               ((0.05, -0.01), 0.005), ((-0.06, 0.008), 0.005)]
    return ([(Point(*p), 1.0, r0) for p, r0 in seg]
            + [(Point(*p), 2.0, r0) for p, r0 in reg])


def dimension_check(space: PlanarSpace, probes=None, halvings: int = 5,
                    tol: float = 0.1):
    """Slope fits near 1 on segment interiors and 2 on region interiors."""
    probes = default_dimension_points(space) if probes is None else probes
    rows = []
    worst = (-math.inf, {})
    for point, target, r0 in probes:
        radii = [r0 * 0.5 ** k for k in range(halvings)]
        slope = dimension_exponent(space, point, radii)
        excess = abs(slope - target) - tol
        rows.append(_row("dimension", f"target={target:g}", point, None, "", excess))
        if excess > worst[0]:
            worst = (excess, {"point": list(point), "target": target, "slope": slope})
    report = CheckReport(
        name="dimension",
        margin=worst[0],
        tolerance=0.0,
        witness=worst[1],
        grid={"halvings": halvings, "tol": tol, "probes": len(probes)},
        details={"worst_excess": worst[0]},
    )
    return report, rows


# ---------------------------------------------------------------------------
# Tangent blow-up comparison
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class _BallShape:
    """Unit ball of a pointed rescaled space: region strips plus ray pieces.

    halfwidth and linear density are functions of the rescaled coordinate u;
    all masses are normalized before comparison.
    """

    strips: list  # (u_lo, u_hi, halfwidth(u), marginal_density(u))
    rays: list    # (u_lo, u_hi, linear_density(u))

    def cloud(self, n_u: int = 65, n_v: int = 9):
        pts = []
        for u_lo, u_hi, hw, _ in self.strips:
            for u in np.linspace(u_lo, u_hi, n_u):
                h = hw(u)
                if h <= 0:
                    pts.append((u, 0.0))
                    continue
                for v in np.linspace(-1.0, 1.0, n_v):
                    pts.append((u, v * h))
        for u_lo, u_hi, _ in self.rays:
            for u in np.linspace(u_lo, u_hi, n_u):
                pts.append((u, 0.0))
        return np.unique(np.asarray(pts, dtype=float), axis=0)

    def cell_masses(self, n_u: int = 80, n_v: int = 8, panels: int = 8):
        """Normalized masses on a fixed [-1,1]^2 partition plus a ray row."""
        edges_u = np.linspace(-1.0, 1.0, n_u + 1)
        out = np.zeros((n_u, n_v))
        ray_row = np.zeros(n_u)
        for u_lo, u_hi, hw, dens in self.strips:
            for i in range(n_u):
                a, b = max(edges_u[i], u_lo), min(edges_u[i + 1], u_hi)
                if b <= a:
                    continue
                um = a + (np.arange(panels) + 0.5) * (b - a) / panels
                h = np.array([hw(u) for u in um])
                d = np.array([dens(u) for u in um])
                for j in range(n_v):
                    v0, v1 = -1.0 + 2.0 * j / n_v, -1.0 + 2.0 * (j + 1) / n_v
                    frac = np.clip(np.minimum(v1, 1.0) - np.maximum(v0, -1.0), 0.0, None) / 2.0
                    out[i, j] += float(np.sum(d * frac) * (b - a) / panels)
        for u_lo, u_hi, dens in self.rays:
            for i in range(n_u):
                a, b = max(edges_u[i], u_lo), min(edges_u[i + 1], u_hi)
                if b <= a:
                    continue
                um = a + (np.arange(panels) + 0.5) * (b - a) / panels
                ray_row[i] += float(np.sum([dens(u) for u in um]) * (b - a) / panels)
        total = out.sum() + ray_row.sum()
        return out / total, ray_row / total


def _fps_net(cloud, size):
    cloud = cloud[np.lexsort((cloud[:, 1], cloud[:, 0]))]
    if len(cloud) <= size:
        return cloud
    chosen = [0]
    d = np.maximum(np.abs(cloud[:, 0] - cloud[0, 0]), np.abs(cloud[:, 1] - cloud[0, 1]))
    for _ in range(size - 1):
        k = int(np.argmax(d))
        chosen.append(k)
        dk = np.maximum(np.abs(cloud[:, 0] - cloud[k, 0]), np.abs(cloud[:, 1] - cloud[k, 1]))
        d = np.minimum(d, dk)
    return cloud[np.array(sorted(set(chosen)))]


def _pairwise_linf(a, b):
    return np.maximum(np.abs(a[:, 0][:, None] - b[:, 0][None, :]),
                      np.abs(a[:, 1][:, None] - b[:, 1][None, :]))


def _gh_estimate(net_a, net_b):
    """Correspondence-distortion upper bound from mutual nearest matching."""
    dab = _pairwise_linf(net_a, net_b)
    fa = np.argmin(dab, axis=1)
    gb = np.argmin(dab, axis=0)
    pa = np.concatenate([np.arange(len(net_a)), gb])
    pb = np.concatenate([fa, np.arange(len(net_b))])
    da = _pairwise_linf(net_a[pa], net_a[pa])
    db = _pairwise_linf(net_b[pb], net_b[pb])
    return 0.5 * float(np.max(np.abs(da - db)))


def _tv(shape_a: _BallShape, shape_b: _BallShape):
    ca, ra = shape_a.cell_masses()
    cb, rb = shape_b.cell_masses()
    return 0.5 * (float(np.abs(ca - cb).sum()) + float(np.abs(ra - rb).sum()))


def _suspension_ball_shape(base_x: float, scale: float) -> _BallShape:
    """Unit ball of the suspension space rescaled around (base_x, 0) with
    |base_x| at the lens tip.

    Coordinates are reflected when base_x < 0 so the two-dimensional side
    opens to the left, matching the comparison cone's orientation.
    """
    if abs(abs(base_x) - LENS_TIP) > 1e-12:
        raise ValueError("blow-up base must be a lens tip")
    flip = -1.0 if base_x < 0 else 1.0
    half = math.pi / 2

    def to_x(u):
        return base_x + flip * scale * u

    def hw(u):
        x = to_x(u)
        if abs(x) > LENS_TIP:
            return 0.0
        return min(LENS_SLOPE * (LENS_TIP - abs(x)) / scale, 1.0)

    def marg(u):
        return math.cos(to_x(u)) ** 2

    # the lens occupies u in [-1/(2 scale), 0], the outer segment [0, ...]
    u_left = max(-1.0, -2.0 * LENS_TIP / scale)
    u_right = min(1.0, (half - LENS_TIP) / scale)
    return _BallShape(strips=[(u_left, 0.0, hw, marg)],
                      rays=[(0.0, u_right, marg)])


def _reference_cone_shape() -> _BallShape:
    return _BallShape(
        strips=[(-1.0, 0.0, lambda u: min(abs(u) / 9.0, 1.0),
                 lambda u: 1.0)],
        rays=[(0.0, 1.0, lambda u: 1.0)],
    )


def tangent_blowup_compare(scales=None, net_size: int = 200, base_x: float = LENS_TIP):
    """Rescaled balls at the dimension-transition point against the matching
    cone-plus-ray, plus the negative control at the lens center.

    The metric part of the estimate uses correspondence distortion over
    deterministic farthest-point nets; the measure part is the cellwise
    total variation of the normalized measures.  At these scales the
    rescaled set coincides with the comparison cone exactly, so the
    sequence is driven by the measure term and must decrease to zero.
    """
    scales = tuple(2.0 ** -k for k in range(2, 7)) if scales is None else tuple(scales)
    if any(s > LENS_TIP + 1e-12 for s in scales):
        raise ValueError("scales must not exceed the lens half-width")
    target = _reference_cone_shape()
    target_net = _fps_net(target.cloud(), net_size)
    seq = []
    rows = []
    for s in scales:
        shape = _suspension_ball_shape(base_x, s)
        net = _fps_net(shape.cloud(), net_size)
        d = max(_gh_estimate(net, target_net), _tv(shape, target))
        seq.append(d)
        rows.append(_row("tangent", "blowup", (base_x, 0.0), None, s, d))
    control = []
    for s in scales:
        # negative control: the ball at the lens center is two-sided
        shape = _control_shape(s)
        net = _fps_net(shape.cloud(), net_size)
        d = max(_gh_estimate(net, target_net), _tv(shape, target))
        control.append(d)
        rows.append(_row("tangent", "control", (0.0, 0.0), None, s, d))
    diffs = np.diff(seq)
    margin = max(
        float(np.max(diffs)),                       # strictly decreasing
        seq[-1] - 0.5 * seq[0],                     # final at most half initial
        5.0 * seq[-1] - min(control),               # control well separated
    )
    report = CheckReport(
        name="tangent",
        margin=margin,
        tolerance=0.0,
        witness={"sequence": seq, "control": control},
        grid={"scales": list(scales), "net_size": net_size},
        details={"final_over_initial": seq[-1] / seq[0] if seq[0] else 0.0,
                 "control_min": min(control)},
    )
    return report, rows


def _control_shape(scale: float) -> _BallShape:
    def hw(u):
        x = scale * u
        if abs(x) > LENS_TIP:
            return 0.0
        return min(LENS_SLOPE * (LENS_TIP - abs(x)) / scale, 1.0)

    def marg(u):
        return math.cos(scale * u) ** 2

    u_max = min(1.0, LENS_TIP / scale)
    return _BallShape(strips=[(-u_max, u_max, hw, marg)], rays=[])


# ---------------------------------------------------------------------------
# Geodesicity
# ---------------------------------------------------------------------------

def geodesicity_suite(space: PlanarSpace, pair_count: int = 500, resolution: float = 0.02,
                      tol: float = 1e-9, rng=None, d_floor: float = 1.5):
    """Sampled intrinsic/extrinsic ratio check: the restriction of the plane
    metric is a length metric on these spaces up to grid error."""
    rng = np.random.default_rng(0) if rng is None else rng
    pairs = []
    guard = 0
    while len(pairs) < pair_count and guard < 100000:
        guard += 1
        p, q = sample_point(space, rng), sample_point(space, rng)
        if chebyshev_dist(p, q) >= d_floor:
            pairs.append((p, q))
    if len(pairs) < pair_count:
        raise RuntimeError("could not sample enough well-separated pairs")
    ds = intrinsic_distances(space, pairs, resolution)
    worst = (-math.inf, None)
    low = math.inf
    rows = []
    for (p, q), d in zip(pairs, ds):
        ext = chebyshev_dist(p, q)
        ratio = d / ext
        low = min(low, d - ext)
        if ratio > worst[0]:
            worst = (ratio, (p, q))
    rows.append(_row("geodesicity", "worst_ratio", worst[1][0], worst[1][1], "",
                     worst[0] - 1.0))
    margin = max(worst[0] - (1.0 + 2.0 * resolution + tol), -low - 1e-12)
    report = CheckReport(
        name="geodesicity",
        margin=margin,
        tolerance=0.0,
        witness={"pair": [list(worst[1][0]), list(worst[1][1])], "ratio": worst[0]},
        grid={"pair_count": pair_count, "resolution": resolution, "d_floor": d_floor},
        details={"worst_ratio": worst[0], "min_intrinsic_minus_extrinsic": low},
    )
    return report, rows
