"""Distortion coefficients and the explicit geodesic-selection transports.

The two spaces admit branching geodesics; the transports chosen here move
mass linearly in the horizontal coordinate and are the selections whose
density ratios admit closed-form ceilings.  Everything is pure; plans are
immutable once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import GeodesicPath, PlanarSpace, Point, chebyshev_dist, constant_speed_path
from .spaces import CONE_SLOPE, LENS_SLOPE, LENS_TIP

_EPS = 1e-12


@dataclass(frozen=True)
class DistortionParams:
    curvature: float
    dimension: float

    def __post_init__(self):
        if not (self.dimension > 1 or (self.dimension == 1 and self.curvature <= 0)):
            raise ValueError("dimension must exceed 1 (or equal 1 with curvature <= 0)")


def model_sine(curvature: float, theta: float) -> float:
    """The comparison sine: sin(sqrt(K) t)/sqrt(K), sinh for K < 0, t for K = 0."""
    if theta < 0:
        raise ValueError("argument must be nonnegative")
    if curvature > 0:
        rk = math.sqrt(curvature)
        if theta >= math.pi / rk:
            raise ValueError(f"argument {theta} outside [0, pi/sqrt(K))")
        return math.sin(rk * theta) / rk
    if curvature < 0:
        rk = math.sqrt(-curvature)
        return math.sinh(rk * theta) / rk
    return theta


def distortion_coefficients(params: DistortionParams, t: float, lengths):
    """Vectorized distortion coefficient over an array of geodesic lengths.

    Exactly t**N for zero curvature; limits to t**N as the length vanishes.
    t = 1 returns exactly 1 because the two sine arguments coincide.
    """
    k, n = params.curvature, params.dimension
    lengths = np.asarray(lengths, dtype=float)
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 0.0:
        return np.zeros_like(lengths)
    if k == 0.0 or n == 1.0:
        return np.full_like(lengths, t if n == 1.0 else t ** n)
    sq = math.sqrt(n - 1.0)
    th_full = lengths / sq
    th_part = (t * lengths) / sq
    if k > 0:
        rk = math.sqrt(k)
        if np.any(th_full >= math.pi / rk):
            bad = float(np.max(lengths))
            raise ValueError(f"length {bad} outside the K>0 domain")
        s_full = np.sin(rk * th_full) / rk
        s_part = np.sin(rk * th_part) / rk
    else:
        rk = math.sqrt(-k)
        s_full = np.sinh(rk * th_full) / rk
        s_part = np.sinh(rk * th_part) / rk
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(s_full > 0.0, s_part / np.where(s_full > 0, s_full, 1.0), t)
    return t * ratio ** (n - 1.0)


def distortion_coefficient(params: DistortionParams, t: float, d: float) -> float:
    """Scalar distortion coefficient; d = 0 is handled by its limit t**N."""
    return float(distortion_coefficients(params, t, np.array([float(d)]))[0])


def contraction_bound(params: DistortionParams, t: float, length: float) -> float:
    """Admissible density-ratio ceiling 1/coefficient; rejects t = 0."""
    if t <= 0.0:
        raise ValueError("t = 0 is the Dirac endpoint; bound undefined")
    return 1.0 / distortion_coefficient(params, t, length)


class CaseLabel(str, Enum):
    # cone space
    RAY_TO_RAY = "ray_to_ray"
    RAY_INTO_CONE = "ray_into_cone"
    CONE_AWAY_FROM_APEX = "cone_away_from_apex"
    CONE_TOWARD_APEX_NEAR = "cone_toward_apex_near"
    CONE_TOWARD_APEX_FAR = "cone_toward_apex_far"
    CONE_ONTO_RAY = "cone_onto_ray"
    # suspension space
    SLICE_UNIFORM_1D = "slice_uniform_1d"
    RAY_INTO_LENS = "ray_into_lens"
    LENS_EUCLIDEAN = "lens_euclidean"
    LENS_PAST_EQUIDISTANT = "lens_past_equidistant"
    LENS_ONTO_RAY = "lens_onto_ray"


CONE_CASES = (
    CaseLabel.RAY_TO_RAY,
    CaseLabel.RAY_INTO_CONE,
    CaseLabel.CONE_AWAY_FROM_APEX,
    CaseLabel.CONE_TOWARD_APEX_NEAR,
    CaseLabel.CONE_TOWARD_APEX_FAR,
    CaseLabel.CONE_ONTO_RAY,
)
SUSPENSION_CASES = (
    CaseLabel.SLICE_UNIFORM_1D,
    CaseLabel.RAY_INTO_LENS,
    CaseLabel.LENS_EUCLIDEAN,
    CaseLabel.LENS_PAST_EQUIDISTANT,
    CaseLabel.LENS_ONTO_RAY,
)


def _dedupe(vertices):
    out = [vertices[0]]
    for v in vertices[1:]:
        if chebyshev_dist(out[-1], v) > 0.0:
            out.append(v)
    return out


def _in_cone(p, tol=1e-9):
    return p[0] + 3.0 * abs(p[1]) <= tol


def _on_cone_ray(p, tol=1e-9):
    return abs(p[1]) <= tol and p[0] >= -tol


def _cone_case(source, target):
    sx, sy = source
    tx, ty = target
    for p in (source, target):
        if not (_in_cone(p) or _on_cone_ray(p)):
            raise ValueError(f"point {tuple(p)} is not in the cone space")
    if _on_cone_ray(source):
        if _on_cone_ray(target):
            return CaseLabel.RAY_TO_RAY
        return CaseLabel.RAY_INTO_CONE
    if tx <= sx:
        return CaseLabel.CONE_AWAY_FROM_APEX
    if tx <= sx / 2.0:
        return CaseLabel.CONE_TOWARD_APEX_NEAR
    if tx < 0.0 and not _on_cone_ray(target):
        return CaseLabel.CONE_TOWARD_APEX_FAR
    return CaseLabel.CONE_ONTO_RAY


def _cone_vertices(source, target, case, spread_v=0.0):
    sx, sy = source
    tx, ty = target
    origin = (0.0, 0.0)
    if case is CaseLabel.RAY_TO_RAY:
        verts = [source, target]
    elif case is CaseLabel.RAY_INTO_CONE:
        verts = [source, origin, target]
    elif case in (CaseLabel.CONE_AWAY_FROM_APEX, CaseLabel.CONE_TOWARD_APEX_NEAR):
        verts = [source, target]
    elif case is CaseLabel.CONE_TOWARD_APEX_FAR:
        mid = (sx / 2.0, sx * ty / (2.0 * tx))
        verts = [source, mid, target]
    else:  # CONE_ONTO_RAY: spread slice at sx/2 covers |y| <= |sx|/6
        mid = (sx / 2.0, spread_v * CONE_SLOPE * abs(sx) / 2.0)
        verts = [source, mid, origin, target]
    return _dedupe(verts)


def select_geodesic_cone(source, target):
    """Chosen geodesic for the cone space; spreads use their axis member."""
    case = _cone_case(source, target)
    return constant_speed_path(_cone_vertices(source, target, case)), case


def _in_lens(p, tol=1e-9):
    return 9.0 * abs(p[1]) <= LENS_TIP - abs(p[0]) + tol


def _on_suspension_segment(p, tol=1e-9):
    return abs(p[1]) <= tol and LENS_TIP - tol <= abs(p[0]) <= math.pi / 2 + tol


def _lens_halfheight(x):
    return LENS_SLOPE * (LENS_TIP - abs(x))


def _suspension_case_right(source, target):
    """Case for a pair already normalized to source.x <= target.x."""
    sx, sy = source
    tx, ty = target
    if abs(sx) >= LENS_TIP - _EPS and abs(tx) >= LENS_TIP - _EPS:
        return CaseLabel.SLICE_UNIFORM_1D
    if sx <= -LENS_TIP:
        return CaseLabel.RAY_INTO_LENS
    s_star = max(0.0, (LENS_TIP + 4.0 * sx) / 5.0)
    if tx <= s_star + _EPS:
        return CaseLabel.LENS_EUCLIDEAN
    if tx <= LENS_TIP:
        return CaseLabel.LENS_PAST_EQUIDISTANT
    return CaseLabel.LENS_ONTO_RAY


def _suspension_vertices_right(source, target, case, spread_v=0.0):
    sx, sy = source
    tx, ty = target
    if case is CaseLabel.SLICE_UNIFORM_1D:
        if sx <= -LENS_TIP and tx >= LENS_TIP:
            bow = (0.0, spread_v * _lens_halfheight(0.0))
            verts = [source, (-LENS_TIP, 0.0), bow, (LENS_TIP, 0.0), target]
        else:
            verts = [source, target]
    elif case is CaseLabel.RAY_INTO_LENS:
        verts = [source, (-LENS_TIP, 0.0)]
        if tx > 0.0:
            # the carrier line c*y = tip - |x| through the target bends at 0
            verts.append((0.0, ty * LENS_TIP / (LENS_TIP - tx)))
        verts.append(target)
    elif case is CaseLabel.LENS_EUCLIDEAN:
        verts = [source, target]
    elif case is CaseLabel.LENS_PAST_EQUIDISTANT:
        s_star = max(0.0, (LENS_TIP + 4.0 * sx) / 5.0)
        denom = LENS_TIP - tx
        yp = 0.0 if denom <= _EPS else ty * (LENS_TIP - s_star) / denom
        verts = [source, (s_star, yp), target]
    else:  # LENS_ONTO_RAY
        s_star = max(0.0, (LENS_TIP + 4.0 * sx) / 5.0)
        yp = spread_v * _lens_halfheight(s_star)
        verts = [source, (s_star, yp), (LENS_TIP, 0.0), target]
    return _dedupe(verts)


def _suspension_select(source, target, spread_v=0.0):
    for p in (source, target):
        if not (_in_lens(p) or _on_suspension_segment(p)):
            raise ValueError(f"point {tuple(p)} is not in the suspension space")
    if source[0] <= target[0]:
        case = _suspension_case_right(source, target)
        return _suspension_vertices_right(source, target, case, spread_v), case
    refl_s = (-source[0], source[1])
    refl_t = (-target[0], target[1])
    case = _suspension_case_right(refl_s, refl_t)
    verts = _suspension_vertices_right(refl_s, refl_t, case, spread_v)
    return [(-x, y) for x, y in verts], case


def select_geodesic_suspension(source, target):
    """Chosen geodesic for the suspension space; mirrored when target.x < source.x."""
    verts, case = _suspension_select(source, target)
    return constant_speed_path(verts), case


_SPREAD_CASES = {CaseLabel.CONE_ONTO_RAY, CaseLabel.LENS_ONTO_RAY}


def select_transport(space_tag: str, source, target, spread: int = 1):
    """Transport rays from a Dirac source to one target.

    Returns a list of (vertices, weight_fraction, case).  Cases whose plan
    spreads mass over an intermediate slice before contracting are realized
    as `spread` composite geodesics per target, uniform over the slice; each
    composite is itself a geodesic.
    """
    if space_tag == "cone":
        case = _cone_case(source, target)
        make = lambda v: _cone_vertices(source, target, case, v)
        crossing = case in _SPREAD_CASES
    elif space_tag == "suspension":
        verts0, case = _suspension_select(source, target)
        crossing = case in _SPREAD_CASES or (
            case is CaseLabel.SLICE_UNIFORM_1D
            and min(source[0], target[0]) <= -LENS_TIP
            and max(source[0], target[0]) >= LENS_TIP
        )
        make = lambda v: _suspension_select(source, target, v)[0]
    else:
        raise ValueError(f"unknown space tag {space_tag!r}")
    if not crossing or spread <= 1:
        return [(make(0.0), 1.0, case)]
    vs = -1.0 + (np.arange(spread) + 0.5) * 2.0 / spread
    return [(make(float(v)), 1.0 / spread, case) for v in vs]


# ---------------------------------------------------------------------------
# Analytic density-ratio ceilings
# ---------------------------------------------------------------------------

def analytic_density_ratio(space_tag: str, case: CaseLabel, source, target, t: float) -> float:
    """Density ratio (d mu_t / d ref) / (d mu_1 / d ref) along the selection.

    Exact where a closed form exists, an upper bound otherwise.  The
    suspension cases combine the projected one-dimensional ratio with the
    slice-height quotient of the spread stage.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    sx, sy = float(source[0]), float(source[1])
    tx, ty = float(target[0]), float(target[1])
    if space_tag == "cone":
        if case in (CaseLabel.RAY_TO_RAY, CaseLabel.RAY_INTO_CONE):
            return 1.0 / t
        if case is CaseLabel.CONE_AWAY_FROM_APEX:
            return 1.0 / t ** 2
        if case is CaseLabel.CONE_TOWARD_APEX_NEAR:
            beta = 2.0 * (sx - tx) / sx
            return (1.0 + beta * (1.0 - t)) / t ** 2
        # far / onto-ray share the split at t1 = sx / (2 (sx - tx))
        beta = 2.0 * (sx - tx) / sx
        t1 = 1.0 / beta
        if t >= t1:
            return 1.0 / t
        return (2.0 - beta * t) / (beta * t) ** 2
    if space_tag != "suspension":
        raise ValueError(f"unknown space tag {space_tag!r}")
    if sx > tx:
        sx, tx = -sx, -tx
    x_t = sx + t * (tx - sx)
    projected = math.cos(tx) ** 2 / (t * math.cos(x_t) ** 2)
    if case in (CaseLabel.SLICE_UNIFORM_1D, CaseLabel.RAY_INTO_LENS):
        return projected
    if case is CaseLabel.LENS_EUCLIDEAN:
        return _lens_halfheight(x_t) / (t ** 2 * _lens_halfheight(tx))
    # broken lens cases: fan to the equidistant slice, then projected
    s_star = max(0.0, (LENS_TIP + 4.0 * sx) / 5.0)
    t0 = (s_star - sx) / (tx - sx)
    if t >= t0:
        return projected
    hq = _lens_halfheight(x_t) / _lens_halfheight(s_star)
    return t0 * hq * math.cos(tx) ** 2 / (t ** 2 * math.cos(x_t) ** 2)


# ---------------------------------------------------------------------------
# Discretized plans
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ContractionPlan:
    """Weighted family of geodesics from a Dirac source to a target set.

    Weights are proportional to the reference mass of each target bin and
    sum to one.  Geodesics are stored packed for vectorized evaluation.
    """

    space_tag: str
    source: Point
    targets: np.ndarray
    weights: np.ndarray
    lengths: np.ndarray
    labels: list
    total_target_mass: float
    bin_size: float
    n_v: int
    verts: np.ndarray
    bps: np.ndarray
    n_verts: np.ndarray

    def __len__(self):
        return self.targets.shape[0]

    def positions_at(self, t: float) -> np.ndarray:
        """Evaluate every geodesic at parameter t (vectorized)."""
        if not 0.0 <= t <= 1.0:
            raise ValueError("t must lie in [0, 1]")
        j = (self.bps < t).sum(axis=1)
        j = np.clip(j, 1, self.bps.shape[1] - 1)
        a = np.take_along_axis(self.bps, (j - 1)[:, None], axis=1)[:, 0]
        b = np.take_along_axis(self.bps, j[:, None], axis=1)[:, 0]
        den = b - a
        u = np.where(den > 0.0, (t - a) / np.where(den > 0.0, den, 1.0), 0.0)
        u = np.clip(u, 0.0, 1.0)[:, None]
        p = np.take_along_axis(self.verts, (j - 1)[:, None, None].repeat(2, 2), axis=1)[:, 0, :]
        q = np.take_along_axis(self.verts, j[:, None, None].repeat(2, 2), axis=1)[:, 0, :]
        return (1.0 - u) * p + u * q

    def iter_paths(self):
        for i in range(len(self)):
            k = int(self.n_verts[i])
            yield GeodesicPath(self.verts[i, :k], float(self.lengths[i]), self.bps[i, :k])


def _pack_paths(vertex_lists):
    kmax = max(len(v) for v in vertex_lists)
    n = len(vertex_lists)
    verts = np.zeros((n, kmax, 2))
    bps = np.ones((n, kmax))
    lengths = np.zeros(n)
    n_verts = np.zeros(n, dtype=np.int64)
    for i, vl in enumerate(vertex_lists):
        pts = np.asarray(vl, dtype=float)
        legs = np.max(np.abs(np.diff(pts, axis=0)), axis=1)
        total = float(legs.sum())
        if total <= 0.0 or np.any(legs <= 0.0):
            raise ValueError("degenerate transport ray")
        k = len(vl)
        verts[i, :k] = pts
        verts[i, k:] = pts[-1]
        bps[i, 0] = 0.0
        bps[i, 1:k] = np.cumsum(legs) / total
        bps[i, k - 1] = 1.0
        lengths[i] = total
        n_verts[i] = k
    return verts, bps, lengths, n_verts


def build_contraction(space: PlanarSpace, source, rect, bin_size: float = None,
                      subdivide: int = 4, n_v: int = None, spread_factor: int = 4) -> ContractionPlan:
    """Discretize rect's intersection with the space into weighted bins and
    attach the selected geodesic(s) from the source to each bin center.

    Region bins live in slice-fraction coordinates (x-band times a fraction
    of the local slice), so bin masses are exact.  Target sub-bins are a
    factor `subdivide` finer than the density-field cells to keep the
    deposited combs well below the cell Nyquist spacing.

    Raises on an empty intersection or when a bin center hits the source.
    """
    x0, x1, y0, y1 = (float(v) for v in rect)
    if x1 <= x0:
        raise ValueError("empty rectangle")
    if bin_size is None:
        (bx0, bx1), (by0, by1) = space.bounds()
        bin_size = max(bx1 - bx0, by1 - by0) / 400.0
    sub = bin_size / subdivide
    src = Point(float(source[0]), float(source[1]))
    if not space.contains(src, 1e-9):
        raise ValueError(f"source {tuple(src)} is not in the space")

    entries = []  # (target, mass)
    # fraction cells resolve the vertical direction wherever mass travels,
    # not only on the target slices, so keep them on for every plan
    n_v_plan = 16 if n_v is None else n_v
    for region in space.regions:
        lo = max(x0, region.x_lo)
        hi = min(x1, region.x_hi)
        if hi <= lo:
            continue
        k0 = math.floor(lo / sub)
        k1 = math.ceil(hi / sub)
        for k in range(k0, k1):
            a = max(lo, k * sub)
            b = min(hi, (k + 1) * sub)
            if b - a <= sub * 1e-9:
                continue
            cx = 0.5 * (a + b)
            h = float(region.half_height(cx))
            if h <= 0.0:
                continue
            v_lo = max(-1.0, y0 / h)
            v_hi = min(1.0, y1 / h)
            if v_hi <= v_lo:
                continue
            mass_x = region.mass(a, b)
            n_sv = n_v_plan * subdivide
            frac = (v_hi - v_lo) / n_sv
            for j in range(n_sv):
                vc = v_lo + (j + 0.5) * frac
                entries.append((Point(cx, vc * h), mass_x * frac / 2.0))
    for seg in space.segments:
        if not (y0 <= seg.y <= y1):
            continue
        lo = max(x0, seg.x_lo)
        hi = min(x1, seg.x_hi)
        if hi <= lo:
            continue
        k0 = math.floor(lo / sub)
        k1 = math.ceil(hi / sub)
        for k in range(k0, k1):
            a = max(lo, k * sub)
            b = min(hi, (k + 1) * sub)
            if b - a <= sub * 1e-9:
                continue
            m = seg.mass(a, b)
            if m > 0.0:
                entries.append((Point(0.5 * (a + b), seg.y), m))
    if not entries:
        raise ValueError("rectangle does not intersect the space")

    total = sum(m for _, m in entries)
    spread = spread_factor * n_v_plan
    targets, weights, labels, vertex_lists = [], [], [], []
    for tgt, mass in entries:
        if chebyshev_dist(tgt, src) < sub / 2.0:
            raise ValueError("a target bin center falls on the source point")
        for verts, frac, case in select_transport(space.tag, src, tgt, spread):
            targets.append(tgt)
            weights.append(mass * frac / total)
            labels.append(case)
            vertex_lists.append(verts)
    verts, bps, lengths, n_verts = _pack_paths(vertex_lists)

    # length == extrinsic distance certifies the geodesic property for
    # constant-speed polylines (the 1-Lipschitz bound holds by construction)
    ext = np.maximum(np.abs(np.array([t[0] for t in targets]) - src.x),
                     np.abs(np.array([t[1] for t in targets]) - src.y))
    if np.max(np.abs(lengths - ext)) > 1e-9 * max(1.0, float(np.max(lengths))):
        worst = int(np.argmax(np.abs(lengths - ext)))
        raise AssertionError(
            f"selected path is not length-minimizing for target {targets[worst]}")

    return ContractionPlan(
        space_tag=space.tag,
        source=src,
        targets=np.asarray(targets, dtype=float),
        weights=np.asarray(weights, dtype=float),
        lengths=lengths,
        labels=labels,
        total_target_mass=total,
        bin_size=float(bin_size),
        n_v=int(n_v_plan),
        verts=verts,
        bps=bps,
        n_verts=n_verts,
    )
