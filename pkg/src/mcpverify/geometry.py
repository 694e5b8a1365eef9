"""Planar Chebyshev (l-infinity) geometry for glued weighted spaces.

A space is a union of weighted 2D regions (vertical-slice symmetric, with
slice-constant density) and weighted horizontal 1D segments.  All operations
here are pure functions of immutable inputs, so they are safe to call from
any number of workers concurrently.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra


class Point(NamedTuple):
    x: float
    y: float


def chebyshev_dist(p, q) -> float:
    """Chebyshev distance: the larger of the two coordinate differences."""
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


@dataclass(frozen=True)
class Region2D:
    """Closed region {x_lo <= x <= x_hi, |y| <= half_height(x)} with a weight.

    The density depends on x only, so every vertical slice carries uniform
    mass.  ``marginal_cdf`` is an antiderivative of
    ``density * 2 * half_height`` and makes slice-band masses exact;
    ``marginal_density`` is its derivative.  ``peak_x`` is the x where
    half_height is largest (the profile must be unimodal), used for the
    tolerant membership test.
    """

    name: str
    x_lo: float
    x_hi: float
    half_height: Callable
    density_profile: Callable
    marginal_density: Callable
    marginal_cdf: Callable
    peak_x: float

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        lo = max(self.x_lo, x - tol)
        hi = min(self.x_hi, x + tol)
        if lo > hi:
            return False
        # half_height is unimodal with maximum at peak_x, so the most
        # permissive slice in the window is the one closest to peak_x.
        xb = min(max(self.peak_x, lo), hi)
        return max(abs(y) - tol, 0.0) <= float(self.half_height(xb))

    def mass(self, a: float, b: float) -> float:
        a = max(a, self.x_lo)
        b = min(b, self.x_hi)
        if b <= a:
            return 0.0
        return float(self.marginal_cdf(b) - self.marginal_cdf(a))


@dataclass(frozen=True)
class Segment1D:
    """Horizontal segment [x_lo, x_hi] x {y} with a linear density in x."""

    name: str
    x_lo: float
    x_hi: float
    y: float
    density_profile: Callable
    mass_cdf: Callable

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return abs(y - self.y) <= tol and self.x_lo - tol <= x <= self.x_hi + tol

    def mass(self, a: float, b: float) -> float:
        a = max(a, self.x_lo)
        b = min(b, self.x_hi)
        if b <= a:
            return 0.0
        return float(self.mass_cdf(b) - self.mass_cdf(a))


@dataclass(eq=False)
class PlanarSpace:
    """Union of weighted regions and segments; immutable after construction.

    Instances hash by identity so graph caches can key on (space, resolution).
    """

    regions: tuple
    segments: tuple
    tag: str = ""
    gluing_points: tuple = ()

    def contains(self, p, tol: float = 1e-9) -> bool:
        x, y = p[0], p[1]
        return any(r.contains(x, y, tol) for r in self.regions) or any(
            s.contains(x, y, tol) for s in self.segments
        )

    def bounds(self):
        xs, ys = [], []
        for r in self.regions:
            xs += [r.x_lo, r.x_hi]
            grid = np.linspace(r.x_lo, r.x_hi, 65)
            ys.append(float(np.max(np.abs(r.half_height(grid)))))
        for s in self.segments:
            xs += [s.x_lo, s.x_hi]
            ys.append(abs(s.y))
        return (min(xs), max(xs)), (-max(ys), max(ys))

    def total_mass(self) -> float:
        m = sum(r.mass(r.x_lo, r.x_hi) for r in self.regions)
        m += sum(s.mass(s.x_lo, s.x_hi) for s in self.segments)
        return m

    def member_mask(self, X, Y):
        """Vectorized closed-set membership for lattice arrays."""
        eps = 1e-12
        mask = np.zeros(X.shape, dtype=bool)
        for r in self.regions:
            inx = (X >= r.x_lo - eps) & (X <= r.x_hi + eps)
            h = r.half_height(np.clip(X, r.x_lo, r.x_hi))
            mask |= inx & (np.abs(Y) <= h + eps)
        for s in self.segments:
            mask |= (np.abs(Y - s.y) <= eps) & (X >= s.x_lo - eps) & (X <= s.x_hi + eps)
        return mask


def contains(space: PlanarSpace, p, tol: float = 1e-9) -> bool:
    """True iff p lies within Chebyshev distance tol of the space."""
    return space.contains(p, tol)


class GeodesicPath:
    """Constant Chebyshev-speed polyline parametrized on [0, 1]."""

    __slots__ = ("vertices", "length", "breakpoints")

    def __init__(self, vertices: Sequence, length: float, breakpoints: Sequence[float]):
        self.vertices = tuple(Point(float(v[0]), float(v[1])) for v in vertices)
        self.length = float(length)
        self.breakpoints = tuple(float(b) for b in breakpoints)

    def at(self, t: float) -> Point:
        if not -1e-12 <= t <= 1 + 1e-12:
            raise ValueError(f"parameter {t} outside [0, 1]")
        t = min(max(t, 0.0), 1.0)
        j = bisect_right(self.breakpoints, t)
        j = min(max(j, 1), len(self.vertices) - 1)
        a, b = self.breakpoints[j - 1], self.breakpoints[j]
        u = 0.0 if b <= a else (t - a) / (b - a)
        p, q = self.vertices[j - 1], self.vertices[j]
        return Point((1.0 - u) * p.x + u * q.x, (1.0 - u) * p.y + u * q.y)

    def __repr__(self):
        return f"GeodesicPath({len(self.vertices)} vertices, length={self.length:.6g})"


def constant_speed_path(vertices: Sequence) -> GeodesicPath:
    """Reparametrize a polyline to constant Chebyshev speed.

    Breakpoints sit at cumulative-length fractions.  Rejects fewer than two
    vertices, coincident consecutive vertices and zero total length.
    """
    pts = [Point(float(v[0]), float(v[1])) for v in vertices]
    if len(pts) < 2:
        raise ValueError("need at least two vertices")
    legs = [chebyshev_dist(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
    if any(l == 0.0 for l in legs):
        raise ValueError("consecutive vertices must be distinct")
    total = sum(legs)
    if total <= 0.0:
        raise ValueError("degenerate path of zero length")
    acc, bps = 0.0, [0.0]
    for l in legs[:-1]:
        acc += l
        bps.append(acc / total)
    bps.append(1.0)
    return GeodesicPath(pts, total, bps)


def is_geodesic(space: PlanarSpace, path: GeodesicPath, samples: int = 16,
                tol: float = 1e-8, membership_tol: float = 1e-9) -> bool:
    """Check d(path(s), path(t)) == |s-t| * length on sampled pairs and
    membership of every sampled point."""
    if samples < 2:
        raise ValueError("need at least two samples")
    ts = sorted(set(np.linspace(0.0, 1.0, samples)) | set(path.breakpoints))
    pts = [path.at(t) for t in ts]
    for p in pts:
        if not space.contains(p, membership_tol):
            return False
    for i in range(len(ts)):
        for j in range(i + 1, len(ts)):
            want = (ts[j] - ts[i]) * path.length
            if abs(chebyshev_dist(pts[i], pts[j]) - want) > tol:
                return False
    return True


# ---------------------------------------------------------------------------
# Grid-graph shortest paths (intrinsic distance oracle)
# ---------------------------------------------------------------------------

class _GridGraph:
    """8-connected lattice restricted to the space, with Chebyshev weights.

    Axis and diagonal steps both cost one lattice spacing, which is exactly
    the Chebyshev length of the move, so shortest paths converge to the
    intrinsic metric from above without anisotropy correction.  Chords
    between adjacent in-space nodes stay inside the space because every
    region here is convex and meets the segments on the y = 0 line.
    """

    def __init__(self, space: PlanarSpace, resolution: float, origin=(0.0, 0.0)):
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        self.space = space
        self.h = float(resolution)
        self.origin = (float(origin[0]), float(origin[1]))
        (x0, x1), (y0, y1) = space.bounds()
        pad = self.h
        self.i0 = math.floor((x0 - pad - self.origin[0]) / self.h)
        self.j0 = math.floor((y0 - pad - self.origin[1]) / self.h)
        ni = math.ceil((x1 + pad - self.origin[0]) / self.h) - self.i0 + 1
        nj = math.ceil((y1 + pad - self.origin[1]) / self.h) - self.j0 + 1
        ii = (self.i0 + np.arange(ni))[:, None]
        jj = (self.j0 + np.arange(nj))[None, :]
        X = ii * self.h + self.origin[0] + 0.0 * jj
        Y = jj * self.h + self.origin[1] + 0.0 * ii
        mask = space.member_mask(X, Y)
        self.ids = np.full((ni, nj), -1, dtype=np.int64)
        self.ids[mask] = np.arange(int(mask.sum()))
        self.n = int(mask.sum())
        self.node_xy = np.stack([X[mask], Y[mask]], axis=1)
        rows, cols = [], []
        for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
            si0, si1 = max(0, -di), ni - max(0, di)
            sj0, sj1 = max(0, -dj), nj - max(0, dj)
            a = self.ids[si0:si1, sj0:sj1]
            b = self.ids[si0 + di:si1 + di, sj0 + dj:sj1 + dj]
            ok = (a >= 0) & (b >= 0)
            rows.append(a[ok])
            cols.append(b[ok])
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        w = np.full(rows.shape, self.h)
        self.matrix = csr_matrix((w, (rows, cols)), shape=(self.n, self.n))

    def snap(self, p) -> int:
        """Nearest in-space node id (Chebyshev-nearest)."""
        ci = round((p[0] - self.origin[0]) / self.h)
        cj = round((p[1] - self.origin[1]) / self.h)
        for radius in (1, 2, 4, 8, 16, 32):
            ilo = max(ci - radius - self.i0, 0)
            ihi = min(ci + radius - self.i0, self.ids.shape[0] - 1)
            jlo = max(cj - radius - self.j0, 0)
            jhi = min(cj + radius - self.j0, self.ids.shape[1] - 1)
            block = self.ids[ilo:ihi + 1, jlo:jhi + 1]
            cand = block[block >= 0]
            if cand.size:
                xy = self.node_xy[cand]
                d = np.maximum(np.abs(xy[:, 0] - p[0]), np.abs(xy[:, 1] - p[1]))
                return int(cand[np.argmin(d)])
        raise ValueError(f"no lattice node of the space near {tuple(p)}")

    def distances_from(self, sources):
        return _csgraph_dijkstra(self.matrix, directed=False, indices=sources)


@lru_cache(maxsize=16)
def _grid_graph(space: PlanarSpace, resolution: float) -> _GridGraph:
    return _GridGraph(space, resolution)


def intrinsic_distance(space: PlanarSpace, p, q, resolution: float) -> float:
    """Shortest-path length over the restricted lattice graph.

    Always at least the extrinsic Chebyshev distance (every edge carries its
    true length); converges to the intrinsic metric from above as the
    resolution shrinks.  Disconnected samples report as inf.
    """
    for pt in (p, q):
        if not space.contains(pt, 1e-9):
            raise ValueError(f"point {tuple(pt)} is not in the space")
    if p[0] == q[0] and p[1] == q[1]:
        return 0.0
    g = _grid_graph(space, resolution)
    sp, sq = g.snap(p), g.snap(q)
    d = g.distances_from([sp])[0, sq]
    if not np.isfinite(d):
        return math.inf
    dp = chebyshev_dist(p, g.node_xy[sp])
    dq = chebyshev_dist(q, g.node_xy[sq])
    return float(dp + d + dq)


def intrinsic_distances(space: PlanarSpace, pairs, resolution: float):
    """Batched intrinsic_distance over many (p, q) pairs."""
    g = _grid_graph(space, resolution)
    snaps = [(g.snap(p), g.snap(q)) for p, q in pairs]
    sources = sorted({s for s, _ in snaps})
    src_index = {s: k for k, s in enumerate(sources)}
    D = g.distances_from(sources)
    out = []
    for (p, q), (sp, sq) in zip(pairs, snaps):
        if p[0] == q[0] and p[1] == q[1]:
            out.append(0.0)
            continue
        d = D[src_index[sp], sq]
        if not np.isfinite(d):
            out.append(math.inf)
            continue
        out.append(float(chebyshev_dist(p, g.node_xy[sp]) + d
                         + chebyshev_dist(q, g.node_xy[sq])))
    return out


# ---------------------------------------------------------------------------
# Ball measure
# ---------------------------------------------------------------------------

def ball_measure(space: PlanarSpace, center, radius: float, resolution: float) -> float:
    """Reference mass of the restricted-metric ball (a square intersection).

    Region mass integrates the slice-constant density analytically in y (the
    overlap of the slice with the ball is a closed form) and numerically in
    x with midpoint panels of width <= resolution, so the density blow-up at
    thin slices never gets sampled where the slice height vanishes.
    Segment mass uses the exact antiderivative.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    cx, cy = float(center[0]), float(center[1])
    total = 0.0
    for r in space.regions:
        lo = max(r.x_lo, cx - radius)
        hi = min(r.x_hi, cx + radius)
        if hi <= lo:
            continue
        n = int(min(max(8, math.ceil((hi - lo) / resolution)), 200000))
        edges = np.linspace(lo, hi, n + 1)
        xm = 0.5 * (edges[:-1] + edges[1:])
        h = np.asarray(r.half_height(xm), dtype=float)
        overlap = np.minimum(h, cy + radius) - np.maximum(-h, cy - radius)
        overlap = np.clip(overlap, 0.0, None)
        dens = np.asarray(r.density_profile(xm), dtype=float)
        total += float(np.sum(dens * overlap) * (hi - lo) / n)
    for s in space.segments:
        if abs(cy - s.y) <= radius:
            total += s.mass(cx - radius, cx + radius)
    return total
