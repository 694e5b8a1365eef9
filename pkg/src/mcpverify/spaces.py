"""The two glued counterexample spaces with their weighted measures.

Both carry the Chebyshev metric.  The cone space glues a leftward wedge
(slice-uniform weight whose first-coordinate marginal is Lebesgue) to a
rightward ray with unit density.  The suspension space glues a thin lens to
two outer segments so that the first-coordinate marginal is cos^2(x) on
[-pi/2, pi/2].  Space objects are immutable; share them freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PlanarSpace, Point, Region2D, Segment1D

LENS_TIP = 0.25          # |x| of the lens tips of the suspension space
LENS_SLOPE = 1.0 / 9.0   # half-height growth rate of the lens
CONE_SLOPE = 1.0 / 3.0   # half-height growth rate of the cone


@dataclass(eq=False)
class ConeSpace(PlanarSpace):
    x_min: float = 0.0
    x_max: float = 0.0
    slope: float = CONE_SLOPE


@dataclass(eq=False)
class SuspensionSpace(PlanarSpace):
    pass


def _cos2_cdf(x):
    return 0.5 * np.asarray(x) + 0.25 * np.sin(2.0 * np.asarray(x))


def cone_space(x_min: float = 6.0, x_max: float = 6.0, slope: float = CONE_SLOPE) -> ConeSpace:
    """Cone-plus-ray space, truncated to x in [-x_min, x_max].

    The wedge {x <= 0, |y| <= slope*|x|} carries density 1/(2*slope*|x|),
    so each vertical slice has unit mass per unit x and the projection of
    the measure to the first coordinate is Lebesgue.  The ray [0, x_max]
    carries unit linear density.  All transport cases are invariant under
    the cone homothety, so the truncation does not restrict coverage.
    """
    if x_min <= 0 or x_max <= 0:
        raise ValueError("truncation extents must be positive")
    region = Region2D(
        name="cone",
        x_lo=-float(x_min),
        x_hi=0.0,
        half_height=lambda x: slope * np.abs(x),
        density_profile=lambda x: 1.0 / (2.0 * slope * np.abs(x)),
        marginal_density=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        marginal_cdf=lambda x: np.asarray(x, dtype=float),
        peak_x=-float(x_min),
    )
    ray = Segment1D(
        name="ray",
        x_lo=0.0,
        x_hi=float(x_max),
        y=0.0,
        density_profile=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        mass_cdf=lambda x: np.asarray(x, dtype=float),
    )
    return ConeSpace(
        regions=(region,),
        segments=(ray,),
        tag="cone",
        gluing_points=(Point(0.0, 0.0),),
        x_min=float(x_min),
        x_max=float(x_max),
        slope=slope,
    )


def suspension_space() -> SuspensionSpace:
    """Maximal-diameter space: lens plus two outer segments.

    The lens {|x| <= 1/4, 9|y| <= 1/4 - |x|} carries the density
    cos^2(x) * 9 / (2 (1/4 - |x|)), constant on vertical slices; the
    segments [-pi/2, -1/4] and [1/4, pi/2] carry linear density cos^2(x).
    Total mass is the integral of cos^2 over [-pi/2, pi/2] = pi/2.
    """
    lens = Region2D(
        name="lens",
        x_lo=-LENS_TIP,
        x_hi=LENS_TIP,
        half_height=lambda x: LENS_SLOPE * (LENS_TIP - np.abs(x)),
        density_profile=lambda x: np.cos(x) ** 2 / (2.0 * LENS_SLOPE * (LENS_TIP - np.abs(x))),
        marginal_density=lambda x: np.cos(x) ** 2,
        marginal_cdf=_cos2_cdf,
        peak_x=0.0,
    )
    half = math.pi / 2
    segs = tuple(
        Segment1D(
            name=name,
            x_lo=lo,
            x_hi=hi,
            y=0.0,
            density_profile=lambda x: np.cos(x) ** 2,
            mass_cdf=_cos2_cdf,
        )
        for name, lo, hi in (("left", -half, -LENS_TIP), ("right", LENS_TIP, half))
    )
    return SuspensionSpace(
        regions=(lens,),
        segments=segs,
        tag="suspension",
        gluing_points=(Point(-LENS_TIP, 0.0), Point(LENS_TIP, 0.0)),
    )


def slice_height(space: PlanarSpace, x: float) -> float:
    """Lebesgue measure of the vertical slice of the 2D part at x.

    Returns 0 where only a segment (or nothing) lives.
    """
    total = 0.0
    for r in space.regions:
        if r.x_lo <= x <= r.x_hi:
            total += 2.0 * float(r.half_height(x))
    return total


def projected_density(space: PlanarSpace, x: float) -> float:
    """Density of the first-coordinate pushforward of the reference measure."""
    for r in space.regions:
        if r.x_lo <= x <= r.x_hi:
            return float(r.marginal_density(x))
    for s in space.segments:
        if s.x_lo <= x <= s.x_hi:
            return float(s.density_profile(x))
    raise ValueError(f"x={x} outside the space extent")
