"""Numerical certification of measure contraction properties for two
weighted planar Chebyshev spaces: a cone-plus-ray and a maximal-diameter
lens-plus-segments space."""

from .contraction import (
    CaseLabel,
    ContractionPlan,
    DistortionParams,
    analytic_density_ratio,
    build_contraction,
    contraction_bound,
    distortion_coefficient,
    model_sine,
    select_geodesic_cone,
    select_geodesic_suspension,
)
from .geometry import (
    GeodesicPath,
    PlanarSpace,
    Point,
    Region2D,
    Segment1D,
    ball_measure,
    chebyshev_dist,
    constant_speed_path,
    contains,
    intrinsic_distance,
    is_geodesic,
)
from .spaces import (
    ConeSpace,
    SuspensionSpace,
    cone_space,
    projected_density,
    slice_height,
    suspension_space,
)
from .verifier import (
    CheckReport,
    DensityField,
    cd_failure_search,
    diameter,
    diameter_check,
    dimension_check,
    dimension_exponent,
    f_check,
    geodesicity_suite,
    large_l_chain_check,
    tangent_blowup_compare,
    transport_density_field,
    verify_mcp,
)

__version__ = "0.1.0"
