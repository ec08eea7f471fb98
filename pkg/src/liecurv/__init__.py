"""Parallel transport, holonomy, and curvature estimation on trivial SO(3) bundles.

The flat "natural" connection on R^3 (whose curvature two-form is the cross
product), the rolling-sphere connections on the plane and on spheres, Lie
group integrators for the transport equation, small-loop curvature
estimators, and residual checks relating the SO(3) and unit-quaternion
pictures through the double cover.
"""

from .connections import (
    PLANE_ROLLING_PULLBACK,
    POLAR_CAP,
    LocalConnectionForm,
    Surface,
    TotalConnectionForm,
    curvature_closed_form,
    curvature_numeric,
    j_plane,
    natural_alpha,
    natural_form,
    parametric_surface,
    plane_rolling_form,
    pullback_form,
    sphere_surface,
    surface_rolling_form,
    total_form,
)
from .liecore import (
    canonical_quat,
    check_rotation,
    check_unit_quat,
    commutator,
    cross,
    exp_so3,
    expm,
    hat,
    lie_hom_derivative,
    log_so3,
    project_rotation,
    quat_conj,
    quat_exp,
    quat_mul,
    quat_to_rotation,
    rotation_to_quat,
    vee,
)
from .transport import (
    IntegratorConfig,
    PathSpec,
    TransportResult,
    circle,
    commutator_by_flows,
    concat_paths,
    convergence_order,
    great_arc,
    holonomy,
    integration_grid,
    line,
    parallelogram_loop,
    path_from_position,
    polyline,
    reverse_path,
    scale_path,
    small_loop_curvature,
    time_ordered_product,
    transport,
    transport_quat,
)
from .verify import (
    ResidualReport,
    antipodal_check,
    check_alpha_naturality,
    check_curvature_naturality,
    check_omega_naturality,
    check_section_path_independence,
    check_transport_naturality,
    default_span_loops,
    degenerate_span_loops,
    holonomy_span_check,
    inner_unit_sphere_identity,
    lasso_loop,
    lift_transport,
    make_report,
    run_all_checks,
    section_residual,
    sphere_curvature_factor,
    sphere_factor_report,
    unit_sphere_section,
)

__version__ = "0.1.0"
