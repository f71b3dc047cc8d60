"""Principal frequency of the p-Laplacian on rasterized planar and spatial
domains, with the geometric and capacitary quantities needed to verify the
classical bounds relating them: inradius, reduced inradius, Cheeger constant,
p-capacity, interior capacity radius, and measure-based (Lieb) radius.
"""

from .errors import (
    ConfigParse,
    ConformalCase,
    DimensionUnsupported,
    DomainError,
    EmptySet,
    EmptySuperlevel,
    ExponentOutOfRange,
    FeatureTooThin,
    InvalidConfig,
    InvalidExponent,
    InvalidSpec,
    IoError,
    MissingParam,
    NoInteriorBall,
    NoSignChange,
    NonConvergence,
    NotSymmetric,
    PreconditionViolated,
    PSpecError,
    ZeroTrialFunction,
)
from .geometry import (
    GeometrySummary,
    GridDomain,
    ShapeSpec,
    geometry_summary,
    rasterize_ball,
    rasterize_shape,
    scale_spec,
    shape_label,
    spec_area,
)
from .eigensolver import (
    EigenResult,
    ScalarField,
    SolveOptions,
    eigen_limit_case,
    rayleigh_quotient,
    rescale_lambda,
    solve_first_eigen,
)
from .cheeger import (
    CheegerEstimate,
    cheeger_constant,
    cheeger_lambda_bound,
    level_set_sweep,
)
from .capacity import (
    CapacityResult,
    RadiusSearchResult,
    ball_capacity_exact,
    capacity_radius,
    covering_multiplicity_bound,
    is_negligible,
    isocapacity_lower_bound,
    lieb_radius,
    lieb_sigma,
    p_capacity,
    sphere_area,
    unit_ball_volume,
)
from .bounds import (
    BoundId,
    BoundReport,
    evaluate_bound,
    reports_to_csv,
    reports_to_json,
    run_suite,
)
from .nodal import (
    NodalMeasurement,
    check_vanishing,
    glued_antisymmetric_eigenpair,
    nodal_length,
    nodal_scaling_check,
    vanishing_ball_radius,
)
from .runner import (
    RunConfig,
    STANDARD_CATALOG,
    describe_catalog,
    load_config,
    run,
)

__version__ = "0.1.0"
