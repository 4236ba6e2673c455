"""Design and verification toolkit for a cam-on-cone spiral distal scanner."""

from .design import (
    FitSampleSet,
    LinearityReport,
    fit_profile,
    generate_fit_samples,
    linearity_report,
    margin_limit_deflection,
    sum_squared_error,
    validate_design,
    working_range,
)
from .errors import (
    ConescanError,
    ContactLostError,
    ConvergenceError,
    GeometryDomainError,
    InputError,
    NumericalError,
    RequirementViolation,
    SingularFitError,
)
from .geometry import (
    ConicProfile,
    ContactGeometry,
    DesignParams,
    RequirementSpec,
    TipPose,
    cam_travel,
    contact_from_deflection,
    profile_eval,
    radial_margin,
    target_deflection,
    tip_pose,
)
from .kinematics import (
    CamState,
    Trajectory,
    rescale_trajectory,
    simulate_scan,
    solve_deflection,
    tip_position,
)
from .metrics import (
    DragSurrogateParams,
    MatchRatioReport,
    MismatchReport,
    apply_drag_surrogate,
    match_ratio,
    mismatch_C,
    mismatch_D,
    mismatch_report,
    resample,
)
from .planning import (
    CamProgram,
    Rewind,
    ScanPlan,
    constant_cam_speed_program,
    constant_speed_cam_program,
    coverage_report,
    plan_raster,
    plan_spiral,
)
from .reports import ConstraintCheck, ConstraintReport
from .svg import write_svg_plot

__version__ = "0.1.0"
