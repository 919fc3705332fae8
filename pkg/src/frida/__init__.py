"""Frechet regression with signed weights on curved spaces, solved by a
proximal difference-of-convex algorithm with curvature-aware safeguards."""

from .curvature import (
    CurvatureDomainError,
    CurvatureProfile,
    SafeSetGeometry,
    alpha_plus,
    b_minus,
    c_minus,
    delta_plus,
    hessian_bounds,
    l_log_pm,
    subproblem_moduli,
    tau,
    trust_radius,
    zeta_minus,
)
from .geometry import (
    Circle,
    GeometryCaps,
    GeometryError,
    Manifold,
    ManifoldPoint,
    Product,
    Sphere,
    TangentVector,
    TorusPatch,
    distance,
    dlog_adjoint,
    exp,
    frechet_mean,
    log,
    transport,
)
from .regression import (
    KERNELS,
    DCObjective,
    RegressionDataset,
    RegressionError,
    SafeRegionReport,
    WeightVector,
    auto_safe_set,
    boundary_distance,
    global_weights,
    gradient,
    local_weights,
    nadaraya_watson_weights,
    nonneg_region_check,
    objective_value,
    safe_region_check,
)
from .solver import (
    ZETA,
    ComplexityReport,
    EpsilonSchedule,
    InnerBudgetError,
    InnerStats,
    IterateRecord,
    RateReport,
    SolveResult,
    SolverConfig,
    StepCertificate,
    StepOutcome,
    Subproblem,
    TraceCheck,
    complexity_check,
    frida_solve,
    frida_step_exact,
    frida_step_inexact,
    gd_solve,
    inner_solve,
    rate_diagnostics,
    relative_error_constant,
    validate_trace,
)
from .checks import MUTATIONS, CheckReport, CheckResult, check_suite
from .dataio import (
    DATASET_SCHEMA,
    MANIFEST_SCHEMA,
    DataIOError,
    ManifestCheck,
    canonical_json,
    dataset_from_json,
    dataset_to_json,
    read_dataset,
    trace_csv,
    verify_manifest,
    write_dataset,
    write_manifest,
)
from .experiments import (
    SUMMARY_SCHEMA,
    ExperimentError,
    RunArtifact,
    SolveRecord,
    objective_grid_csv,
    run_experiment,
    run_preset,
)
from .presets import (
    PRESET_NAMES,
    ExperimentPreset,
    WindowSpec,
    preset,
    s2xs1_effective_curvature,
    torus_chart_profile,
    torus_curvature,
    torus_curvature_extremes,
    torus_curvature_range,
    torus_window_dataset,
    truth_point,
)

__version__ = "0.1.0"
