"""Simulator and verification harness for Keller-Segel chemotaxis with a
nonlocal logistic source on boxes with zero-flux boundaries."""

from .grid import (
    Grid,
    State,
    field_to_csv,
    integrate,
    linf_norm,
    lp_norm_pow,
    read_snapshot,
    write_snapshot,
)
from .observables import ObservableSeries, SeriesSummary, record, summarize
from .operators import (
    OperatorWorkspace,
    chemo_divergence,
    laplacian,
    nonlocal_source,
)
from .params import (
    ModelParams,
    OdeComparisonResult,
    Regime,
    RegimeReport,
    classify_regime,
    mass_envelope,
    ode_comparison_oracle,
    regime_report,
)
from .stepper import (
    LinearSolverError,
    Recorder,
    RunResult,
    StepOutcome,
    StepperConfig,
    StepStatus,
    Termination,
    adapt_dt,
    helmholtz_solve,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "State",
    "ModelParams",
    "Regime",
    "RegimeReport",
    "OdeComparisonResult",
    "classify_regime",
    "mass_envelope",
    "regime_report",
    "ode_comparison_oracle",
    "integrate",
    "lp_norm_pow",
    "linf_norm",
    "write_snapshot",
    "read_snapshot",
    "field_to_csv",
    "OperatorWorkspace",
    "laplacian",
    "chemo_divergence",
    "nonlocal_source",
    "StepperConfig",
    "StepStatus",
    "StepOutcome",
    "Termination",
    "Recorder",
    "RunResult",
    "LinearSolverError",
    "helmholtz_solve",
    "adapt_dt",
    "step",
    "run",
    "ObservableSeries",
    "SeriesSummary",
    "record",
    "summarize",
    "__version__",
]
