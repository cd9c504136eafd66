"""Average-curvature FISTA for nonconvex smooth composite problems."""

from .core import (
    CurvatureTriple,
    IterationRecord,
    OracleError,
    ProblemOracle,
    SolverConfig,
    SolverResult,
    SolverState,
    check_stationarity,
    evaluate_phi,
    termination_value,
)
from .diagnostics import DiagnosticsReport, diagnose
from .solver import (
    CurvatureLedger,
    ac_fista_iteration,
    run_ac_acg,
    run_ac_fista,
    run_fista_constant,
)

__version__ = "0.1.0"
