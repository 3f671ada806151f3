"""Stochastic manifold ADMM for composite problems on sphere and Stiefel
manifolds, with a momentum variance-reduced gradient estimator, runtime
dual/feasibility certificates, a subgradient baseline, and a benchmark CLI.
"""

from .baselines import SubgradConfig, run_subgrad, subgrad_step
from .data import (
    Dataset,
    LibsvmParseError,
    gen_classifier_data,
    gen_spca_data,
    parse_libsvm,
    serialize_libsvm,
)
from .estimator import (
    EstimatorState,
    augmented_grad,
    estimation_error,
    init_estimator,
    update_estimator,
)
from .manifolds import Sphere, Stiefel
from .problems import (
    CompositeProblem,
    DenseMap,
    IdentityMap,
    L1Penalty,
    SigmoidMarginOracle,
    SpcaOracle,
    ZeroPenalty,
    make_sphere_classifier,
    make_spca,
    operator_norm,
)
from .solver import (
    ADMM_BATCH_STREAM,
    DATA_STREAM,
    INIT_STREAM,
    SUBGRAD_BATCH_STREAM,
    InvariantViolation,
    KktResiduals,
    SolverConfig,
    SolverState,
    dual_stepsize,
    init_state,
    kkt_from_state,
    kkt_residuals,
    lambda_update,
    run,
    schedule,
    seed_stream,
    step,
    guarantee_condition_warnings,
    x_update,
    y_update,
)
from .trace import TRACE_FIELDS, IterationRecord, TraceSchemaError, read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Sphere",
    "Stiefel",
    "L1Penalty",
    "ZeroPenalty",
    "IdentityMap",
    "DenseMap",
    "SpcaOracle",
    "SigmoidMarginOracle",
    "CompositeProblem",
    "make_spca",
    "make_sphere_classifier",
    "operator_norm",
    "Dataset",
    "LibsvmParseError",
    "parse_libsvm",
    "serialize_libsvm",
    "gen_spca_data",
    "gen_classifier_data",
    "EstimatorState",
    "init_estimator",
    "update_estimator",
    "augmented_grad",
    "estimation_error",
    "SolverConfig",
    "SolverState",
    "KktResiduals",
    "InvariantViolation",
    "guarantee_condition_warnings",
    "seed_stream",
    "DATA_STREAM",
    "INIT_STREAM",
    "ADMM_BATCH_STREAM",
    "SUBGRAD_BATCH_STREAM",
    "schedule",
    "y_update",
    "x_update",
    "dual_stepsize",
    "lambda_update",
    "kkt_residuals",
    "kkt_from_state",
    "init_state",
    "step",
    "run",
    "SubgradConfig",
    "subgrad_step",
    "run_subgrad",
    "TRACE_FIELDS",
    "IterationRecord",
    "TraceSchemaError",
    "read_trace",
    "write_trace",
]
