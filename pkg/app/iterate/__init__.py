from .engine import (
    EvaluationMethod,
    IteratedEvaluation,
    IterationIndex,
    evaluate_iterated_tail,
    gamma_shape_step_identity,
    iterated_density,
    iterated_mean,
    iterated_moment,
    iterated_tail,
    iterated_tail_gamma_closed,
    iterated_variance,
    log_iterated_tail,
    log_iterated_tail_gamma_closed,
    stop_loss,
)
from .reference import MAX_REFERENCE_DEPTH, reference_iterated_tail

__all__ = [
    "EvaluationMethod",
    "IteratedEvaluation",
    "IterationIndex",
    "evaluate_iterated_tail",
    "gamma_shape_step_identity",
    "iterated_density",
    "iterated_mean",
    "iterated_moment",
    "iterated_tail",
    "iterated_tail_gamma_closed",
    "iterated_variance",
    "log_iterated_tail",
    "log_iterated_tail_gamma_closed",
    "stop_loss",
    "MAX_REFERENCE_DEPTH",
    "reference_iterated_tail",
]
