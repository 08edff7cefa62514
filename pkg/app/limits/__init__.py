from .asymptotics import (
    LimitKind,
    StopLossBracket,
    gamma_ratio_diagnostic,
    limit_kind,
    limit_tail,
    stirling_ratio_asymptote,
    stop_loss_approx_gamma,
    weibull_stop_loss_bounds,
    weibull_tail_upper_bound,
)
from .report import ConvergenceReport, convergence_report, geometric_s_values

__all__ = [
    "LimitKind",
    "StopLossBracket",
    "gamma_ratio_diagnostic",
    "limit_kind",
    "limit_tail",
    "stirling_ratio_asymptote",
    "stop_loss_approx_gamma",
    "weibull_stop_loss_bounds",
    "weibull_tail_upper_bound",
    "ConvergenceReport",
    "convergence_report",
    "geometric_s_values",
]
