from .difference import (
    DiscrepancyRow,
    discrepancy_report,
    gamma_difference_oracle,
    gamma_difference_paper_formula,
)
from .recursion import (
    ConvolutionState,
    conv_with_base,
    convolution_moment_log,
    gamma_closed_iterated_density,
    gamma_iterated_density_recursion,
    general_iterated_convolution,
    uniform_grid,
)

__all__ = [
    "DiscrepancyRow",
    "discrepancy_report",
    "gamma_difference_oracle",
    "gamma_difference_paper_formula",
    "ConvolutionState",
    "conv_with_base",
    "convolution_moment_log",
    "gamma_closed_iterated_density",
    "gamma_iterated_density_recursion",
    "general_iterated_convolution",
    "uniform_grid",
]
