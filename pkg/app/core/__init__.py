from .distributions import (
    DistributionSpec,
    Family,
    MomentTable,
    density,
    failure_rate,
    inverse_tail,
    log_density,
    log_raw_moment,
    log_tail,
    moment_table,
    raw_moment,
    tail,
    variance,
)
from .special import LOG_FLOAT_MAX, hockey_stick, log_binomial, log_gamma, log_hockey_stick

__all__ = [
    "DistributionSpec",
    "Family",
    "MomentTable",
    "density",
    "failure_rate",
    "inverse_tail",
    "log_density",
    "log_raw_moment",
    "log_tail",
    "moment_table",
    "raw_moment",
    "tail",
    "variance",
    "LOG_FLOAT_MAX",
    "hockey_stick",
    "log_binomial",
    "log_gamma",
    "log_hockey_stick",
]
