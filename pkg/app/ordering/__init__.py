from .sfr import (
    VERDICT,
    HeredityCheck,
    OrderCheckResult,
    iterated_failure_rate,
    sfr_check,
    sfr_heredity_check,
)

__all__ = [
    "VERDICT",
    "HeredityCheck",
    "OrderCheckResult",
    "iterated_failure_rate",
    "sfr_check",
    "sfr_heredity_check",
]
