"""Numerical laboratory for critical-orbit expansion of ``z**d + c`` and ``a*exp(z)``."""

from .core import Disk, Family, MapSpec, OrbitTrace, iterate, preimage_cover, pullback_disk
from .cycles import CycleRecord, detect_attracting_cycle, in_basin, refine_cycle
from .exponents import (
    ExponentEstimate,
    FixedAngle,
    MinDerivative,
    RandomSeeded,
    Reference,
    Verdict,
    backward_orbit,
    forward_exponent_series,
    lower_exponent,
    slow_recurrence_test,
)
from .hyperbolic import (
    CriticalityMode,
    PlissInput,
    criticality_count,
    hyperbolic_density_report,
    hyperbolic_times,
    pliss_times,
    shadow_table,
)

__version__ = "0.1.0"

__all__ = [
    "CriticalityMode",
    "CycleRecord",
    "Disk",
    "ExponentEstimate",
    "Family",
    "FixedAngle",
    "MapSpec",
    "MinDerivative",
    "OrbitTrace",
    "PlissInput",
    "RandomSeeded",
    "Reference",
    "Verdict",
    "backward_orbit",
    "criticality_count",
    "detect_attracting_cycle",
    "forward_exponent_series",
    "hyperbolic_density_report",
    "hyperbolic_times",
    "in_basin",
    "iterate",
    "lower_exponent",
    "pliss_times",
    "preimage_cover",
    "pullback_disk",
    "refine_cycle",
    "shadow_table",
    "slow_recurrence_test",
]
