"""Minimal control time of 1-D linear hyperbolic systems with one-sided
boundary controls, with exact canonical UL-decomposition and a
method-of-characteristics simulator for numerical validation."""

from .canon import (
    BoundaryMatrix,
    CanonicalDecomposition,
    RankDeficiencyError,
    canonical_ul_decompose,
    column_indices,
    is_canonical,
)
from .mintime import (
    TimeReport,
    assignment_time_bruteforce,
    best_assignment_time,
    kernel_chain_indices,
    kernel_chain_time,
    minimal_time,
)
from .speeds import (
    ResonanceClasses,
    SpeedProfile,
    StructureError,
    TravelTimes,
    ValidationError,
    characteristic,
    entry_exit_times,
    resonance_classes,
    transit_position,
    transit_time,
    travel_times,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryMatrix",
    "CanonicalDecomposition",
    "RankDeficiencyError",
    "ResonanceClasses",
    "SpeedProfile",
    "StructureError",
    "TimeReport",
    "TravelTimes",
    "ValidationError",
    "assignment_time_bruteforce",
    "best_assignment_time",
    "canonical_ul_decompose",
    "characteristic",
    "column_indices",
    "entry_exit_times",
    "is_canonical",
    "kernel_chain_indices",
    "kernel_chain_time",
    "minimal_time",
    "resonance_classes",
    "transit_position",
    "transit_time",
    "travel_times",
    "validate",
]
