"""Method-of-characteristics simulators, observability experiments,
witness constructions and gauge transforms."""

from .errors import (
    GridRefusalError,
    NoWitnessError,
    NumericsError,
    SizeRefusalError,
)
from .problem import GramianReport, GridTrajectory, ProblemSpec, slope_coupling
from .semigroup import adjoint_flow_closed_form
from .solver import (
    adjoint_batch,
    default_nt,
    grid_inner,
    grid_norm,
    solve_adjoint,
    solve_forward,
)

__all__ = [
    "GramianReport",
    "GridRefusalError",
    "GridTrajectory",
    "NoWitnessError",
    "NumericsError",
    "ProblemSpec",
    "SizeRefusalError",
    "adjoint_batch",
    "adjoint_flow_closed_form",
    "default_nt",
    "grid_inner",
    "grid_norm",
    "slope_coupling",
    "solve_adjoint",
    "solve_forward",
]
