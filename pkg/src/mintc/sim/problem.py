"""Complete system data and grid containers for the simulators."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import ratmat
from ..canon import BoundaryMatrix
from ..speeds import SpeedProfile


@dataclass(frozen=True)
class ProblemSpec:
    """Speeds, internal coupling and boundary reflection of one system.

    The coupling is piecewise constant on the speed mesh, one n x n
    matrix per mesh cell (None means zero coupling).  The reflection
    matrix R feeding the dual boundary condition is derived here and
    never user-supplied.
    """

    profile: SpeedProfile
    q: BoundaryMatrix
    coupling: np.ndarray | None = None  # (n_cells, n, n)

    def __post_init__(self):
        n, p, m = self.profile.n, self.profile.p, self.profile.m
        if (self.q.p, self.q.m) != (p, m):
            raise ValueError(
                f"boundary matrix is {self.q.p}x{self.q.m}, expected {p}x{m}"
            )
        if self.coupling is not None:
            arr = np.asarray(self.coupling, dtype=float)
            cells = len(self.profile.mesh) - 1
            if arr.shape != (cells, n, n):
                raise ValueError(
                    f"coupling must be one {n}x{n} matrix per mesh cell "
                    f"({cells} cells), got shape {arr.shape}"
                )
            object.__setattr__(self, "coupling", arr)

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def p(self) -> int:
        return self.profile.p

    @property
    def m(self) -> int:
        return self.profile.m

    def q_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.q.entries])

    def reflection_exact(self) -> ratmat.Matrix:
        """R = -N(0) Q P(0)^-1 with N / P the negative / positive speed
        blocks at x = 0, as exact rationals."""
        neg0 = self.profile.negative_block0()
        pos0 = self.profile.positive_block0()
        return tuple(
            tuple(-neg0[i] * self.q.entries[i][j] / pos0[j] for j in range(self.m))
            for i in range(self.p)
        )

    def reflection(self) -> np.ndarray:
        return np.array(
            [[float(v) for v in row] for row in self.reflection_exact()]
        )

    def coupling_at_nodes(self, x: np.ndarray) -> np.ndarray | None:
        """Sample the cellwise coupling at node positions (right-continuous
        at interior breakpoints)."""
        if self.coupling is None:
            return None
        mesh = self.profile._mesh_f
        cell = np.clip(
            np.searchsorted(mesh, x, side="right") - 1, 0, len(mesh) - 2
        )
        return np.ascontiguousarray(np.moveaxis(self.coupling[cell], 0, -1))

    def slope_matrix_at_nodes(self, x: np.ndarray) -> np.ndarray:
        """diag of the speed slopes sampled at node positions: the
        derivative of the diagonal speed matrix, cellwise constant."""
        mesh = self.profile._mesh_f
        cell = np.clip(
            np.searchsorted(mesh, x, side="right") - 1, 0, len(mesh) - 2
        )
        slopes = self.profile._slopes_f[:, cell]  # (n, nx)
        n, nx = slopes.shape
        out = np.zeros((n, n, nx))
        out[np.arange(n), np.arange(n)] = slopes
        return out


def slope_coupling(profile: SpeedProfile) -> np.ndarray:
    """The cellwise coupling matrix diag(speed slopes): the choice that
    makes the dual system pure transport."""
    n = profile.n
    cells = len(profile.mesh) - 1
    out = np.zeros((cells, n, n))
    for c in range(cells):
        for i in range(n):
            h = float(profile.mesh[c + 1] - profile.mesh[c])
            out[c, i, i] = (
                float(profile.values[i][c + 1]) - float(profile.values[i][c])
            ) / h
    return out


@dataclass(frozen=True)
class GridTrajectory:
    """Space-time lattice samples of one solution.

    values has shape (nt, n, nx) with values[j, i, k] the i-th component
    at time t[j], position x[k].  Boundary traces are the boundary
    columns of values.
    """

    t: np.ndarray
    x: np.ndarray
    values: np.ndarray

    @property
    def nt(self) -> int:
        return len(self.t)

    @property
    def nx(self) -> int:
        return len(self.x)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def left_trace(self) -> np.ndarray:
        """(nt, n) samples at x = 0."""
        return self.values[:, :, 0]

    @property
    def right_trace(self) -> np.ndarray:
        """(nt, n) samples at x = 1."""
        return self.values[:, :, -1]

    def component(self, i: int) -> np.ndarray:
        """(nt, nx) samples of component i (1-based)."""
        return self.values[:, i - 1, :]

    def at_time(self, t: float) -> np.ndarray:
        """(n, nx) snapshot nearest to time t."""
        j = int(round((t - self.t[0]) / self.dt))
        j = min(max(j, 0), self.nt - 1)
        return self.values[j]


@dataclass(frozen=True)
class GramianReport:
    """Singular spectrum of a discretized observation map."""

    t: float
    n_basis: int
    singular_values: np.ndarray  # descending

    @property
    def defect(self) -> float:
        """sigma_min / sigma_max; the grid-robust observability score."""
        s = self.singular_values
        if s[0] == 0.0:
            return 0.0
        return float(s[-1] / s[0])
