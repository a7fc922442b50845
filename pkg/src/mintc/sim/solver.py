"""Forward and dual initial-boundary-value solvers on the lattice."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..speeds import travel_times
from .errors import GridRefusalError
from .problem import GridTrajectory, ProblemSpec
from . import stepping


def default_nt(horizon: float, nx: int) -> int:
    """Time resolution tying dt to dx (one cell per unit-speed step)."""
    return max(int(round(horizon * (nx - 1))) + 1, 2)


def _check_grid(spec: ProblemSpec, horizon: float, nx: int, nt: int) -> float:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if nx < 17:
        raise GridRefusalError("need at least 17 space samples")
    if nt < 2:
        raise GridRefusalError("need at least 2 time samples")
    dt = horizon / (nt - 1)
    t_min = min(float(t) for t in travel_times(spec.profile).t)
    if t_min / dt < 16:
        need = int(np.ceil(16 * horizon / t_min)) + 1
        raise GridRefusalError(
            f"grid too coarse: the fastest transit ({t_min:g}) spans fewer "
            f"than 16 time steps; use nt >= {need}"
        )
    return dt


def sample_components(data, n: int, x: np.ndarray) -> np.ndarray:
    """Build an (n, nx) state from None, per-component callables, or an
    already-sampled array."""
    nx = len(x)
    if data is None:
        return np.zeros((n, nx))
    if callable(data):
        raise TypeError("pass one callable per component, not a single one")
    if isinstance(data, np.ndarray):
        arr = np.asarray(data, dtype=float)
        if arr.shape != (n, nx):
            raise ValueError(f"state must have shape ({n}, {nx}), got {arr.shape}")
        return arr.copy()
    if len(data) != n:
        raise ValueError(f"need {n} components, got {len(data)}")
    out = np.zeros((n, nx))
    for i, comp in enumerate(data):
        if comp is None:
            continue
        if callable(comp):
            out[i] = np.asarray(comp(x), dtype=float)
        else:
            arr = np.asarray(comp, dtype=float)
            if arr.shape != (nx,):
                raise ValueError(f"component {i + 1} must have {nx} samples")
            out[i] = arr
    return out


def _control_samples(control, m: int, t: np.ndarray) -> np.ndarray | None:
    if control is None:
        return None
    if callable(control):
        out = np.stack([np.asarray(control(tj), dtype=float) for tj in t])
    else:
        out = np.asarray(control, dtype=float)
    if out.shape != (len(t), m):
        raise ValueError(f"control must have shape ({len(t)}, {m})")
    return out


def dual_coupling_nodes(spec: ProblemSpec, x: np.ndarray) -> np.ndarray | None:
    """Zero-order matrix of the dual equation, -slopes + M^T, at nodes.

    Returns None when it vanishes identically (slope coupling), which
    lets the kernels skip the source sweep and keeps transport exact.
    """
    c = -spec.slope_matrix_at_nodes(x)
    m_nodes = spec.coupling_at_nodes(x)
    if m_nodes is not None:
        c = c + np.swapaxes(m_nodes, 0, 1)
    if not np.any(c):
        return None
    return np.ascontiguousarray(c)


def forward_coupling_nodes(spec: ProblemSpec, x: np.ndarray) -> np.ndarray | None:
    m_nodes = spec.coupling_at_nodes(x)
    if m_nodes is None or not np.any(m_nodes):
        return None
    return np.ascontiguousarray(m_nodes)


def solve_adjoint(
    spec: ProblemSpec,
    z_final,
    horizon: float,
    nx: int = 257,
    nt: int | None = None,
    backend: str | None = None,
) -> GridTrajectory:
    """Solve the dual system backward from its state at t = horizon.

    The dual system transports against the speeds, with zero inflow for
    the negative components at x=1 and the reflected combination R^T z+
    feeding the positive components at x=0; the zero-order term is
    -slopes + M^T.  The returned trajectory is in physical time: row 0
    is t=0 (the fully propagated state), the last row the given final
    data.  The controlled-boundary observation is its right trace.
    """
    nt = nt or default_nt(horizon, nx)
    dt = _check_grid(spec, horizon, nx, nt)
    x = np.linspace(0.0, 1.0, nx)
    t = np.linspace(0.0, horizon, nt)
    z1 = sample_components(z_final, spec.n, x)
    tables = stepping.build_tables(
        spec.profile, spec.reflection().T, "adjoint", nx, dt
    )
    coupling = dual_coupling_nodes(spec, x)
    _, _, _, values = stepping.run(
        tables,
        coupling,
        z1[:, :, None],
        nt,
        record_values=True,
        backend=backend,
    )
    # the run marches the dual clock s = horizon - t; flip to physical time
    return GridTrajectory(t=t, x=x, values=values[::-1, :, :, 0])


def solve_forward(
    spec: ProblemSpec,
    y0,
    horizon: float,
    control=None,
    nx: int = 257,
    nt: int | None = None,
    backend: str | None = None,
) -> GridTrajectory:
    """Solve the state system from y0 with boundary control at x=1.

    control is an (nt, m) sample array or a callable t -> (m,); None
    means no forcing.  Negative components reflect off x=0 through Q.
    """
    nt = nt or default_nt(horizon, nx)
    dt = _check_grid(spec, horizon, nx, nt)
    x = np.linspace(0.0, 1.0, nx)
    t = np.linspace(0.0, horizon, nt)
    state0 = sample_components(y0, spec.n, x)
    tables = stepping.build_tables(spec.profile, spec.q_float(), "forward", nx, dt)
    coupling = forward_coupling_nodes(spec, x)
    u = _control_samples(control, spec.m, t)
    _, _, _, values = stepping.run(
        tables,
        coupling,
        state0[:, :, None],
        nt,
        controls=u,
        record_values=True,
        backend=backend,
    )
    return GridTrajectory(t=t, x=x, values=values[:, :, :, 0])


def adjoint_batch(
    spec: ProblemSpec,
    z_final_batch: np.ndarray,
    horizon: float,
    nt: int | None = None,
    record_edges: int = 1,
    backend: str | None = None,
):
    """Dual solve for a whole batch of final states at once.

    z_final_batch has shape (n, nx, B).  Returns (trace, start) where
    trace holds the (nt, m, record_edges, B) observation samples near
    x=1 (positive components, ordered outward-in, in dual-clock order
    from the final time down to t=0) and start the (n, nx, B) state at
    physical t=0.
    """
    n, nx, batch = z_final_batch.shape
    nt = nt or default_nt(horizon, nx)
    dt = _check_grid(spec, horizon, nx, nt)
    tables = stepping.build_tables(
        spec.profile, spec.reflection().T, "adjoint", nx, dt
    )
    coupling = dual_coupling_nodes(spec, np.linspace(0.0, 1.0, nx))
    _, right, final, _ = stepping.run(
        tables,
        coupling,
        z_final_batch,
        nt,
        record_edges=record_edges,
        backend=backend,
    )
    return right[:, spec.p :, :, :], final


def grid_inner(a: np.ndarray, b: np.ndarray, dx: float) -> float:
    """L2 inner product of two (n, nx) grid states (trapezoid weights)."""
    prod = np.sum(a * b, axis=0)
    return float(np.trapezoid(prod, dx=dx))


def grid_norm(a: np.ndarray, dx: float) -> float:
    return float(np.sqrt(max(grid_inner(a, a, dx), 0.0)))
