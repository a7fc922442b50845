"""Characteristics-lattice stepping: table precomputation and drivers.

One time step moves every component along its exact characteristic by
dt; since the speeds are autonomous, the foot of each characteristic is
the same every step and everything geometric can be tabulated once per
solve: foot indices and interpolation weights for interior nodes, and
crossing data (partial path time, boundary kind, secondary backtrace
tables for reflected values) for the nodes whose characteristic meets a
boundary inside the step.  The zero-order coupling term is integrated
along each characteristic segment with a predictor-corrector trapezoid.

The per-step work lives in a kernel with two interchangeable backends
(compiled extension or numpy); this module owns the tables and the time
loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..speeds import SpeedProfile
from .errors import GridRefusalError, NumericsError
from .kernels import get_backend


@dataclass
class StepTables:
    """Per-solve geometry tables consumed by the step kernels.

    Components are 0-based here.  For component i, rows cross[i] many
    grid nodes at the inflow end (a prefix of the grid when the inflow
    boundary is x=0, a suffix when it is x=1); the remaining nodes are
    interior and use idx/w foot interpolation.  h is the path time of
    the final segment (dt on interior nodes), delta = dt - h the time
    spent before the boundary crossing.  Reflected components carry
    secondary tables: sidx/sw[la, k, q] interpolate source component q
    at the backtraced boundary-entry foot for the k-th crossed node.
    refl is the reflection matrix (rows: reflected components, columns:
    source components); src_comps lists the source component indices.
    """

    direction: str  # "adjoint" or "forward"
    n: int
    p: int
    nx: int
    dt: float
    idx: np.ndarray  # (n, nx) int32
    w: np.ndarray  # (n, nx) float64
    h: np.ndarray  # (n, nx) float64
    ncross: np.ndarray  # (n,) int32
    cross_low: np.ndarray  # (n,) bool: True when the crossing is at x=0
    delta: np.ndarray  # (n, nx) float64, only crossed rows meaningful
    refl: np.ndarray  # (n_refl, n_src) float64
    refl_comps: np.ndarray  # (n_refl,) int32: which components reflect
    src_comps: np.ndarray  # (n_src,) int32
    sidx: np.ndarray  # (n_refl, maxc, n_src) int32
    sw: np.ndarray  # (n_refl, maxc, n_src) float64
    ctrl_comps: np.ndarray  # (n_ctrl,) int32: components fed by a control
    ctrl_frac: np.ndarray  # (n_ctrl, maxc) float64 time weights, crossed rows


def _foot_tables(xs_in: np.ndarray, nx: int):
    dx = 1.0 / (nx - 1)
    pos = np.clip(xs_in, 0.0, 1.0) / dx
    idx = np.minimum(pos.astype(np.int64), nx - 2).astype(np.int32)
    w = pos - idx
    return idx, np.clip(w, 0.0, 1.0)


def build_tables(
    profile: SpeedProfile,
    reflection: np.ndarray,
    direction: str,
    nx: int,
    dt: float,
) -> StepTables:
    """Tabulate one solve's step geometry.

    reflection is R^T (m x p) for the adjoint direction and Q (p x m)
    for the forward direction.
    """
    n, p = profile.n, profile.p
    x = np.linspace(0.0, 1.0, nx)
    t_full = profile._transit_cum_f[:, -1]
    if dt >= t_full.min():
        raise GridRefusalError(
            "time step exceeds the fastest transit; increase nt"
        )
    phis = np.stack([_phi(profile, i, x) for i in range(n)])

    idx = np.zeros((n, nx), dtype=np.int32)
    w = np.zeros((n, nx))
    h = np.full((n, nx), dt)
    delta = np.zeros((n, nx))
    ncross = np.zeros(n, dtype=np.int32)
    cross_low = np.zeros(n, dtype=bool)

    if direction == "adjoint":
        # negative comps advance toward x=0 in step clock: foot upstream at
        # larger transit; they cross at x=1.  positive comps the reverse.
        away = [phis[i] + dt if i < p else phis[i] - dt for i in range(n)]
        for i in range(n):
            t_i = t_full[i]
            tau = away[i]
            if i < p:
                crossed = tau > t_i
                cross_low[i] = False
                h[i, crossed] = t_i - phis[i, crossed]
            else:
                crossed = tau < 0.0
                cross_low[i] = True
                h[i, crossed] = phis[i, crossed]
            delta[i, crossed] = dt - h[i, crossed]
            feet = _phi_inv(profile, i, np.clip(tau, 0.0, t_i))
            idx[i], w[i] = _foot_tables(feet, nx)
            ncross[i] = int(np.count_nonzero(crossed))
        refl_comps = np.arange(p, n, dtype=np.int32)
        src_comps = np.arange(0, p, dtype=np.int32)
        ctrl_comps = np.zeros(0, dtype=np.int32)
    elif direction == "forward":
        away = [phis[i] - dt if i < p else phis[i] + dt for i in range(n)]
        for i in range(n):
            t_i = t_full[i]
            tau = away[i]
            if i < p:
                crossed = tau < 0.0
                cross_low[i] = True
                h[i, crossed] = phis[i, crossed]
            else:
                crossed = tau > t_i
                cross_low[i] = False
                h[i, crossed] = t_i - phis[i, crossed]
            delta[i, crossed] = dt - h[i, crossed]
            feet = _phi_inv(profile, i, np.clip(tau, 0.0, t_i))
            idx[i], w[i] = _foot_tables(feet, nx)
            ncross[i] = int(np.count_nonzero(crossed))
        refl_comps = np.arange(0, p, dtype=np.int32)
        src_comps = np.arange(p, n, dtype=np.int32)
        ctrl_comps = np.arange(p, n, dtype=np.int32)
    else:
        raise ValueError(f"unknown direction {direction!r}")

    maxc = int(ncross.max()) if len(ncross) else 0
    n_refl, n_src = len(refl_comps), len(src_comps)
    sidx = np.zeros((n_refl, max(maxc, 1), n_src), dtype=np.int32)
    sw = np.zeros((n_refl, max(maxc, 1), n_src))
    for a, i in enumerate(refl_comps):
        nc = ncross[i]
        if nc == 0:
            continue
        rows = _crossed_rows(int(nc), bool(cross_low[i]), nx)
        deltas = delta[i, rows]
        for b, q in enumerate(src_comps):
            feet = _phi_inv(profile, int(q), deltas)
            si, swt = _foot_tables(feet, nx)
            sidx[a, :nc, b] = si
            sw[a, :nc, b] = swt

    n_ctrl = len(ctrl_comps)
    ctrl_frac = np.zeros((n_ctrl, max(maxc, 1)))
    for a, i in enumerate(ctrl_comps):
        nc = ncross[i]
        if nc == 0:
            continue
        rows = _crossed_rows(int(nc), bool(cross_low[i]), nx)
        ctrl_frac[a, :nc] = delta[i, rows] / dt

    return StepTables(
        direction=direction,
        n=n,
        p=p,
        nx=nx,
        dt=dt,
        idx=idx,
        w=w,
        h=h,
        ncross=ncross,
        cross_low=cross_low,
        delta=delta,
        refl=np.ascontiguousarray(reflection, dtype=float),
        refl_comps=refl_comps,
        src_comps=src_comps,
        sidx=sidx,
        sw=sw,
        ctrl_comps=ctrl_comps,
        ctrl_frac=ctrl_frac,
    )


def _phi(profile: SpeedProfile, i: int, x: np.ndarray) -> np.ndarray:
    from ..speeds import _transit_array

    return _transit_array(profile, i + 1, x)


def _phi_inv(profile: SpeedProfile, i: int, s: np.ndarray) -> np.ndarray:
    from ..speeds import _transit_inverse_array

    return _transit_inverse_array(profile, i + 1, np.atleast_1d(np.asarray(s, dtype=float)))


def _crossed_rows(nc: int, low: bool, nx: int) -> slice:
    return slice(0, nc) if low else slice(nx - nc, nx)


def run(
    tables: StepTables,
    coupling_nodes: np.ndarray | None,
    z0: np.ndarray,
    nt: int,
    controls: np.ndarray | None = None,
    record_values: bool = False,
    record_edges: int = 1,
    backend: str | None = None,
):
    """March nt-1 steps from z0 of shape (n, nx, B).

    Returns (left, right, final, values): edge samples of shape
    (nt, n, record_edges, B) ordered outward from each boundary, the
    final state, and the full (nt, n, nx, B) history when record_values
    is set (None otherwise).  controls is an (nt, n_ctrl) array for the
    forward direction.
    """
    kernel = get_backend(backend)
    n, nx, batch = z0.shape
    if (n, nx) != (tables.n, tables.nx):
        raise ValueError("state shape does not match tables")
    d = record_edges
    z = np.ascontiguousarray(z0, dtype=float)
    left = np.empty((nt, n, d, batch))
    right = np.empty((nt, n, d, batch))
    values = np.empty((nt, n, nx, batch)) if record_values else None
    if len(tables.ctrl_comps) and controls is None:
        controls = np.zeros((nt, len(tables.ctrl_comps)))
    zeros_u = np.zeros(len(tables.ctrl_comps))

    def record(j, state):
        left[j] = state[:, :d]
        right[j] = state[:, : nx - d - 1 : -1]
        if values is not None:
            values[j] = state

    record(0, z)
    for j in range(nt - 1):
        u0 = controls[j] if controls is not None else zeros_u
        u1 = controls[j + 1] if controls is not None else zeros_u
        z = kernel.step(tables, coupling_nodes, z, u0, u1)
        record(j + 1, z)
    if not np.isfinite(z).all():
        raise NumericsError("solve produced non-finite values")
    return left, right, z, values
