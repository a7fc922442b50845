"""Discretized observability experiments.

The observation map sends a final state of the dual system to the
weighted trace of its positive components at x=1 over the horizon.
Assembling it column by column on the per-cell indicator basis gives a
dense matrix whose singular spectrum quantifies observability: the
normalized smallest singular value (the defect) is bounded away from
zero above the minimal control time and collapses below it.

Two discretization details keep the defect faithful to the continuum
dichotomy.  First, the reflection collar (nodes of a negative component
within one step of x=0) is excluded from the basis: the lattice consumes
those values as boundary samples inside a single step, so they are not
state.  Second, a component whose characteristic hops r > 1 cells per
step delivers r cell values through x=1 between consecutive samples;
its trace is therefore quadratured with r sub-nodes per step (by exact
transport those node values are time translates of the boundary
function).
"""

from __future__ import annotations

import numpy as np

from .errors import SizeRefusalError
from .problem import GramianReport, ProblemSpec
from .solver import adjoint_batch, default_nt

MAX_DENSE_BASIS = 4096


def indicator_basis(spec: ProblemSpec, horizon: float, nx: int, nt: int):
    """Per-cell indicator basis as an (n, nx, B) stack plus the kept
    (component, node) list; the reflection collar is omitted."""
    n = spec.n
    dt = horizon / (nt - 1)
    dx = 1.0 / (nx - 1)
    keep: list[tuple[int, int]] = []
    for i in range(n):
        lo = 0
        if i < spec.p:
            speed0 = abs(float(spec.profile.values[i][0]))
            lo = int(np.ceil(speed0 * dt / dx - 1e-9))
        keep.extend((i, k) for k in range(lo, nx))
    basis = np.zeros((n, nx, len(keep)))
    for col, (i, k) in enumerate(keep):
        basis[i, k, col] = 1.0
    return basis, keep


def _trace_depths(spec: ProblemSpec, horizon: float, nx: int, nt: int) -> list[int]:
    """Sub-step trace quadrature depth per positive component."""
    dt = horizon / (nt - 1)
    dx = 1.0 / (nx - 1)
    out = []
    for i in range(spec.p, spec.n):
        hop = abs(float(spec.profile.values[i][-1])) * dt / dx
        out.append(max(1, int(round(hop))))
    return out


def _weighted_rows(spec, trace, horizon, nt, depths) -> np.ndarray:
    """Flatten edge-history samples into sqrt-weighted L2(0,T) rows."""
    dt = horizon / (nt - 1)
    blocks = []
    for j, depth in enumerate(depths):
        lam = abs(float(spec.profile.values[spec.p + j][-1]))
        block = trace[:, j, :depth, :] * (lam * np.sqrt(dt / depth))
        blocks.append(block.reshape(nt * depth, -1))
    return np.concatenate(blocks, axis=0)


def observation_matrix(
    spec: ProblemSpec,
    horizon: float,
    nx: int = 129,
    nt: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Dense matrix of the discretized observation map.

    Rows are time-quadrature samples of the weighted positive trace
    near x=1; columns are the indicator basis elements.
    """
    if spec.n * nx > MAX_DENSE_BASIS:
        raise SizeRefusalError(
            f"dense observation basis {spec.n * nx} exceeds "
            f"{MAX_DENSE_BASIS}; reduce nx"
        )
    nt = nt or default_nt(horizon, nx)
    basis, _ = indicator_basis(spec, horizon, nx, nt)
    depths = _trace_depths(spec, horizon, nx, nt)
    trace, _ = adjoint_batch(
        spec, basis, horizon, nt=nt, record_edges=max(depths), backend=backend
    )
    return _weighted_rows(spec, trace, horizon, nt, depths)


def observability_defect(
    spec: ProblemSpec,
    horizon: float,
    nx: int = 129,
    nt: int | None = None,
    backend: str | None = None,
) -> GramianReport:
    """Singular spectrum of the observation map at the given horizon.

    When the matrix has fewer rows than basis columns the map cannot be
    injective; the spectrum is padded with explicit zeros so the defect
    reflects the full input space.
    """
    obs = observation_matrix(spec, horizon, nx=nx, nt=nt, backend=backend)
    sing = np.linalg.svd(obs, compute_uv=False)
    deficit = obs.shape[1] - len(sing)
    if deficit > 0:
        sing = np.concatenate([sing, np.zeros(deficit)])
    return GramianReport(
        t=float(horizon), n_basis=obs.shape[1], singular_values=sing
    )


def null_control_defect(
    spec: ProblemSpec,
    horizon: float,
    nx: int = 129,
    nt: int | None = None,
    backend: str | None = None,
    kernel_rtol: float = 1e-10,
) -> float:
    """Smallest trace-to-evolution gain of the dual system.

    Computes min ||O z|| / ||G z|| over final states z with G z != 0,
    where O is the observation map and G the map to the dual state at
    t=0.  Approximate null controllability in the horizon is equivalent
    to this generalized singular value being positive: a near-zero value
    exhibits a final-state direction whose evolution survives while its
    trace vanishes.  Returns inf when G itself vanishes (every state
    dies out by itself, so null control is free).
    """
    if spec.n * nx > MAX_DENSE_BASIS:
        raise SizeRefusalError(
            f"dense basis {spec.n * nx} exceeds {MAX_DENSE_BASIS}; reduce nx"
        )
    nt = nt or default_nt(horizon, nx)
    basis, _ = indicator_basis(spec, horizon, nx, nt)
    depths = _trace_depths(spec, horizon, nx, nt)
    trace, start = adjoint_batch(
        spec, basis, horizon, nt=nt, record_edges=max(depths), backend=backend
    )
    obs = _weighted_rows(spec, trace, horizon, nt, depths)
    dx = 1.0 / (nx - 1)
    n_basis = basis.shape[2]
    evo = (start * np.sqrt(dx)).reshape(spec.n * nx, n_basis)

    # split off ker G, minimize the Rayleigh ratio on its complement while
    # letting the kernel component absorb as much of O as it can
    u, s, vt = np.linalg.svd(evo)
    smax = s[0] if len(s) else 0.0
    if smax <= kernel_rtol * max(np.linalg.norm(obs, 2), 1e-30):
        return float("inf")
    r = int(np.sum(s > kernel_rtol * smax))
    v_range = vt[:r].T
    v_kernel = vt[r:].T
    o_range = obs @ v_range
    if v_kernel.shape[1]:
        o_k = obs @ v_kernel
        uk, sk, _ = np.linalg.svd(o_k, full_matrices=False)
        if len(sk) and sk[0] > 0:
            qk = uk[:, sk > 1e-10 * sk[0]]
            o_range = o_range - qk @ (qk.T @ o_range)
    ratio_mat = o_range / s[:r][None, :]
    sing = np.linalg.svd(ratio_mat, compute_uv=False)
    return float(sing[-1]) if len(sing) else float("inf")
