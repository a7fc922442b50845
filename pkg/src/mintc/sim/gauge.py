"""Invertible multipliers that trade one internal coupling for another.

A block-diagonal matrix function commuting with the speeds, applied
pointwise to the state, maps the system with coupling M to an equivalent
one with coupling (Psi M - Lambda Psi') Psi^-1 and rescaled controls.
Choosing Psi per resonance block as the solution of a linear matrix ODE
puts the transformed coupling in a normal form: inside every block of
identical speeds it reduces to diag of the speed slopes.  The special
case M = 0 gives the closed-form diagonal multiplier speed(0)/speed(x)
linking the zero coupling to the slope coupling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..speeds import SpeedProfile, resonance_classes
from .problem import ProblemSpec


@dataclass(frozen=True)
class GaugeTransform:
    """Multiplier samples on a fine grid plus the control rescaling.

    psi[k] is the multiplier at x_nodes[k]; gamma the m x m control
    map (the positive-speed block of psi at x=1).  coupling_tilde[k]
    is the transformed coupling at x_nodes[k].
    """

    x_nodes: np.ndarray
    psi: np.ndarray  # (nodes, n, n)
    dpsi: np.ndarray  # (nodes, n, n), the ODE right-hand side at psi
    coupling_tilde: np.ndarray  # (nodes, n, n)
    gamma: np.ndarray  # (m, m)
    p: int

    def psi_at(self, x) -> np.ndarray:
        """Multiplier linearly interpolated at positions x: (len(x), n, n)."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        n = self.psi.shape[1]
        out = np.empty((len(xs), n, n))
        for i in range(n):
            for j in range(n):
                out[:, i, j] = np.interp(xs, self.x_nodes, self.psi[:, i, j])
        return out

    def map_state(self, state: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Apply the multiplier pointwise to an (n, nx) grid state."""
        psi = self.psi_at(x)  # (nx, n, n)
        return np.einsum("xij,jx->ix", psi, state)

    def map_control(self, u: np.ndarray) -> np.ndarray:
        """Rescale (nt, m) control samples."""
        return u @ self.gamma.T


def _block_ranges(profile: SpeedProfile) -> list[tuple[int, int]]:
    """Contiguous index ranges (0-based, half-open) of equal speeds."""
    rc = resonance_classes(profile)
    ranges = sorted((min(cls) - 1, max(cls)) for cls in rc.classes)
    for lo, hi in ranges:
        width = hi - lo
        cls = next(c for c in rc.classes if min(c) - 1 == lo)
        if len(cls) != width:
            raise AssertionError("resonance classes are not contiguous")
    return ranges


def gauge_resonant(
    spec: ProblemSpec, substeps_per_cell: int = 256
) -> GaugeTransform:
    """Multiplier removing in-block coupling, by a per-block matrix ODE.

    Each block of identical speeds solves

        Psi' = Psi M_block / speed - (speed' / speed) Psi,  Psi(0) = Id,

    integrated with the classical fourth-order one-step method on a mesh
    refined from the speed breakpoints.  The transformed coupling then
    equals diag(slopes) inside every block (up to roundoff: the identity
    is algebraic once Psi' is taken from the right-hand side itself).

    Refuses when the all-or-nothing speed-agreement hypothesis fails,
    since partially agreeing speeds admit no block decomposition.
    """
    profile = spec.profile
    rc = resonance_classes(profile)
    if not rc.satisfied:
        raise ValueError(
            "speed-agreement hypothesis violated: components "
            f"{rc.offender} agree at x={rc.agree_at} but differ at "
            f"x={rc.differ_at}; no resonant gauge exists"
        )
    if spec.coupling is None or not np.any(spec.coupling):
        # the block ODE decouples into scalars with the closed-form
        # solution speed(0)/speed(x); use it so the transformed coupling
        # equals diag(slopes) exactly
        return gauge_diagonal(spec)
    blocks = _block_ranges(profile)
    n, p, m = profile.n, profile.p, profile.m

    mesh = profile._mesh_f
    nodes = [mesh[0]]
    for a, b in zip(mesh, mesh[1:]):
        nodes.extend(np.linspace(a, b, substeps_per_cell + 1)[1:])
    x_nodes = np.asarray(nodes)
    nn = len(x_nodes)

    m_cells = (
        spec.coupling
        if spec.coupling is not None
        else np.zeros((len(mesh) - 1, n, n))
    )

    def cell_of(x: float) -> int:
        return min(np.searchsorted(mesh, x, side="right") - 1, len(mesh) - 2)

    def speed(i: int, x: float) -> float:
        return float(np.interp(x, mesh, profile._values_f[i]))

    def slope(i: int, x: float) -> float:
        return float(profile._slopes_f[i, cell_of(x)])

    psi = np.zeros((nn, n, n))
    dpsi = np.zeros((nn, n, n))
    psi[0] = np.eye(n)

    def rhs_block(lo: int, hi: int, x: float, pk: np.ndarray) -> np.ndarray:
        lam = speed(lo, x)
        mb = m_cells[cell_of(x)][lo:hi, lo:hi]
        return (pk @ mb - slope(lo, x) * pk) / lam

    for k in range(nn - 1):
        h = x_nodes[k + 1] - x_nodes[k]
        xk = x_nodes[k]
        for lo, hi in blocks:
            pk = psi[k, lo:hi, lo:hi]
            k1 = rhs_block(lo, hi, xk, pk)
            k2 = rhs_block(lo, hi, xk + h / 2, pk + h / 2 * k1)
            k3 = rhs_block(lo, hi, xk + h / 2, pk + h / 2 * k2)
            k4 = rhs_block(lo, hi, xk + h, pk + h * k3)
            psi[k + 1, lo:hi, lo:hi] = pk + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    for k in range(nn):
        for lo, hi in blocks:
            dpsi[k, lo:hi, lo:hi] = rhs_block(lo, hi, x_nodes[k], psi[k, lo:hi, lo:hi])

    lam_diag = np.stack(
        [np.interp(x_nodes, mesh, profile._values_f[i]) for i in range(n)]
    )
    coupling_tilde = np.empty((nn, n, n))
    for k in range(nn):
        mk = m_cells[cell_of(x_nodes[k])]
        num = psi[k] @ mk - lam_diag[:, k][:, None] * dpsi[k]
        coupling_tilde[k] = num @ np.linalg.inv(psi[k])

    gamma = psi[-1, p:, p:].copy()
    return GaugeTransform(
        x_nodes=x_nodes,
        psi=psi,
        dpsi=dpsi,
        coupling_tilde=coupling_tilde,
        gamma=gamma,
        p=p,
    )


def gauge_diagonal(spec: ProblemSpec) -> GaugeTransform:
    """Closed-form diagonal multiplier speed(0)/speed(x).

    Maps solutions of the zero-coupling system to solutions of the
    slope-coupling system (whose dual is pure transport); for constant
    speeds it is the identity and the two systems coincide.  The
    transformed coupling diag(slopes) is exact at every node.
    """
    profile = spec.profile
    n, p = profile.n, profile.p
    mesh = profile._mesh_f
    x_nodes = np.unique(np.concatenate([mesh, np.linspace(0.0, 1.0, 257)]))
    nn = len(x_nodes)
    psi = np.zeros((nn, n, n))
    dpsi = np.zeros((nn, n, n))
    coupling_tilde = np.zeros((nn, n, n))
    for k, x in enumerate(x_nodes):
        cell = min(np.searchsorted(mesh, x, side="right") - 1, len(mesh) - 2)
        for i in range(n):
            lam0 = profile._values_f[i, 0]
            lam = float(np.interp(x, mesh, profile._values_f[i]))
            sl = profile._slopes_f[i, cell]
            psi[k, i, i] = lam0 / lam
            dpsi[k, i, i] = -lam0 * sl / lam**2
            coupling_tilde[k, i, i] = sl
    gamma = psi[-1, p:, p:].copy()
    return GaugeTransform(
        x_nodes=x_nodes,
        psi=psi,
        dpsi=dpsi,
        coupling_tilde=coupling_tilde,
        gamma=gamma,
        p=p,
    )


def transformed_problem(
    spec: ProblemSpec, transform: GaugeTransform, cells: int = 128
) -> ProblemSpec:
    """Problem data of the gauge-transformed system on a refined mesh.

    The transformed coupling varies continuously, so it is resampled as
    a cellwise-constant matrix (midpoint values) on a refinement of the
    speed mesh; the speeds themselves restrict exactly.
    """
    profile = spec.profile
    fine = sorted(
        set(
            list(profile.mesh)
            + [Fraction(k, cells) for k in range(cells + 1)]
        )
    )
    values = []
    for i in range(profile.n):
        row = []
        for xb in fine:
            # exact piecewise-linear restriction at rational breakpoints
            k = max(
                j for j, mk in enumerate(profile.mesh[:-1]) if mk <= xb
            )
            x0, x1 = profile.mesh[k], profile.mesh[k + 1]
            v0, v1 = profile.values[i][k], profile.values[i][k + 1]
            row.append(v0 + (v1 - v0) * (xb - x0) / (x1 - x0))
        values.append(row)
    fine_profile = SpeedProfile(
        mesh=tuple(fine), values=tuple(tuple(r) for r in values), p=profile.p
    )
    mids = np.array([float((a + b) / 2) for a, b in zip(fine, fine[1:])])
    coupling = np.empty((len(mids), profile.n, profile.n))
    for c, xm in enumerate(mids):
        k = np.searchsorted(transform.x_nodes, xm) - 1
        k = min(max(k, 0), len(transform.x_nodes) - 2)
        w = (xm - transform.x_nodes[k]) / (
            transform.x_nodes[k + 1] - transform.x_nodes[k]
        )
        coupling[c] = (1 - w) * transform.coupling_tilde[k] + w * transform.coupling_tilde[k + 1]
    return ProblemSpec(profile=fine_profile, q=spec.q, coupling=coupling)
