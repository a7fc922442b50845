"""Closed-form dual flow for the slope coupling.

When the internal coupling equals diag of the speed slopes, the dual
system is pure transport and its flow has an explicit expression: the
negative components slide toward x = 0 and die at x = 1, while each
positive component replays either its own initial data or the reflected
combination of the negative boundary values, selected by how much
transit time has elapsed.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..speeds import SpeedProfile, transit_position, transit_time
from .problem import ProblemSpec


def _evaluator(z0, x_grid: np.ndarray, i: int) -> Callable[[np.ndarray], np.ndarray]:
    """Point evaluation of component i of the initial data: callables are
    evaluated directly, grid data is linearly interpolated."""
    if callable(z0[i]):
        f = z0[i]
        return lambda xs: np.asarray(f(xs), dtype=float)
    samples = np.asarray(z0[i], dtype=float)
    return lambda xs: np.interp(xs, x_grid, samples)


def adjoint_flow_closed_form(
    spec: ProblemSpec,
    t: float,
    z0,
    x: np.ndarray | None = None,
    nx: int | None = None,
) -> np.ndarray:
    """Evaluate the dual flow at elapsed time t for slope coupling.

    z0 is a sequence of n items, each either a callable or an nx-vector
    of grid samples; returns an (n, nx) array on the grid x (uniform
    from nx when omitted).  Only correct for coupling = diag(slopes),
    for which the dual equation is exact transport.
    """
    if t < 0:
        raise ValueError("elapsed time must be nonnegative")
    profile = spec.profile
    n, p = profile.n, profile.p
    if x is None:
        if nx is None:
            raise ValueError("pass either x or nx")
        x = np.linspace(0.0, 1.0, nx)
    x = np.asarray(x, dtype=float)
    r = spec.reflection()
    out = np.zeros((n, len(x)))
    evals = [_evaluator(z0, x, i) for i in range(n)]

    # negative components: own data shifted toward larger transit
    for i in range(p):
        t_i = profile._transit_cum_f[i, -1]
        tau = t + np.asarray(transit_time(profile, i + 1, x))
        alive = tau < t_i
        if np.any(alive):
            pos = transit_position(profile, i + 1, np.where(alive, tau, 0.0))
            out[i, alive] = evals[i](pos)[alive]

    # positive components: own data before one transit, reflected sums after
    for j in range(spec.m):
        i = p + j
        t_i = profile._transit_cum_f[i, -1]
        phi = np.asarray(transit_time(profile, i + 1, x))
        s = t - phi
        own = s < 0
        if np.any(own):
            pos = transit_position(profile, i + 1, np.where(own, -s, 0.0))
            out[i, own] = evals[i](pos)[own]
        for q in range(p):
            t_q = profile._transit_cum_f[q, -1]
            mask = (s > 0) & (s < t_q)
            if np.any(mask):
                pos = transit_position(profile, q + 1, np.where(mask, s, 0.0))
                out[i, mask] += r[q, j] * evals[q](pos)[mask]
    return out
