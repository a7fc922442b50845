"""Explicit non-observability witnesses.

Below the minimal control time the dual system has final states whose
boundary trace vanishes although the state at t=0 does not.  Two
constructions produce them in closed form for the slope coupling (and
hence, through the diagonal gauge, for the zero coupling):

* rank-deficient reflection: any left-kernel direction of the
  reflection matrix, painted on the negative components over the span
  reachable within the shortest negative transit, is silent forever;

* subcritical horizon: piecewise-constant plateaus on the negative
  components, with amplitudes recursively tuned so that the reflected
  boundary values cancel on every positive component that could still
  reach the observation boundary in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import ratmat
from ..canon import canonical_ul_decompose
from ..speeds import transit_position, transit_time, travel_times
from .errors import NoWitnessError
from .problem import ProblemSpec


@dataclass(frozen=True)
class Witness:
    """A final-state grid function with provenance.

    amplitudes holds the exact plateau values per component (None for
    special-case indicator constructions); support the (lo, hi) position
    interval per component.  reachable_amplitude is the guaranteed
    nonzero plateau that survives at t=0 (exact), used to check the
    construction did not degenerate.
    """

    kind: str
    supports: tuple[tuple[float, float] | None, ...]
    amplitudes: tuple
    argmax_index: int | None = None
    reachable_amplitude: Fraction | None = None

    def sample(self, nx: int) -> np.ndarray:
        x = np.linspace(0.0, 1.0, nx)
        out = np.zeros((len(self.supports), nx))
        for i, span in enumerate(self.supports):
            if span is None:
                continue
            lo, hi = span
            amp = float(self.amplitudes[i])
            out[i] = np.where((x > lo) & (x < hi), amp, 0.0)
        return out


def build_witness_rank_deficient(spec: ProblemSpec) -> Witness:
    """Silent direction when the reflection has dependent rows.

    Paints a left-kernel vector of R on the negative components over
    (0, position reached in the shortest negative transit); the
    reflected boundary combination vanishes identically, so the trace
    is zero at every horizon.
    """
    eta = ratmat.left_kernel_vector(spec.reflection_exact())
    if eta is None:
        raise NoWitnessError(
            "the reflection matrix has full row rank: no kernel witness"
        )
    times = travel_times(spec.profile)
    t1 = float(times[1])
    n, p = spec.n, spec.p
    supports: list[tuple[float, float] | None] = []
    amps: list = []
    for i in range(n):
        if i < p and eta[i] != 0:
            hi = transit_position(spec.profile, i + 1, t1)
            supports.append((0.0, float(hi)))
            amps.append(eta[i])
        else:
            supports.append(None)
            amps.append(Fraction(0))
    return Witness(
        kind="rank_deficient",
        supports=tuple(supports),
        amplitudes=tuple(amps),
    )


def closed_form_reachable_amplitude(spec: ProblemSpec) -> Fraction:
    """The guaranteed surviving plateau of the subcritical witness,
    -q0[i0, c_i0] * speed_i0(0) / speed_{p+c_i0}(0), exactly."""
    dec = canonical_ul_decompose(spec.q)
    times = travel_times(spec.profile)
    p = spec.p
    i0 = _pair_argmax(times, p, dec.c)
    ci0 = dec.c[i0 - 1]
    return (
        -dec.q0[i0 - 1][ci0 - 1]
        * spec.profile.values[i0 - 1][0]
        / spec.profile.values[p + ci0 - 1][0]
    )


def _pair_argmax(times, p, c) -> int:
    best_i, best = 1, times[1] + times[p + c[0]]
    for i in range(2, p + 1):
        cand = times[i] + times[p + c[i - 1]]
        if cand > best:
            best, best_i = cand, i
    return best_i


def build_witness_subcritical(spec: ProblemSpec, horizon: float) -> Witness:
    """Silent nonzero final state for a horizon below the minimal time.

    Requires full row rank (otherwise use the kernel witness).  Handles
    the short-horizon special cases (below the slowest negative or
    positive transit) with single-component indicators; in the main
    regime it builds the plateau amplitudes by the cancellation
    recursion seeded at the smallest index attaining the pairing max.
    """
    times = travel_times(spec.profile)
    p, m, n = spec.p, spec.m, spec.n
    dec = canonical_ul_decompose(spec.q)  # raises on rank deficiency
    t_opt = max(
        [times[p + 1]] + [times[i] + times[p + dec.c[i - 1]] for i in range(1, p + 1)]
    )
    if horizon >= t_opt:
        raise NoWitnessError(
            f"horizon {horizon} is not below the minimal time {float(t_opt)}"
        )

    if horizon < float(times[p]):
        # the slowest negative component still holds unseen data
        cut = transit_position(spec.profile, p, horizon)
        supports = [None] * n
        amps: list = [Fraction(0)] * n
        supports[p - 1] = (float(cut), 1.0)
        amps[p - 1] = Fraction(1)
        return Witness(
            kind="short_horizon_negative",
            supports=tuple(supports),
            amplitudes=tuple(amps),
        )
    if horizon < float(times[p + 1]):
        # the slowest positive component cannot be emptied in time
        cut = transit_position(spec.profile, p + 1, float(times[p + 1]) - horizon)
        supports = [None] * n
        amps = [Fraction(0)] * n
        supports[p] = (0.0, float(cut))
        amps[p] = Fraction(1)
        return Witness(
            kind="short_horizon_positive",
            supports=tuple(supports),
            amplitudes=tuple(amps),
        )

    i0 = _pair_argmax(times, p, dec.c)
    ci0 = dec.c[i0 - 1]

    # plateau amplitudes on the negative components: zero before i0, one
    # at i0, then the cancellation recursion through the pivot columns
    neg0 = spec.profile.negative_block0()
    alpha_neg: list[Fraction] = [Fraction(0)] * p
    alpha_neg[i0 - 1] = Fraction(1)
    for i in range(i0 + 1, p + 1):
        ci = dec.c[i - 1]
        acc = Fraction(0)
        for k in range(1, i):
            acc += dec.q0[k - 1][ci - 1] * neg0[k - 1] * alpha_neg[k - 1]
        alpha_neg[i - 1] = -acc / (dec.q0[i - 1][ci - 1] * neg0[i - 1])

    # reflected amplitudes: beta through the canonical form, then the
    # inverse transposed triangular factor and the positive speeds
    beta = ratmat.matvec(
        ratmat.transpose(dec.q0),
        tuple(neg0[i] * alpha_neg[i] for i in range(p)),
    )
    assert all(beta[j] == 0 for j in range(ci0, m)), "cancellation failed"
    lt_inv = ratmat.invert_unit_upper(ratmat.transpose(dec.l))
    pos0 = spec.profile.positive_block0()
    alpha_pos = tuple(
        -v / pos0[j] for j, v in enumerate(ratmat.matvec(lt_inv, beta))
    )
    assert all(alpha_pos[j] == 0 for j in range(ci0, m)), "late columns leak"
    reach = closed_form_reachable_amplitude(spec)
    assert alpha_pos[ci0 - 1] == reach != 0

    supports: list[tuple[float, float] | None] = [None] * n
    amps = list(alpha_neg) + [Fraction(0)] * m
    lo_t = horizon - float(times[p + ci0])
    hi_t = float(times[i0])
    for i in range(i0, p + 1):
        lo = transit_position(spec.profile, i, lo_t)
        hi = transit_position(spec.profile, i, hi_t)
        if amps[i - 1] != 0:
            supports[i - 1] = (float(lo), float(hi))
    return Witness(
        kind="subcritical",
        supports=tuple(supports),
        amplitudes=tuple(amps),
        argmax_index=i0,
        reachable_amplitude=reach,
    )
