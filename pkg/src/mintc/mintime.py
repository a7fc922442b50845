"""Minimal exact-controllability time and its equivalent characterizations.

With rank Q = p the minimal time is

    t_opt = max_i max(T_{p+1}, T_i + T_{p+c_i(Q)}),

where the c_i are the pivot columns of the canonical form of Q.  The same
value arises from a kernel-dimension chain (the classical critical-time
construction for diagonal couplings), and minimizing the pairing formula
over all injective column assignments recovers the best-case time

    t_best = max_i max(T_i + T_{m+i}, T_{p+1}),

attained by the upper-triangular assignment c_i = m - p + i.  Internal
couplings never enter any of these formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from . import canon, ratmat, speeds
from .canon import BoundaryMatrix, RankDeficiencyError
from .speeds import SpeedProfile


@dataclass(frozen=True)
class KernelChainMatrices:
    """Ingredients of the kernel-chain characterization.

    c0 is the m x p matrix -P(0)^-1 Q^T N(0) S, with N / P the negative /
    positive diagonal blocks of the speeds at x = 0 and S the anti-diagonal
    reversal; eminus(l) / eplus(k) select trailing rows / leading columns.
    """

    c0: ratmat.Matrix
    sigma: ratmat.Matrix
    p: int
    m: int

    def eplus(self, k: int) -> ratmat.Matrix:
        return ratmat.diag(
            [Fraction(1 if j < k else 0) for j in range(self.p)]
        )

    def eminus(self, l: int) -> ratmat.Matrix:
        return ratmat.diag(
            [Fraction(0 if j < l else 1) for j in range(self.m)]
        )


@dataclass(frozen=True)
class TimeReport:
    """All computed control times for one (speeds, Q) instance.

    t_opt is math.inf when rank Q < p.  argmax_i is the smallest index
    attaining max_i (T_i + T_{p+c_i}); it seeds the subcritical witness
    construction.  ell holds the kernel-chain indices (math.inf allowed).
    coupling_ignored records that an internal coupling was passed and,
    per the stability theorem, did not enter the formula.  The resonance
    flag is a soft warning: when the all-or-nothing speed-agreement
    hypothesis fails, the pairing formula may undershoot the true
    minimal time.
    """

    t_opt: object  # Fraction | float | math.inf
    t_c: object | None
    t_cn: object | None
    argmax_i: int | None
    ell: tuple | None
    c: tuple[int, ...] | None
    rank: int
    p: int
    m: int
    times: speeds.TravelTimes
    coupling_ignored: bool = False
    resonance_ok: bool = True

    def as_kv_block(self) -> str:
        """Flat key-value text rendering (one `key = value` per line)."""
        lines = [
            f"p = {self.p}",
            f"m = {self.m}",
            f"rank_q = {self.rank}",
            "travel_times = " + ", ".join(_fmt(t) for t in self.times.t),
            f"t_opt = {_fmt(self.t_opt)}",
        ]
        if self.t_c is not None:
            lines.append(f"t_kernel_chain = {_fmt(self.t_c)}")
        if self.t_cn is not None:
            lines.append(f"t_best_assignment = {_fmt(self.t_cn)}")
        if self.c is not None:
            lines.append("column_indices = " + ", ".join(str(c) for c in self.c))
        if self.ell is not None:
            lines.append("ell = " + ", ".join(_fmt(e) for e in self.ell))
        if self.argmax_i is not None:
            lines.append(f"argmax_i = {self.argmax_i}")
        lines.append(f"coupling_ignored = {str(self.coupling_ignored).lower()}")
        lines.append(f"resonance_ok = {str(self.resonance_ok).lower()}")
        return "\n".join(lines)

    def as_csv_row(self) -> tuple[str, str]:
        header = "p,m,rank_q,t_opt,t_kernel_chain,t_best_assignment,argmax_i"
        row = ",".join(
            [
                str(self.p),
                str(self.m),
                str(self.rank),
                _fmt(self.t_opt),
                _fmt(self.t_c) if self.t_c is not None else "",
                _fmt(self.t_cn) if self.t_cn is not None else "",
                str(self.argmax_i) if self.argmax_i is not None else "",
            ]
        )
        return header, row


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if v == math.inf:
        return "inf"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _pairing_value(times: speeds.TravelTimes, p: int, assignment) -> object:
    """max_i max(T_{p+1}, T_i + T_{p+c_i}) for a given column assignment."""
    best = times[p + 1]
    for i, ci in enumerate(assignment, start=1):
        cand = times[i] + times[p + ci]
        if cand > best:
            best = cand
    return best


def _pair_argmax(times: speeds.TravelTimes, p: int, assignment) -> int:
    """Smallest index attaining max_i (T_i + T_{p+c_i})."""
    best_i, best = 1, times[1] + times[p + assignment[0]]
    for i, ci in enumerate(assignment, start=1):
        cand = times[i] + times[p + ci]
        if cand > best:
            best, best_i = cand, i
    return best_i


def minimal_time(
    profile: SpeedProfile, q: BoundaryMatrix, coupling=None
) -> TimeReport:
    """Minimal time for exact controllability of (speeds, coupling, Q).

    Finite iff rank Q = p, in which case it equals the pairing formula
    over the canonical column indices.  The internal coupling is accepted
    for interface completeness and ignored (minimal time is stable under
    bounded internal perturbations); the report records this.
    """
    if q.p != profile.p or q.m != profile.m:
        raise ValueError(
            f"boundary matrix is {q.p}x{q.m} but the profile has "
            f"p={profile.p}, m={profile.m}"
        )
    times = speeds.travel_times(profile)
    resonance_ok = speeds.resonance_classes(profile).satisfied
    qrank = canon.rank(q)
    p, m = q.p, q.m
    if qrank < p:
        return TimeReport(
            t_opt=math.inf,
            t_c=None,
            t_cn=None,
            argmax_i=None,
            ell=None,
            c=None,
            rank=qrank,
            p=p,
            m=m,
            times=times,
            coupling_ignored=coupling is not None,
            resonance_ok=resonance_ok,
        )
    c = canon.column_indices(q)
    t_opt = _pairing_value(times, p, c)
    ell = kernel_chain_indices(profile, q)
    t_c = _chain_value(times, p, ell)
    t_cn = best_assignment_time(profile) if m >= p else None
    return TimeReport(
        t_opt=t_opt,
        t_c=t_c,
        t_cn=t_cn,
        argmax_i=_pair_argmax(times, p, c),
        ell=ell,
        c=c,
        rank=qrank,
        p=p,
        m=m,
        times=times,
        coupling_ignored=coupling is not None,
        resonance_ok=resonance_ok,
    )


def chain_matrices(profile: SpeedProfile, q: BoundaryMatrix) -> KernelChainMatrices:
    p, m = q.p, q.m
    neg0 = profile.negative_block0()
    pos0 = profile.positive_block0()
    sigma = tuple(
        tuple(Fraction(1 if i + j == p - 1 else 0) for j in range(p))
        for i in range(p)
    )
    qt = ratmat.transpose(q.entries)
    inv_pos = ratmat.diag([-1 / v for v in pos0])  # -P(0)^-1
    scaled = ratmat.matmul(inv_pos, ratmat.matmul(qt, ratmat.diag(list(neg0))))
    c0 = ratmat.matmul(scaled, sigma)
    return KernelChainMatrices(c0=c0, sigma=sigma, p=p, m=m)


def kernel_chain_indices(profile: SpeedProfile, q: BoundaryMatrix):
    """The chain indices ell(1..p) from exact kernel comparisons.

    ell(k) is the first l for which zeroing the first l rows of
    c0 eplus(k) strictly enlarges the kernel (equivalently drops the
    rank), and math.inf when c0 eplus(k) is already zero.
    """
    mats = chain_matrices(profile, q)
    p, m = mats.p, mats.m
    out = []
    for k in range(1, p + 1):
        mk = _zero_trailing_columns(mats.c0, keep=k)
        base_rank = ratmat.rank(mk)
        if base_rank == 0:
            out.append(math.inf)
            continue
        ell = None
        for l in range(1, m + 1):
            if ratmat.rank(_zero_leading_rows(mk, l)) < base_rank:
                ell = l
                break
        assert ell is not None  # E-minus_m annihilates everything
        out.append(ell)
    return tuple(out)


def _zero_trailing_columns(mat: ratmat.Matrix, keep: int) -> ratmat.Matrix:
    return tuple(
        tuple(v if j < keep else Fraction(0) for j, v in enumerate(row))
        for row in mat
    )


def _zero_leading_rows(mat: ratmat.Matrix, l: int) -> ratmat.Matrix:
    zero_row = tuple(Fraction(0) for _ in mat[0])
    return tuple(zero_row if i < l else row for i, row in enumerate(mat))


def _chain_value(times: speeds.TravelTimes, p: int, ell) -> object:
    best = times[p + 1]
    for k, lk in enumerate(ell, start=1):
        term = times[p - k + 1] if lk == math.inf else times[p - k + 1] + times[p + lk]
        if term > best:
            best = term
    return best


def kernel_chain_time(profile: SpeedProfile, q: BoundaryMatrix):
    """Critical time via the kernel-dimension chain:

        max_k max(T_{p-k+1} + T_{p+ell(k)}, T_{p+1}),

    with the convention T_{p+inf} = 0.  Defined for any Q; equals
    minimal_time(...).t_opt whenever rank Q = p.
    """
    times = speeds.travel_times(profile)
    ell = kernel_chain_indices(profile, q)
    return _chain_value(times, q.p, ell)


def best_assignment_time(profile: SpeedProfile):
    """max_i max(T_i + T_{m+i}, T_{p+1}): the smallest value the pairing
    formula can take over injective column assignments (m >= p)."""
    p, m = profile.p, profile.m
    if m < p:
        raise ValueError("best-case pairing needs at least as many controls "
                         "as indirectly controlled components (m >= p)")
    times = speeds.travel_times(profile)
    best = times[p + 1]
    for i in range(1, p + 1):
        cand = times[i] + times[m + i]
        if cand > best:
            best = cand
    return best


def assignment_time_bruteforce(profile: SpeedProfile):
    """Exhaustive minimum of the pairing formula over injective
    assignments c: {1..p} -> {1..m}, with one argmin.

    Returns (value, assignment).  Bounded to m <= 7 (factorial search).
    """
    p, m = profile.p, profile.m
    if m < p:
        raise ValueError("needs m >= p")
    if m > 7:
        raise ValueError("brute-force assignment search is limited to m <= 7")
    times = speeds.travel_times(profile)
    best_val = None
    best_assignment = None
    for perm in permutations(range(1, m + 1), p):
        val = _pairing_value(times, p, perm)
        if best_val is None or val < best_val:
            best_val, best_assignment = val, perm
    return best_val, best_assignment
