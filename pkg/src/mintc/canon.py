"""Canonical UL-decomposition of full-row-rank boundary matrices.

A p x m matrix Q0 is in canonical form when there are distinct pivot
columns c_1..c_p such that in each row i the pivot entry q0[i, c_i] is
nonzero, everything left of it is zero, and everything right of it is
zero except in the pivot columns of the rows below.  Every full-row-rank
Q can be written Q L = Q0 with L unit lower triangular; Q0 is unique and
its pivot columns c_i(Q) drive the minimal-control-time formula.

All arithmetic is exact over the rationals: the pivot choice ("last
nonzero entry") is discrete and would be ill-defined under floating
point.  Float inputs are snapped through their decimal repr (see
ratmat.to_fraction); there is no epsilon anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import ratmat
from .ratmat import Matrix


class RankDeficiencyError(ValueError):
    """Raised when an operation requires rank Q = p but Q falls short."""


@dataclass(frozen=True)
class BoundaryMatrix:
    """Exact p x m boundary reflection matrix."""

    entries: Matrix

    def __post_init__(self):
        ratmat.shape(self.entries)  # validates non-empty rectangular

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "BoundaryMatrix":
        return cls(ratmat.as_matrix(rows))

    @property
    def p(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return len(self.entries[0])

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i][j]


@dataclass(frozen=True)
class CanonicalDecomposition:
    """Result of the canonical UL-decomposition Q L = Q0.

    `c` holds 1-based pivot column indices, c[i-1] for row i. L is one
    valid unit-lower-triangular witness (not unique when Q has zero
    columns); Q0 is unique.
    """

    q0: Matrix
    l: Matrix
    c: tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.q0)

    @property
    def m(self) -> int:
        return len(self.q0[0])


def rank(q: BoundaryMatrix) -> int:
    return ratmat.rank(q.entries)


def canonical_ul_decompose(q: BoundaryMatrix) -> CanonicalDecomposition:
    """Reduce Q to its canonical form by bottom-up column elimination.

    Scanning rows from the last up, the pivot of row i is its last
    nonzero entry outside the pivot columns already claimed below, and
    entries to the pivot's left are cleared with column operations.
    Each operation right-multiplies by a unit lower-triangular factor,
    so the accumulated L is unit lower triangular and Q L = Q0 exactly.
    """
    p, m = q.p, q.m
    work = [list(row) for row in q.entries]
    l = [list(row) for row in ratmat.identity(m)]
    pivots: list[int] = []  # 0-based pivot columns, filled bottom-up
    for i in range(p - 1, -1, -1):
        taken = set(pivots)
        ci = next(
            (j for j in range(m - 1, -1, -1) if j not in taken and work[i][j] != 0),
            None,
        )
        if ci is None:
            raise RankDeficiencyError(
                f"matrix is not full row rank (row {i + 1} has no usable pivot)"
            )
        pivot = work[i][ci]
        coeffs = [-work[i][j] / pivot for j in range(ci)]
        for j, f in enumerate(coeffs):
            if f == 0:
                continue
            # column operation C_j <- C_j + f * C_ci; rows below i are
            # untouched because their entries in column ci are zero.
            for r in range(p):
                work[r][j] += f * work[r][ci]
            for r in range(m):
                l[r][j] += f * l[r][ci]
        pivots.append(ci)
    c = tuple(ci + 1 for ci in reversed(pivots))
    return CanonicalDecomposition(
        q0=tuple(tuple(row) for row in work),
        l=tuple(tuple(row) for row in l),
        c=c,
    )


def is_canonical(q0) -> tuple[int, ...] | None:
    """Return the pivot-column vector of q0 if it is in canonical form.

    The pivot columns are forced (last nonzero entry of each row outside
    the pivot columns below), so the answer is unique; None when some
    row breaks one of the three canonical-form conditions.
    """
    mat = q0.entries if isinstance(q0, BoundaryMatrix) else ratmat.as_matrix(q0)
    p, m = ratmat.shape(mat)
    pivots: list[int] = []
    for i in range(p - 1, -1, -1):
        taken = set(pivots)
        ci = next(
            (j for j in range(m - 1, -1, -1) if j not in taken and mat[i][j] != 0),
            None,
        )
        if ci is None:
            return None
        if any(mat[i][j] != 0 for j in range(ci)):
            return None
        pivots.append(ci)
    return tuple(ci + 1 for ci in reversed(pivots))


def column_indices(q: BoundaryMatrix) -> tuple[int, ...]:
    """Pivot columns c_1..c_p of the canonical form of Q (1-based)."""
    return canonical_ul_decompose(q).c
