"""Small exact-rational matrix toolbox.

Matrices are tuples of tuples of Fraction.  Nothing here is meant to be
fast on large inputs; it exists so that pivoting decisions and kernel
dimensions are computed without floating-point tolerances.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Row = tuple[Fraction, ...]
Matrix = tuple[Row, ...]


def to_fraction(value) -> Fraction:
    """Convert an entry to an exact Fraction.

    Floats are parsed through their shortest decimal repr, so 0.1 becomes
    exactly 1/10 rather than the binary expansion of the double.  Strings
    accept "a/b" and decimal forms.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    if not rows:
        raise ValueError("matrix needs at least one row")
    width = len(rows[0])
    if width == 0:
        raise ValueError("matrix needs at least one column")
    out = []
    for r in rows:
        if len(r) != width:
            raise ValueError("ragged rows in matrix literal")
        out.append(tuple(to_fraction(v) for v in r))
    return tuple(out)


def identity(n: int) -> Matrix:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def zeros(rows: int, cols: int) -> Matrix:
    zero = Fraction(0)
    return tuple(tuple(zero for _ in range(cols)) for _ in range(rows))


def shape(m: Matrix) -> tuple[int, int]:
    return len(m), len(m[0])


def matmul(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch: {ra}x{ca} @ {rb}x{cb}")
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(ca)), Fraction(0)) for j in range(cb))
        for i in range(ra)
    )


def matvec(a: Matrix, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    ra, ca = shape(a)
    if ca != len(v):
        raise ValueError("shape mismatch in matvec")
    return tuple(sum((a[i][k] * v[k] for k in range(ca)), Fraction(0)) for i in range(ra))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m))


def diag(values: Sequence[Fraction]) -> Matrix:
    n = len(values)
    zero = Fraction(0)
    return tuple(
        tuple(values[i] if i == j else zero for j in range(n)) for i in range(n)
    )


def rank(m: Matrix) -> int:
    """Exact rank by Gaussian elimination over the rationals."""
    work = [list(row) for row in m]
    nrows = len(work)
    ncols = len(work[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = 1 / work[r][c]
        for i in range(r + 1, nrows):
            f = work[i][c] * inv
            if f == 0:
                continue
            for j in range(c, ncols):
                work[i][j] -= f * work[r][j]
        r += 1
        if r == nrows:
            break
    return r


def left_kernel_vector(m: Matrix) -> tuple[Fraction, ...] | None:
    """Some nonzero eta with eta^T m = 0, or None if the rows are independent."""
    v = kernel_vector(transpose(m))
    return v


def kernel_vector(m: Matrix) -> tuple[Fraction, ...] | None:
    """Some nonzero v with m v = 0, or None when the kernel is trivial."""
    nrows, ncols = shape(m)
    work = [list(row) for row in m]
    pivots: list[int] = []  # pivot column per eliminated row
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = 1 / work[r][c]
        work[r] = [x * inv for x in work[r]]
        for i in range(nrows):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    c_free = free[0]
    v = [Fraction(0)] * ncols
    v[c_free] = Fraction(1)
    for row_idx, c_piv in enumerate(pivots):
        v[c_piv] = -work[row_idx][c_free]
    return tuple(v)


def invert_unit_upper(m: Matrix) -> Matrix:
    """Inverse of an upper-triangular matrix with unit diagonal."""
    n, nc = shape(m)
    if n != nc:
        raise ValueError("square matrix required")
    inv = [list(row) for row in identity(n)]
    # back substitution column by column
    for j in range(n):
        for i in range(n - 1, -1, -1):
            s = sum((m[i][k] * inv[k][j] for k in range(i + 1, n)), Fraction(0))
            inv[i][j] = (Fraction(1) if i == j else Fraction(0)) - s
    return tuple(tuple(row) for row in inv)


def equal(a: Matrix, b: Matrix) -> bool:
    return shape(a) == shape(b) and all(
        x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb)
    )
