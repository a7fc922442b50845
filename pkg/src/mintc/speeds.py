"""Piecewise-linear speed profiles and characteristic geometry.

The diagonal speed matrix is represented by n continuous piecewise-linear
functions on a shared breakpoint mesh over [0, 1], the first p of them
negative and the remaining m = n - p positive.  Restricting to this class
keeps every quantity closed form: transit times are sums of logarithms and
reciprocals, hypothesis checks reduce to breakpoint comparisons, and the
characteristic curves invert exactly piece by piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .ratmat import to_fraction


class StructureError(ValueError):
    """Malformed profile data (mesh or value layout), as opposed to a
    violated standing hypothesis."""


class ValidationError(ValueError):
    """An operation that requires the sign/order hypotheses was handed a
    profile violating them."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


@dataclass(frozen=True)
class Violation:
    kind: str  # "sign" or "order"
    components: tuple[int, ...]  # 1-based indices involved
    x: Fraction
    message: str


@dataclass(frozen=True)
class ResonanceClasses:
    """Partition of component indices by identical speed functions.

    `satisfied` is the all-or-nothing resonance hypothesis: any two
    speeds that agree at some point agree everywhere.  When it fails,
    `offender` names a pair (i, j) together with a breakpoint where the
    two speeds agree and one where they differ.
    """

    classes: tuple[tuple[int, ...], ...]
    satisfied: bool
    offender: tuple[int, int] | None = None
    agree_at: Fraction | None = None
    differ_at: Fraction | None = None

    def class_of(self, i: int) -> tuple[int, ...]:
        for cls in self.classes:
            if i in cls:
                return cls
        raise KeyError(i)


@dataclass(frozen=True)
class TravelTimes:
    """Domain-crossing times T_i, one per component.

    Entries are exact Fractions when the component's speed is piecewise
    constant and floats when a nonconstant piece contributes a logarithm.
    """

    t: tuple

    def __getitem__(self, i: int):
        return self.t[i - 1]  # 1-based, matching component numbering

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class SpeedProfile:
    """n piecewise-linear speeds on a shared mesh, p of them negative."""

    mesh: tuple[Fraction, ...]
    values: tuple[tuple[Fraction, ...], ...]  # values[i][k] = speed i at mesh[k]
    p: int

    def __post_init__(self):
        if len(self.mesh) < 2:
            raise StructureError("mesh needs at least the two endpoints")
        if self.mesh[0] != 0 or self.mesh[-1] != 1:
            raise StructureError("mesh must start at 0 and end at 1")
        if any(a >= b for a, b in zip(self.mesh, self.mesh[1:])):
            raise StructureError("mesh breakpoints must be strictly increasing")
        if not self.values:
            raise StructureError("profile needs at least one component")
        for i, row in enumerate(self.values):
            if len(row) != len(self.mesh):
                raise StructureError(
                    f"component {i + 1} has {len(row)} values for "
                    f"{len(self.mesh)} breakpoints"
                )
        if not 1 <= self.p < len(self.values):
            raise StructureError(
                "need at least one negative and one positive component"
            )

    @classmethod
    def from_breakpoints(cls, mesh, values, p) -> "SpeedProfile":
        return cls(
            mesh=tuple(to_fraction(x) for x in mesh),
            values=tuple(tuple(to_fraction(v) for v in row) for row in values),
            p=p,
        )

    @classmethod
    def from_constants(cls, speeds, p) -> "SpeedProfile":
        vals = [(to_fraction(s), to_fraction(s)) for s in speeds]
        return cls(mesh=(Fraction(0), Fraction(1)), values=tuple(vals), p=p)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return self.n - self.p

    def is_negative(self, i: int) -> bool:
        return i <= self.p

    def speed_at0(self, i: int) -> Fraction:
        """Exact value of speed i at x = 0 (1-based index)."""
        return self.values[i - 1][0]

    def negative_block0(self) -> tuple[Fraction, ...]:
        """Diagonal of the negative-speed block at x = 0 (p values)."""
        return tuple(self.values[i][0] for i in range(self.p))

    def positive_block0(self) -> tuple[Fraction, ...]:
        """Diagonal of the positive-speed block at x = 0 (m values)."""
        return tuple(self.values[i][0] for i in range(self.p, self.n))

    # cached float mirrors for numeric work -------------------------------

    @cached_property
    def _mesh_f(self) -> np.ndarray:
        return np.array([float(x) for x in self.mesh])

    @cached_property
    def _values_f(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.values])

    @cached_property
    def _slopes_f(self) -> np.ndarray:
        dm = np.diff(self._mesh_f)
        return np.diff(self._values_f, axis=1) / dm

    @cached_property
    def _transit_cum_f(self) -> np.ndarray:
        """Transit-time coordinate of each breakpoint, per component."""
        n = self.n
        nk = len(self.mesh)
        cum = np.zeros((n, nk))
        for i in range(n):
            for k in range(nk - 1):
                cum[i, k + 1] = cum[i, k] + _piece_transit_f(
                    float(self.mesh[k + 1] - self.mesh[k]),
                    self._values_f[i, k],
                    self._values_f[i, k + 1],
                )
        return cum

    def speed_values(self, i: int, x) -> np.ndarray:
        """Float speed i evaluated at positions x (1-based component)."""
        xs = np.asarray(x, dtype=float)
        return np.interp(xs, self._mesh_f, self._values_f[i - 1])


def _piece_transit_f(h: float, a: float, b: float) -> float:
    """Float transit time across one linear piece of width h from value a
    to value b (integral of 1/|speed|)."""
    if a == b:
        return h / abs(a)
    return abs(h / (b - a) * math.log(b / a))


def validate(profile: SpeedProfile) -> list[Violation]:
    """Check the sign and ordering hypotheses at every breakpoint.

    Returns the empty list iff the profile is admissible: negative
    components strictly below zero, positive strictly above, and both
    groups weakly ordered.  Breakpoint checks suffice for piecewise-
    linear speeds.  The resonance hypothesis is reported separately by
    resonance_classes() since the zero-coupling theory does not need it.
    """
    out: list[Violation] = []
    p, n = profile.p, profile.n
    for k, x in enumerate(profile.mesh):
        for i in range(n):
            v = profile.values[i][k]
            if i < p and v >= 0:
                out.append(
                    Violation(
                        "sign",
                        (i + 1,),
                        x,
                        f"component {i + 1} declared negative but has value "
                        f"{v} at x={x}",
                    )
                )
            if i >= p and v <= 0:
                out.append(
                    Violation(
                        "sign",
                        (i + 1,),
                        x,
                        f"component {i + 1} declared positive but has value "
                        f"{v} at x={x}",
                    )
                )
        for i in range(n - 1):
            if i + 1 == p:
                continue  # the sign checks police the group boundary
            if profile.values[i][k] > profile.values[i + 1][k]:
                out.append(
                    Violation(
                        "order",
                        (i + 1, i + 2),
                        x,
                        f"components {i + 1},{i + 2} are out of order at x={x}",
                    )
                )
    return out


def require_valid(profile: SpeedProfile) -> None:
    violations = validate(profile)
    if violations:
        raise ValidationError(violations)


def resonance_classes(profile: SpeedProfile) -> ResonanceClasses:
    """Group components by identical speed functions and check that
    agreement anywhere implies agreement everywhere."""
    n = profile.n
    classes: list[list[int]] = []
    for i in range(n):
        for cls in classes:
            if profile.values[cls[0] - 1] == profile.values[i]:
                cls.append(i + 1)
                break
        else:
            classes.append([i + 1])

    satisfied = True
    offender = agree_at = differ_at = None
    for i in range(n):
        for j in range(i + 1, n):
            vi, vj = profile.values[i], profile.values[j]
            eq = [a == b for a, b in zip(vi, vj)]
            if any(eq) and not all(eq):
                satisfied = False
                offender = (i + 1, j + 1)
                agree_at = profile.mesh[eq.index(True)]
                differ_at = profile.mesh[eq.index(False)]
                break
        if not satisfied:
            break
    return ResonanceClasses(
        classes=tuple(tuple(cls) for cls in classes),
        satisfied=satisfied,
        offender=offender,
        agree_at=agree_at,
        differ_at=differ_at,
    )


def travel_times(profile: SpeedProfile) -> TravelTimes:
    """Domain-crossing time of each characteristic, in closed form.

    Constant pieces contribute exact rational width/|value| terms; a
    nonconstant linear piece contributes h/(b-a) * log(b/a) and turns
    that component's total into a float.
    """
    require_valid(profile)
    out = []
    for i in range(profile.n):
        total: Fraction | float = Fraction(0)
        for k in range(len(profile.mesh) - 1):
            h = profile.mesh[k + 1] - profile.mesh[k]
            a, b = profile.values[i][k], profile.values[i][k + 1]
            if a == b:
                total += h / abs(a)
            else:
                total = float(total) + _piece_transit_f(float(h), float(a), float(b))
        out.append(total)
    return TravelTimes(t=tuple(out))


def transit_time(profile: SpeedProfile, i: int, x) -> float:
    """Time for characteristic i to sweep from the x=0 boundary to x.

    Strictly increasing in x with transit_time(i, 0) = 0 and
    transit_time(i, 1) = T_i; this is the natural coordinate in which
    every characteristic moves at unit rate.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs < -1e-15) or np.any(xs > 1 + 1e-15):
        raise ValueError("position outside [0, 1]")
    res = _transit_array(profile, i, np.clip(xs, 0.0, 1.0))
    return float(res) if np.isscalar(x) or xs.ndim == 0 else res


def transit_position(profile: SpeedProfile, i: int, s) -> float:
    """Inverse of transit_time: the position reached after transit s."""
    t_i = profile._transit_cum_f[i - 1, -1]
    ss = np.asarray(s, dtype=float)
    if np.any(ss < -1e-12) or np.any(ss > t_i * (1 + 1e-12) + 1e-12):
        raise ValueError(f"transit value outside [0, T_{i}]")
    res = _transit_inverse_array(profile, i, np.clip(ss, 0.0, t_i))
    return float(res) if np.isscalar(s) or ss.ndim == 0 else res


def _transit_array(profile: SpeedProfile, i: int, xs: np.ndarray) -> np.ndarray:
    mesh = profile._mesh_f
    vals = profile._values_f[i - 1]
    cum = profile._transit_cum_f[i - 1]
    k = np.clip(np.searchsorted(mesh, xs, side="right") - 1, 0, len(mesh) - 2)
    a = vals[k]
    b = vals[k + 1]
    h = mesh[k + 1] - mesh[k]
    dx = xs - mesh[k]
    slope = (b - a) / h
    const = slope == 0.0
    lam = a + slope * np.where(const, 0.0, dx)
    out = np.where(
        const,
        dx / np.abs(a),
        np.abs(np.divide(np.log(lam / a), slope, out=np.zeros_like(dx), where=~const)),
    )
    return cum[k] + out


def _transit_inverse_array(profile: SpeedProfile, i: int, ss: np.ndarray) -> np.ndarray:
    mesh = profile._mesh_f
    vals = profile._values_f[i - 1]
    cum = profile._transit_cum_f[i - 1]
    k = np.clip(np.searchsorted(cum, ss, side="right") - 1, 0, len(cum) - 2)
    a = vals[k]
    b = vals[k + 1]
    h = mesh[k + 1] - mesh[k]
    du = ss - cum[k]
    slope = (b - a) / h
    const = slope == 0.0
    sgn = np.sign(a)
    # solving integral of 1/|a + slope*dx| = du for dx on a linear piece
    dx = np.where(
        const,
        du * np.abs(a),
        np.divide(
            a * np.expm1(sgn * np.where(const, 0.0, slope) * du),
            np.where(const, 1.0, slope),
            out=np.zeros_like(du),
            where=~const,
        ),
    )
    return np.minimum(mesh[k] + dx, mesh[k + 1])


def entry_exit_times(
    profile: SpeedProfile, i: int, t: float, x: float, convention: str = "forward"
) -> tuple[float, float]:
    """Enter and exit parameters of the characteristic through (t, x).

    "forward" is the state-system convention (negative components enter
    the domain at x=0 and leave at x=1); "adjoint" is the reversed-speed
    convention used by the dual system.
    """
    phi_x = transit_time(profile, i, x)
    t_i = profile._transit_cum_f[i - 1, -1]
    neg = profile.is_negative(i)
    if convention == "forward":
        if neg:
            return t - phi_x, t - phi_x + t_i
        return t + phi_x - t_i, t + phi_x
    if convention == "adjoint":
        if neg:
            return t + phi_x - t_i, t + phi_x
        return t - phi_x, t - phi_x + t_i
    raise ValueError(f"unknown convention {convention!r}")


def characteristic(
    profile: SpeedProfile,
    i: int,
    t: float,
    x: float,
    s,
    convention: str = "forward",
):
    """Position at parameter s of the characteristic of component i
    passing through (t, x), in the requested convention.

    The curve is affine in the transit coordinate, so this is exact up
    to the piecewise closed forms.  s must lie between the entry and
    exit parameters.
    """
    s_in, s_out = entry_exit_times(profile, i, t, x, convention)
    ss = np.asarray(s, dtype=float)
    tol = 1e-12 * (1 + abs(t))
    if np.any(ss < s_in - tol) or np.any(ss > s_out + tol):
        raise ValueError("parameter outside the characteristic's domain")
    phi_x = transit_time(profile, i, x)
    neg = profile.is_negative(i)
    if convention == "forward":
        tau = phi_x + (ss - t) if neg else phi_x - (ss - t)
    elif convention == "adjoint":
        tau = phi_x - (ss - t) if neg else phi_x + (ss - t)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return transit_position(profile, i, tau)
