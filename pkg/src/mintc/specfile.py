"""Human-writable problem description files.

A file is a sequence of `[section]` headers and `key = value` lines,
with `#` comments.  Sections:

  [speeds]    mesh = <numbers>; negative = <count>; one `values = ...`
              line per component (breakpoint values, exact rationals)
  [boundary]  one `row = ...` line per boundary-matrix row (rationals)
  [coupling]  optional; one `cell = r1 ; r2 ; ...` matrix per mesh cell
              (floats, `pi` forms allowed); default zero
  [horizon]   optional; `t = <number>`
  [grid]      optional; `nt = <int>`, `nx = <int>`

Rationals are integers, decimals, or `a/b` fractions and are parsed
exactly.  Parse errors carry the offending line number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .canon import BoundaryMatrix
from .sim.problem import ProblemSpec
from .speeds import SpeedProfile, StructureError

_PI_RE = re.compile(
    r"^(?P<sign>[+-]?)\s*(?:(?P<coef>\d+(?:\.\d+)?(?:/\d+)?)\s*\*?\s*)?"
    r"pi\s*(?:/\s*(?P<den>\d+))?$"
)


class SpecFileError(ValueError):
    """Parse or consistency failure, anchored to a line of the file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ParsedSpec:
    problem: ProblemSpec
    horizon: float | None
    nt: int | None
    nx: int | None


def parse_rational(token: str, line: int | None = None) -> Fraction:
    token = token.strip()
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise SpecFileError(f"expected an exact rational, got {token!r}", line)


def parse_number(token: str, line: int | None = None) -> float:
    """Float-valued entry: rational forms or pi multiples like `pi`,
    `-pi/2`, `3/4 pi`."""
    token = token.strip()
    m = _PI_RE.match(token)
    if m:
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("den"):
            coef /= int(m.group("den"))
        sign = -1.0 if m.group("sign") == "-" else 1.0
        return sign * float(coef) * math.pi
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError):
        raise SpecFileError(f"cannot parse number {token!r}", line)


def _split_values(raw: str) -> list[str]:
    return [tok for tok in (t.strip() for t in raw.split(",")) if tok]


def _tokenize(text: str):
    """Yield (line_number, section, key, value) entries."""
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise SpecFileError("unterminated section header", ln)
            section = line[1:-1].strip().lower()
            if section not in ("speeds", "boundary", "coupling", "horizon", "grid"):
                raise SpecFileError(f"unknown section [{section}]", ln)
            continue
        if "=" not in line:
            raise SpecFileError("expected `key = value`", ln)
        if section is None:
            raise SpecFileError("content before the first section header", ln)
        key, _, value = line.partition("=")
        yield ln, section, key.strip().lower(), value.strip()


def parse_spec_text(text: str) -> ParsedSpec:
    mesh = None
    negative = None
    values: list[tuple[int, list[Fraction]]] = []
    rows: list[tuple[int, list[Fraction]]] = []
    cells: list[tuple[int, list[list[float]]]] = []
    horizon = None
    nt = nx = None

    for ln, section, key, value in _tokenize(text):
        if section == "speeds":
            if key == "mesh":
                mesh = [parse_rational(t, ln) for t in _split_values(value)]
            elif key == "negative":
                try:
                    negative = int(value)
                except ValueError:
                    raise SpecFileError("`negative` must be an integer", ln)
            elif key == "values":
                values.append(
                    (ln, [parse_rational(t, ln) for t in _split_values(value)])
                )
            else:
                raise SpecFileError(f"unknown speeds key {key!r}", ln)
        elif section == "boundary":
            if key != "row":
                raise SpecFileError(f"unknown boundary key {key!r}", ln)
            rows.append((ln, [parse_rational(t, ln) for t in _split_values(value)]))
        elif section == "coupling":
            if key != "cell":
                raise SpecFileError(f"unknown coupling key {key!r}", ln)
            mat = [
                [parse_number(t, ln) for t in _split_values(chunk)]
                for chunk in value.split(";")
            ]
            cells.append((ln, mat))
        elif section == "horizon":
            if key != "t":
                raise SpecFileError(f"unknown horizon key {key!r}", ln)
            horizon = parse_number(value, ln)
        elif section == "grid":
            if key not in ("nt", "nx"):
                raise SpecFileError(f"unknown grid key {key!r}", ln)
            try:
                iv = int(value)
            except ValueError:
                raise SpecFileError(f"`{key}` must be an integer", ln)
            if key == "nt":
                nt = iv
            else:
                nx = iv

    if mesh is None:
        raise SpecFileError("missing `mesh` in [speeds]")
    if negative is None:
        raise SpecFileError("missing `negative` in [speeds]")
    if not values:
        raise SpecFileError("missing `values` lines in [speeds]")
    for ln, row in values:
        if len(row) != len(mesh):
            raise SpecFileError(
                f"speeds row has {len(row)} values for {len(mesh)} mesh points",
                ln,
            )
    try:
        profile = SpeedProfile(
            mesh=tuple(mesh),
            values=tuple(tuple(r) for _, r in values),
            p=negative,
        )
    except StructureError as exc:
        raise SpecFileError(str(exc))

    if not rows:
        raise SpecFileError("missing [boundary] rows")
    width = len(rows[0][1])
    for ln, row in rows:
        if len(row) != width:
            raise SpecFileError(
                f"boundary row has {len(row)} entries, expected {width}", ln
            )
    q = BoundaryMatrix(tuple(tuple(r) for _, r in rows))
    if (q.p, q.m) != (profile.p, profile.m):
        raise SpecFileError(
            f"boundary matrix is {q.p}x{q.m} but speeds declare "
            f"p={profile.p}, m={profile.m}",
            rows[0][0],
        )

    coupling = None
    if cells:
        n = profile.n
        n_cells = len(profile.mesh) - 1
        if len(cells) != n_cells:
            raise SpecFileError(
                f"expected {n_cells} coupling cells (one per mesh cell), "
                f"got {len(cells)}",
                cells[0][0],
            )
        coupling = np.zeros((n_cells, n, n))
        for c, (ln, mat) in enumerate(cells):
            if len(mat) != n or any(len(r) != n for r in mat):
                raise SpecFileError(
                    f"coupling cell must be {n}x{n} (rows separated by ';')",
                    ln,
                )
            coupling[c] = mat

    problem = ProblemSpec(profile=profile, q=q, coupling=coupling)
    return ParsedSpec(problem=problem, horizon=horizon, nt=nt, nx=nx)


def load_spec(path: str) -> ParsedSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec_text(fh.read())
