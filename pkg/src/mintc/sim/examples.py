"""Ready-made systems used by the validation experiments.

Both constructions are small systems whose controllability behavior is
known in closed form, which makes them sharp test articles for the
solvers and the observability experiments.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from ..canon import BoundaryMatrix
from ..speeds import SpeedProfile
from .problem import ProblemSpec


def rotation_coupled_4x4(angle_scale: float = 1.0) -> ProblemSpec:
    """4-component system whose first two speeds agree on [0, 1/2] only.

    Components 1 and 2 are coupled by an antisymmetric rotation of
    strength a(x) = pi on (0, 1/2) and 0 after, so the (1,2)-pair turns
    by exactly pi/2 over the left half.  Speed 2 is -1 on [0, 1/2] and
    then relaxes linearly so that its total transit is 2.  Speeds are
    (-1, lam2(x), 1/2, 1) with transit times (1, 2, 2, 1) and the
    boundary reflection is the identity.

    Because the agreement of speeds 1 and 2 is partial, the pairing
    formula (which would give 3) does not apply; the true minimal time
    is the worst-case 4.
    """
    shat = brentq(
        lambda s: math.log(1.0 / (1.0 - s / 2.0)) / s - 1.5,
        1e-9,
        2.0 - 1e-9,
        xtol=1e-15,
    )
    lam2_end = -(1.0 - shat / 2.0)
    profile = SpeedProfile.from_breakpoints(
        mesh=[0, Fraction(1, 2), 1],
        values=[
            [-1, -1, -1],
            [-1, -1, lam2_end],
            [Fraction(1, 2)] * 3,
            [1, 1, 1],
        ],
        p=2,
    )
    q = BoundaryMatrix.from_rows([[1, 0], [0, 1]])
    a = math.pi * angle_scale
    coupling = np.zeros((2, 4, 4))
    coupling[0, 0, 1] = a
    coupling[0, 1, 0] = -a
    return ProblemSpec(profile=profile, q=q, coupling=coupling)


def rotation_window(horizon: float) -> tuple[float, float]:
    """The interval of positions where the second component must equal
    minus the inflow plateau at time `horizon` (for 5/2 <= horizon < 4):
    uncontrollable mass parked by the rotation."""
    if not 2.5 <= horizon < 4.0:
        raise ValueError("the construction needs 5/2 <= horizon < 4")
    spec = rotation_coupled_4x4()
    from ..speeds import transit_position

    # the plateau leaves x = 1/2 between times horizon - 3/2 and 5/2 and
    # rides characteristic 2: the latest departure travels for horizon - 5/2
    # beyond transit 1/2 (left edge), the earliest reaches x = 1 exactly
    lo = transit_position(spec.profile, 2, 0.5 + (horizon - 2.5))
    return float(lo), 1.0


def one_way_coupled_pair(eps: float) -> ProblemSpec:
    """2x2 system with zero boundary reflection and one-way coupling.

    The first (negative-speed) component feels -eps times the second;
    the second is free transport fed by the control.  Null control of
    the pair needs time 1 when eps = 0 but time 2 when eps != 0: the
    coupling re-excites the first component for a full extra transit.
    """
    profile = SpeedProfile.from_constants([-1, 1], p=1)
    q = BoundaryMatrix.from_rows([[0]])
    coupling = np.zeros((1, 2, 2))
    coupling[0, 0, 1] = -eps
    return ProblemSpec(profile=profile, q=q, coupling=coupling)
