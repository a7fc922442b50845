import math
import random
from fractions import Fraction

import pytest

from mintc.canon import BoundaryMatrix
from mintc.mintime import (
    assignment_time_bruteforce,
    best_assignment_time,
    kernel_chain_indices,
    kernel_chain_time,
    minimal_time,
)
from mintc.ratmat import identity
from mintc.speeds import SpeedProfile, travel_times


def profile_from_times(neg_times, pos_times):
    """Constant-speed profile realizing the requested rational transit
    times (neg ascending, pos descending, as the ordering demands)."""
    speeds = [Fraction(-1) / Fraction(t) for t in neg_times] + [
        Fraction(1) / Fraction(t) for t in pos_times
    ]
    return SpeedProfile.from_constants(speeds, p=len(neg_times))


def random_ordered_times(rng, p, m):
    neg = sorted(Fraction(rng.randint(1, 12), rng.randint(1, 4)) for _ in range(p))
    pos = sorted(
        (Fraction(rng.randint(1, 12), rng.randint(1, 4)) for _ in range(m)),
        reverse=True,
    )
    return neg, pos


def random_full_rank_boundary(rng, p, m):
    from mintc.canon import rank

    while True:
        q = BoundaryMatrix.from_rows(
            [[rng.randint(-4, 4) for _ in range(m)] for _ in range(p)]
        )
        if rank(q) == p:
            return q


class TestMinimalTime:
    def test_rank_deficient_is_infinite(self):
        prof = SpeedProfile.from_constants([-1, 1], p=1)
        report = minimal_time(prof, BoundaryMatrix.from_rows([[0]]))
        assert report.t_opt == math.inf
        assert report.rank == 0

    def test_identity_unit_speeds(self):
        prof = SpeedProfile.from_constants([-1, -1, 1, 1], p=2)
        report = minimal_time(prof, BoundaryMatrix(identity(2)))
        assert report.t_opt == 2
        assert report.c == (1, 2)
        assert report.t_c == report.t_opt

    def test_worked_wide_assignment(self):
        # c = (2, 3, 4) pairs each T_i with T_{p+c_i}; with times
        # T- = (1,2,3), T+ = (4,3,2,1) the pairing evaluates to 4
        q1 = BoundaryMatrix.from_rows([[4, 6, 3, -1], [8, -1, 5, 3], [2, -1, 1, 1]])
        prof = profile_from_times([1, 2, 3], [4, 3, 2, 1])
        report = minimal_time(prof, q1)
        assert report.c == (2, 3, 4)
        # max(T4, T1+T5, T2+T6, T3+T7) = max(4, 1+3, 2+2, 3+1)
        assert report.t_opt == Fraction(4)
        assert report.argmax_i == 1

    def test_coupling_is_recorded_but_ignored(self):
        prof = SpeedProfile.from_constants([-1, 1], p=1)
        q = BoundaryMatrix.from_rows([[1]])
        bare = minimal_time(prof, q)
        with_coupling = minimal_time(prof, q, coupling=[[0.0, 1.0], [2.0, 0.0]])
        assert bare.t_opt == with_coupling.t_opt
        assert not bare.coupling_ignored
        assert with_coupling.coupling_ignored

    def test_argmax_is_smallest_maximizer(self):
        prof = profile_from_times([1, 1], [1, 1])
        report = minimal_time(prof, BoundaryMatrix(identity(2)))
        assert report.argmax_i == 1

    def test_resonance_warning_flag(self):
        prof = SpeedProfile.from_breakpoints(
            mesh=[0, Fraction(1, 2), 1],
            values=[
                [-1, -1, -1],
                [-1, -1, Fraction(-1, 2)],
                [Fraction(1, 2)] * 3,
                [1, 1, 1],
            ],
            p=2,
        )
        report = minimal_time(prof, BoundaryMatrix(identity(2)))
        assert not report.resonance_ok
        assert report.t_opt is not None


class TestKernelChain:
    def test_identity_two_by_two(self):
        # c0 equals the reversal matrix; the chain drops at 2 then 1
        prof = SpeedProfile.from_constants([-1, -1, 1, 1], p=2)
        q = BoundaryMatrix(identity(2))
        assert kernel_chain_indices(prof, q) == (2, 1)

    def test_zero_row_gives_infinite_index(self):
        prof = SpeedProfile.from_constants([-1, -1, 1, 1], p=2)
        q = BoundaryMatrix.from_rows([[1, 1], [0, 0]])
        ell = kernel_chain_indices(prof, q)
        assert ell[0] == math.inf  # the k=1 block sees only the zero row

    def test_closed_form_from_column_indices(self):
        from mintc.canon import column_indices

        rng = random.Random(11)
        for _ in range(40):
            m = rng.randint(1, 5)
            p = rng.randint(1, m)
            neg, pos = random_ordered_times(rng, p, m)
            prof = profile_from_times(neg, pos)
            q = random_full_rank_boundary(rng, p, m)
            c = column_indices(q)
            ell = kernel_chain_indices(prof, q)
            for k in range(1, p + 1):
                assert ell[k - 1] == min(c[p - k : p])

    def test_chain_time_equals_minimal_time(self):
        rng = random.Random(23)
        for _ in range(60):
            m = rng.randint(1, 5)
            p = rng.randint(1, m)
            neg, pos = random_ordered_times(rng, p, m)
            prof = profile_from_times(neg, pos)
            q = random_full_rank_boundary(rng, p, m)
            report = minimal_time(prof, q)
            assert kernel_chain_time(prof, q) == report.t_opt

    def test_chain_time_on_unit_identity(self):
        prof = SpeedProfile.from_constants([-1, -1, 1, 1], p=2)
        q = BoundaryMatrix(identity(2))
        assert kernel_chain_time(prof, q) == 2


class TestBestAssignment:
    def test_unit_speeds(self):
        prof = SpeedProfile.from_constants([-1, 1], p=1)
        assert best_assignment_time(prof) == 2

    def test_direct_evaluation(self):
        prof = profile_from_times([1, 2, 3], [4, 3, 2, 1])
        # max(T4, T1+T5, T2+T6, T3+T7) = 4
        assert best_assignment_time(prof) == Fraction(4)

    def test_bruteforce_small(self):
        prof = profile_from_times([1, 1], [1, 1])
        val, arg = assignment_time_bruteforce(prof)
        assert val == 2
        assert best_assignment_time(prof) == 2

    def test_bruteforce_asymmetric(self):
        prof = profile_from_times([1, 2], [3, 2, 1])
        val, arg = assignment_time_bruteforce(prof)
        # minimum over the six injections is max(3, 1+2, 2+1) = 3 at (2, 3)
        assert val == Fraction(3)
        assert val == best_assignment_time(prof)

    def test_bruteforce_matches_closed_form_randomly(self):
        rng = random.Random(99)
        for _ in range(60):
            m = rng.randint(1, 5)
            p = rng.randint(1, m)
            neg, pos = random_ordered_times(rng, p, m)
            prof = profile_from_times(neg, pos)
            val, _ = assignment_time_bruteforce(prof)
            assert val == best_assignment_time(prof)
            # the upper-triangular assignment c_i = m - p + i attains it
            t = travel_times(prof)
            attained = max(
                [t[p + 1]] + [t[i] + t[p + (m - p + i)] for i in range(1, p + 1)]
            )
            assert attained == val

    def test_size_bound(self):
        prof = profile_from_times([1], [8, 7, 6, 5, 4, 3, 2, 1])
        with pytest.raises(ValueError):
            assignment_time_bruteforce(prof)

    def test_needs_enough_controls(self):
        prof = profile_from_times([2, 1][::-1], [1])
        with pytest.raises(ValueError):
            best_assignment_time(prof)


class TestOrderingInvariant:
    def test_sandwich_bounds(self):
        rng = random.Random(5)
        for _ in range(40):
            m = rng.randint(1, 5)
            p = rng.randint(1, m)
            neg, pos = random_ordered_times(rng, p, m)
            prof = profile_from_times(neg, pos)
            q = random_full_rank_boundary(rng, p, m)
            t = travel_times(prof)
            report = minimal_time(prof, q)
            assert t[p + 1] <= report.t_cn <= report.t_opt <= t[p] + t[p + 1]
