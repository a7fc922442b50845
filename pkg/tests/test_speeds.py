import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from mintc import speeds
from mintc.speeds import (
    SpeedProfile,
    StructureError,
    characteristic,
    entry_exit_times,
    resonance_classes,
    transit_position,
    transit_time,
    travel_times,
    validate,
)


def unit_pair():
    return SpeedProfile.from_constants([-1, 1], p=1)


def ramp_profile():
    # one negative component accelerating from -1 to -2
    return SpeedProfile.from_breakpoints(
        mesh=[0, 1], values=[[-1, -2], [1, 1]], p=1
    )


def wiggly_profile():
    return SpeedProfile.from_breakpoints(
        mesh=[0, Fraction(2, 5), 1],
        values=[[-1, Fraction(-13, 10), Fraction(-9, 10)], [Fraction(4, 5), Fraction(11, 10), Fraction(7, 5)]],
        p=1,
    )


class TestStructure:
    def test_mesh_must_cover_unit_interval(self):
        with pytest.raises(StructureError):
            SpeedProfile.from_breakpoints([0, 0.5], [[-1, -1], [1, 1]], p=1)

    def test_mesh_must_increase(self):
        with pytest.raises(StructureError):
            SpeedProfile.from_breakpoints([0, 0.5, 0.5, 1], [[-1] * 4, [1] * 4], p=1)

    def test_value_rows_must_match_mesh(self):
        with pytest.raises(StructureError):
            SpeedProfile.from_breakpoints([0, 1], [[-1], [1, 1]], p=1)

    def test_need_both_signs(self):
        with pytest.raises(StructureError):
            SpeedProfile.from_constants([-1, -2], p=2)


class TestValidate:
    def test_constant_opposite_signs_pass(self):
        assert validate(unit_pair()) == []

    def test_wrong_sign_is_flagged_at_its_breakpoint(self):
        prof = SpeedProfile.from_breakpoints([0, 1], [[1, -1], [1, 1]], p=1)
        vs = validate(prof)
        assert any(v.kind == "sign" and v.components == (1,) and v.x == 0 for v in vs)

    def test_order_violation(self):
        prof = SpeedProfile.from_constants([-1, -2, 1], p=2)
        vs = validate(prof)
        assert any(v.kind == "order" and v.components == (1, 2) for v in vs)

    def test_group_boundary_not_order_checked(self):
        # lambda_p < 0 < lambda_{p+1} is a sign matter, not an ordering one
        prof = SpeedProfile.from_constants([-1, 1], p=1)
        assert not any(v.kind == "order" for v in validate(prof))


class TestResonance:
    def test_distinct_speeds_each_alone(self):
        rc = resonance_classes(SpeedProfile.from_constants([-2, -1, 1, 2], p=2))
        assert rc.classes == ((1,), (2,), (3,), (4,))
        assert rc.satisfied

    def test_identical_speeds_share_class(self):
        rc = resonance_classes(SpeedProfile.from_constants([-1, -1, 1, 1], p=2))
        assert rc.classes == ((1, 2), (3, 4))
        assert rc.satisfied

    def test_partial_agreement_breaks_hypothesis(self):
        prof = SpeedProfile.from_breakpoints(
            mesh=[0, Fraction(1, 2), 1],
            values=[
                [-1, -1, -1],
                [-1, -1, Fraction(-1, 2)],
                [1, 1, 1],
            ],
            p=2,
        )
        rc = resonance_classes(prof)
        assert not rc.satisfied
        assert rc.offender == (1, 2)
        assert rc.agree_at == 0
        assert rc.differ_at == 1
        # but they are not the same function, so classes stay separate
        assert rc.classes == ((1,), (2,), (3,))


class TestTravelTimes:
    def test_unit_speeds(self):
        t = travel_times(unit_pair())
        assert t.t == (Fraction(1), Fraction(1))

    def test_constant_times_are_exact(self):
        prof = SpeedProfile.from_constants([Fraction(-1, 3), Fraction(2, 5)], p=1)
        t = travel_times(prof)
        assert t[1] == Fraction(3)
        assert t[2] == Fraction(5, 2)

    def test_ramp_matches_quadrature(self):
        # speed -(1+x): transit integral is log 2
        t = travel_times(ramp_profile())
        oracle, err = quad(lambda x: 1.0 / (1.0 + x), 0.0, 1.0, epsabs=1e-14)
        assert err < 1e-12
        assert t[1] == pytest.approx(oracle, abs=1e-12)
        assert t[1] == pytest.approx(math.log(2.0), abs=1e-12)

    def test_ordering_follows_speed_ordering(self):
        prof = SpeedProfile.from_constants([-3, -2, -1, Fraction(1, 2), 1, 2], p=3)
        t = travel_times(prof)
        assert t[1] <= t[2] <= t[3]
        assert t[6] <= t[5] <= t[4]

    def test_invalid_profile_refused(self):
        prof = SpeedProfile.from_breakpoints([0, 1], [[1, -1], [1, 1]], p=1)
        with pytest.raises(speeds.ValidationError):
            travel_times(prof)


class TestTransitCoordinates:
    def test_unit_speed_is_identity(self):
        prof = unit_pair()
        for x in (0.0, 0.25, 0.7, 1.0):
            assert transit_time(prof, 1, x) == pytest.approx(x, abs=1e-15)

    def test_ramp_against_quadrature(self):
        prof = ramp_profile()
        for x in (0.1, 0.37, 0.62, 0.99):
            oracle, _ = quad(lambda s: 1.0 / (1.0 + s), 0.0, x, epsabs=1e-14)
            assert transit_time(prof, 1, x) == pytest.approx(oracle, abs=1e-12)
            assert transit_time(prof, 1, x) == pytest.approx(
                math.log(1.0 + x), abs=1e-12
            )

    def test_endpoint_equals_travel_time(self):
        prof = wiggly_profile()
        t = travel_times(prof)
        for i in (1, 2):
            assert transit_time(prof, i, 1.0) == pytest.approx(float(t[i]), rel=1e-15)

    @given(st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, x):
        prof = wiggly_profile()
        for i in (1, 2):
            s = transit_time(prof, i, x)
            assert transit_position(prof, i, s) == pytest.approx(x, abs=1e-12)

    def test_inverse_round_trip_in_s(self):
        prof = wiggly_profile()
        rng = np.random.default_rng(5)
        t = travel_times(prof)
        for i in (1, 2):
            ss = rng.uniform(0.0, float(t[i]), size=100)
            xs = transit_position(prof, i, ss)
            back = transit_time(prof, i, xs)
            assert np.allclose(back, ss, atol=1e-12)

    def test_monotone(self):
        prof = wiggly_profile()
        xs = np.linspace(0, 1, 257)
        for i in (1, 2):
            vals = transit_time(prof, i, xs)
            assert np.all(np.diff(vals) > 0)

    def test_domain_errors(self):
        prof = unit_pair()
        with pytest.raises(ValueError):
            transit_position(prof, 1, 1.5)
        with pytest.raises(ValueError):
            transit_time(prof, 1, -0.2)


class TestCharacteristics:
    def test_unit_negative_adjoint_moves_up(self):
        prof = unit_pair()
        # adjoint-convention curve through (t, x): position x + t - s
        for t, x in ((0.3, 0.2), (0.5, 0.1)):
            assert characteristic(prof, 1, t, x, 0.0, "adjoint") == pytest.approx(
                x + t, abs=1e-14
            )

    def test_adjoint_entry_time_positive_component(self):
        prof = wiggly_profile()
        t, x = 0.8, 0.4
        s_in, _ = entry_exit_times(prof, 2, t, x, "adjoint")
        assert s_in == pytest.approx(t - transit_time(prof, 2, x), abs=1e-14)

    def test_curves_hit_declared_boundaries(self):
        prof = wiggly_profile()
        for conv in ("forward", "adjoint"):
            for i, t, x in ((1, 0.9, 0.35), (2, 1.1, 0.6)):
                s_in, s_out = entry_exit_times(prof, i, t, x, conv)
                assert s_in < t < s_out
                x_in = characteristic(prof, i, t, x, s_in, conv)
                x_out = characteristic(prof, i, t, x, s_out, conv)
                neg = i <= prof.p
                if conv == "forward":
                    lo, hi = (0.0, 1.0) if neg else (1.0, 0.0)
                else:
                    lo, hi = (1.0, 0.0) if neg else (0.0, 1.0)
                assert x_in == pytest.approx(lo, abs=1e-12)
                assert x_out == pytest.approx(hi, abs=1e-12)

    def test_against_root_finding_oracle(self):
        # entry time from brentq on the curve itself
        from scipy.optimize import brentq

        prof = wiggly_profile()
        i, t, x = 2, 1.3, 0.55
        s_in, s_out = entry_exit_times(prof, i, t, x, "adjoint")
        f = lambda s: characteristic(prof, i, t, x, s, "adjoint") - 0.0
        root = brentq(f, s_in, t, xtol=1e-13)
        assert root == pytest.approx(s_in, abs=1e-10)

    def test_monotone_in_s(self):
        prof = wiggly_profile()
        i, t, x = 1, 0.6, 0.5
        s_in, s_out = entry_exit_times(prof, i, t, x, "adjoint")
        ss = np.linspace(s_in, s_out, 64)
        xs = np.array([characteristic(prof, i, t, x, s, "adjoint") for s in ss])
        assert np.all(np.diff(xs) < 0)  # negative component drifts to 0

    def test_passes_through_anchor(self):
        prof = wiggly_profile()
        for conv in ("forward", "adjoint"):
            for i in (1, 2):
                assert characteristic(prof, i, 0.7, 0.3, 0.7, conv) == pytest.approx(
                    0.3, abs=1e-14
                )
