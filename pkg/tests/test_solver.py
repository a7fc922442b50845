import numpy as np
import pytest

from mintc.canon import BoundaryMatrix
from mintc.speeds import SpeedProfile
from mintc.sim import (
    GridRefusalError,
    NumericsError,
    ProblemSpec,
    adjoint_flow_closed_form,
    slope_coupling,
    solve_adjoint,
    solve_forward,
)
from mintc.sim.solver import default_nt, grid_inner, grid_norm
from mintc.sim.examples import rotation_coupled_4x4


def scalar_spec(q=1.0, coupling=None):
    prof = SpeedProfile.from_constants([-1, 1], p=1)
    return ProblemSpec(
        profile=prof, q=BoundaryMatrix.from_rows([[q]]), coupling=coupling
    )


def varying_spec(coupling="slope"):
    prof = SpeedProfile.from_breakpoints(
        mesh=[0, "2/5", 1],
        values=[["-1", "-13/10", "-9/10"], ["4/5", "11/10", "7/5"]],
        p=1,
    )
    c = slope_coupling(prof) if isinstance(coupling, str) else coupling
    return ProblemSpec(profile=prof, q=BoundaryMatrix.from_rows([["3/4"]]), coupling=c)


def smooth_field(rng, x, decay=2.0):
    ks = np.arange(1, 4)
    amps = rng.normal(size=len(ks)) / ks**decay
    return sum(a * np.sin(k * np.pi * x) for k, a in zip(ks, amps))


class TestForwardBasics:
    def test_zero_stays_zero(self):
        traj = solve_forward(scalar_spec(), None, 1.0, nx=65)
        assert np.all(traj.values == 0.0)

    def test_transport_with_reflection_exact_on_lattice(self):
        # unit speeds, dt = dx: pure transport with one reflection is exact
        spec = scalar_spec(q=0.5)
        nx = 129
        x = np.linspace(0, 1, nx)
        y0 = np.zeros((2, nx))
        y0[1] = np.sin(np.pi * x)  # positive comp moves left, reflects via Q
        T = 1.5
        traj = solve_forward(spec, y0, T, nx=nx)
        # after reflection: y1(t, x) = 0.5 * y2(t - x, 0) = 0.5 sin(pi (t - x))
        got = traj.values[-1][0]
        expect = np.where(
            (T - x > 0) & (T - x < 1), 0.5 * np.sin(np.pi * (T - x)), 0.0
        )
        mask = x > T - 1  # region fed by the reflection
        assert np.abs(got[mask] - expect[mask]).max() < 1e-13

    def test_control_injection(self):
        spec = scalar_spec()
        nx = 129
        T = 0.75
        nt = default_nt(T, nx)
        t = np.linspace(0, T, nt)
        u = np.stack([np.sin(2 * np.pi * t)], axis=1)
        traj = solve_forward(spec, None, T, control=u, nx=nx)
        x = np.linspace(0, 1, nx)
        # positive component carries u(t - (1 - x)) inward from x=1
        got = traj.values[-1][1]
        mask = (1 - x) < T
        expect = np.sin(2 * np.pi * (T - (1 - x)))
        assert np.abs(got[mask] - expect[mask]).max() < 2e-3

    def test_boundary_condition_sampled_exactly(self):
        spec = scalar_spec(q=2.0)
        nx = 65
        traj = solve_forward(
            spec,
            [None, lambda x: np.cos(np.pi * x)],
            0.5,
            nx=nx,
        )
        # at every step the negative component at x=0 equals Q y_-(t, 0)
        assert np.abs(traj.values[5:, 0, 0] - 2.0 * traj.values[5:, 1, 0]).max() < 1e-12


class TestAdjointAgainstClosedForm:
    def test_exact_on_constant_speeds(self):
        spec = scalar_spec(q=0.8)
        nx = 257
        x = np.linspace(0, 1, nx)
        z1 = np.stack([np.sin(np.pi * x), x * (1 - x)])
        T = 1.25
        nt = int(round(T * (nx - 1))) + 1  # dt = dx: lattice-exact
        traj = solve_adjoint(spec, z1, T, nx=nx, nt=nt)
        cf = adjoint_flow_closed_form(spec, T, z1, x=x)
        assert np.abs(traj.values[0] - cf).max() < 1e-13

    def test_convergence_under_refinement(self):
        rng = np.random.default_rng(3)
        errs = {}
        for nx in (256, 512):
            spec = varying_spec()
            x = np.linspace(0, 1, nx)
            z1 = np.stack([smooth_field(rng, x) for _ in range(2)])
            traj = solve_adjoint(spec, z1, 1.1, nx=nx)
            cf = adjoint_flow_closed_form(spec, 1.1, z1, x=x)
            errs[nx] = np.sqrt(np.mean((traj.values[0] - cf) ** 2))
        assert errs[512] <= 5e-3
        assert errs[256] / errs[512] >= 1.5

    def test_negative_component_vanishes_after_transit_exact(self):
        # constant speeds on the step lattice: the decay past one transit
        # is exact on the grid
        spec = scalar_spec(q=0.7)
        nx = 257
        x = np.linspace(0, 1, nx)
        z1 = np.stack([np.sin(np.pi * x), 0 * x])
        T = 2.0
        nt = int(round(T * (nx - 1))) + 1  # dt = dx
        traj = solve_adjoint(spec, z1, T, nx=nx, nt=nt)
        dead = traj.t < T - 1.0 - 2 * traj.dt
        assert np.abs(traj.values[dead, 0, :]).max() == 0.0

    def test_negative_component_vanishes_after_transit_varying(self):
        # off-lattice feet smear the cutoff; past one transit plus the
        # diffusion width the component is numerically dead
        spec = varying_spec()
        nx = 257
        x = np.linspace(0, 1, nx)
        z1 = np.stack([np.sin(np.pi * x), 0 * x])
        T = 2.0
        traj = solve_adjoint(spec, z1, T, nx=nx)
        from mintc.speeds import travel_times

        t1 = float(travel_times(spec.profile)[1])
        dead = traj.t < T - t1 - 0.15
        assert np.abs(traj.values[dead, 0, :]).max() <= 1e-12


class TestDuality:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_pairing_identity(self, seed):
        rng = np.random.default_rng(seed)
        m_cells = rng.uniform(-0.8, 0.8, size=(2, 2, 2))
        spec = varying_spec(coupling=m_cells)
        nx = 512
        x = np.linspace(0, 1, nx)
        y0 = np.stack([smooth_field(rng, x) for _ in range(2)])
        z1 = np.stack([smooth_field(rng, x) for _ in range(2)])
        T = 1.3
        nt = default_nt(T, nx)
        t = np.linspace(0, T, nt)
        u = np.stack([np.sin(3 * t) * rng.normal()], axis=1)
        fwd = solve_forward(spec, y0, T, control=u, nx=nx)
        adj = solve_adjoint(spec, z1, T, nx=nx)
        lam_plus = np.array(
            [float(spec.profile.values[i][-1]) for i in range(1, 2)]
        )
        dx = 1 / (nx - 1)
        lhs = grid_inner(fwd.values[-1], z1, dx)
        boundary = np.trapezoid(
            (u * (lam_plus * adj.values[:, 1:, -1])).sum(axis=1), dx=T / (nt - 1)
        )
        rhs = grid_inner(y0, adj.values[0], dx) + boundary
        scale = grid_norm(y0, dx) * grid_norm(z1, dx) + np.abs(u).max()
        assert abs(lhs - rhs) <= 1e-2 * scale


class TestCausality:
    def test_support_stays_in_cone(self):
        # data concentrated at x0 must not spread faster than the speeds
        spec = scalar_spec(q=0.0)
        nx = 513
        x = np.linspace(0, 1, nx)
        x0, delta = 0.5, 0.05
        z1 = np.zeros((2, nx))
        z1[0] = np.exp(-((x - x0) ** 2) / (2 * 0.01**2))
        z1[0][np.abs(x - x0) > delta] = 0.0
        T = 0.25
        nt = int(round(T * (nx - 1))) + 1  # dt = dx: exact transport
        traj = solve_adjoint(spec, z1, T, nx=nx, nt=nt)
        for j in range(traj.nt):
            elapsed = T - traj.t[j]
            allowed = np.abs(x - x0) <= delta + elapsed + 2 / (nx - 1)
            assert np.abs(traj.values[j, 0, ~allowed]).max() <= 1e-14


class TestRotationIdentity:
    def test_half_domain_rotation(self):
        # in the left half both coupled speeds are -1 and the rotation angle
        # integrates to pi/2: state at x=1/2 is the quarter-turned inflow
        spec = rotation_coupled_4x4()
        nx = 1025
        x = np.linspace(0, 1, nx)
        y0 = np.stack(
            [
                np.sin(np.pi * x),
                np.sin(np.pi * x) * x,
                np.cos(np.pi * x) * x * (1 - x),
                0.5 * np.sin(2 * np.pi * x),
            ]
        )
        T = 2.0
        nt = int(round(T * (nx - 1))) + 1  # dt = dx
        traj = solve_forward(spec, y0, T, nx=nx, nt=nt)
        k_half = (nx - 1) // 2
        shift = int(round(0.5 / traj.dt))
        sel = np.arange(shift + 2, traj.nt)
        got1 = traj.values[sel, 0, k_half]
        got2 = traj.values[sel, 1, k_half]
        want1 = traj.values[sel - shift, 1, 0]
        want2 = -traj.values[sel - shift, 0, 0]
        assert np.abs(got1 - want1).max() <= 1e-3
        assert np.abs(got2 - want2).max() <= 1e-3


class TestRefusals:
    def test_grid_too_coarse(self):
        with pytest.raises(GridRefusalError):
            solve_forward(scalar_spec(), None, 1.0, nx=65, nt=8)

    def test_too_few_space_samples(self):
        with pytest.raises(GridRefusalError):
            solve_forward(scalar_spec(), None, 1.0, nx=8)

    def test_non_finite_input_detected(self):
        spec = scalar_spec()
        nx = 65
        bad = np.zeros((2, nx))
        bad[0, 10] = np.inf
        with pytest.raises(NumericsError):
            solve_forward(spec, bad, 0.5, nx=nx)
