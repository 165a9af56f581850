import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vslsim.disturbances import DisturbanceSample
from vslsim.model import (AxisState, DegeneratePayloadError, SimState,
                          assemble_state_matrix, blend_stiffness, check_sigma,
                          closed_form_solution, coupling_torque,
                          discrete_propagator, dynamics_rhs, forcing_matrix,
                          mechanical_energy, step)
from vslsim.params import ModelParams

P = ModelParams()


def state_vector(state, axis=0):
    ax = state.axes[axis]
    return np.array([ax.theta, ax.theta_dot, ax.alpha, ax.alpha_dot])


def make_state(x, sigma=0.0, m_p=P.m_p):
    return SimState(axes=(AxisState(*x), AxisState()), sigma=sigma, m_p_current=m_p)


class TestBlendStiffness:
    def test_fully_flexible_endpoint(self):
        assert blend_stiffness(0.0, P) == (0.0, 0.0)

    def test_fully_rigid_endpoint(self):
        p = ModelParams(k_max=50.0, c_max=2.0)
        assert blend_stiffness(1.0, p) == (50.0, 2.0)

    def test_linearity_midpoint(self):
        p = ModelParams(k_max=50.0, c_max=2.0)
        assert blend_stiffness(0.5, p) == (25.0, 1.0)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_linear_in_sigma(self, sigma):
        k, c = blend_stiffness(sigma, P)
        assert k == pytest.approx(sigma * P.k_max)
        assert c == pytest.approx(sigma * P.c_max)

    @pytest.mark.parametrize("bad", [-0.1, 1.5, math.nan, math.inf])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValueError, match="sigma must be within"):
            blend_stiffness(bad, P)
        with pytest.raises(ValueError):
            check_sigma(bad)


class TestCouplingTorque:
    def test_no_relative_displacement(self):
        axis = AxisState(theta=0.2, theta_dot=-0.3, alpha=0.2, alpha_dot=-0.3)
        assert coupling_torque(axis, 50.0, 2.0) == 0.0

    def test_zero_when_flexible(self):
        axis = AxisState(theta=0.3, theta_dot=1.0, alpha=-0.2, alpha_dot=0.5)
        assert coupling_torque(axis, 0.0, 0.0) == 0.0

    def test_direct_substitution(self):
        axis = AxisState(theta=0.1, theta_dot=0.0, alpha=0.0, alpha_dot=0.0)
        assert coupling_torque(axis, 50.0, 2.0) == pytest.approx(-5.0)


class TestDynamicsRhs:
    def test_equilibrium(self):
        dx, dy = dynamics_rhs(make_state([0, 0, 0, 0]), 0.5,
                              DisturbanceSample(), P)
        assert dx == (0.0, 0.0, 0.0, 0.0)
        assert dy == (0.0, 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("alpha", [0.0, 0.1, -0.4])
    def test_flexible_attitude_independent_of_tip(self, alpha):
        # sigma = 0, theta subsystem sees nothing from (alpha, alpha_dot)
        dx, _ = dynamics_rhs(make_state([0.0, 0.0, alpha, 0.3]), 0.0,
                             DisturbanceSample(), P)
        assert dx[1] == 0.0

    def test_rigid_steady_state_satisfies_static_solve(self):
        # independent oracle: 2x2 stiffness solve for constant tip torque
        tau_d = 2.0
        k_s, _ = blend_stiffness(1.0, P)
        K = np.array([[P.K_c + k_s, -k_s], [-k_s, P.m_p * P.g * P.l + k_s]])
        theta_ss, alpha_ss = np.linalg.solve(K, [0.0, tau_d])
        dx, _ = dynamics_rhs(make_state([theta_ss, 0.0, alpha_ss, 0.0]), 1.0,
                             DisturbanceSample(tau_d_x=tau_d), P)
        assert dx == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=1e-12)

    def test_degenerate_payload_rejected(self):
        with pytest.raises(DegeneratePayloadError, match="degenerate"):
            dynamics_rhs(make_state([0, 0, 0, 0], m_p=0.0), 0.0,
                         DisturbanceSample(), P)


class TestStateMatrix:
    def test_flexible_is_block_diagonal(self):
        A = assemble_state_matrix(0.0, P)
        assert np.all(A[:2, 2:] == 0.0)
        assert np.all(A[2:, :2] == 0.0)

    def test_coupling_blocks_scale_linearly_with_sigma(self):
        A1 = assemble_state_matrix(0.4, P)
        A2 = assemble_state_matrix(0.8, P)
        np.testing.assert_allclose(2.0 * A1[:2, 2:], A2[:2, 2:], rtol=1e-12)
        np.testing.assert_allclose(2.0 * A1[2:, :2], A2[2:, :2], rtol=1e-12)

    @pytest.mark.parametrize("sigma", [0.0, 0.3, 1.0])
    def test_trace(self, sigma):
        A = assemble_state_matrix(sigma, P)
        k_s, c_s = blend_stiffness(sigma, P)
        expected = -(P.D_c + c_s) / P.J_att - (P.c_p + c_s) / (P.m_p * P.l ** 2)
        assert np.trace(A) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("sigma", [0.2, 1.0])
    def test_coupling_is_action_reaction(self, sigma):
        # the same k_s, c_s appear in both equations' cross terms
        A = assemble_state_matrix(sigma, P)
        pend = P.m_p * P.l ** 2
        assert A[1, 2] * P.J_att == pytest.approx(A[3, 0] * pend, rel=1e-12)
        assert A[1, 3] * P.J_att == pytest.approx(A[3, 1] * pend, rel=1e-12)

    def test_rhs_matches_matrix_form(self):
        x = [0.03, -0.2, 0.1, 0.4]
        tau_w, tau_d = 0.7, -1.1
        dx, _ = dynamics_rhs(make_state(x), 0.6,
                             DisturbanceSample(tau_w_x=tau_w, tau_d_x=tau_d), P)
        A = assemble_state_matrix(0.6, P)
        B = forcing_matrix(P)
        np.testing.assert_allclose(dx, A @ x + B @ [tau_w, tau_d], rtol=1e-12)


class TestStep:
    def test_equilibrium_fixed_point(self):
        state = make_state([0, 0, 0, 0])
        out = step(state, 0.001, 0.5, P)
        assert state_vector(out).tolist() == [0, 0, 0, 0]
        assert out.t == pytest.approx(0.001)

    def test_dt_bounds(self):
        state = make_state([0, 0, 0, 0])
        with pytest.raises(ValueError, match="dt"):
            step(state, 0.02, 0.0, P)
        with pytest.raises(ValueError, match="dt"):
            step(state, 0.0, 0.0, P)

    def test_deterministic(self):
        a = make_state([0.1, 0.0, -0.05, 0.2])
        b = make_state([0.1, 0.0, -0.05, 0.2])
        for _ in range(100):
            a = step(a, 0.001, 0.3, P)
            b = step(b, 0.001, 0.3, P)
        assert state_vector(a).tolist() == state_vector(b).tolist()

    @pytest.mark.parametrize("sigma", [0.0, 0.25, 0.5, 1.0])
    def test_matches_matrix_exponential_oracle(self, sigma):
        rng = np.random.default_rng(42)
        x = rng.uniform(-0.1, 0.1, 4)
        state = make_state(x, sigma=sigma)
        E, f = discrete_propagator(sigma, P, 0.001)
        oracle = x.copy()
        worst = 0.0
        for _ in range(10_000):
            state = step(state, 0.001, sigma, P)
            oracle = E @ oracle + f
            worst = max(worst, np.max(np.abs(state_vector(state) - oracle)))
        assert worst < 1e-6

    def test_energy_drift_zero_damping(self):
        p = ModelParams(D_c=0.0, c_p=0.0, c_max=0.0)
        state = SimState(axes=(AxisState(0.05, 0.0, -0.03, 0.0),
                               AxisState(0.02, 0.1, 0.0, 0.0)),
                         sigma=0.5, m_p_current=p.m_p)
        e0 = mechanical_energy(state, 0.5, p)
        for _ in range(10_000):
            state = step(state, 0.001, 0.5, p)
        e1 = mechanical_energy(state, 0.5, p)
        assert abs(e1 - e0) / e0 < 1e-3

    def test_validity_flag_set_and_cleared(self):
        state = make_state([1.6, 0, 0, 0])  # beyond pi/2
        out = step(state, 0.001, 0.0, P)
        assert out.validity_breach
        calm = step(make_state([0.1, 0, 0, 0]), 0.001, 0.0, P)
        assert not calm.validity_breach


class TestInvariants:
    def test_flexible_decoupling_exact(self):
        """sigma = 0 with a quiet vehicle: tip motion never leaks into theta."""
        state = make_state([0.0, 0.0, 0.3, -0.5])
        for _ in range(5000):
            state = step(state, 0.001, 0.0, P)
        assert abs(state.axes[0].theta) <= 1e-12
        assert abs(state.axes[0].theta_dot) <= 1e-12

    @settings(max_examples=20, deadline=None)
    @given(
        theta=st.floats(-0.3, 0.3), alpha=st.floats(-0.3, 0.3),
        theta_dot=st.floats(-0.5, 0.5), alpha_dot=st.floats(-0.5, 0.5),
        sigma=st.floats(0.0, 1.0),
        D_c=st.floats(0.0, 10.0), c_p=st.floats(0.0, 2.0), c_max=st.floats(0.0, 10.0),
    )
    def test_passivity(self, theta, alpha, theta_dot, alpha_dot, sigma, D_c, c_p, c_max):
        """Unforced energy is non-increasing whenever all damping is >= 0."""
        p = ModelParams(D_c=D_c, c_p=c_p, c_max=c_max)
        state = SimState(axes=(AxisState(theta, theta_dot, alpha, alpha_dot),
                               AxisState()), sigma=sigma, m_p_current=p.m_p)
        prev = mechanical_energy(state, sigma, p)
        for _ in range(500):
            state = step(state, 0.001, sigma, p)
            e = mechanical_energy(state, sigma, p)
            assert e <= prev * (1.0 + 1e-9) + 1e-15
            prev = e

    def test_sigma_continuity(self):
        def final(sigma):
            state = SimState(axes=(AxisState(0.1, 0.0, -0.05, 0.2),
                                   AxisState(0.02, 0.0, 0.01, 0.0)),
                             sigma=sigma, m_p_current=P.m_p)
            for _ in range(10_000):
                state = step(state, 0.001, sigma, P)
            return np.concatenate([state_vector(state, 0), state_vector(state, 1)])

        diff = np.abs(final(0.5) - final(0.5 + 1e-6))
        assert np.max(diff) < 1e-3

    def test_rigid_limit_tracking(self):
        """High attachment stiffness pins the tip to the vehicle under
        constant tip torque."""
        p = ModelParams(k_max=100 * P.m_p * P.g * P.l)
        const = DisturbanceSample(tau_d_x=2.0)
        state = make_state([0, 0, 0, 0])
        for _ in range(30_000):
            state = step(state, 0.001, 1.0, p, sample=lambda t: const)
        ax = state.axes[0]
        assert abs(ax.alpha - ax.theta) / abs(ax.alpha) < 0.02


class TestClosedForm:
    def test_zero_initial_zero_forcing(self):
        out = closed_form_solution([0, 0, 0, 0], 0.7, 0.0, 0.0, 5.0, P)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_pendulum_frequency_analytic(self):
        """Flexible, undamped: the tip swings at sqrt(g/l)."""
        p = ModelParams(c_p=0.0, m_p=2.0, l=1.0, g=9.81)
        w0 = math.sqrt(p.g / p.l)
        for t in (0.3, 1.0, 2.7):
            out = closed_form_solution([0.0, 0.0, 0.1, 0.0], 0.0, 0.0, 0.0, t, p)
            assert out[2] == pytest.approx(0.1 * math.cos(w0 * t), abs=1e-9)

    def test_stiffening_raises_both_frequencies(self):
        A0 = assemble_state_matrix(0.0, P)
        A1 = assemble_state_matrix(1.0, P)
        f0 = sorted(set(round(abs(z), 9) for z in np.linalg.eigvals(A0)))
        f1 = sorted(set(round(abs(z), 9) for z in np.linalg.eigvals(A1)))
        assert f1[0] > f0[0] and f1[-1] > f0[-1]

    def test_defective_matrix_falls_back_to_expm(self):
        # critically damped attitude axis at sigma = 0 is a defective matrix
        import scipy.linalg
        x0 = np.array([0.1, -0.2, 0.05, 0.3])
        out = closed_form_solution(x0, 0.0, 0.3, -0.5, 2.0, P)
        A = assemble_state_matrix(0.0, P)
        b = forcing_matrix(P) @ np.array([0.3, -0.5])
        M = np.zeros((5, 5))
        M[:4, :4] = A
        M[:4, 4] = b
        ref = (scipy.linalg.expm(M * 2.0) @ np.concatenate([x0, [1.0]]))[:4]
        np.testing.assert_allclose(out, ref, rtol=1e-9, atol=1e-12)

    def test_forced_response_matches_step_integration(self):
        const = DisturbanceSample(tau_d_x=1.5, tau_w_x=-0.4)
        state = make_state([0.02, 0.0, -0.01, 0.0], sigma=0.5)
        for _ in range(3000):
            state = step(state, 0.001, 0.5, P, sample=lambda t: const)
        ref = closed_form_solution([0.02, 0.0, -0.01, 0.0], 0.5, -0.4, 1.5, 3.0, P)
        np.testing.assert_allclose(state_vector(state), ref, atol=1e-7)
