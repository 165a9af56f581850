import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vslsim.actuator import (ActuatorConfig, REDUCED_RIGID_SIGMA,
                             actuator_step, command_stiffness,
                             load_cell_reading, make_actuator_state,
                             settle_time)
from vslsim.model import AxisState, SimState
from vslsim.params import ModelParams

P = ModelParams()
CFG = ActuatorConfig()
DT = 0.001


def run_transition(start, target, duration=25.0, config=CFG, params=P):
    state = make_actuator_state(start, config, params)
    state = command_stiffness(state, target)
    trace = [(0.0, state.sigma_measured)]
    for k in range(int(round(duration / DT))):
        state = actuator_step(state, DT, config, params)
        trace.append(((k + 1) * DT, state.sigma_measured))
    return trace, state


class TestCommand:
    def test_full_transition_hits_nominal_time(self):
        trace, _ = run_transition(0.0, 1.0)
        assert settle_time(trace, 0.0, 1.0) == pytest.approx(7.8, abs=0.5)

    def test_command_current_value_no_motion(self):
        state = make_actuator_state(0.5, CFG, P)
        state = command_stiffness(state, 0.5)
        stepped = actuator_step(state, DT, CFG, P)
        assert stepped == state

    def test_partial_travel_settles_sooner(self):
        trace, _ = run_transition(0.0, 0.5)
        sig = [s for _, s in trace]
        assert all(b >= a for a, b in zip(sig, sig[1:]))
        assert settle_time(trace, 0.0, 0.5) < 7.8

    @pytest.mark.parametrize("bad", [-0.01, 1.01, math.nan])
    def test_out_of_range_rejected(self, bad):
        state = make_actuator_state(0.0, CFG, P)
        with pytest.raises(ValueError, match="sigma must be within"):
            command_stiffness(state, bad)

    def test_reduced_rigid_preset_reachable(self):
        trace, state = run_transition(0.0, REDUCED_RIGID_SIGMA)
        assert state.sigma_measured == pytest.approx(0.8, abs=1e-6)


class TestStep:
    def test_zero_to_one_monotone(self):
        trace, _ = run_transition(0.0, 1.0)
        sig = [s for _, s in trace]
        assert all(b >= a for a, b in zip(sig, sig[1:]))
        assert max(sig) <= 1.0  # overshoot would pass the safe twist angle

    def test_rate_limit(self):
        trace, _ = run_transition(0.0, 1.0)
        sig = [s for _, s in trace]
        limit = (1.0 / 7.8) * DT * 2.0
        assert max(abs(b - a) for a, b in zip(sig, sig[1:])) <= limit

    def test_payload_independent_trace(self):
        """The drive never sees the payload: identical traces for a bare tip
        and a 2 kg load."""
        trace_light, _ = run_transition(0.0, 1.0, params=ModelParams(m_p=0.3))
        trace_heavy, _ = run_transition(0.0, 1.0, params=ModelParams(m_p=2.0))
        worst = max(abs(a[1] - b[1]) for a, b in zip(trace_light, trace_heavy))
        assert worst < 1e-9

    def test_endpoint_reached_exactly(self):
        _, state = run_transition(0.0, 1.0, duration=20.0)
        assert abs(state.sigma_measured - 1.0) <= 1e-6
        assert state.sigma_measured == 1.0  # snap band latches the endpoint
        _, state = run_transition(1.0, 0.0, duration=20.0)
        assert state.sigma_measured == 0.0

    def test_blend_cache_tracks_sigma(self):
        _, state = run_transition(0.0, 1.0, duration=20.0)
        assert state.k_s == pytest.approx(P.k_max)
        assert state.c_s == pytest.approx(P.c_max)

    @settings(max_examples=15, deadline=None)
    @given(start=st.floats(0.0, 1.0), target=st.floats(0.0, 1.0))
    def test_any_transition_monotone_toward_target(self, start, target):
        trace, state = run_transition(start, target, duration=20.0)
        sig = [s for _, s in trace]
        if target >= start:
            assert all(b >= a - 1e-12 for a, b in zip(sig, sig[1:]))
        else:
            assert all(b <= a + 1e-12 for a, b in zip(sig, sig[1:]))
        assert state.sigma_measured == pytest.approx(target, abs=1e-6)


class TestLoadCell:
    def make_sim(self, alpha_x=0.0, alpha_y=0.0, m_p=2.0):
        return SimState(axes=(AxisState(alpha=alpha_x), AxisState(alpha=alpha_y)),
                        m_p_current=m_p)

    def test_flexible_pure_weight(self):
        stiff = make_actuator_state(0.0, CFG, P)
        cell = load_cell_reading(self.make_sim(m_p=2.0), stiff, P, CFG)
        assert cell.force == pytest.approx(19.62)

    def test_rigid_adds_holding_effort(self):
        stiff = make_actuator_state(1.0, CFG, P)
        cell = load_cell_reading(self.make_sim(m_p=2.0), stiff, P,
                                 ActuatorConfig(f_hold=30.0))
        assert cell.force == pytest.approx(49.62)

    def test_bare_link_lump(self):
        stiff = make_actuator_state(0.0, CFG, P)
        cell = load_cell_reading(self.make_sim(m_p=0.3), stiff, P, CFG)
        assert cell.force == pytest.approx(2.943)

    def test_strictly_increasing_in_sigma(self):
        sim = self.make_sim(alpha_x=0.1, m_p=2.0)
        readings = [load_cell_reading(sim, make_actuator_state(s, CFG, P), P, CFG).force
                    for s in (0.0, 0.25, 0.5, 0.75, 1.0)]
        assert all(b > a for a, b in zip(readings, readings[1:]))
