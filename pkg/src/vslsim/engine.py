"""Scenario execution: advances the coupled model, the stiffness actuator and
the display-level position filter in lockstep, emitting telemetry.

The per-step order is fixed and fully deterministic:

  1. apply timeline events due at this step boundary (stiffness commands,
     payload mass changes, position setpoints, injected teleop events)
  2. record telemetry for the current state and inputs
  3. advance the dynamics one RK4 step using sigma measured at the boundary
     (sigma is held piecewise-constant within the step)
  4. advance the actuator and the position-hold filter

Payload events swap the tip mass instantaneously while angles and rates carry
over, so pickup/release never introduce state discontinuities. A horizontal
position display (first-order hold toward the setpoint, tip at
x + l*sin(alpha)) is attached for plotting; the dynamics never depend on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import model
from .actuator import (ActuatorConfig, StiffnessState, actuator_step,
                       command_stiffness, load_cell_reading, make_actuator_state)
from .disturbances import (DisturbanceSample, ImpulseEvent, _check_axis_target,
                           sample)
from .model import AxisState, SimState
from .params import ModelParams, effective_tip_mass
from .scenario import Scenario
from .telemetry import TelemetryRecord

# Time constant of the display-only position-hold filter, s.
POSITION_FILTER_TAU = 2.0


def _event_step(t: float, dt: float) -> int:
    """First step boundary at or after t (events land on boundaries)."""
    return max(0, math.ceil(t / dt - 1e-9))


class SimSession:
    """Mutable simulation instance: one owner advances it step by step.

    Drives scheduled scenario timelines and, for the teleop service, accepts
    live commands (stiffness / position / payload / injected impulses) that
    take effect at the next step boundary.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.params: ModelParams = scenario.params
        self.config: ActuatorConfig = scenario.actuator
        self.dt = scenario.dt
        self.n_steps = int(round(scenario.duration / scenario.dt))
        self.reset()

    def reset(self) -> None:
        sc = self.scenario
        sigma0 = sc.sigma_at_start()
        self.step_index = 0
        self.stiff: StiffnessState = make_actuator_state(sigma0, self.config, self.params)
        self.state = SimState(
            t=0.0,
            axes=(AxisState(), AxisState()),
            sigma=sigma0,
            m_p_current=effective_tip_mass(self.params.m_p),
        )
        self.x_uav = 0.0
        self.y_uav = 0.0
        self.x_sp = 0.0
        self.y_sp = 0.0
        self.breach_steps = 0
        self.injected: list[ImpulseEvent] = []
        # Timeline events mapped onto step boundaries once, up front.
        self._schedule = {}
        for cmd in sc.stiffness_schedule:
            self._schedule[_event_step(cmd.t, self.dt)] = cmd.sigma
        self._payload = {}
        for ev in sc.payload_events:
            self._payload[_event_step(ev.t, self.dt)] = ev.m_p
        self._setpoints = {}
        for sp in sc.position_setpoints:
            self._setpoints[_event_step(sp.t, self.dt)] = (sp.x, sp.y)

    # -- live command surface (teleop) ------------------------------------

    def command_sigma(self, target: float) -> None:
        self.stiff = command_stiffness(self.stiff, target)

    def command_position(self, x: float, y: float) -> None:
        self.x_sp = float(x)
        self.y_sp = float(y)

    def command_payload(self, m_p: float) -> None:
        if m_p < 0.0:
            raise ValueError(f"mass must be >= 0, got {m_p}")
        self.state = self.state.replace(m_p_current=effective_tip_mass(float(m_p)))

    def inject_impulse(self, magnitude: float, duration: float, axis: str = "x",
                       target: str = "tip") -> None:
        event = ImpulseEvent(t_start=self.t, duration=float(duration),
                             magnitude=float(magnitude), axis=axis, target=target)
        if not event.duration > 0.0:
            raise ValueError(f"impulse duration must be > 0, got {duration}")
        _check_axis_target(event)
        self.injected.append(event)
        # Spent impulses never reactivate; drop them to keep sampling cheap.
        self.injected = [e for e in self.injected
                         if e.t_start + e.duration > self.t - 1.0]

    # -- stepping ----------------------------------------------------------

    @property
    def t(self) -> float:
        return self.step_index * self.dt

    def sample_disturbance(self, t: float) -> DisturbanceSample:
        s = sample(self.scenario.disturbances, t)
        if self.injected:
            tdx = tdy = twx = twy = 0.0
            for e in self.injected:
                if e.active(t):
                    if e.target == "tip":
                        if e.axis == "x":
                            tdx += e.magnitude
                        else:
                            tdy += e.magnitude
                    elif e.axis == "x":
                        twx += e.magnitude
                    else:
                        twy += e.magnitude
            if tdx != 0.0 or tdy != 0.0 or twx != 0.0 or twy != 0.0:
                s = s + DisturbanceSample(tau_d_x=tdx, tau_d_y=tdy,
                                          tau_w_x=twx, tau_w_y=twy)
        return s

    def apply_due_events(self) -> None:
        """Consume timeline events due at this step boundary (one-shot, so a
        live command issued at the same boundary is not clobbered by a
        re-application)."""
        k = self.step_index
        sigma = self._schedule.pop(k, None)
        if sigma is not None:
            self.command_sigma(sigma)
        m_p = self._payload.pop(k, None)
        if m_p is not None:
            self.state = self.state.replace(m_p_current=effective_tip_mass(m_p))
        setpoint = self._setpoints.pop(k, None)
        if setpoint is not None:
            self.x_sp, self.y_sp = setpoint

    def record(self) -> TelemetryRecord:
        ax, ay = self.state.axes
        dist = self.sample_disturbance(self.t)
        cell = load_cell_reading(self.state, self.stiff, self.params, self.config)
        l = self.params.l
        return TelemetryRecord(
            t=self.t,
            theta_x=ax.theta, theta_y=ay.theta,
            alpha_x=ax.alpha, alpha_y=ay.alpha,
            theta_dot_x=ax.theta_dot, theta_dot_y=ay.theta_dot,
            alpha_dot_x=ax.alpha_dot, alpha_dot_y=ay.alpha_dot,
            sigma_target=self.stiff.sigma_target,
            sigma_measured=self.stiff.sigma_measured,
            k_s=self.stiff.k_s, c_s=self.stiff.c_s,
            tau_d_x=dist.tau_d_x, tau_d_y=dist.tau_d_y,
            tau_w_x=dist.tau_w_x, tau_w_y=dist.tau_w_y,
            load_cell=cell.force,
            m_p=self.state.m_p_current,
            x_uav=self.x_uav, y_uav=self.y_uav,
            x_tip=self.x_uav + l * math.sin(ax.alpha),
            y_tip=self.y_uav + l * math.sin(ay.alpha),
            validity=1 if self.state.validity_breach else 0,
        )

    def advance(self) -> None:
        """One sim step: dynamics, actuator, position filter."""
        sigma = self.stiff.sigma_measured
        self.state = model.step(self.state, self.dt, sigma, self.params,
                                sample=self.sample_disturbance)
        if self.state.validity_breach:
            self.breach_steps += 1
        self.stiff = actuator_step(self.stiff, self.dt, self.config, self.params)
        decay = 1.0 - math.exp(-self.dt / POSITION_FILTER_TAU)
        self.x_uav += (self.x_sp - self.x_uav) * decay
        self.y_uav += (self.y_sp - self.y_uav) * decay
        self.step_index += 1


@dataclass(frozen=True)
class RunResult:
    records: list[TelemetryRecord]
    breach_steps: int
    scenario: Scenario


def run(scenario: Scenario) -> RunResult:
    """Execute a scenario to completion. Deterministic: the same scenario
    (including its seed) produces byte-identical telemetry."""
    session = SimSession(scenario)
    records: list[TelemetryRecord] = []
    decimate = scenario.decimate
    for k in range(session.n_steps):
        session.apply_due_events()
        if k % decimate == 0:
            records.append(session.record())
        session.advance()
    session.apply_due_events()  # events scheduled exactly at the end time
    records.append(session.record())
    return RunResult(records=records, breach_steps=session.breach_steps,
                     scenario=scenario)
