"""Cable-twisting stiffness actuator: a geared DC motor under position PID.

The motor twists the link's internal cables; the stiffness fraction sigma is
the motor angle normalized by the full-twist angle. The drive is modeled as a
first-order velocity lag with velocity saturation under a position PID whose
output is a velocity command. The transition is rate-limit dominated and
overshoot-free (overshoot past sigma = 1 would exceed the safe twist angle),
and the default gains produce a 0 -> 1 transition that settles in ~7.8 s.
The payload never enters the drive model, so transition timing is
payload-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .model import SimState, blend_stiffness, check_sigma
from .params import ModelParams

# Documented preset for deliberately running below full rigidity.
REDUCED_RIGID_SIGMA = 0.8


@dataclass(frozen=True)
class ActuatorConfig:
    pos_rigid: float = 25.0    # motor angle at full rigidity, rad
    tau_motor: float = 0.2     # velocity lag time constant, s
    v_max: float = 3.4         # velocity saturation, rad/s (sets the ~7.8 s transition)
    kp: float = 1.2            # position loop gain, 1/s (critically damped with tau_motor)
    ki: float = 0.0            # integral gain, 1/s^2
    kd: float = 0.0            # velocity feedback gain
    snap_band: float = 1e-7    # settle band in sigma units below which the drive latches
    f_hold: float = 30.0       # internal cable tension at full rigidity, N (telemetry model only)


@dataclass(frozen=True)
class StiffnessState:
    sigma_target: float = 0.0
    sigma_measured: float = 0.0
    motor_pos: float = 0.0     # rad
    motor_vel: float = 0.0     # rad/s
    k_s: float = 0.0           # N*m/rad, cached blend at sigma_measured
    c_s: float = 0.0           # N*m*s/rad
    pid_integral: float = 0.0


@dataclass(frozen=True)
class LoadCellSample:
    t: float
    force: float  # N, axial tension at the vehicle/link attachment


def make_actuator_state(sigma0: float, config: ActuatorConfig, params: ModelParams) -> StiffnessState:
    """Actuator at rest with the cables pre-twisted to sigma0."""
    check_sigma(sigma0)
    k_s, c_s = blend_stiffness(sigma0, params)
    return StiffnessState(
        sigma_target=sigma0,
        sigma_measured=sigma0,
        motor_pos=sigma0 * config.pos_rigid,
        motor_vel=0.0,
        k_s=k_s,
        c_s=c_s,
    )


def command_stiffness(state: StiffnessState, target: float) -> StiffnessState:
    """Latch a stiffness setpoint; the drive starts tracking on the next step.

    Continuous targets are allowed (REDUCED_RIGID_SIGMA is the documented
    preset below full rigidity). Out-of-range targets are rejected."""
    check_sigma(target)
    if target == state.sigma_target:
        return state
    return replace(state, sigma_target=float(target), pid_integral=0.0)


def actuator_step(state: StiffnessState, dt: float, config: ActuatorConfig,
                  params: ModelParams) -> StiffnessState:
    """Advance the drive by dt: PID -> velocity command -> saturation ->
    first-order lag -> position integration. Deterministic; latches exactly
    onto the setpoint once inside the snap band."""
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    pos_target = state.sigma_target * config.pos_rigid
    err = pos_target - state.motor_pos

    snap = config.snap_band * config.pos_rigid
    if abs(err) <= snap and abs(state.motor_vel) * dt <= snap:
        if state.motor_pos == pos_target and state.motor_vel == 0.0:
            return state
        k_s, c_s = blend_stiffness(state.sigma_target, params)
        return replace(state, motor_pos=pos_target, motor_vel=0.0,
                       sigma_measured=state.sigma_target, k_s=k_s, c_s=c_s,
                       pid_integral=0.0)

    integral = state.pid_integral + err * dt
    v_cmd = config.kp * err + config.ki * integral - config.kd * state.motor_vel
    v_cmd = max(-config.v_max, min(config.v_max, v_cmd))
    # Exact discretization of the first-order velocity lag.
    decay = 1.0 - math.exp(-dt / config.tau_motor)
    vel = state.motor_vel + (v_cmd - state.motor_vel) * decay
    pos = state.motor_pos + vel * dt
    # The mechanism cannot untwist past slack nor twist past saturation.
    pos = max(0.0, min(config.pos_rigid, pos))

    sigma = max(0.0, min(1.0, pos / config.pos_rigid))
    k_s, c_s = blend_stiffness(sigma, params)
    return StiffnessState(
        sigma_target=state.sigma_target,
        sigma_measured=sigma,
        motor_pos=pos,
        motor_vel=vel,
        k_s=k_s,
        c_s=c_s,
        pid_integral=integral,
    )


def load_cell_reading(sim: SimState, stiff: StiffnessState, params: ModelParams,
                      config: ActuatorConfig) -> LoadCellSample:
    """Axial tension at the attachment: payload weight through the deflected
    link plus the internal holding effort of the twisted cables. The holding
    term scales with sigma, so the reading steps up during rigid phases. This
    is a telemetry model only; it never feeds back into the dynamics."""
    ax, ay = sim.axes
    weight = sim.m_p_current * params.g * math.cos(ax.alpha) * math.cos(ay.alpha)
    return LoadCellSample(t=sim.t, force=weight + config.f_hold * stiff.sigma_measured)


def settle_time(trace: list[tuple[float, float]], start: float, target: float,
                band_fraction: float = 0.02) -> float:
    """First time the measured sigma enters and stays inside the band
    band_fraction*|travel| around the target. Returns inf if it never
    settles within the trace."""
    travel = abs(target - start)
    if travel == 0.0:
        return 0.0
    band = band_fraction * travel
    settled_at = math.inf
    for t, sig in trace:
        if abs(sig - target) <= band:
            if settled_at == math.inf:
                settled_at = t
        else:
            settled_at = math.inf
    return settled_at
