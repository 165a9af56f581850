"""Coupled UAV-attitude / link-tip-pendulum dynamics with blendable stiffness.

Per axis, with theta the UAV attitude angle and alpha the link tip deflection,
the closed-loop system is the pair of second-order equations

    J*theta'' + (D_c + c_s)*theta' + (K_c + k_s)*theta = k_s*alpha + c_s*alpha' + tau_w
    m_p*l^2*alpha'' + (c_p + c_s)*alpha' + (m_p*g*l + k_s)*alpha = k_s*theta + c_s*theta' + tau_d

where the attachment stiffness/damping blend linearly with the stiffness
fraction sigma in [0, 1]:

    k_s = sigma * k_max,    c_s = sigma * c_max

At sigma = 0 the two equations decouple exactly; at sigma = 1 the tip tracks
the vehicle (alpha ~ theta) and tip disturbances propagate into attitude.
Roll and pitch are two independent instances of the same planar equations.

The model is linear and small-angle. States beyond |angle| >= pi/2 are outside
its validity envelope; integration continues but the state carries a breach
flag so downstream consumers can mark the data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .params import ModelParams

log = logging.getLogger(__name__)

# Small-angle validity guard: beyond this the linear model extrapolates.
VALIDITY_LIMIT = math.pi / 2

AXES = ("x", "y")


class DegeneratePayloadError(ValueError):
    """Raised when the pendulum equation loses its inertia (m_p*l^2 = 0)."""


def check_sigma(sigma: float) -> float:
    """Validate a stiffness fraction. Shared by the model, the actuator
    command path and the wire-protocol command validation, so all of them
    reject with identical text."""
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma) and 0.0 <= sigma <= 1.0):
        raise ValueError(f"sigma must be within [0, 1], got {sigma!r}")
    return float(sigma)


@dataclass(frozen=True)
class AxisState:
    theta: float = 0.0       # UAV attitude angle, rad
    theta_dot: float = 0.0   # rad/s
    alpha: float = 0.0       # link tip deflection, rad
    alpha_dot: float = 0.0   # rad/s

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta, self.theta_dot, self.alpha, self.alpha_dot])

    @property
    def in_envelope(self) -> bool:
        return abs(self.theta) < VALIDITY_LIMIT and abs(self.alpha) < VALIDITY_LIMIT


@dataclass(frozen=True)
class SimState:
    t: float = 0.0
    axes: tuple[AxisState, AxisState] = (AxisState(), AxisState())  # (x, y)
    sigma: float = 0.0
    m_p_current: float = 2.0
    validity_breach: bool = False  # True when any angle left the small-angle envelope

    def replace(self, **kw) -> "SimState":
        return replace(self, **kw)


def blend_stiffness(sigma: float, params: ModelParams) -> tuple[float, float]:
    """Attachment stiffness and damping at a given stiffness fraction."""
    check_sigma(sigma)
    return sigma * params.k_max, sigma * params.c_max


def coupling_torque(axis: AxisState, k_s: float, c_s: float) -> float:
    """Torque the link exerts on the vehicle through the attachment:
    -k_s*(theta - alpha) - c_s*(theta' - alpha'). Zero whenever the link is
    fully flexible."""
    return -k_s * (axis.theta - axis.alpha) - c_s * (axis.theta_dot - axis.alpha_dot)


def _axis_rhs(
    theta: float, theta_dot: float, alpha: float, alpha_dot: float,
    k_s: float, c_s: float, tau_w: float, tau_d: float,
    J: float, D_c: float, K_c: float, c_p: float, pend_inertia: float, grav_stiff: float,
) -> tuple[float, float, float, float]:
    # Scalar hot path: called 8x per integration step; keep it allocation-free.
    theta_dd = (-(D_c + c_s) * theta_dot - (K_c + k_s) * theta
                + k_s * alpha + c_s * alpha_dot + tau_w) / J
    alpha_dd = (-(c_p + c_s) * alpha_dot - (grav_stiff + k_s) * alpha
                + k_s * theta + c_s * theta_dot + tau_d) / pend_inertia
    return theta_dot, theta_dd, alpha_dot, alpha_dd


@dataclass(frozen=True)
class _ZeroSample:
    tau_d_x: float = 0.0
    tau_d_y: float = 0.0
    tau_w_x: float = 0.0
    tau_w_y: float = 0.0


ZERO_DISTURBANCE = _ZeroSample()


def dynamics_rhs(state: SimState, sigma: float, dist, params: ModelParams):
    """State derivative of both axes at the sample point.

    Returns ((theta', theta'', alpha', alpha'') for axis x, same for axis y).
    `dist` is any object exposing tau_d_x/tau_d_y/tau_w_x/tau_w_y in N*m.
    """
    k_s, c_s = blend_stiffness(sigma, params)
    m_p = state.m_p_current
    pend_inertia = m_p * params.l * params.l
    if pend_inertia <= 0.0:
        raise DegeneratePayloadError(
            f"pendulum inertia m_p*l^2 = {pend_inertia} is degenerate; "
            "attach a payload (or the residual tip mass) before stepping"
        )
    grav_stiff = m_p * params.g * params.l
    ax, ay = state.axes
    dx = _axis_rhs(ax.theta, ax.theta_dot, ax.alpha, ax.alpha_dot,
                   k_s, c_s, dist.tau_w_x, dist.tau_d_x,
                   params.J_att, params.D_c, params.K_c, params.c_p,
                   pend_inertia, grav_stiff)
    dy = _axis_rhs(ay.theta, ay.theta_dot, ay.alpha, ay.alpha_dot,
                   k_s, c_s, dist.tau_w_y, dist.tau_d_y,
                   params.J_att, params.D_c, params.K_c, params.c_p,
                   pend_inertia, grav_stiff)
    return dx, dy


def step(
    state: SimState,
    dt: float,
    sigma: float,
    params: ModelParams,
    sample: Optional[Callable[[float], object]] = None,
) -> SimState:
    """Advance the state by one fixed RK4 step.

    sigma is held constant across the step (the actuator produces it at the
    sim rate), so each step is exactly LTI in the state. Disturbances are
    sampled at t, t+dt/2 and t+dt. Deterministic: identical inputs give
    bit-identical outputs.
    """
    if not 0.0 < dt <= 0.01:
        raise ValueError(f"dt must be in (0, 0.01] s, got {dt}")
    k_s, c_s = blend_stiffness(sigma, params)
    m_p = state.m_p_current
    pend_inertia = m_p * params.l * params.l
    if pend_inertia <= 0.0:
        raise DegeneratePayloadError(
            f"pendulum inertia m_p*l^2 = {pend_inertia} is degenerate; "
            "attach a payload (or the residual tip mass) before stepping"
        )
    grav_stiff = m_p * params.g * params.l
    J, D_c, K_c, c_p = params.J_att, params.D_c, params.K_c, params.c_p

    t = state.t
    if sample is None:
        s0 = s_mid = s1 = ZERO_DISTURBANCE
    else:
        s0 = sample(t)
        s_mid = sample(t + 0.5 * dt)
        s1 = sample(t + dt)

    new_axes = []
    for axis, tau_w0, tau_d0, tau_wm, tau_dm, tau_w1, tau_d1 in (
        (state.axes[0], s0.tau_w_x, s0.tau_d_x, s_mid.tau_w_x, s_mid.tau_d_x, s1.tau_w_x, s1.tau_d_x),
        (state.axes[1], s0.tau_w_y, s0.tau_d_y, s_mid.tau_w_y, s_mid.tau_d_y, s1.tau_w_y, s1.tau_d_y),
    ):
        th, thd, al, ald = axis.theta, axis.theta_dot, axis.alpha, axis.alpha_dot
        k1 = _axis_rhs(th, thd, al, ald, k_s, c_s, tau_w0, tau_d0,
                       J, D_c, K_c, c_p, pend_inertia, grav_stiff)
        h = 0.5 * dt
        k2 = _axis_rhs(th + h * k1[0], thd + h * k1[1], al + h * k1[2], ald + h * k1[3],
                       k_s, c_s, tau_wm, tau_dm, J, D_c, K_c, c_p, pend_inertia, grav_stiff)
        k3 = _axis_rhs(th + h * k2[0], thd + h * k2[1], al + h * k2[2], ald + h * k2[3],
                       k_s, c_s, tau_wm, tau_dm, J, D_c, K_c, c_p, pend_inertia, grav_stiff)
        k4 = _axis_rhs(th + dt * k3[0], thd + dt * k3[1], al + dt * k3[2], ald + dt * k3[3],
                       k_s, c_s, tau_w1, tau_d1, J, D_c, K_c, c_p, pend_inertia, grav_stiff)
        w = dt / 6.0
        new_axes.append(AxisState(
            theta=th + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            theta_dot=thd + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            alpha=al + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            alpha_dot=ald + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
        ))

    breach = not (new_axes[0].in_envelope and new_axes[1].in_envelope)
    return SimState(
        t=t + dt,
        axes=(new_axes[0], new_axes[1]),
        sigma=sigma,
        m_p_current=m_p,
        validity_breach=breach,
    )


def assemble_state_matrix(sigma: float, params: ModelParams, m_p: Optional[float] = None) -> np.ndarray:
    """First-order state matrix of one axis, state ordered
    [theta, theta', alpha, alpha']. Entries are the equation coefficients;
    linear (hence continuous) in sigma. Block-diagonal at sigma = 0."""
    k_s, c_s = blend_stiffness(sigma, params)
    m = params.m_p if m_p is None else m_p
    pend_inertia = m * params.l * params.l
    if pend_inertia <= 0.0:
        raise DegeneratePayloadError(f"pendulum inertia m_p*l^2 = {pend_inertia} is degenerate")
    grav_stiff = m * params.g * params.l
    J = params.J_att
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-(params.K_c + k_s) / J, -(params.D_c + c_s) / J, k_s / J, c_s / J],
        [0.0, 0.0, 0.0, 1.0],
        [k_s / pend_inertia, c_s / pend_inertia,
         -(grav_stiff + k_s) / pend_inertia, -(params.c_p + c_s) / pend_inertia],
    ])


def forcing_matrix(params: ModelParams, m_p: Optional[float] = None) -> np.ndarray:
    """Input matrix mapping [tau_w, tau_d] into the state derivative."""
    m = params.m_p if m_p is None else m_p
    pend_inertia = m * params.l * params.l
    if pend_inertia <= 0.0:
        raise DegeneratePayloadError(f"pendulum inertia m_p*l^2 = {pend_inertia} is degenerate")
    B = np.zeros((4, 2))
    B[1, 0] = 1.0 / params.J_att
    B[3, 1] = 1.0 / pend_inertia
    return B

# Eigenvector condition number beyond which the state matrix is treated as
# (near-)defective and the eigendecomposition solution is abandoned.
_EIG_COND_LIMIT = 1e8


def closed_form_solution(
    x0: Sequence[float],
    sigma: float,
    tau_w: float,
    tau_d: float,
    t: float,
    params: ModelParams,
    m_p: Optional[float] = None,
) -> np.ndarray:
    """Exact single-axis LTI solution at time t for constant sigma and
    constant forcing. Test oracle for `step`; not used by the simulator.

    Prefers the eigendecomposition solution; for a defective or
    near-defective state matrix (e.g. a critically damped axis) it falls
    back to the scaling-and-squaring matrix exponential on the augmented
    system and logs the conditioning.
    """
    A = assemble_state_matrix(sigma, params, m_p=m_p)
    b = forcing_matrix(params, m_p=m_p) @ np.array([tau_w, tau_d])
    x0 = np.asarray(x0, dtype=float)

    lam, V = np.linalg.eig(A)
    cond = np.linalg.cond(V)
    if cond < _EIG_COND_LIMIT:
        # x(t) = x_part + V exp(lam t) V^-1 (x0 - x_part), x_part = -A^-1 b
        x_part = np.linalg.solve(A, -b)
        coeffs = np.linalg.solve(V, x0 - x_part)
        x_t = x_part + V @ (np.exp(lam * t) * coeffs)
        return np.real_if_close(x_t, tol=1e6).real
    log.debug("state matrix near-defective (eigenvector cond %.3g); "
              "falling back to scaling-and-squaring expm", cond)
    M = np.zeros((5, 5))
    M[:4, :4] = A
    M[:4, 4] = b
    aug = scipy.linalg.expm(M * t) @ np.concatenate([x0, [1.0]])
    return aug[:4]


def discrete_propagator(
    sigma: float, params: ModelParams, dt: float, tau_w: float = 0.0,
    tau_d: float = 0.0, m_p: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact one-step transition (E, f): x_{k+1} = E x_k + f, for constant
    sigma and constant forcing over the step. Convenience for trajectory-long
    oracle comparisons at fixed dt."""
    A = assemble_state_matrix(sigma, params, m_p=m_p)
    b = forcing_matrix(params, m_p=m_p) @ np.array([tau_w, tau_d])
    M = np.zeros((5, 5))
    M[:4, :4] = A
    M[:4, 4] = b
    EM = scipy.linalg.expm(M * dt)
    return EM[:4, :4], EM[:4, 4]


def mechanical_energy(state: SimState, sigma: float, params: ModelParams) -> float:
    """Total mechanical energy of both axes:
    0.5*J*theta'^2 + 0.5*K_c*theta^2 + 0.5*m_p*l^2*alpha'^2
    + 0.5*m_p*g*l*alpha^2 + 0.5*k_s*(theta-alpha)^2 per axis.

    With zero forcing and non-negative damping this is non-increasing along
    trajectories (the damping terms only ever dissipate)."""
    k_s, _ = blend_stiffness(sigma, params)
    m_p = state.m_p_current
    pend_inertia = m_p * params.l * params.l
    grav_stiff = m_p * params.g * params.l
    total = 0.0
    for ax in state.axes:
        total += 0.5 * (params.J_att * ax.theta_dot ** 2
                        + params.K_c * ax.theta ** 2
                        + pend_inertia * ax.alpha_dot ** 2
                        + grav_stiff * ax.alpha ** 2
                        + k_s * (ax.theta - ax.alpha) ** 2)
    return total
