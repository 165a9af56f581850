"""Physical and control constants of the coupled UAV / link model.

All values live here (or in scenario files) rather than being hard-coded in
the dynamics. The defaults describe a ~5.4 kg quadrotor whose attitude loop
behaves like a virtual spring-damper with natural frequency 5 rad/s at
critical damping, carrying a 1 m link with a 2 kg tip mass.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    J_att: float = 0.35     # roll/pitch inertia, kg*m^2
    K_c: float = 8.75       # virtual attitude stiffness, N*m/rad  (K_c/J = 25 s^-2)
    D_c: float = 3.5        # virtual attitude damping, N*m*s/rad  (D_c/J = 10 s^-1)
    m_p: float = 2.0        # tip payload mass, kg
    l: float = 1.0          # link length, m
    g: float = 9.81         # gravity, m/s^2
    c_p: float = 0.05       # pendulum damping, N*m*s/rad
    k_max: float = 200.0    # attachment stiffness at full rigidity, N*m/rad
    c_max: float = 5.0      # attachment damping at full rigidity, N*m*s/rad

    def validate(self) -> "ModelParams":
        """Check physical-admissibility invariants; returns self for chaining."""
        if not self.J_att > 0.0:
            raise ValueError(f"J_att must be > 0, got {self.J_att}")
        if not self.m_p >= 0.0:
            raise ValueError(f"m_p must be >= 0, got {self.m_p}")
        if not self.l > 0.0:
            raise ValueError(f"l must be > 0, got {self.l}")
        if not self.g > 0.0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if not self.K_c > 0.0:
            raise ValueError(f"K_c must be > 0, got {self.K_c}")
        for name in ("D_c", "c_p", "k_max", "c_max"):
            value = getattr(self, name)
            if not value >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        return self

    def with_overrides(self, **kwargs: float) -> "ModelParams":
        return replace(self, **kwargs).validate()


# The bare link's own distributed mass, lumped at the tip. Scenarios that
# hang nothing at the tip use this instead of m_p = 0, which would make the
# pendulum equation degenerate (zero inertia m_p*l^2).
RESIDUAL_TIP_MASS = 0.3  # kg


def effective_tip_mass(m_p: float) -> float:
    """Zero commanded tip mass means 'nothing attached'; the link's own
    distributed mass still hangs there, so remap to the residual lump."""
    return m_p if m_p > 0.0 else RESIDUAL_TIP_MASS

# Mass of the dual-arm manipulator used in the manipulator-attached fixtures.
MANIPULATOR_MASS = 2.0  # kg
