"""Disturbance generators: impulsive tip impacts, sustained fan-style forcing
and body-level wind torque.

Two event classes cover the experiment repertoire: rectangular impulse events
(a whack on the tip, a collision) and sustained events (fans pointed at the
tip) modeled as a mean torque plus a band-limited gust built from three
seeded sinusoids. Everything is deterministic given the signal seed, and
sampling is a pure function of time, so signals are freely shareable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import AXES

TARGETS = ("tip", "body")

# Relative amplitudes of the three gust harmonics; they sum to 1 so
# gust_amplitude bounds the gust term.
_GUST_WEIGHTS = (0.6, 0.3, 0.1)


@dataclass(frozen=True)
class ImpulseEvent:
    t_start: float            # s
    duration: float           # s
    magnitude: float          # N*m, rectangular pulse height
    axis: str = "x"           # "x" or "y"
    target: str = "tip"       # "tip" -> tau_d, "body" -> tau_w

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_start + self.duration


@dataclass(frozen=True)
class SustainedEvent:
    t_start: float
    t_end: float
    mean: float               # N*m
    gust_amplitude: float     # N*m
    gust_period: float        # s, fundamental period of the gust
    axis: str = "x"
    target: str = "tip"
    # Resolved once from the signal seed; kept on the event so that unions of
    # signals sample identically to the sum of their parts.
    phases: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def value(self, t: float) -> float:
        if not (self.t_start <= t < self.t_end):
            return 0.0
        if self.gust_amplitude == 0.0:
            return self.mean
        tau = t - self.t_start
        w0 = 2.0 * math.pi / self.gust_period
        gust = 0.0
        for i, weight in enumerate(_GUST_WEIGHTS):
            gust += weight * math.sin((i + 1) * w0 * tau + self.phases[i])
        return self.mean + self.gust_amplitude * gust


@dataclass(frozen=True)
class DisturbanceSample:
    tau_d_x: float = 0.0
    tau_d_y: float = 0.0
    tau_w_x: float = 0.0
    tau_w_y: float = 0.0

    def __add__(self, other: "DisturbanceSample") -> "DisturbanceSample":
        return DisturbanceSample(
            self.tau_d_x + other.tau_d_x, self.tau_d_y + other.tau_d_y,
            self.tau_w_x + other.tau_w_x, self.tau_w_y + other.tau_w_y,
        )


@dataclass(frozen=True)
class DisturbanceSignal:
    events: tuple[ImpulseEvent, ...] = ()
    sustained: tuple[SustainedEvent, ...] = ()
    seed: int = 0

    def __post_init__(self):
        for name, evts in (("events", self.events), ("sustained", self.sustained)):
            times = [e.t_start for e in evts]
            if times != sorted(times):
                raise ValueError(f"{name} must be time-ordered by t_start")
        for e in self.events:
            if not e.duration > 0.0:
                raise ValueError(f"impulse duration must be > 0, got {e.duration}")
            _check_axis_target(e)
        resolved = []
        for i, e in enumerate(self.sustained):
            if not e.t_end > e.t_start:
                raise ValueError(f"sustained event must have t_end > t_start, got "
                                 f"[{e.t_start}, {e.t_end}]")
            if not e.gust_period > 0.0:
                raise ValueError(f"gust_period must be > 0, got {e.gust_period}")
            _check_axis_target(e)
            if e.phases == (0.0, 0.0, 0.0) and e.gust_amplitude != 0.0:
                rng = np.random.default_rng([self.seed, i])
                e = replace(e, phases=tuple(rng.uniform(0.0, 2.0 * math.pi, 3)))
            resolved.append(e)
        object.__setattr__(self, "sustained", tuple(resolved))
        object.__setattr__(self, "events", tuple(self.events))


def _check_axis_target(event) -> None:
    if event.axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {event.axis!r}")
    if event.target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {event.target!r}")


def sample(dist: DisturbanceSignal, t: float) -> DisturbanceSample:
    """Sum of all active events at time t. Pure and deterministic."""
    tau = {("tip", "x"): 0.0, ("tip", "y"): 0.0, ("body", "x"): 0.0, ("body", "y"): 0.0}
    for e in dist.events:
        if e.active(t):
            tau[(e.target, e.axis)] += e.magnitude
    for s in dist.sustained:
        v = s.value(t)
        if v != 0.0:
            tau[(s.target, s.axis)] += v
    return DisturbanceSample(
        tau_d_x=tau[("tip", "x")], tau_d_y=tau[("tip", "y")],
        tau_w_x=tau[("body", "x")], tau_w_y=tau[("body", "y")],
    )


def union(a: DisturbanceSignal, b: DisturbanceSignal) -> DisturbanceSignal:
    """Signal whose samples are the sum of the two inputs' samples. Resolved
    gust phases travel with the events, so this is exact superposition."""
    events = tuple(sorted(a.events + b.events, key=lambda e: e.t_start))
    sustained = tuple(sorted(a.sustained + b.sustained, key=lambda e: e.t_start))
    return DisturbanceSignal(events=events, sustained=sustained, seed=a.seed)
