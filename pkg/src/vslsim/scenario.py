"""Scenario documents: scripted experiment timelines loaded from YAML.

A scenario is a human-editable YAML file (conventionally `*.scenario`) with a
mandatory `schema_version: 1`. It bundles the model parameters, a stiffness
schedule, payload pickup/release events, position setpoints, a disturbance
timeline and named analysis windows. See docs/scenario_schema.md for the
field-by-field schema with units and defaults.

Loading is two-phase: schema checks (field presence and types) raise
ScenarioSchemaError; semantic checks (ordering, ranges) raise
ScenarioValidationError. Both name the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import yaml

from .actuator import ActuatorConfig
from .disturbances import DisturbanceSignal, ImpulseEvent, SustainedEvent
from .params import ModelParams

SCHEMA_VERSION = 1

PAYLOAD_LABELS = ("pickup", "release", "none")


class ScenarioError(ValueError):
    """Base class for scenario loading problems."""


class ScenarioSchemaError(ScenarioError):
    """Document does not conform to the schema (missing/mistyped fields)."""


class ScenarioValidationError(ScenarioError):
    """Document parses but violates a semantic invariant (ordering, ranges)."""


@dataclass(frozen=True)
class PayloadEvent:
    t: float
    m_p: float                # new tip mass, kg (0 is remapped to the residual link mass)
    label: str = "none"


@dataclass(frozen=True)
class StiffnessCommand:
    t: float
    sigma: float


@dataclass(frozen=True)
class PositionSetpoint:
    t: float
    x: float
    y: float


@dataclass(frozen=True)
class AnalysisWindow:
    label: str
    t0: float
    t1: float


@dataclass(frozen=True)
class Scenario:
    name: str
    duration: float
    dt: float = 0.001
    decimate: int = 1
    seed: int = 0
    params: ModelParams = ModelParams()
    actuator: ActuatorConfig = ActuatorConfig()
    stiffness_schedule: tuple[StiffnessCommand, ...] = ()
    payload_events: tuple[PayloadEvent, ...] = ()
    position_setpoints: tuple[PositionSetpoint, ...] = ()
    disturbances: DisturbanceSignal = DisturbanceSignal()
    analysis_windows: tuple[AnalysisWindow, ...] = ()
    initial_sigma: Optional[float] = None  # None: schedule value at t=0, else 0

    def sigma_at_start(self) -> float:
        if self.initial_sigma is not None:
            return self.initial_sigma
        sigma = 0.0
        for cmd in self.stiffness_schedule:
            if cmd.t <= 0.0:
                sigma = cmd.sigma
        return sigma


def _require(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise ScenarioSchemaError(f"{where}: missing required field '{key}'")
    value = doc[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ScenarioSchemaError(
            f"{where}.{key}: expected {getattr(types, '__name__', types)}, "
            f"got {type(value).__name__}")
    return value


def _optional(doc: dict, key: str, types, where: str, default):
    if key not in doc or doc[key] is None:
        return default
    return _require(doc, key, types, where)


_NUM = (int, float)


def _event_list(doc: dict, key: str, where: str) -> list[dict]:
    raw = _optional(doc, key, list, where, [])
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ScenarioSchemaError(f"{where}.{key}[{i}]: expected a mapping, "
                                      f"got {type(item).__name__}")
        out.append(item)
    return out


def _check_time_ordered(times: list[float], duration: float, where: str) -> None:
    for i, t in enumerate(times):
        if not 0.0 <= t <= duration:
            raise ScenarioValidationError(
                f"{where}[{i}].t: event time {t} outside [0, {duration}]")
    if times != sorted(times):
        raise ScenarioValidationError(f"{where}: event times must be non-decreasing")


def build_scenario(doc: Any, source: str = "<scenario>") -> Scenario:
    """Validate a parsed document and construct a Scenario."""
    if not isinstance(doc, dict):
        raise ScenarioSchemaError(f"{source}: document root must be a mapping")
    version = _require(doc, "schema_version", int, source)
    if version != SCHEMA_VERSION:
        raise ScenarioSchemaError(
            f"{source}.schema_version: unsupported version {version} "
            f"(expected {SCHEMA_VERSION})")
    name = _require(doc, "name", str, source)
    duration = float(_require(doc, "duration", _NUM, source))
    dt = float(_optional(doc, "dt", _NUM, source, 0.001))
    decimate = _optional(doc, "decimate", int, source, 1)
    seed = _optional(doc, "seed", int, source, 0)

    if not duration > 0.0:
        raise ScenarioValidationError(f"{source}.duration: must be > 0, got {duration}")
    if not 0.0 < dt <= 0.01:
        raise ScenarioValidationError(f"{source}.dt: must be in (0, 0.01] s, got {dt}")
    if decimate < 1:
        raise ScenarioValidationError(f"{source}.decimate: must be >= 1, got {decimate}")

    params_doc = _optional(doc, "params", dict, source, {})
    known = {f.name for f in dc_fields(ModelParams)}
    unknown = set(params_doc) - known
    if unknown:
        raise ScenarioSchemaError(
            f"{source}.params: unknown field(s) {sorted(unknown)}; known: {sorted(known)}")
    try:
        params = ModelParams(**{k: float(v) for k, v in params_doc.items()}).validate()
    except (TypeError, ValueError) as exc:
        raise ScenarioValidationError(f"{source}.params: {exc}") from exc

    act_doc = _optional(doc, "actuator", dict, source, {})
    known = {f.name for f in dc_fields(ActuatorConfig)}
    unknown = set(act_doc) - known
    if unknown:
        raise ScenarioSchemaError(
            f"{source}.actuator: unknown field(s) {sorted(unknown)}; known: {sorted(known)}")
    actuator = ActuatorConfig(**{k: float(v) for k, v in act_doc.items()})

    schedule = []
    for i, item in enumerate(_event_list(doc, "stiffness_schedule", source)):
        where = f"{source}.stiffness_schedule[{i}]"
        t = float(_require(item, "t", _NUM, where))
        sigma = float(_require(item, "sigma", _NUM, where))
        if not 0.0 <= sigma <= 1.0:
            raise ScenarioValidationError(f"{where}.sigma: sigma out of [0, 1], got {sigma}")
        schedule.append(StiffnessCommand(t=t, sigma=sigma))
    _check_time_ordered([c.t for c in schedule], duration, f"{source}.stiffness_schedule")

    payload_events = []
    for i, item in enumerate(_event_list(doc, "payload_events", source)):
        where = f"{source}.payload_events[{i}]"
        t = float(_require(item, "t", _NUM, where))
        m_p = float(_require(item, "m_p", _NUM, where))
        label = _optional(item, "label", str, where, "none")
        if m_p < 0.0:
            raise ScenarioValidationError(f"{where}.m_p: mass must be >= 0, got {m_p}")
        if label not in PAYLOAD_LABELS:
            raise ScenarioValidationError(
                f"{where}.label: must be one of {PAYLOAD_LABELS}, got {label!r}")
        payload_events.append(PayloadEvent(t=t, m_p=m_p, label=label))
    _check_time_ordered([e.t for e in payload_events], duration, f"{source}.payload_events")

    setpoints = []
    for i, item in enumerate(_event_list(doc, "position_setpoints", source)):
        where = f"{source}.position_setpoints[{i}]"
        setpoints.append(PositionSetpoint(
            t=float(_require(item, "t", _NUM, where)),
            x=float(_require(item, "x", _NUM, where)),
            y=float(_require(item, "y", _NUM, where)),
        ))
    _check_time_ordered([s.t for s in setpoints], duration, f"{source}.position_setpoints")

    dist_doc = _optional(doc, "disturbances", dict, source, {})
    unknown = set(dist_doc) - {"impulses", "sustained"}
    if unknown:
        raise ScenarioSchemaError(
            f"{source}.disturbances: unknown field(s) {sorted(unknown)}")
    impulses = []
    for i, item in enumerate(_event_list(dist_doc, "impulses", f"{source}.disturbances")):
        where = f"{source}.disturbances.impulses[{i}]"
        impulses.append(ImpulseEvent(
            t_start=float(_require(item, "t_start", _NUM, where)),
            duration=float(_require(item, "duration", _NUM, where)),
            magnitude=float(_require(item, "magnitude", _NUM, where)),
            axis=_optional(item, "axis", str, where, "x"),
            target=_optional(item, "target", str, where, "tip"),
        ))
    sustained = []
    for i, item in enumerate(_event_list(dist_doc, "sustained", f"{source}.disturbances")):
        where = f"{source}.disturbances.sustained[{i}]"
        sustained.append(SustainedEvent(
            t_start=float(_require(item, "t_start", _NUM, where)),
            t_end=float(_require(item, "t_end", _NUM, where)),
            mean=float(_require(item, "mean", _NUM, where)),
            gust_amplitude=float(_optional(item, "gust_amplitude", _NUM, where, 0.0)),
            gust_period=float(_optional(item, "gust_period", _NUM, where, 1.0)),
            axis=_optional(item, "axis", str, where, "x"),
            target=_optional(item, "target", str, where, "tip"),
        ))
    try:
        disturbances = DisturbanceSignal(
            events=tuple(impulses), sustained=tuple(sustained), seed=seed)
    except ValueError as exc:
        raise ScenarioValidationError(f"{source}.disturbances: {exc}") from exc
    _check_time_ordered([e.t_start for e in impulses], duration,
                        f"{source}.disturbances.impulses")
    _check_time_ordered([e.t_start for e in sustained], duration,
                        f"{source}.disturbances.sustained")

    windows = []
    for i, item in enumerate(_event_list(doc, "analysis_windows", source)):
        where = f"{source}.analysis_windows[{i}]"
        label = _require(item, "label", str, where)
        t0 = float(_require(item, "t0", _NUM, where))
        t1 = float(_require(item, "t1", _NUM, where))
        if not t1 > t0:
            raise ScenarioValidationError(f"{where}: t1 must be > t0, got [{t0}, {t1}]")
        if t0 < 0.0 or t1 > duration:
            raise ScenarioValidationError(
                f"{where}: window [{t0}, {t1}] outside [0, {duration}]")
        windows.append(AnalysisWindow(label=label, t0=t0, t1=t1))
    labels = [w.label for w in windows]
    if len(labels) != len(set(labels)):
        raise ScenarioValidationError(f"{source}.analysis_windows: duplicate labels")

    initial_sigma = _optional(doc, "initial_sigma", _NUM, source, None)
    if initial_sigma is not None:
        initial_sigma = float(initial_sigma)
        if not 0.0 <= initial_sigma <= 1.0:
            raise ScenarioValidationError(
                f"{source}.initial_sigma: sigma out of [0, 1], got {initial_sigma}")

    unknown = set(doc) - {
        "schema_version", "name", "duration", "dt", "decimate", "seed", "params",
        "actuator", "stiffness_schedule", "payload_events", "position_setpoints",
        "disturbances", "analysis_windows", "initial_sigma",
    }
    if unknown:
        raise ScenarioSchemaError(f"{source}: unknown top-level field(s) {sorted(unknown)}")

    return Scenario(
        name=name, duration=duration, dt=dt, decimate=decimate, seed=seed,
        params=params, actuator=actuator,
        stiffness_schedule=tuple(schedule), payload_events=tuple(payload_events),
        position_setpoints=tuple(setpoints), disturbances=disturbances,
        analysis_windows=tuple(windows), initial_sigma=initial_sigma,
    )


def parse_document(text: str, source: str = "<scenario>") -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioSchemaError(f"{source}: not valid YAML: {exc}") from exc
    if doc is None:
        raise ScenarioSchemaError(f"{source}: document is empty")
    return doc


def loads(text: str, source: str = "<scenario>") -> Scenario:
    return build_scenario(parse_document(text, source), source)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return loads(path.read_text(), source=path.name)


def apply_override(doc: dict, path: str, value: Any, source: str = "<override>") -> None:
    """Patch a document field in place. `path` is dotted, with integer
    segments indexing lists, e.g. `params.k_max` or
    `stiffness_schedule.0.sigma`. The value is parsed as YAML."""
    keys = path.split(".")
    node = doc
    for i, key in enumerate(keys[:-1]):
        trail = ".".join(keys[: i + 1])
        if isinstance(node, list):
            try:
                node = node[int(key)]
            except (ValueError, IndexError) as exc:
                raise ScenarioValidationError(
                    f"{source}: bad list index {key!r} at {trail}") from exc
        elif isinstance(node, dict):
            # Missing containers are created; a typo still fails afterwards
            # when the patched document is validated.
            node = node.setdefault(key, {})
        else:
            raise ScenarioValidationError(
                f"{source}: {trail!r} is a scalar, cannot descend into it")
    last = keys[-1]
    if isinstance(node, list):
        try:
            node[int(last)] = value
        except (ValueError, IndexError) as exc:
            raise ScenarioValidationError(
                f"{source}: bad list index {last!r} at {path!r}") from exc
    elif isinstance(node, dict):
        node[last] = value
    else:
        raise ScenarioValidationError(f"{source}: cannot set {path!r} on a scalar")


def bundled_scenario_names() -> list[str]:
    root = resources.files("vslsim") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".scenario"))


def load_bundled(name: str) -> Scenario:
    """Load one of the scenarios shipped with the package, e.g. 'hover_impacts'."""
    if not name.endswith(".scenario"):
        name = name + ".scenario"
    ref = resources.files("vslsim") / "scenarios" / name
    if not ref.is_file():
        raise FileNotFoundError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}")
    return loads(ref.read_text(), source=name)
