"""Live teleoperation service: exposes a running simulation over a WebSocket
so an operator can command stiffness, position setpoints, disturbance
impulses and payload changes while watching the streamed state.

Wire protocol (version 1): one JSON document per WebSocket text message with
a mandatory envelope {v, type, ...}. See docs/wire_protocol.md for the full
message catalog. Unknown fields are ignored for forward compatibility;
missing required fields produce a decode error naming the field.

Concurrency: a single owner task advances the simulation on a fixed tick.
Ingress validates commands and drops them into a bounded mailbox consumed at
tick boundaries (latest command wins per kind); egress fans frames out to
per-client queues that drop their oldest entry when a client falls behind.
The sim loop never blocks on network I/O.

Determinism escape hatch: with time_scale = 0 (stepped mode) the simulation
advances only on scripted `step` commands, so a command log replays to
byte-identical telemetry; `replay` drives the same tick code without any
networking.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
import math
import threading
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

from websockets.asyncio.server import serve as ws_serve

from .engine import SimSession
from .model import AXES, check_sigma
from .disturbances import TARGETS
from .scenario import Scenario
from .telemetry import TelemetryRecord

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1

COMMAND_KINDS = ("set_sigma", "set_position", "inject_impulse", "set_payload",
                 "pause", "resume", "reset", "step")

DEFAULT_STREAM_RATE = 30.0
MAILBOX_LIMIT = 256
CLIENT_QUEUE_LIMIT = 32


class ProtocolError(ValueError):
    """Malformed or invalid wire message."""


@dataclass(frozen=True)
class CommandMessage:
    kind: str
    payload: dict
    client_id: str = "local"
    seq: int = 0


@dataclass(frozen=True)
class StateFrame:
    seq: int
    t: float
    record: TelemetryRecord
    actuator: dict
    disturbances_active: int


# -- codec -------------------------------------------------------------------

def _require_field(doc: dict, name: str, types, context: str):
    if name not in doc:
        raise ProtocolError(f"{context}: missing required field '{name}'")
    value = doc[name]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ProtocolError(
            f"{context}: field '{name}' must be {getattr(types, '__name__', types)}, "
            f"got {type(value).__name__}")
    return value


_NUM = (int, float)


def _check_envelope(doc: dict, expected_type: str) -> None:
    v = _require_field(doc, "v", int, "message")
    if v != PROTOCOL_VERSION:
        raise ProtocolError(f"message: unsupported protocol version {v}")
    t = _require_field(doc, "type", str, "message")
    if t != expected_type:
        raise ProtocolError(f"message: expected type '{expected_type}', got '{t}'")


def validate_command_payload(kind: str, payload: dict) -> dict:
    """Range-check a command payload with the same validators (and the same
    error text) as the underlying library operations."""
    ctx = f"command '{kind}'"
    if kind == "set_sigma":
        sigma = _require_field(payload, "sigma", _NUM, ctx)
        check_sigma(float(sigma))
        return {"sigma": float(sigma)}
    if kind == "set_position":
        x = float(_require_field(payload, "x", _NUM, ctx))
        y = float(_require_field(payload, "y", _NUM, ctx))
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ProtocolError(f"{ctx}: setpoint must be finite, got ({x}, {y})")
        return {"x": x, "y": y}
    if kind == "inject_impulse":
        magnitude = float(_require_field(payload, "magnitude", _NUM, ctx))
        duration = float(_require_field(payload, "duration", _NUM, ctx))
        axis = payload.get("axis", "x")
        target = payload.get("target", "tip")
        if not math.isfinite(magnitude):
            raise ProtocolError(f"{ctx}: magnitude must be finite")
        if not duration > 0.0:
            raise ValueError(f"impulse duration must be > 0, got {duration}")
        if axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
        if target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
        return {"magnitude": magnitude, "duration": duration,
                "axis": axis, "target": target}
    if kind == "set_payload":
        mass = float(_require_field(payload, "mass", _NUM, ctx))
        if mass < 0.0:
            raise ValueError(f"mass must be >= 0, got {mass}")
        return {"mass": mass}
    if kind == "step":
        n = payload.get("n", 1)
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ProtocolError(f"{ctx}: field 'n' must be a positive integer")
        return {"n": n}
    if kind in ("pause", "resume", "reset"):
        return {}
    raise ProtocolError(f"command: unknown kind '{kind}'")


def encode_command(cmd: CommandMessage) -> str:
    return json.dumps({
        "v": PROTOCOL_VERSION, "type": "command", "seq": cmd.seq,
        "client_id": cmd.client_id, "kind": cmd.kind, "payload": cmd.payload,
    }, allow_nan=False)


def decode_command(message: str | bytes) -> CommandMessage:
    try:
        doc = json.loads(message)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"message: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProtocolError("message: root must be an object")
    _check_envelope(doc, "command")
    seq = _require_field(doc, "seq", int, "command")
    client_id = _require_field(doc, "client_id", str, "command")
    kind = _require_field(doc, "kind", str, "command")
    payload = doc.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("command: field 'payload' must be an object")
    payload = validate_command_payload(kind, payload)
    return CommandMessage(kind=kind, payload=payload, client_id=client_id, seq=seq)


def encode_frame(frame: StateFrame) -> str:
    return json.dumps({
        "v": PROTOCOL_VERSION, "type": "frame", "seq": frame.seq, "t": frame.t,
        "payload": {
            "record": asdict(frame.record),
            "actuator": frame.actuator,
            "disturbances": {"active": frame.disturbances_active},
        },
    }, allow_nan=False)


def decode_frame(message: str | bytes) -> StateFrame:
    try:
        doc = json.loads(message)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"message: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProtocolError("message: root must be an object")
    _check_envelope(doc, "frame")
    seq = _require_field(doc, "seq", int, "frame")
    t = float(_require_field(doc, "t", _NUM, "frame"))
    payload = _require_field(doc, "payload", dict, "frame")
    record_doc = _require_field(payload, "record", dict, "frame.payload")
    actuator = _require_field(payload, "actuator", dict, "frame.payload")
    dist = _require_field(payload, "disturbances", dict, "frame.payload")
    try:
        record = TelemetryRecord(**record_doc)
    except TypeError as exc:
        raise ProtocolError(f"frame.payload.record: {exc}") from exc
    return StateFrame(seq=seq, t=t, record=record, actuator=actuator,
                      disturbances_active=_require_field(dist, "active", int,
                                                         "frame.payload.disturbances"))


def encode_event(kind: str, payload: dict) -> str:
    return json.dumps({"v": PROTOCOL_VERSION, "type": kind, "payload": payload},
                      allow_nan=False)


# -- deterministic tick core ---------------------------------------------------

def latest_per_kind(commands: Sequence[CommandMessage]) -> list[CommandMessage]:
    """Latest command wins per kind; survivors keep their arrival order."""
    last: dict[str, int] = {}
    for i, c in enumerate(commands):
        last[c.kind] = i
    return [c for i, c in enumerate(commands) if last[c.kind] == i]


class TeleopSession:
    """Tick-driven wrapper around a SimSession. One tick = apply pending
    commands at the step boundary, advance a batch of sim steps, emit one
    StateFrame. Everything depends only on tick count and the command
    script, never on wall time."""

    def __init__(self, scenario: Scenario, stream_rate: float = DEFAULT_STREAM_RATE,
                 time_scale: float = 1.0):
        if stream_rate <= 0.0:
            raise ValueError(f"stream_rate must be > 0, got {stream_rate}")
        if time_scale < 0.0:
            raise ValueError(f"time_scale must be >= 0, got {time_scale}")
        self.session = SimSession(scenario)
        self.scenario = scenario
        self.stream_rate = stream_rate
        # Sim seconds per tick; in stepped mode (time_scale 0) each explicit
        # step advances one nominal real-time tick's worth of sim time.
        scale = time_scale if time_scale > 0.0 else 1.0
        self._sim_per_tick = scale / stream_rate
        self.stepped = time_scale == 0.0
        self.tick_index = 0
        self.frame_seq = 0
        self.paused = False
        self.session.apply_due_events()
        self.records: list[TelemetryRecord] = [self.session.record()]
        self._last_recorded = 0

    def _steps_for_tick(self, k: int) -> int:
        dt = self.session.dt
        return (math.floor((k + 1) * self._sim_per_tick / dt + 1e-9)
                - math.floor(k * self._sim_per_tick / dt + 1e-9))

    def apply(self, cmd: CommandMessage) -> None:
        payload = cmd.payload
        if cmd.kind == "set_sigma":
            self.session.command_sigma(payload["sigma"])
        elif cmd.kind == "set_position":
            self.session.command_position(payload["x"], payload["y"])
        elif cmd.kind == "inject_impulse":
            self.session.inject_impulse(payload["magnitude"], payload["duration"],
                                        payload["axis"], payload["target"])
        elif cmd.kind == "set_payload":
            self.session.command_payload(payload["mass"])
        elif cmd.kind == "pause":
            self.paused = True
        elif cmd.kind == "resume":
            self.paused = False
        elif cmd.kind == "reset":
            self.session.reset()
            self.paused = False
            self.session.apply_due_events()
            self.records = [self.session.record()]
            self._last_recorded = 0
        # "step" carries no state; the caller decides how many ticks to run.

    def tick(self, commands: Sequence[CommandMessage] = ()) -> Optional[StateFrame]:
        """Apply commands, advance one tick of sim time, return the frame.
        Returns None (and does not advance) while paused."""
        for cmd in latest_per_kind(commands):
            self.apply(cmd)
        if self.paused:
            return None
        decimate = self.scenario.decimate
        for _ in range(self._steps_for_tick(self.tick_index)):
            k = self.session.step_index
            self.session.apply_due_events()
            if k % decimate == 0 and k != self._last_recorded:
                self.records.append(self.session.record())
                self._last_recorded = k
            self.session.advance()
        self.tick_index += 1
        self.frame_seq += 1
        return self.frame()

    def frame(self) -> StateFrame:
        stiff = self.session.stiff
        dist = self.session.sample_disturbance(self.session.t)
        active = sum(1 for v in (dist.tau_d_x, dist.tau_d_y, dist.tau_w_x,
                                 dist.tau_w_y) if v != 0.0)
        return StateFrame(
            seq=self.frame_seq,
            t=self.session.t,
            record=self.session.record(),
            actuator={
                "sigma_target": stiff.sigma_target,
                "sigma_measured": stiff.sigma_measured,
                "motor_pos": stiff.motor_pos,
                "motor_vel": stiff.motor_vel,
            },
            disturbances_active=active,
        )

    def flush_records(self) -> list[TelemetryRecord]:
        """Close the telemetry stream with a final boundary record."""
        if self.session.step_index != self._last_recorded:
            self.records.append(self.session.record())
            self._last_recorded = self.session.step_index
        return self.records


def replay(scenario: Scenario, script: Iterable[tuple[int, CommandMessage]],
           ticks: int, stream_rate: float = DEFAULT_STREAM_RATE):
    """Stepped-mode replay of a scripted command log: commands are applied at
    their tick index and the session advances exactly `ticks` ticks. Returns
    (frames, telemetry records); byte-identical across replays."""
    by_tick: dict[int, list[CommandMessage]] = {}
    for tick_index, cmd in script:
        by_tick.setdefault(tick_index, []).append(cmd)
    session = TeleopSession(scenario, stream_rate=stream_rate, time_scale=0.0)
    frames: list[StateFrame] = []
    for k in range(ticks):
        frame = session.tick(by_tick.get(k, ()))
        if frame is not None:
            frames.append(frame)
    return frames, session.flush_records()


# -- server -------------------------------------------------------------------

@dataclass
class _Client:
    queue: asyncio.Queue
    client_id: str = ""
    last_seq: Optional[int] = None
    read_only: bool = False
    dropped: int = 0


class TeleopServer:
    """WebSocket front end around a TeleopSession.

    Real-time mode paces ticks on the wall clock (time_scale sim seconds per
    wall second); stepped mode (time_scale 0) advances only on `step`
    commands. Run blockingly via `serve`, or in a background thread via
    `start`/`stop` (used by tests and by anything embedding the service).
    """

    def __init__(self, scenario: Scenario, host: str = "127.0.0.1", port: int = 8765,
                 stream_rate: float = DEFAULT_STREAM_RATE, time_scale: float = 1.0,
                 max_clients: int = 16):
        self.scenario = scenario
        self.host = host
        self.port = port
        self.stream_rate = stream_rate
        self.time_scale = time_scale
        self.max_clients = max_clients
        self.session = TeleopSession(scenario, stream_rate=stream_rate,
                                     time_scale=time_scale)
        self._mailbox: list[CommandMessage] = []
        self._clients: dict = {}
        self._command_origin: dict = {}
        self._stop: Optional[asyncio.Event] = None
        self._thread: Optional[threading.Thread] = None
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._started = threading.Event()
        self.bound_port: Optional[int] = None

    # ingress ------------------------------------------------------------

    async def _handle_client(self, ws) -> None:
        if len(self._clients) >= self.max_clients:
            await ws.close(code=1013, reason="too many clients")
            return
        path = getattr(getattr(ws, "request", None), "path", "") or ""
        client = _Client(queue=asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT),
                         read_only="readonly" in path)
        self._clients[ws] = client
        sender = asyncio.create_task(self._sender(ws, client))
        try:
            await ws.send(encode_event("hello", {
                "protocol": PROTOCOL_VERSION,
                "scenario": self.scenario.name,
                "dt": self.scenario.dt,
                "stream_rate": self.stream_rate,
                "time_scale": self.time_scale,
            }))
            async for message in ws:
                self._ingress(client, message)
        except Exception as exc:
            log.debug("client connection ended: %s", exc)
        finally:
            self._clients.pop(ws, None)
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender

    def _ingress(self, client: _Client, message) -> None:
        try:
            cmd = decode_command(message)
        except (ProtocolError, ValueError) as exc:
            self._offer(client, encode_event("error", {"message": str(exc)}))
            return
        if client.read_only:
            self._offer(client, encode_event("error", {
                "message": "read-only connection rejects commands",
                "client_seq": cmd.seq}))
            return
        if client.last_seq is not None and cmd.seq <= client.last_seq:
            self._offer(client, encode_event("error", {
                "message": f"sequence number {cmd.seq} not strictly increasing "
                           f"(last was {client.last_seq})",
                "client_seq": cmd.seq}))
            return
        client.last_seq = cmd.seq
        client.client_id = cmd.client_id
        if len(self._mailbox) >= MAILBOX_LIMIT:
            self._mailbox.pop(0)
        self._mailbox.append(cmd)
        self._command_origin[(cmd.client_id, cmd.seq)] = client

    # egress -------------------------------------------------------------

    def _offer(self, client: _Client, text: str) -> None:
        # Bounded per-client queue: drop the oldest frame, never block.
        while True:
            try:
                client.queue.put_nowait(text)
                return
            except asyncio.QueueFull:
                with contextlib.suppress(asyncio.QueueEmpty):
                    client.queue.get_nowait()
                    client.dropped += 1

    async def _sender(self, ws, client: _Client) -> None:
        while True:
            text = await client.queue.get()
            await ws.send(text)

    def _broadcast(self, text: str) -> None:
        for client in list(self._clients.values()):
            self._offer(client, text)

    # sim loop -----------------------------------------------------------

    def _drain_mailbox(self) -> list[CommandMessage]:
        cmds, self._mailbox = self._mailbox, []
        return cmds

    def _run_tick(self, commands: list[CommandMessage]) -> None:
        survivors = latest_per_kind(commands)
        steps = next((c.payload.get("n", 1) for c in survivors if c.kind == "step"), 1)
        applied = [c for c in survivors if c.kind != "step"]
        if self.session.stepped:
            frame = None
            for _ in range(steps):
                frame = self.session.tick(applied)
                applied = []
                if frame is not None:
                    self._broadcast(encode_frame(frame))
        else:
            frame = self.session.tick(applied)
            if frame is not None:
                self._broadcast(encode_frame(frame))
        for cmd in commands:
            origin = self._command_origin.pop((cmd.client_id, cmd.seq), None)
            if origin is not None:
                self._offer(origin, encode_event("ack", {
                    "client_seq": cmd.seq, "kind": cmd.kind,
                    "applied_t": self.session.session.t,
                    "applied": cmd in survivors,
                }))

    async def _sim_loop(self) -> None:
        loop = asyncio.get_running_loop()
        tick_period = 1.0 / self.stream_rate
        next_tick = loop.time() + tick_period
        while not self._stop.is_set():
            if self.session.stepped:
                await asyncio.sleep(0.001)
                pending = self._drain_mailbox()
                if pending:
                    self._run_tick(pending)
            else:
                delay = next_tick - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                next_tick += tick_period
                self._run_tick(self._drain_mailbox())

    async def _main(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._stop = asyncio.Event()
        async with ws_serve(self._handle_client, self.host, self.port) as server:
            self.bound_port = next(iter(server.sockets)).getsockname()[1]
            self._started.set()
            sim = asyncio.create_task(self._sim_loop())
            await self._stop.wait()
            sim.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sim

    def serve_forever(self) -> None:
        """Run in the current thread until interrupted."""
        try:
            asyncio.run(self._main())
        except KeyboardInterrupt:
            pass
        except BaseException as exc:  # delivered to start() via _startup_error
            self._startup_error = exc

    def start(self) -> "TeleopServer":
        """Run the server in a background thread; returns once it is bound.
        Bind failures propagate as OSError."""
        self._startup_error: Optional[BaseException] = None
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 10.0
        while not self._started.wait(timeout=0.05):
            if not self._thread.is_alive():
                if isinstance(self._startup_error, BaseException):
                    raise self._startup_error
                raise RuntimeError("teleop server failed to start")
            if time.monotonic() > deadline:
                raise RuntimeError("teleop server failed to start within 10 s")
        return self

    def stop(self) -> list[TelemetryRecord]:
        """Stop the server and return the accumulated telemetry (closed with
        a final boundary record)."""
        if self._loop is not None and self._stop is not None and self._loop.is_running():
            self._loop.call_soon_threadsafe(self._stop.set)
        if self._thread is not None:
            self._thread.join(timeout=10.0)
        return self.session.flush_records()
