import { FrameRing } from "./ring";
import {
  CommandKind,
  HelloMessage,
  ProtocolError,
  decodeServerMessage,
  encodeCommand,
} from "./protocol";

// Minimal WebSocket surface, injectable so tests (and the Node-based live
// harness) can supply their own implementation.
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionState = "connecting" | "connected" | "retrying" | "closed";

export interface CommandLogEntry {
  seq: number;
  kind: CommandKind;
  payload: Record<string, unknown>;
  sentWall: number;
  status: "pending" | "applied" | "superseded" | "rejected";
  appliedT?: number; // sim time of the effect frame
  error?: string;
}

export interface SessionOptions {
  horizonSeconds?: number;
  clientId?: string;
  socketFactory?: SocketFactory;
  now?: () => number; // wall clock, ms
  reconnectBaseMs?: number;
  reconnectMaxMs?: number;
  staleMultiplier?: number; // stale after this many stream periods without a frame
}

const DEFAULT_STREAM_RATE = 30;

/** Operator-side session: owns the socket, the frame ring buffer, the
 * command sequence counter and the command log. Stateless with respect to
 * the dynamics: connecting, disconnecting or reloading never sends anything
 * on its own. */
export class ConsoleSession {
  readonly ring: FrameRing;
  readonly commandLog: CommandLogEntry[] = [];

  state: ConnectionState = "closed";
  hello: HelloMessage | null = null;
  droppedMessages = 0;
  framesReceived = 0;
  lastFrameWall: number | null = null;

  private url = "";
  private socket: SocketLike | null = null;
  private seq = 0;
  private retryMs: number;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private listeners: (() => void)[] = [];
  private closedByUser = false;

  private readonly clientId: string;
  private readonly socketFactory: SocketFactory;
  private readonly now: () => number;
  private readonly reconnectBaseMs: number;
  private readonly reconnectMaxMs: number;
  private readonly staleMultiplier: number;

  constructor(options: SessionOptions = {}) {
    this.ring = new FrameRing(options.horizonSeconds ?? 60);
    this.clientId = options.clientId ?? `console-${Math.floor(Math.random() * 1e6)}`;
    this.socketFactory =
      options.socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
    this.now = options.now ?? (() => Date.now());
    this.reconnectBaseMs = options.reconnectBaseMs ?? 500;
    this.reconnectMaxMs = options.reconnectMaxMs ?? 8000;
    this.staleMultiplier = options.staleMultiplier ?? 3;
    this.retryMs = this.reconnectBaseMs;
  }

  onUpdate(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const l of this.listeners) l();
  }

  connect(url: string): void {
    this.url = url;
    this.closedByUser = false;
    this.openSocket();
  }

  close(): void {
    this.closedByUser = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.socket?.close();
    this.socket = null;
    this.state = "closed";
    this.notify();
  }

  private openSocket(): void {
    this.state = "connecting";
    this.notify();
    let socket: SocketLike;
    try {
      socket = this.socketFactory(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.state = "connected";
      this.retryMs = this.reconnectBaseMs;
      this.notify();
    };
    socket.onmessage = (ev) => this.handleMessage(String(ev.data));
    socket.onerror = () => {
      /* onclose follows */
    };
    socket.onclose = () => {
      this.socket = null;
      if (!this.closedByUser) this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    this.state = "retrying";
    this.notify();
    const delay = this.retryMs;
    this.retryMs = Math.min(this.retryMs * 2, this.reconnectMaxMs);
    this.reconnectTimer = setTimeout(() => this.openSocket(), delay);
  }

  private handleMessage(text: string): void {
    let message;
    try {
      message = decodeServerMessage(text);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.droppedMessages += 1; // malformed: dropped and counted, session continues
        this.notify();
        return;
      }
      throw err;
    }
    switch (message.type) {
      case "hello":
        this.hello = message;
        break;
      case "frame":
        this.framesReceived += 1;
        this.lastFrameWall = this.now();
        this.ring.push(message);
        break;
      case "ack": {
        const entry = this.commandLog.find((e) => e.seq === message.clientSeq);
        if (entry) {
          entry.status = message.applied ? "applied" : "superseded";
          entry.appliedT = message.appliedT;
        }
        break;
      }
      case "error": {
        const entry =
          message.clientSeq === null
            ? undefined
            : this.commandLog.find((e) => e.seq === message.clientSeq);
        if (entry) {
          entry.status = "rejected";
          entry.error = message.message;
        }
        break;
      }
    }
    this.notify();
  }

  /** No frame for more than staleMultiplier stream periods. */
  isStale(): boolean {
    if (this.lastFrameWall === null) return this.state === "connected";
    const rate = this.hello?.streamRate ?? DEFAULT_STREAM_RATE;
    const periodMs = 1000 / rate;
    return this.now() - this.lastFrameWall > this.staleMultiplier * periodMs;
  }

  /** Send a command; returns its sequence number (strictly increasing). */
  dispatch(kind: CommandKind, payload: Record<string, unknown> = {}): number {
    if (this.socket === null || this.state !== "connected") {
      throw new Error("not connected");
    }
    this.seq += 1;
    const entry: CommandLogEntry = {
      seq: this.seq,
      kind,
      payload,
      sentWall: this.now(),
      status: "pending",
    };
    this.commandLog.push(entry);
    if (this.commandLog.length > 200) this.commandLog.shift();
    this.socket.send(encodeCommand(kind, payload, this.clientId, this.seq));
    this.notify();
    return this.seq;
  }

  // -- operator presets ----------------------------------------------------

  setSigma(value: number): number {
    return this.dispatch("set_sigma", { sigma: value });
  }

  flexible(): number {
    return this.setSigma(0);
  }

  rigid(): number {
    return this.setSigma(1);
  }

  reducedRigid(): number {
    return this.setSigma(0.8);
  }

  impulse(axis: "x" | "y", magnitude = 8, duration = 0.05): number {
    return this.dispatch("inject_impulse", { magnitude, duration, axis, target: "tip" });
  }

  setPosition(x: number, y: number): number {
    return this.dispatch("set_position", { x, y });
  }

  /** Pickup preset: +2 kg onto whatever currently hangs at the tip. */
  pickup(): number {
    const current = this.ring.latest()?.record.m_p ?? 0;
    return this.dispatch("set_payload", { mass: current + 2.0 });
  }

  /** Release preset: back to the bare link (mass 0 remaps to the residual lump). */
  release(): number {
    return this.dispatch("set_payload", { mass: 0 });
  }

  pause(): number {
    return this.dispatch("pause");
  }

  resume(): number {
    return this.dispatch("resume");
  }

  reset(): number {
    return this.dispatch("reset");
  }
}
