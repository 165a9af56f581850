// Teleop wire protocol, version 1. One JSON document per WebSocket text
// message; unknown fields are ignored, missing required fields make a
// message invalid. Mirrors docs/wire_protocol.md field for field.

export const PROTOCOL_VERSION = 1;

export interface TelemetryRecord {
  t: number;
  theta_x: number;
  theta_y: number;
  alpha_x: number;
  alpha_y: number;
  theta_dot_x: number;
  theta_dot_y: number;
  alpha_dot_x: number;
  alpha_dot_y: number;
  sigma_target: number;
  sigma_measured: number;
  k_s: number;
  c_s: number;
  tau_d_x: number;
  tau_d_y: number;
  tau_w_x: number;
  tau_w_y: number;
  load_cell: number;
  m_p: number;
  x_uav: number;
  y_uav: number;
  x_tip: number;
  y_tip: number;
  validity: number;
}

export interface ActuatorState {
  sigma_target: number;
  sigma_measured: number;
  motor_pos: number;
  motor_vel: number;
}

export interface FrameMessage {
  type: "frame";
  seq: number;
  t: number;
  record: TelemetryRecord;
  actuator: ActuatorState;
  disturbancesActive: number;
}

export interface HelloMessage {
  type: "hello";
  protocol: number;
  scenario: string;
  dt: number;
  streamRate: number;
  timeScale: number;
}

export interface AckMessage {
  type: "ack";
  clientSeq: number;
  kind: string;
  appliedT: number;
  applied: boolean;
}

export interface ErrorMessage {
  type: "error";
  message: string;
  clientSeq: number | null;
}

export type ServerMessage = FrameMessage | HelloMessage | AckMessage | ErrorMessage;

export type CommandKind =
  | "set_sigma"
  | "set_position"
  | "inject_impulse"
  | "set_payload"
  | "pause"
  | "resume"
  | "reset"
  | "step";

const RECORD_FIELDS: (keyof TelemetryRecord)[] = [
  "t", "theta_x", "theta_y", "alpha_x", "alpha_y",
  "theta_dot_x", "theta_dot_y", "alpha_dot_x", "alpha_dot_y",
  "sigma_target", "sigma_measured", "k_s", "c_s",
  "tau_d_x", "tau_d_y", "tau_w_x", "tau_w_y",
  "load_cell", "m_p", "x_uav", "y_uav", "x_tip", "y_tip", "validity",
];

function isNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isObject(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

export class ProtocolError extends Error {}

export function encodeCommand(
  kind: CommandKind,
  payload: Record<string, unknown>,
  clientId: string,
  seq: number,
): string {
  return JSON.stringify({
    v: PROTOCOL_VERSION,
    type: "command",
    seq,
    client_id: clientId,
    kind,
    payload,
  });
}

/** Parse and validate one server message. Throws ProtocolError on anything
 * that does not conform; the session drops and counts those. */
export function decodeServerMessage(text: string): ServerMessage {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new ProtocolError("not valid JSON");
  }
  if (!isObject(doc)) throw new ProtocolError("root must be an object");
  if (doc.v !== PROTOCOL_VERSION) {
    throw new ProtocolError(`unsupported protocol version ${String(doc.v)}`);
  }
  const type = doc.type;
  if (type === "frame") return decodeFrame(doc);
  if (type === "hello") return decodeHello(doc);
  if (type === "ack") return decodeAck(doc);
  if (type === "error") return decodeError(doc);
  throw new ProtocolError(`unknown message type ${String(type)}`);
}

function requireNumber(obj: Record<string, unknown>, field: string, ctx: string): number {
  const v = obj[field];
  if (!isNumber(v)) throw new ProtocolError(`${ctx}: missing numeric field '${field}'`);
  return v;
}

function requirePayload(doc: Record<string, unknown>): Record<string, unknown> {
  if (!isObject(doc.payload)) throw new ProtocolError("missing required field 'payload'");
  return doc.payload;
}

function decodeFrame(doc: Record<string, unknown>): FrameMessage {
  const payload = requirePayload(doc);
  const rawRecord = payload.record;
  if (!isObject(rawRecord)) throw new ProtocolError("frame: missing required field 'record'");
  const record = {} as Record<string, number>;
  for (const field of RECORD_FIELDS) {
    record[field] = requireNumber(rawRecord, field, "frame.record");
  }
  const rawActuator = payload.actuator;
  if (!isObject(rawActuator)) throw new ProtocolError("frame: missing required field 'actuator'");
  const actuator: ActuatorState = {
    sigma_target: requireNumber(rawActuator, "sigma_target", "frame.actuator"),
    sigma_measured: requireNumber(rawActuator, "sigma_measured", "frame.actuator"),
    motor_pos: requireNumber(rawActuator, "motor_pos", "frame.actuator"),
    motor_vel: requireNumber(rawActuator, "motor_vel", "frame.actuator"),
  };
  const dist = payload.disturbances;
  const active = isObject(dist) && isNumber(dist.active) ? dist.active : 0;
  return {
    type: "frame",
    seq: requireNumber(doc, "seq", "frame"),
    t: requireNumber(doc, "t", "frame"),
    record: record as unknown as TelemetryRecord,
    actuator,
    disturbancesActive: active,
  };
}

function decodeHello(doc: Record<string, unknown>): HelloMessage {
  const payload = requirePayload(doc);
  return {
    type: "hello",
    protocol: requireNumber(payload, "protocol", "hello"),
    scenario: typeof payload.scenario === "string" ? payload.scenario : "?",
    dt: requireNumber(payload, "dt", "hello"),
    streamRate: requireNumber(payload, "stream_rate", "hello"),
    timeScale: requireNumber(payload, "time_scale", "hello"),
  };
}

function decodeAck(doc: Record<string, unknown>): AckMessage {
  const payload = requirePayload(doc);
  return {
    type: "ack",
    clientSeq: requireNumber(payload, "client_seq", "ack"),
    kind: typeof payload.kind === "string" ? payload.kind : "?",
    appliedT: requireNumber(payload, "applied_t", "ack"),
    applied: payload.applied !== false,
  };
}

function decodeError(doc: Record<string, unknown>): ErrorMessage {
  const payload = requirePayload(doc);
  if (typeof payload.message !== "string") {
    throw new ProtocolError("error: missing required field 'message'");
  }
  return {
    type: "error",
    message: payload.message,
    clientSeq: isNumber(payload.client_seq) ? payload.client_seq : null,
  };
}
