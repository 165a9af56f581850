import type { SocketLike } from "../src/session";
import type { TelemetryRecord } from "../src/protocol";

export class MockSocket implements SocketLike {
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  sent: string[] = [];
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  // test-side controls
  open(): void {
    this.onopen?.();
  }

  receive(text: string): void {
    this.onmessage?.({ data: text });
  }

  dropFromServer(): void {
    this.onclose?.();
  }
}

export function record(t: number, overrides: Partial<TelemetryRecord> = {}): TelemetryRecord {
  return {
    t,
    theta_x: 0, theta_y: 0, alpha_x: 0, alpha_y: 0,
    theta_dot_x: 0, theta_dot_y: 0, alpha_dot_x: 0, alpha_dot_y: 0,
    sigma_target: 0, sigma_measured: 0, k_s: 0, c_s: 0,
    tau_d_x: 0, tau_d_y: 0, tau_w_x: 0, tau_w_y: 0,
    load_cell: 19.62, m_p: 2, x_uav: 0, y_uav: 0, x_tip: 0, y_tip: 0,
    validity: 0,
    ...overrides,
  };
}

export function frameJson(seq: number, t: number,
                          overrides: Partial<TelemetryRecord> = {}): string {
  return JSON.stringify({
    v: 1,
    type: "frame",
    seq,
    t,
    payload: {
      record: record(t, overrides),
      actuator: { sigma_target: 0, sigma_measured: 0, motor_pos: 0, motor_vel: 0 },
      disturbances: { active: 0 },
    },
  });
}

export function helloJson(streamRate = 30): string {
  return JSON.stringify({
    v: 1,
    type: "hello",
    payload: {
      protocol: 1,
      scenario: "teleop_hover",
      dt: 0.001,
      stream_rate: streamRate,
      time_scale: 1,
    },
  });
}

export function ackJson(clientSeq: number, kind: string, appliedT: number,
                        applied = true): string {
  return JSON.stringify({
    v: 1,
    type: "ack",
    payload: { client_seq: clientSeq, kind, applied_t: appliedT, applied },
  });
}

export function errorJson(message: string, clientSeq?: number): string {
  return JSON.stringify({
    v: 1,
    type: "error",
    payload: { message, ...(clientSeq === undefined ? {} : { client_seq: clientSeq }) },
  });
}
