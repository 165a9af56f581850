import { describe, expect, it } from "vitest";
import { FrameRing } from "../src/ring";
import { decodeServerMessage } from "../src/protocol";
import { frameJson } from "./helpers";

function frame(seq: number, t: number, overrides = {}) {
  const msg = decodeServerMessage(frameJson(seq, t, overrides));
  if (msg.type !== "frame") throw new Error("expected frame");
  return msg;
}

describe("FrameRing", () => {
  it("keeps only the configured sim-time horizon", () => {
    const ring = new FrameRing(10);
    for (let k = 0; k <= 300; k++) ring.push(frame(k, k * 0.1));
    expect(ring.latest()?.t).toBeCloseTo(30.0);
    const times = ring.times();
    expect(times[0]).toBeGreaterThanOrEqual(20.0);
    expect(times.length).toBeLessThanOrEqual(101);
  });

  it("extracts aligned columns", () => {
    const ring = new FrameRing(60);
    ring.push(frame(0, 0.0, { alpha_x: 0.1 }));
    ring.push(frame(1, 0.1, { alpha_x: 0.2 }));
    expect(ring.times()).toEqual([0.0, 0.1]);
    expect(ring.column("alpha_x")).toEqual([0.1, 0.2]);
    expect(ring.column("m_p")).toEqual([2, 2]);
  });

  it("starts a fresh timeline when sim time jumps backwards", () => {
    const ring = new FrameRing(60);
    ring.push(frame(0, 5.0));
    ring.push(frame(1, 5.1));
    ring.push(frame(2, 0.0)); // service was reset
    expect(ring.length).toBe(1);
    expect(ring.latest()?.t).toBe(0.0);
  });
});
