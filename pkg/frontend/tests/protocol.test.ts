import { describe, expect, it } from "vitest";
import {
  decodeServerMessage,
  encodeCommand,
  ProtocolError,
} from "../src/protocol";
import { ackJson, errorJson, frameJson, helloJson } from "./helpers";

describe("decodeServerMessage", () => {
  it("decodes frames with the full record", () => {
    const msg = decodeServerMessage(frameJson(7, 1.25, { alpha_x: -0.04 }));
    if (msg.type !== "frame") throw new Error("expected frame");
    expect(msg.seq).toBe(7);
    expect(msg.t).toBe(1.25);
    expect(msg.record.alpha_x).toBe(-0.04);
    expect(msg.record.load_cell).toBeCloseTo(19.62);
    expect(msg.actuator.sigma_measured).toBe(0);
    expect(msg.disturbancesActive).toBe(0);
  });

  it("decodes hello", () => {
    const msg = decodeServerMessage(helloJson(30));
    if (msg.type !== "hello") throw new Error("expected hello");
    expect(msg.streamRate).toBe(30);
    expect(msg.scenario).toBe("teleop_hover");
  });

  it("decodes ack and error", () => {
    const ack = decodeServerMessage(ackJson(4, "set_sigma", 2.5));
    if (ack.type !== "ack") throw new Error("expected ack");
    expect(ack.clientSeq).toBe(4);
    expect(ack.applied).toBe(true);

    const err = decodeServerMessage(errorJson("nope", 9));
    if (err.type !== "error") throw new Error("expected error");
    expect(err.message).toBe("nope");
    expect(err.clientSeq).toBe(9);
  });

  it("rejects malformed input", () => {
    expect(() => decodeServerMessage("not json")).toThrow(ProtocolError);
    expect(() => decodeServerMessage('{"v":2,"type":"frame"}')).toThrow(/version/);
    expect(() => decodeServerMessage('{"v":1,"type":"weird"}')).toThrow(/unknown/);
  });

  it("rejects frames with a missing record field", () => {
    const doc = JSON.parse(frameJson(1, 0));
    delete doc.payload.record.alpha_x;
    expect(() => decodeServerMessage(JSON.stringify(doc))).toThrow(/alpha_x/);
  });

  it("ignores unknown fields", () => {
    const doc = JSON.parse(frameJson(1, 0));
    doc.payload.future = { stuff: true };
    doc.extra = 1;
    expect(decodeServerMessage(JSON.stringify(doc)).type).toBe("frame");
  });
});

describe("encodeCommand", () => {
  it("produces the protocol-1 envelope", () => {
    const doc = JSON.parse(encodeCommand("set_sigma", { sigma: 0.8 }, "console-1", 5));
    expect(doc).toEqual({
      v: 1,
      type: "command",
      seq: 5,
      client_id: "console-1",
      kind: "set_sigma",
      payload: { sigma: 0.8 },
    });
  });
});
