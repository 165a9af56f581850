import type { FrameMessage, TelemetryRecord } from "./protocol";

/** Rolling window of received frames, trimmed to a sim-time horizon. The
 * console renders only what is in here: no extrapolation, no client-side
 * physics. */
export class FrameRing {
  private frames: FrameMessage[] = [];

  constructor(readonly horizonSeconds = 60) {}

  push(frame: FrameMessage): void {
    const last = this.frames[this.frames.length - 1];
    if (last !== undefined && frame.t < last.t) {
      // sim restarted (reset command); the old trace is no longer one timeline
      this.frames = [];
    }
    this.frames.push(frame);
    const cutoff = frame.t - this.horizonSeconds;
    let drop = 0;
    while (drop < this.frames.length && this.frames[drop].t < cutoff) drop++;
    if (drop > 0) this.frames.splice(0, drop);
  }

  clear(): void {
    this.frames = [];
  }

  get length(): number {
    return this.frames.length;
  }

  latest(): FrameMessage | undefined {
    return this.frames[this.frames.length - 1];
  }

  /** Column (series) extraction for the strip charts. */
  column(field: keyof TelemetryRecord): number[] {
    return this.frames.map((f) => f.record[field]);
  }

  times(): number[] {
    return this.frames.map((f) => f.t);
  }

  all(): readonly FrameMessage[] {
    return this.frames;
  }
}
