import uPlot from "uplot";
import "uplot/dist/uPlot.min.css";
import type { FrameRing } from "./ring";

/** Anything that can render the ring buffer; tests stub this. */
export interface ChartSink {
  update(ring: FrameRing): void;
}

interface Panel {
  title: string;
  series: { field: Parameters<FrameRing["column"]>[0]; label: string; color: string }[];
}

// Four stacked strips mirroring the experiment plots: attitude, tip
// deflection, stiffness + load cell, disturbance inputs.
const PANELS: Panel[] = [
  {
    title: "UAV attitude θ (rad)",
    series: [
      { field: "theta_x", label: "θx", color: "#4ea1ff" },
      { field: "theta_y", label: "θy", color: "#9fd0ff" },
    ],
  },
  {
    title: "Tip deflection α (rad)",
    series: [
      { field: "alpha_x", label: "αx", color: "#ffb347" },
      { field: "alpha_y", label: "αy", color: "#ffd9a0" },
    ],
  },
  {
    title: "Stiffness σ & load cell (N)",
    series: [
      { field: "sigma_target", label: "σ target", color: "#888888" },
      { field: "sigma_measured", label: "σ measured", color: "#c678dd" },
      { field: "load_cell", label: "load cell", color: "#56b6c2" },
    ],
  },
  {
    title: "Disturbance torques (N·m)",
    series: [
      { field: "tau_d_x", label: "τd x", color: "#e06c75" },
      { field: "tau_d_y", label: "τd y", color: "#e8a0a5" },
      { field: "tau_w_x", label: "τw x", color: "#98c379" },
      { field: "tau_w_y", label: "τw y", color: "#c3e0ae" },
    ],
  },
];

// Stiffness phase shading follows the plot convention: blue = flexible,
// red = rigid.
const FLEX_SHADE = "rgba(78, 161, 255, 0.10)";
const RIGID_SHADE = "rgba(224, 108, 117, 0.12)";

export class StripCharts implements ChartSink {
  private plots: uPlot[] = [];
  private sigma: number[] = [];
  private times: number[] = [];

  constructor(container: HTMLElement) {
    const width = Math.max(container.clientWidth || 900, 480);
    for (const panel of PANELS) {
      const host = document.createElement("div");
      host.className = "chart";
      container.appendChild(host);
      const opts: uPlot.Options = {
        title: panel.title,
        width,
        height: 150,
        scales: { x: { time: false } },
        axes: [
          { stroke: "#aaa", grid: { stroke: "#333" } },
          { stroke: "#aaa", grid: { stroke: "#333" } },
        ],
        series: [
          { label: "t (s)" },
          ...panel.series.map((s) => ({ label: s.label, stroke: s.color, width: 1.5 })),
        ],
        hooks: {
          drawClear: [(u) => this.shadeStiffnessPhases(u)],
        },
        legend: { show: true },
        cursor: { sync: { key: "vsl" } },
      };
      const data: uPlot.AlignedData = [[], ...panel.series.map(() => [])] as uPlot.AlignedData;
      this.plots.push(new uPlot(opts, data, host));
    }
  }

  private shadeStiffnessPhases(u: uPlot): void {
    if (this.times.length < 2) return;
    const ctx = u.ctx;
    ctx.save();
    let runStart = 0;
    const rigidAt = (i: number) => this.sigma[i] >= 0.5;
    for (let i = 1; i <= this.times.length; i++) {
      if (i === this.times.length || rigidAt(i) !== rigidAt(runStart)) {
        const x0 = u.valToPos(this.times[runStart], "x", true);
        const x1 = u.valToPos(this.times[Math.min(i, this.times.length - 1)], "x", true);
        ctx.fillStyle = rigidAt(runStart) ? RIGID_SHADE : FLEX_SHADE;
        ctx.fillRect(x0, u.bbox.top, x1 - x0, u.bbox.height);
        runStart = i;
      }
    }
    ctx.restore();
  }

  update(ring: FrameRing): void {
    this.times = ring.times();
    this.sigma = ring.column("sigma_measured");
    PANELS.forEach((panel, i) => {
      const data = [this.times, ...panel.series.map((s) => ring.column(s.field))];
      this.plots[i].setData(data as uPlot.AlignedData);
    });
  }
}
