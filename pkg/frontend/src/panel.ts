import type { ConsoleSession } from "./session";

function button(label: string, onClick: () => void, cls = ""): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = label;
  b.className = cls;
  b.addEventListener("click", () => {
    try {
      onClick();
    } catch (err) {
      console.warn("command failed:", err);
    }
  });
  return b;
}

function group(title: string, ...nodes: HTMLElement[]): HTMLElement {
  const g = document.createElement("div");
  g.className = "group";
  const h = document.createElement("span");
  h.className = "group-title";
  h.textContent = title;
  g.append(h, ...nodes);
  return g;
}

/** Control panel + status strip + command log. Every control only ever
 * dispatches a protocol command; nothing here touches the dynamics. */
export function buildPanel(root: HTMLElement, session: ConsoleSession): void {
  const status = document.createElement("div");
  status.className = "status";
  root.appendChild(status);

  const controls = document.createElement("div");
  controls.className = "controls";
  root.appendChild(controls);

  // stiffness presets + continuous slider
  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.01";
  slider.value = "0";
  slider.className = "sigma-slider";
  const sliderValue = document.createElement("span");
  sliderValue.className = "sigma-value";
  sliderValue.textContent = "0.00";
  slider.addEventListener("input", () => {
    sliderValue.textContent = Number(slider.value).toFixed(2);
  });
  slider.addEventListener("change", () => session.setSigma(Number(slider.value)));
  controls.appendChild(
    group(
      "stiffness",
      button("Flexible", () => session.flexible(), "preset-flex"),
      button("Rigid", () => session.rigid(), "preset-rigid"),
      button("Reduced rigid (0.8)", () => session.reducedRigid()),
      slider,
      sliderValue,
    ),
  );

  controls.appendChild(
    group(
      "disturb",
      button("Impulse X", () => session.impulse("x")),
      button("Impulse Y", () => session.impulse("y")),
    ),
  );

  controls.appendChild(
    group(
      "payload",
      button("Pickup +2 kg", () => session.pickup()),
      button("Release", () => session.release()),
    ),
  );

  controls.appendChild(
    group(
      "sim",
      button("Pause", () => session.pause()),
      button("Resume", () => session.resume()),
      button("Reset", () => session.reset()),
    ),
  );

  const log = document.createElement("ul");
  log.className = "command-log";
  root.appendChild(log);

  const render = () => {
    const frame = session.ring.latest();
    const stale = session.isStale();
    const parts = [
      `link: ${session.state}${stale && session.state === "connected" ? " (STALE)" : ""}`,
      session.hello ? `scenario: ${session.hello.scenario}` : "",
      frame
        ? `t=${frame.t.toFixed(2)}s σ=${frame.record.sigma_measured.toFixed(2)} ` +
          `m=${frame.record.m_p.toFixed(1)}kg cell=${frame.record.load_cell.toFixed(1)}N` +
          (frame.record.validity ? " ⚠ out of envelope" : "")
        : "no frames yet",
      session.droppedMessages ? `dropped: ${session.droppedMessages}` : "",
    ];
    status.textContent = parts.filter(Boolean).join("  |  ");
    status.classList.toggle("stale", stale);

    const entries = session.commandLog.slice(-12).reverse();
    log.replaceChildren(
      ...entries.map((e) => {
        const li = document.createElement("li");
        li.className = `cmd-${e.status}`;
        const effect =
          e.status === "applied" && e.appliedT !== undefined
            ? ` → applied at t=${e.appliedT.toFixed(3)}s`
            : e.status === "rejected"
              ? ` ✗ ${e.error ?? "rejected"}`
              : e.status === "superseded"
                ? " (superseded)"
                : " …";
        li.textContent = `#${e.seq} ${e.kind} ${JSON.stringify(e.payload)}${effect}`;
        return li;
      }),
    );
  };

  session.onUpdate(render);
  setInterval(render, 250); // keeps the stale indicator honest between frames
  render();
}
