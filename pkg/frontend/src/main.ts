import { StripCharts } from "./charts";
import { buildPanel } from "./panel";
import { ConsoleSession } from "./session";

// Endpoint: ?ws=ws://host:port overrides the default local service.
const params = new URLSearchParams(window.location.search);
const endpoint = params.get("ws") ?? "ws://127.0.0.1:8765";

const session = new ConsoleSession();
buildPanel(document.getElementById("panel")!, session);
const charts = new StripCharts(document.getElementById("charts")!);

let rafPending = false;
session.onUpdate(() => {
  if (rafPending) return;
  rafPending = true;
  requestAnimationFrame(() => {
    rafPending = false;
    charts.update(session.ring);
  });
});

session.connect(endpoint);
