// Browser entry point: connect to the gateway over WebSocket, stream the
// webcam, render the selected task screen, and export the session log.
// Start the gateway with:  facegest serve --listen 127.0.0.1:8765 --ws

import { Capture } from "./capture.js";
import { TaskBoard } from "./render.js";
import { UiSession } from "./session.js";
import { WebSocketTransport } from "./transport.js";

type AppKind = "none" | "circle" | "ellipse" | "tapping" | "text_jp" | "text_roman";

const state: {
  session: UiSession | null;
  board: TaskBoard;
  capture: Capture | null;
  app: AppKind;
  appConfig: Record<string, unknown>;
} = { session: null, board: new TaskBoard(), capture: null, app: "none", appConfig: {} };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function sessionConfig(app: AppKind): Record<string, unknown> {
  const config: Record<string, unknown> = { tracker: "fixed_roi", application: app };
  if (app === "circle") {
    const gain = 1.0;
    const holdMs = 3000;
    state.appConfig = { gain, targets: [100.0], tolerance: 5.0, hold_ms: holdMs };
    config.app_config = state.appConfig;
    config.mappings = [
      { feature: "area", transform: { kind: "power", gain, gamma: 0.5 }, name: "radius" },
    ];
  } else if (app === "ellipse") {
    state.appConfig = { gain_w: 1.0, gain_h: 1.0, targets: [[120.0, 80.0]], tolerance: 5.0, hold_ms: 3000 };
    config.app_config = state.appConfig;
    config.mappings = [
      { feature: "bbox_w", transform: { kind: "linear", gain: 1.0 }, name: "width" },
      { feature: "bbox_h", transform: { kind: "linear", gain: 1.0 }, name: "height" },
    ];
  } else if (app === "tapping") {
    state.appConfig = { n_targets: 9, D: 300.0, W: 40.0, center: [320, 240] };
    config.tracker = "np";
    config.np_eyes = { left: [120, 80], right: [200, 80] };
    config.cursor = { gain: 4.0, screen: [640, 480] };
    config.app_config = state.appConfig;
  } else if (app === "text_jp" || app === "text_roman") {
    config.calibration = { source: "live_window", frames: 30 };
  }
  return config;
}

function draw(): void {
  const canvas = el<HTMLCanvasElement>("screen");
  const g = canvas.getContext("2d");
  if (!g) return;
  g.clearRect(0, 0, canvas.width, canvas.height);
  const board = state.board;

  if (state.app === "circle") {
    const cfg = state.appConfig as { targets: number[]; hold_ms: number };
    const view = board.circleView({ target: cfg.targets[0], holdMs: cfg.hold_ms });
    g.strokeStyle = "#888";
    circle(g, 320, 240, view.target);
    g.strokeStyle = "#06c";
    circle(g, 320, 240, view.radius);
    bar(g, view.holdFraction);
  } else if (state.app === "ellipse") {
    const cfg = state.appConfig as { targets: [number, number][]; hold_ms: number };
    const view = board.ellipseView({ target: cfg.targets[0], holdMs: cfg.hold_ms });
    g.strokeStyle = "#888";
    ellipse(g, 320, 240, view.target[0], view.target[1]);
    g.strokeStyle = "#06c";
    ellipse(g, 320, 240, view.size[0], view.size[1]);
    bar(g, view.holdFraction);
  } else if (state.app === "tapping") {
    const cfg = state.appConfig as { n_targets: number; D: number; W: number };
    const view = board.tappingView({
      nTargets: cfg.n_targets,
      distance: cfg.D,
      width: cfg.W,
      center: [320, 240],
    });
    for (const target of view.targets) {
      g.strokeStyle = target.active ? "#c00" : "#888";
      circle(g, target.center[0], target.center[1], target.width / 2);
    }
    if (view.cursor) {
      g.fillStyle = "#06c";
      g.fillRect(view.cursor[0] - 3, view.cursor[1] - 3, 6, 6);
    }
  } else if (state.app === "text_jp" || state.app === "text_roman") {
    const view = board.textView();
    g.fillStyle = "#000";
    g.font = "24px sans-serif";
    g.fillText(view.transcript || "(type with the keypad + your mouth)", 20, 60);
    g.font = "14px sans-serif";
    g.fillText(`mouth: ${view.mouthState ?? "-"}  vowel: ${view.vowel ?? "-"}`, 20, 100);
  }

  const latest = board.latest;
  el<HTMLDivElement>("features").textContent = latest
    ? `seq ${latest.seq}  area ${latest.area}  aspect ${latest.aspect_ratio.toFixed(2)}  ` +
      `state ${latest.mouth_state ?? "-"}`
    : "no features yet";
  el<HTMLButtonElement>("export").disabled = !state.session?.hasRecords;
  requestAnimationFrame(draw);
}

function circle(g: CanvasRenderingContext2D, x: number, y: number, r: number): void {
  if (r <= 0) return;
  g.beginPath();
  g.arc(x, y, r, 0, 2 * Math.PI);
  g.stroke();
}

function ellipse(g: CanvasRenderingContext2D, x: number, y: number, w: number, h: number): void {
  if (w <= 0 || h <= 0) return;
  g.beginPath();
  g.ellipse(x, y, w / 2, h / 2, 0, 0, 2 * Math.PI);
  g.stroke();
}

function bar(g: CanvasRenderingContext2D, fraction: number): void {
  g.fillStyle = "#ddd";
  g.fillRect(20, 460, 200, 12);
  g.fillStyle = "#0a0";
  g.fillRect(20, 460, 200 * fraction, 12);
}

async function connect(): Promise<void> {
  const url = el<HTMLInputElement>("gateway-url").value;
  state.app = el<HTMLSelectElement>("app-select").value as AppKind;
  const transport = WebSocketTransport.connect(url);
  try {
    await transport.ready;
    el<HTMLDivElement>("status").textContent = `connected to ${url}`;
  } catch {
    el<HTMLDivElement>("status").textContent = `cannot reach gateway at ${url} - is it running with --ws?`;
    return;
  }
  transport.onClose(() => {
    el<HTMLDivElement>("status").textContent = "connection closed - reconnect to continue";
  });
  state.board = new TaskBoard();
  state.session = new UiSession(transport, {
    onFeatures: (record) => state.board.applyFeatures(record),
    onAppEvent: (event) => state.board.applyAppEvent(event),
    onError: (error) => console.warn("gateway error:", error.message),
  });
  state.session.hello(sessionConfig(state.app));
  state.capture = new Capture(state.session);
  try {
    await state.capture.start({ fps: 10 });
  } catch (err) {
    el<HTMLDivElement>("status").textContent = `camera permission denied or unavailable: ${err}`;
    return;
  }
}

function exportLog(): void {
  if (!state.session?.hasRecords) return;
  const blob = new Blob([state.session.exportLog()], { type: "application/jsonl" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = "facegest-session.jsonl";
  link.click();
  URL.revokeObjectURL(link.href);
}

window.addEventListener("DOMContentLoaded", () => {
  el<HTMLButtonElement>("connect").addEventListener("click", () => void connect());
  el<HTMLButtonElement>("export").addEventListener("click", exportLog);
  window.addEventListener("keydown", (event) => {
    if ("1234567890*#".includes(event.key) && state.session) {
      state.session.sendKey(event.key, Math.round(performance.now()));
    }
  });
  requestAnimationFrame(draw);
});
