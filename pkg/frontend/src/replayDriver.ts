// Replay mode without a camera: stream an on-disk fixture sequence through
// a live gateway session.  Events from the session config merge into the
// frame stream by timestamp, frames first on ties, matching the gateway's
// own replay driver so both paths see identical message orders.

import * as fs from "node:fs";
import * as path from "node:path";

import { UiSession } from "./session.js";

interface ManifestEntry {
  file: string;
  t_ms: number;
}

export interface ReplayFixture {
  dir: string;
  frames: ManifestEntry[];
  config: Record<string, unknown>;
}

export function loadFixture(dir: string, configFile = "session.json"): ReplayFixture {
  const manifest = JSON.parse(fs.readFileSync(path.join(dir, "manifest.json"), "utf-8"));
  const configPath = path.join(dir, configFile);
  const config = fs.existsSync(configPath)
    ? JSON.parse(fs.readFileSync(configPath, "utf-8"))
    : { tracker: "fixed_roi", application: "none" };
  return { dir, frames: manifest.frames as ManifestEntry[], config };
}

export interface ReplayOptions {
  timeoutMs?: number;
}

export async function replayFixture(
  session: UiSession,
  fixture: ReplayFixture,
  transport: { onClose(handler: () => void): void },
  options: ReplayOptions = {},
): Promise<void> {
  let closed = false;
  transport.onClose(() => {
    closed = true;
  });
  session.hello(fixture.config);
  const events = [...((fixture.config.events as Array<Record<string, unknown>>) ?? [])].sort(
    (a, b) => Number(a.t_ms ?? 0) - Number(b.t_ms ?? 0),
  );
  let next = 0;
  for (const entry of fixture.frames) {
    while (next < events.length && Number(events[next].t_ms ?? 0) < entry.t_ms) {
      sendEvent(session, events[next]);
      next++;
    }
    const bytes = fs.readFileSync(path.join(fixture.dir, entry.file));
    session.sendPnmFrame(new Uint8Array(bytes), entry.t_ms);
  }
  while (next < events.length) {
    sendEvent(session, events[next]);
    next++;
  }
  // The gateway closes the connection after `end`; every response line is
  // on the wire before the close, so waiting for it loses nothing.
  session.end();
  await waitFor(() => closed, options.timeoutMs ?? 15000);
}

function sendEvent(session: UiSession, event: Record<string, unknown>): void {
  const t = Number(event.t_ms ?? 0);
  if (event.kind === "click") {
    session.sendClick(t);
  } else if (event.kind === "key") {
    session.sendKey(String(event.key), t);
  }
}

export function waitFor(predicate: () => boolean, timeoutMs = 15000): Promise<void> {
  const started = Date.now();
  return new Promise((resolve, reject) => {
    const poll = () => {
      if (predicate()) return resolve();
      if (Date.now() - started > timeoutMs) return reject(new Error("timed out waiting"));
      setTimeout(poll, 10);
    };
    poll();
  });
}
