// UI session: streams frames and input events to the gateway, mirrors the
// feature/app-event stream, and exports the raw server lines as the
// session log.  Keeping the raw lines (rather than re-serializing parsed
// objects) is what makes the export byte-identical to gateway logs.

import { base64Encode } from "./b64.js";
import { encodePnm, MAX_FRAME_HEIGHT, MAX_FRAME_WIDTH, RawImage } from "./pnm.js";
import {
  AppEvent,
  ErrorMessage,
  FeatureRecord,
  encodeClientMessage,
  parseServerLine,
} from "./protocol.js";
import { Transport } from "./transport.js";

export const MAX_FPS = 15;

export interface SessionHandlers {
  onFeatures?: (record: FeatureRecord) => void;
  onAppEvent?: (event: AppEvent) => void;
  onError?: (error: ErrorMessage) => void;
}

export class UiSession {
  private seq = 0;
  private rawLines: string[] = [];
  readonly features: FeatureRecord[] = [];
  readonly appEvents: AppEvent[] = [];
  readonly errors: ErrorMessage[] = [];

  constructor(private transport: Transport, private handlers: SessionHandlers = {}) {
    transport.onLine((line) => this.handleLine(line));
  }

  private handleLine(line: string): void {
    this.rawLines.push(line);
    const msg = parseServerLine(line);
    if (!msg) return;
    if (msg.type === "features") {
      this.features.push(msg);
      this.handlers.onFeatures?.(msg);
    } else if (msg.type === "app_event") {
      this.appEvents.push(msg);
      this.handlers.onAppEvent?.(msg);
    } else {
      this.errors.push(msg);
      this.handlers.onError?.(msg);
    }
  }

  hello(config: Record<string, unknown>): void {
    this.transport.sendLine(encodeClientMessage({ type: "hello", config }));
  }

  /** Send one already-encoded PNM frame (replay mode). */
  sendPnmFrame(pnmBytes: Uint8Array, tMs: number): number {
    const seq = this.seq++;
    this.transport.sendLine(
      encodeClientMessage({
        type: "frame",
        seq,
        encoding: "pnm-base64",
        data: base64Encode(pnmBytes),
        t_ms: tMs,
      }),
    );
    return seq;
  }

  /** Encode and send a captured image; enforces the transmission cap. */
  sendImage(image: RawImage, tMs: number): number {
    if (image.width > MAX_FRAME_WIDTH || image.height > MAX_FRAME_HEIGHT) {
      throw new Error(
        `frame ${image.width}x${image.height} exceeds the ` +
          `${MAX_FRAME_WIDTH}x${MAX_FRAME_HEIGHT} transmission cap; downscale first`,
      );
    }
    return this.sendPnmFrame(encodePnm(image), tMs);
  }

  sendKey(key: string, tMs: number): void {
    this.transport.sendLine(encodeClientMessage({ type: "event", kind: "key", key, t_ms: tMs }));
  }

  sendClick(tMs: number): void {
    this.transport.sendLine(encodeClientMessage({ type: "event", kind: "click", t_ms: tMs }));
  }

  end(): void {
    this.transport.sendLine(encodeClientMessage({ type: "end" }));
  }

  get logLineCount(): number {
    return this.rawLines.length;
  }

  get hasRecords(): boolean {
    return this.rawLines.length > 0;
  }

  /** Session log: the server messages verbatim, one JSON object per line. */
  exportLog(): string {
    return this.rawLines.map((line) => line + "\n").join("");
  }
}
