// Gateway wire protocol: newline-delimited JSON, one object per line.
// The UI only ever mirrors what the gateway sends; it never re-derives
// vision or task values locally.

export interface HelloMessage {
  type: "hello";
  config: Record<string, unknown>;
}

export interface FrameMessage {
  type: "frame";
  seq: number;
  encoding: "pnm-base64";
  data: string;
  t_ms: number;
}

export interface InputEventMessage {
  type: "event";
  kind: "key" | "click";
  key?: string;
  t_ms: number;
}

export interface EndMessage {
  type: "end";
}

export type ClientMessage = HelloMessage | FrameMessage | InputEventMessage | EndMessage;

export interface FeatureRecord {
  type: "features";
  seq: number;
  t_ms: number;
  area: number;
  bbox_w: number;
  bbox_h: number;
  aspect_ratio: number;
  centroid: [number, number];
  mu20: number;
  mu02: number;
  mu11: number;
  principal_angle: number;
  lambda1: number;
  lambda2: number;
  empty: boolean;
  nostrils: { left: [number, number]; right: [number, number] } | null;
  nose: [number, number] | null;
  lost: boolean;
  mouth_state: string | null;
  vowel?: string | null;
  cursor?: [number, number] | null;
  params?: Record<string, number>;
}

export interface AppEvent {
  type: "app_event";
  kind: string;
  t_ms: number;
  [key: string]: unknown;
}

export interface ErrorMessage {
  type: "error";
  message: string;
  seq?: number;
}

export type ServerMessage = FeatureRecord | AppEvent | ErrorMessage;

export function parseServerLine(line: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (type === "features" || type === "app_event" || type === "error") {
    return obj as ServerMessage;
  }
  return null;
}

export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
