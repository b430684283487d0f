// View-model layer: folds the gateway's feature/app-event stream into
// drawable task state.  All rule outcomes (hold success, target order,
// produced text) come from gateway events; this layer only arranges them
// for the screen.

import { AppEvent, FeatureRecord } from "./protocol.js";

export interface CircleViewConfig {
  target: number;
  holdMs: number;
  radiusParam?: string; // features.params key carrying the rendered radius
}

export interface EllipseViewConfig {
  target: [number, number];
  holdMs: number;
  widthParam?: string;
  heightParam?: string;
}

export interface TappingViewConfig {
  nTargets: number;
  distance: number;
  width: number;
  center: [number, number];
}

export interface TargetMarker {
  index: number;
  center: [number, number];
  width: number;
  active: boolean;
}

export interface HoldStatus {
  holding: boolean;
  sinceMs: number | null;
  succeededAtMs: number | null;
}

export class TaskBoard {
  latest: FeatureRecord | null = null;
  transcript = "";
  targetOrder: number[] = [];
  activeTarget: { index: number; center: [number, number]; width: number } | null = null;
  hold: HoldStatus = { holding: false, sinceMs: null, succeededAtMs: null };
  outcomes: AppEvent[] = [];
  clicks = 0;

  applyFeatures(record: FeatureRecord): void {
    this.latest = record;
  }

  applyAppEvent(event: AppEvent): void {
    switch (event.kind) {
      case "kana": {
        const text = String(event.text ?? "");
        if (event.replace_last && this.transcript.length > 0) {
          this.transcript = this.transcript.slice(0, -1) + text;
        } else {
          this.transcript += text;
        }
        break;
      }
      case "letter":
        this.transcript += String(event.letter ?? "");
        break;
      case "target": {
        const index = Number(event.index);
        this.targetOrder.push(index);
        this.activeTarget = {
          index,
          center: event.center as [number, number],
          width: Number(event.width),
        };
        break;
      }
      case "hold":
        if (event.status === "start") {
          this.hold = { holding: true, sinceMs: event.t_ms, succeededAtMs: null };
        } else if (event.status === "reset") {
          this.hold = { holding: false, sinceMs: null, succeededAtMs: null };
        } else if (event.status === "success") {
          this.hold = { holding: false, sinceMs: null, succeededAtMs: event.t_ms };
        }
        break;
      case "trial_outcome":
        this.outcomes.push(event);
        break;
      case "click":
        this.clicks += 1;
        break;
      default:
        console.info("ignoring unknown app event kind", event.kind);
    }
  }

  /** Hold progress in [0, 1] for a dwell bar. */
  holdFraction(nowMs: number, holdMs: number): number {
    if (!this.hold.holding || this.hold.sinceMs === null) return 0;
    return Math.min(Math.max((nowMs - this.hold.sinceMs) / holdMs, 0), 1);
  }

  circleView(config: CircleViewConfig): { radius: number; target: number; holdFraction: number } {
    const param = config.radiusParam ?? "radius";
    const radius = this.latest?.params?.[param] ?? 0;
    const now = this.latest?.t_ms ?? 0;
    return { radius, target: config.target, holdFraction: this.holdFraction(now, config.holdMs) };
  }

  ellipseView(config: EllipseViewConfig): {
    size: [number, number];
    target: [number, number];
    holdFraction: number;
  } {
    const w = this.latest?.params?.[config.widthParam ?? "width"] ?? 0;
    const h = this.latest?.params?.[config.heightParam ?? "height"] ?? 0;
    const now = this.latest?.t_ms ?? 0;
    return { size: [w, h], target: config.target, holdFraction: this.holdFraction(now, config.holdMs) };
  }

  /** Ring layout for display; the ACTIVE target always comes from gateway
   * target events, never from local sequencing. */
  tappingView(config: TappingViewConfig): { targets: TargetMarker[]; cursor: [number, number] | null } {
    const step = (config.nTargets + 1) / 2;
    const radius = config.distance / (2 * Math.sin((Math.PI * step) / config.nTargets));
    const targets: TargetMarker[] = [];
    for (let i = 0; i < config.nTargets; i++) {
      const angle = (2 * Math.PI * i) / config.nTargets;
      targets.push({
        index: i,
        center: [
          config.center[0] + radius * Math.cos(angle),
          config.center[1] + radius * Math.sin(angle),
        ],
        width: config.width,
        active: this.activeTarget?.index === i,
      });
    }
    // trust the gateway's own placement for the active target
    if (this.activeTarget) {
      targets[this.activeTarget.index] = {
        index: this.activeTarget.index,
        center: this.activeTarget.center,
        width: this.activeTarget.width,
        active: true,
      };
    }
    return { targets, cursor: this.latest?.cursor ?? null };
  }

  textView(): { transcript: string; mouthState: string | null; vowel: string | null } {
    return {
      transcript: this.transcript,
      mouthState: this.latest?.mouth_state ?? null,
      vowel: this.latest?.vowel ?? null,
    };
  }
}
