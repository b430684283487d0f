import { describe, expect, it } from "vitest";

import { AppEvent, FeatureRecord } from "../src/protocol.js";
import { TaskBoard } from "../src/render.js";

function features(partial: Partial<FeatureRecord>): FeatureRecord {
  return {
    type: "features",
    seq: 0,
    t_ms: 0,
    area: 0,
    bbox_w: 0,
    bbox_h: 0,
    aspect_ratio: 0,
    centroid: [0, 0],
    mu20: 0,
    mu02: 0,
    mu11: 0,
    principal_angle: 0,
    lambda1: 0,
    lambda2: 0,
    empty: true,
    nostrils: null,
    nose: null,
    lost: false,
    mouth_state: null,
    ...partial,
  };
}

function event(kind: string, fields: Record<string, unknown>): AppEvent {
  return { type: "app_event", kind, t_ms: 0, ...fields } as AppEvent;
}

describe("TaskBoard transcripts", () => {
  it("appends kana and honors replace_last", () => {
    const board = new TaskBoard();
    board.applyAppEvent(event("kana", { text: "か", replace_last: false }));
    board.applyAppEvent(event("kana", { text: "が", replace_last: true }));
    board.applyAppEvent(event("kana", { text: "き", replace_last: false }));
    expect(board.textView().transcript).toBe("がき");
  });

  it("appends letters", () => {
    const board = new TaskBoard();
    for (const letter of ["s", "u", "p"]) {
      board.applyAppEvent(event("letter", { letter }));
    }
    expect(board.textView().transcript).toBe("sup");
  });
});

describe("TaskBoard hold progress", () => {
  it("fills over the dwell window and resets", () => {
    const board = new TaskBoard();
    board.applyAppEvent(event("hold", { status: "start", t_ms: 1000 }));
    expect(board.holdFraction(1000, 2000)).toBe(0);
    expect(board.holdFraction(2000, 2000)).toBe(0.5);
    expect(board.holdFraction(3000, 2000)).toBe(1);
    board.applyAppEvent(event("hold", { status: "reset", t_ms: 3100 }));
    expect(board.holdFraction(3200, 2000)).toBe(0);
  });

  it("uses the rendered radius from mapping params", () => {
    const board = new TaskBoard();
    board.applyFeatures(features({ t_ms: 500, params: { radius: 42.5 } }));
    const view = board.circleView({ target: 50, holdMs: 3000 });
    expect(view.radius).toBe(42.5);
    expect(view.target).toBe(50);
  });
});

describe("TaskBoard tapping", () => {
  it("tracks the gateway's target order verbatim", () => {
    const board = new TaskBoard();
    for (const index of [0, 5, 1, 6, 2, 7, 3, 8, 4]) {
      board.applyAppEvent(event("target", { index, center: [index, index], width: 40 }));
    }
    expect(board.targetOrder).toEqual([0, 5, 1, 6, 2, 7, 3, 8, 4]);
    expect(board.activeTarget?.index).toBe(4);
  });

  it("marks only the active target and places the cursor from features", () => {
    const board = new TaskBoard();
    board.applyAppEvent(event("target", { index: 5, center: [100, 200], width: 40 }));
    board.applyFeatures(features({ cursor: [320, 240] }));
    const view = board.tappingView({ nTargets: 9, distance: 300, width: 40, center: [320, 240] });
    expect(view.targets).toHaveLength(9);
    expect(view.targets.filter((t) => t.active).map((t) => t.index)).toEqual([5]);
    expect(view.targets[5].center).toEqual([100, 200]);
    expect(view.cursor).toEqual([320, 240]);
  });

  it("ignores unknown event kinds", () => {
    const board = new TaskBoard();
    board.applyAppEvent(event("someday", {}));
    expect(board.outcomes).toHaveLength(0);
  });
});
