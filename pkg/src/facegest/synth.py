"""Synthetic frame generators: nostril-dot faces, eye/nose faces for the
cursor tracker, and mouth-blob sequences.

Everything here is deterministic, so generated sequences double as replay
fixtures for the end-to-end determinism checks.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .frameio import Frame, write_pnm


def draw_disk(canvas: np.ndarray, center: tuple[float, float], radius: float, value: int) -> None:
    h, w = canvas.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    mask = (xs - center[0]) ** 2 + (ys - center[1]) ** 2 <= radius * radius
    canvas[mask] = value


def draw_rect(canvas: np.ndarray, x0: int, y0: int, x1: int, y1: int, value: int) -> None:
    canvas[max(y0, 0) : y1, max(x0, 0) : x1] = value


def nostril_frame(
    width: int,
    height: int,
    left: tuple[float, float],
    right: tuple[float, float],
    dot_radius: float = 5.0,
    background: int = 180,
    dot_value: int = 20,
) -> Frame:
    """Uniform gray face stand-in with two dark nostril disks."""
    canvas = np.full((height, width), background, dtype=np.uint8)
    draw_disk(canvas, left, dot_radius, dot_value)
    draw_disk(canvas, right, dot_radius, dot_value)
    return Frame.from_array(canvas)


def nostril_sequence(
    n_frames: int,
    start_left: tuple[float, float] = (140.0, 80.0),
    start_right: tuple[float, float] = (180.0, 80.0),
    velocity: tuple[float, float] = (0.0, 0.0),
    roll_per_frame_deg: float = 0.0,
    width: int = 320,
    height: int = 240,
    dot_radius: float = 5.0,
) -> tuple[list[Frame], list[tuple[tuple[float, float], tuple[float, float]]]]:
    """Nostril pair translating and rolling about its midpoint.

    Returns the frames and the ground-truth (left, right) centers per frame.
    """
    frames = []
    truth = []
    mid0 = ((start_left[0] + start_right[0]) / 2.0, (start_left[1] + start_right[1]) / 2.0)
    half = (
        (start_right[0] - start_left[0]) / 2.0,
        (start_right[1] - start_left[1]) / 2.0,
    )
    for i in range(n_frames):
        theta = math.radians(roll_per_frame_deg * i)
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        arm = (half[0] * cos_t - half[1] * sin_t, half[0] * sin_t + half[1] * cos_t)
        mid = (mid0[0] + velocity[0] * i, mid0[1] + velocity[1] * i)
        left = (mid[0] - arm[0], mid[1] - arm[1])
        right = (mid[0] + arm[0], mid[1] + arm[1])
        frames.append(nostril_frame(width, height, left, right, dot_radius))
        truth.append((left, right))
    return frames, truth


def face_frame(
    width: int = 320,
    height: int = 240,
    eye_left: tuple[int, int] = (120, 80),
    eye_right: tuple[int, int] = (200, 80),
    nose: tuple[int, int] = (160, 130),
    background: int = 128,
    eye_half: int = 6,
    nose_radius: float = 2.0,
) -> Frame:
    """Gray face stand-in: two dark eye squares and one bright nose disk."""
    canvas = np.full((height, width), background, dtype=np.uint8)
    for ex, ey in (eye_left, eye_right):
        draw_rect(canvas, ex - eye_half, ey - eye_half, ex + eye_half + 1, ey + eye_half + 1, 30)
    draw_disk(canvas, nose, nose_radius, 255)
    return Frame.from_array(canvas)


def face_sequence(
    nose_positions: list[tuple[float, float]],
    width: int = 320,
    height: int = 240,
    eye_left: tuple[int, int] = (120, 80),
    eye_right: tuple[int, int] = (200, 80),
) -> list[Frame]:
    """Static eyes, nose moving along the given path."""
    return [
        face_frame(width, height, eye_left, eye_right, (pos[0], pos[1]))
        for pos in nose_positions
    ]


def mouth_frame(
    width: int = 160,
    height: int = 120,
    semi_axes: tuple[float, float] = (30.0, 18.0),
    center: tuple[float, float] | None = None,
    background: int = 230,
    shadow: int = 15,
) -> Frame:
    """Light field with a dark filled ellipse standing in for the mouth shadow."""
    if center is None:
        center = (width / 2.0, height / 2.0)
    canvas = np.full((height, width), background, dtype=np.uint8)
    a, b = semi_axes
    ys, xs = np.mgrid[0:height, 0:width]
    mask = ((xs - center[0]) / a) ** 2 + ((ys - center[1]) / b) ** 2 <= 1.0
    canvas[mask] = shadow
    return Frame.from_array(canvas)


def mouth_sequence(axes_per_frame: list[tuple[float, float]], width: int = 160, height: int = 120) -> list[Frame]:
    return [mouth_frame(width, height, axes) for axes in axes_per_frame]


def write_sequence(
    out_dir: str | Path,
    frames: list[Frame],
    period_ms: int = 40,
    start_ms: int = 0,
    annotations: dict | None = None,
) -> Path:
    """Write frames as PNM files plus a manifest; returns the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, frame in enumerate(frames):
        name = f"frame{i:05d}.pnm"
        (out / name).write_bytes(write_pnm(frame))
        entries.append({"file": name, "t_ms": start_ms + i * period_ms})
    manifest: dict = {"frames": entries}
    if annotations:
        manifest.update(annotations)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out


def demo_nostril_dir(out_dir: str | Path, n_frames: int = 40) -> Path:
    """Bundled-style demo: a drifting, slowly rolling nostril pair."""
    frames, _ = nostril_sequence(
        n_frames,
        velocity=(1.5, 0.5),
        roll_per_frame_deg=0.25,
    )
    return write_sequence(out_dir, frames)


def demo_mouth_dir(out_dir: str | Path) -> Path:
    """Bundled-style demo: a mouth opening, holding, and closing."""
    axes = []
    for i in range(12):
        axes.append((10.0 + 2.0 * i, 6.0 + 1.2 * i))
    axes.extend([(34.0, 20.4)] * 90)
    for i in range(12):
        axes.append((34.0 - 2.0 * i, 20.4 - 1.2 * i))
    return write_sequence(out_dir, mouth_sequence(axes))


def demo_tapping_dir(
    out_dir: str | Path,
    n_targets: int = 9,
    distance: float = 150.0,
    width: float = 60.0,
    gain: float = 4.0,
    frames_per_target: int = 5,
    period_ms: int = 40,
) -> Path:
    """Nose-pointer tapping fixture: face frames steering the cursor onto
    each ring target in acquisition order, plus timed click events.

    Writes the sequence, a ready-to-run session config (session.json), and
    the matching task config (task.json).
    """
    from .tasks import TappingTaskConfig, tapping_sequence

    cfg = TappingTaskConfig(
        n_targets=n_targets, distance=distance, width=width, center=(320.0, 240.0)
    )
    ref = (160.0, 130.0)
    noses: list[tuple[int, int]] = [(int(ref[0]), int(ref[1]))]
    clicks = []
    for block, idx in enumerate(tapping_sequence(n_targets)):
        cx, cy = cfg.target_center(idx)
        nose = (
            round(ref[0] + (cx - 320.0) / gain),
            round(ref[1] + (cy - 240.0) / gain),
        )
        noses.extend([nose] * frames_per_target)
        last_frame_t = (1 + (block + 1) * frames_per_target - 1) * period_ms
        clicks.append({"kind": "click", "t_ms": last_frame_t + period_ms // 2})

    frames = [face_frame(nose=pos, nose_radius=0.5) for pos in noses]
    eyes = {"left": [120, 80], "right": [200, 80]}
    out = write_sequence(out_dir, frames, period_ms=period_ms, annotations={"np_eyes": eyes})

    session_config = {
        "tracker": "np",
        "application": "tapping",
        "np_eyes": eyes,
        "cursor": {"gain": gain, "screen": [640, 480]},
        "app_config": {"n_targets": n_targets, "D": distance, "W": width},
        "events": clicks,
    }
    (out / "session.json").write_text(json.dumps(session_config, indent=2))
    (out / "task.json").write_text(
        json.dumps({"n_targets": n_targets, "D": distance, "W": width}, indent=2)
    )
    return out


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="generate synthetic demo sequences")
    parser.add_argument("kind", choices=["nostrils", "mouth"])
    parser.add_argument("out_dir")
    args = parser.parse_args(argv)
    if args.kind == "nostrils":
        demo_nostril_dir(args.out_dir)
    else:
        demo_mouth_dir(args.out_dir)
    print(args.out_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
