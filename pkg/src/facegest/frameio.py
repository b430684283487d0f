"""Image data model, binary PNM (P5/P6) I/O, and oriented region extraction.

Carries every pixel that enters the vision pipeline.  Frames are immutable
8-bit buffers; regions of interest may be rotated, so extraction resamples
bilinearly along the region axes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

# BT.601 luma weights for the intensity channel.
_LUMA_R = 0.299
_LUMA_G = 0.587
_LUMA_B = 0.114


class PnmParseError(ValueError):
    """Malformed PNM input; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Frame:
    """Row-major 8-bit image, 1 channel (gray) or 3 channels (RGB)."""

    width: int
    height: int
    channels: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"frame dimensions must be >= 1, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        expected = self.width * self.height * self.channels
        if len(self.pixels) != expected:
            raise ValueError(
                f"pixel buffer length {len(self.pixels)} != width*height*channels = {expected}"
            )

    def as_array(self) -> np.ndarray:
        """Pixels as a (height, width, channels) uint8 array."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8)
        return arr.reshape(self.height, self.width, self.channels)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Frame":
        """Build a Frame from a (h, w) or (h, w, c) uint8-compatible array."""
        a = np.asarray(arr)
        if a.ndim == 2:
            a = a[:, :, np.newaxis]
        if a.ndim != 3 or a.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w) or (h, w, 1|3) array, got shape {a.shape}")
        a = np.ascontiguousarray(a, dtype=np.uint8)
        return cls(width=a.shape[1], height=a.shape[0], channels=a.shape[2], pixels=a.tobytes())


@dataclass(frozen=True)
class OrientedRoi:
    """Rotatable rectangular region: sub-pixel center, size, and angle.

    The angle is in degrees, in (-90, 90]; positive values rotate the region
    x-axis from the image +x axis toward +y (downward on screen).
    """

    center: tuple[float, float]
    width: float
    height: float
    angle: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"roi size must be positive, got {self.width}x{self.height}")
        if not -90.0 < self.angle <= 90.0:
            raise ValueError(f"roi angle must be in (-90, 90], got {self.angle}")


def read_pnm(data: bytes) -> Frame:
    """Decode a binary PGM (P5) or PPM (P6) byte string, maxval 255."""
    pos = 0
    n = len(data)

    def skip_ws_and_comments(p: int) -> int:
        while p < n:
            c = data[p : p + 1]
            if c.isspace():
                p += 1
            elif c == b"#":
                while p < n and data[p : p + 1] != b"\n":
                    p += 1
            else:
                break
        return p

    def read_token(p: int) -> tuple[bytes, int]:
        p = skip_ws_and_comments(p)
        if p >= n:
            raise PnmParseError("unexpected end of header", p)
        start = p
        while p < n and not data[p : p + 1].isspace():
            p += 1
        return data[start:p], p

    magic, pos = read_token(pos)
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise PnmParseError(f"unsupported magic {magic!r}, expected P5 or P6", 0)

    dims = []
    for name in ("width", "height", "maxval"):
        tok_at = pos
        tok, pos = read_token(pos)
        try:
            value = int(tok)
        except ValueError:
            raise PnmParseError(f"invalid {name} token {tok!r}", skip_ws_and_comments(tok_at)) from None
        dims.append(value)
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise PnmParseError(f"invalid dimensions {width}x{height}", 0)
    if maxval != 255:
        raise PnmParseError(f"unsupported maxval {maxval}, only 255", 0)

    # Exactly one whitespace byte separates the header from the raw samples.
    if pos >= n or not data[pos : pos + 1].isspace():
        raise PnmParseError("missing whitespace after maxval", pos)
    pos += 1

    expected = width * height * channels
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise PnmParseError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}", n
        )
    if pos + expected != n:
        raise PnmParseError("trailing data after pixel payload", pos + expected)
    return Frame(width=width, height=height, channels=channels, pixels=payload)


def write_pnm(frame: Frame) -> bytes:
    """Encode a Frame canonically: magic, "w h", "255", newline-separated."""
    magic = b"P5" if frame.channels == 1 else b"P6"
    header = magic + b"\n" + f"{frame.width} {frame.height}".encode() + b"\n255\n"
    return header + frame.pixels


def luminance(frame: Frame) -> Frame:
    """Intensity channel: Y = round(0.299 R + 0.587 G + 0.114 B).

    Gray frames pass through unchanged.
    """
    if frame.channels == 1:
        return frame
    rgb = frame.as_array().astype(np.float64)
    y = _LUMA_R * rgb[:, :, 0] + _LUMA_G * rgb[:, :, 1] + _LUMA_B * rgb[:, :, 2]
    return Frame.from_array(np.floor(y + 0.5).astype(np.uint8))


def luminance_array(frame: Frame) -> np.ndarray:
    """Luminance as a (h, w) uint8 array without Frame wrapping."""
    return luminance(frame).as_array()[:, :, 0]


def crop_oriented(frame: Frame, roi: OrientedRoi) -> Frame:
    """Resample the oriented region into an axis-aligned output frame.

    Output pixel (i, j) samples the source at
    ``center + R(angle) @ (i - (w-1)/2, j - (h-1)/2)`` with bilinear
    interpolation; samples outside the source frame contribute 0.  Output
    size is the rounded roi size (at least 1x1).
    """
    out_w = max(1, int(round(roi.width)))
    out_h = max(1, int(round(roi.height)))
    theta = math.radians(roi.angle)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cx, cy = roi.center

    u = np.arange(out_w, dtype=np.float64) - (out_w - 1) / 2.0
    v = np.arange(out_h, dtype=np.float64) - (out_h - 1) / 2.0
    uu, vv = np.meshgrid(u, v)
    sx = cx + uu * cos_t - vv * sin_t
    sy = cy + uu * sin_t + vv * cos_t

    src = frame.as_array().astype(np.float64)
    h, w = frame.height, frame.width
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    out = np.zeros((out_h, out_w, frame.channels), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            xs = x0 + dx
            ys = y0 + dy
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            valid = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
            xs_c = np.clip(xs, 0, w - 1)
            ys_c = np.clip(ys, 0, h - 1)
            sample = src[ys_c, xs_c, :] * valid[:, :, np.newaxis]
            out += sample * weight[:, :, np.newaxis]

    return Frame.from_array(np.floor(out + 0.5).astype(np.uint8))


@dataclass
class FrameSequence:
    """Ordered on-disk frame set: file names plus per-frame timestamps."""

    base_dir: Path
    entries: list[tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        self.base_dir = Path(self.base_dir)
        last = None
        for name, t_ms in self.entries:
            if last is not None and t_ms <= last:
                raise ValueError(f"timestamps must be strictly increasing, {t_ms} after {last}")
            last = t_ms

    @classmethod
    def load(cls, seq_dir: str | Path) -> "FrameSequence":
        seq_dir = Path(seq_dir)
        manifest = json.loads((seq_dir / "manifest.json").read_text())
        entries = [(f["file"], int(f["t_ms"])) for f in manifest["frames"]]
        return cls(base_dir=seq_dir, entries=entries)

    def save_manifest(self) -> None:
        payload = {"frames": [{"file": name, "t_ms": t} for name, t in self.entries]}
        (self.base_dir / "manifest.json").write_text(json.dumps(payload, indent=2))

    def __len__(self) -> int:
        return len(self.entries)

    def frames(self) -> Iterator[tuple[int, Frame]]:
        """Yield (t_ms, Frame) in manifest order."""
        for name, t_ms in self.entries:
            path = self.base_dir / name
            if not path.exists():
                raise FileNotFoundError(f"missing frame file: {path}")
            yield t_ms, read_pnm(path.read_bytes())
