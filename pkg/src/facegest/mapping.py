"""Feature-to-control-value mappings: calibration, gain curves, smoothing,
hysteresis quantization, mouth-state discretization, vowel classification.

The transform space covers linear, power-law, and discrete (quantized)
mappings; every stage is configurable so a session can trade gain against
stability without code changes.
"""

from __future__ import annotations

import math
import statistics
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum

from .mouthseg import MouthShape

VOWELS = ("A", "I", "U", "E", "O")

# Articulatory defaults for (norm_area, aspect) vowel centroids: A wide open,
# I a wide narrow slit, U small and rounded, E mid-open spread, O mid rounded.
DEFAULT_VOWEL_CENTROIDS = {
    "A": (0.9, 1.3),
    "I": (0.15, 3.0),
    "U": (0.25, 0.8),
    "E": (0.55, 2.0),
    "O": (0.6, 0.9),
}

_SCALE_FLOOR = 1e-6


class MouthState(str, Enum):
    CLOSED = "Closed"
    SLIGHTLY_OPEN = "SlightlyOpen"
    OPEN = "Open"
    PUCKER = "Pucker"


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class Calibration:
    """Per-user scaling: max open-mouth area, neutral aspect, vowel centroids,
    and per-axis feature scales for standardized distances."""

    max_area: float
    neutral_aspect: float = 1.0
    vowel_centroids: dict[str, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_VOWEL_CENTROIDS)
    )
    feature_scales: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.max_area <= 0:
            raise CalibrationError(f"max_area must be positive, got {self.max_area}")
        if set(self.vowel_centroids) != set(VOWELS):
            raise CalibrationError(f"need centroids for exactly {VOWELS}")
        points = list(self.vowel_centroids.values())
        if len(set(points)) != len(points):
            raise CalibrationError("vowel centroids must be pairwise distinct")

    def norm_area(self, area: float) -> float:
        return min(max(area / self.max_area, 0.0), 1.0)

    def to_json(self) -> dict:
        return {
            "max_area": self.max_area,
            "neutral_aspect": self.neutral_aspect,
            "vowel_centroids": {v: list(c) for v, c in self.vowel_centroids.items()},
            "feature_scales": list(self.feature_scales),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Calibration":
        kwargs = {"max_area": obj["max_area"]}
        if "neutral_aspect" in obj:
            kwargs["neutral_aspect"] = obj["neutral_aspect"]
        if "vowel_centroids" in obj:
            kwargs["vowel_centroids"] = {v: tuple(c) for v, c in obj["vowel_centroids"].items()}
        if "feature_scales" in obj:
            kwargs["feature_scales"] = tuple(obj["feature_scales"])
        return cls(**kwargs)


def calibrate(
    shapes: list[MouthShape],
    vowel_segments: dict[str, list[MouthShape]] | None = None,
) -> Calibration:
    """Derive a Calibration from observed shapes.

    max_area is the maximum observed area and neutral_aspect the median
    aspect.  Centroids stay at the documented defaults unless five labeled
    vowel segments are given, in which case each centroid is that segment's
    mean (norm_area, aspect).  Feature scales are per-axis population
    standard deviations floored at 1e-6.
    """
    usable = [s for s in shapes if not s.empty]
    if not usable:
        raise CalibrationError("calibration needs at least one non-empty shape")
    max_area = max(s.area for s in usable)
    neutral_aspect = statistics.median(s.aspect_ratio for s in usable)

    norm_areas = [s.area / max_area for s in usable]
    aspects = [s.aspect_ratio for s in usable]
    scales = (
        max(_pstdev(norm_areas), _SCALE_FLOOR),
        max(_pstdev(aspects), _SCALE_FLOOR),
    )

    centroids = dict(DEFAULT_VOWEL_CENTROIDS)
    if vowel_segments is not None:
        if set(vowel_segments) != set(VOWELS):
            raise CalibrationError(f"vowel segments must label exactly {VOWELS}")
        for vowel, seg in vowel_segments.items():
            seg_usable = [s for s in seg if not s.empty]
            if not seg_usable:
                raise CalibrationError(f"vowel segment {vowel} has no usable shapes")
            centroids[vowel] = (
                sum(s.area / max_area for s in seg_usable) / len(seg_usable),
                sum(s.aspect_ratio for s in seg_usable) / len(seg_usable),
            )

    return Calibration(
        max_area=max_area,
        neutral_aspect=neutral_aspect,
        vowel_centroids=centroids,
        feature_scales=scales,
    )


def _pstdev(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    return statistics.pstdev(values)


@dataclass(frozen=True)
class Linear:
    gain: float = 1.0
    offset: float = 0.0


@dataclass(frozen=True)
class Power:
    gain: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class Quantize:
    thresholds: tuple[float, ...]
    hysteresis: float = 0.0

    def __post_init__(self):
        if list(self.thresholds) != sorted(set(self.thresholds)):
            raise ValueError(f"thresholds must be strictly ascending, got {self.thresholds}")
        if self.hysteresis < 0:
            raise ValueError("hysteresis must be >= 0")
        gaps = [b - a for a, b in zip(self.thresholds, self.thresholds[1:])]
        if gaps and self.hysteresis >= min(gaps):
            raise ValueError("hysteresis must be smaller than the minimum threshold gap")


Transform = Linear | Power | Quantize


@dataclass(frozen=True)
class MappingSpec:
    """One feature stream -> one control value."""

    feature: str
    transform: Transform
    smoother_alpha: float = 1.0
    clamp: tuple[float, float] = (-math.inf, math.inf)
    name: str | None = None

    FEATURES = (
        "area", "norm_area", "bbox_w", "bbox_h", "aspect", "angle",
        "lambda1", "lambda2", "cursor_x", "cursor_y",
    )

    def __post_init__(self):
        if self.feature not in self.FEATURES:
            raise ValueError(f"unknown feature {self.feature!r}, expected one of {self.FEATURES}")
        if not 0.0 < self.smoother_alpha <= 1.0:
            raise ValueError(f"smoother_alpha must be in (0,1], got {self.smoother_alpha}")
        if not self.clamp[0] < self.clamp[1]:
            raise ValueError(f"clamp must satisfy lo < hi, got {self.clamp}")

    @property
    def output_name(self) -> str:
        return self.name or self.feature

    @classmethod
    def from_json(cls, obj: dict) -> "MappingSpec":
        t = obj["transform"]
        kind = t["kind"]
        if kind == "linear":
            transform: Transform = Linear(gain=t.get("gain", 1.0), offset=t.get("offset", 0.0))
        elif kind == "power":
            transform = Power(gain=t.get("gain", 1.0), gamma=t["gamma"])
        elif kind == "quantize":
            transform = Quantize(
                thresholds=tuple(t["thresholds"]), hysteresis=t.get("hysteresis", 0.0)
            )
        else:
            raise ValueError(f"unknown transform kind {kind!r}")
        clamp = tuple(obj.get("clamp", (-math.inf, math.inf)))
        return cls(
            feature=obj["feature"],
            transform=transform,
            smoother_alpha=obj.get("smoother_alpha", 1.0),
            clamp=clamp,
            name=obj.get("name"),
        )


@dataclass(frozen=True)
class MappingState:
    """Per-instance smoother/quantizer memory."""

    smoothed: float | None = None
    level: int | None = None


def apply(spec: MappingSpec, raw: float, state: MappingState | None = None) -> tuple[float | None, MappingState]:
    """Run one sample through normalize -> smooth -> transform -> clamp.

    Non-finite input is rejected: the state is returned unchanged and the
    value is None.  The first sample initializes the smoother.
    """
    state = state or MappingState()
    if not math.isfinite(raw):
        return None, state
    if spec.feature == "norm_area":
        raw = min(max(raw, 0.0), 1.0)

    if state.smoothed is None:
        s = raw
    else:
        a = spec.smoother_alpha
        s = a * raw + (1 - a) * state.smoothed

    t = spec.transform
    level = state.level
    if isinstance(t, Linear):
        value = t.gain * s + t.offset
    elif isinstance(t, Power):
        value = t.gain * max(s, 0.0) ** t.gamma
    else:
        level = _quantize_level(t, s, level)
        value = float(level)

    lo, hi = spec.clamp
    value = min(max(value, lo), hi)
    return value, MappingState(smoothed=s, level=level)


def _quantize_level(t: Quantize, s: float, level: int | None) -> int:
    if level is None:
        return bisect_left(list(t.thresholds), s)
    while level < len(t.thresholds) and s > t.thresholds[level] + t.hysteresis:
        level += 1
    while level > 0 and s < t.thresholds[level - 1] - t.hysteresis:
        level -= 1
    return level


def quantize_mouth_state(
    shape: MouthShape,
    calib: Calibration,
    t_closed: float = 0.15,
    t_open: float = 0.5,
    t_pucker_aspect: float = 0.9,
    hysteresis: float = 0.05,
    prev: MouthState | None = None,
) -> MouthState:
    """Discretize a shape into Closed / SlightlyOpen / Open / Pucker.

    An opening at least t_closed wide-normalized that is narrower than tall
    (aspect below t_pucker_aspect) reads as a pucker; otherwise the
    normalized area picks the state.  Both area thresholds shift by the
    hysteresis toward the previous state.
    """
    a = calib.norm_area(shape.area)

    closed_t, open_t = t_closed, t_open
    if prev is not None:
        above_closed = prev in (MouthState.SLIGHTLY_OPEN, MouthState.OPEN, MouthState.PUCKER)
        closed_t = t_closed - hysteresis if above_closed else t_closed + hysteresis
        open_t = t_open - hysteresis if prev is MouthState.OPEN else t_open + hysteresis

    if a >= closed_t and shape.aspect_ratio < t_pucker_aspect:
        return MouthState.PUCKER
    if a < closed_t:
        return MouthState.CLOSED
    if a < open_t:
        return MouthState.SLIGHTLY_OPEN
    return MouthState.OPEN


def classify_vowel(shape: MouthShape, calib: Calibration) -> str | None:
    """Nearest vowel centroid in scale-standardized (norm_area, aspect) space;
    ties resolve in A < I < U < E < O order.  The empty shape selects nothing."""
    if shape.empty:
        return None
    sx, sy = calib.feature_scales
    fx = calib.norm_area(shape.area)
    fy = shape.aspect_ratio
    best: str | None = None
    best_d = math.inf
    for vowel in VOWELS:
        cx, cy = calib.vowel_centroids[vowel]
        d = ((fx - cx) / sx) ** 2 + ((fy - cy) / sy) ** 2
        if d < best_d:
            best_d = d
            best = vowel
    return best
