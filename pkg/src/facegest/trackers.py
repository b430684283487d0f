"""Facial landmark trackers: nostril-pair finder (NF), nose pointer (NP),
mouth-click detection, and the head-worn fixed-region mode.

NF locates the nostril pair as two dark blobs in the center top half of the
image and derives the oriented mouth-shadow region from their separation and
tilt.  NP re-locates the eyes by template matching, takes the nose as the
brightest point below them, and maps smoothed nose motion to a cursor.
Both trackers flag loss instead of raising; callers re-initialize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .frameio import Frame, OrientedRoi, luminance_array
from .mouthseg import _label_components


@dataclass(frozen=True)
class TrackerConfig:
    """Knobs for both trackers; lengths are multiples of the measured scale
    (image width for the pair search, nostril separation or interocular
    distance elsewhere)."""

    dark_fraction: float = 0.02
    pair_sep_range: tuple[float, float] = (0.05, 0.25)
    max_pair_tilt: float = 30.0
    window_radius: float = 1.0
    msroi_offset: float = 2.2   # mouth-region drop below the nostril midpoint
    msroi_width: float = 3.5
    msroi_height: float = 2.5
    ema_alpha: float = 0.8
    np_template_radius: float = 0.2   # eye template half-size, x interocular
    np_search_radius: float = 0.5     # eye search window half-size, x interocular
    np_sad_ceiling: float = 25.0      # mean abs diff above this = lost

    def __post_init__(self):
        if not 0.0 < self.dark_fraction < 1.0:
            raise ValueError(f"dark_fraction must be in (0,1), got {self.dark_fraction}")
        for name in ("window_radius", "msroi_offset", "msroi_width", "msroi_height",
                     "np_template_radius", "np_search_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.ema_alpha <= 1.0:
            raise ValueError(f"ema_alpha must be in (0,1], got {self.ema_alpha}")
        lo, hi = self.pair_sep_range
        if not 0 < lo < hi:
            raise ValueError(f"pair_sep_range must satisfy 0 < min < max, got {self.pair_sep_range}")


@dataclass(frozen=True)
class NostrilState:
    """Nostril pair track: sub-pixel centers, separation, last search window."""

    left: tuple[float, float]
    right: tuple[float, float]
    separation: float
    search_window: tuple[float, float, float, float]  # x0, y0, x1, y1
    lost: bool
    frame_index: int = 0

    def to_json(self) -> dict:
        return {
            "left": list(self.left),
            "right": list(self.right),
            "separation": self.separation,
            "search_window": list(self.search_window),
            "lost": self.lost,
            "frame_index": self.frame_index,
        }


@dataclass(frozen=True)
class NoseState:
    """Eye/nose positions plus the eye templates captured at initialization."""

    eye_left: tuple[float, float]
    eye_right: tuple[float, float]
    nose: tuple[float, float]
    smoothed_nose: tuple[float, float]
    lost: bool
    templates: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "eye_left": list(self.eye_left),
            "eye_right": list(self.eye_right),
            "nose": list(self.nose),
            "smoothed_nose": list(self.smoothed_nose),
            "lost": self.lost,
        }


@dataclass(frozen=True)
class Click:
    """A completed open-then-close mouth gesture."""

    open_frames: int


@dataclass(frozen=True)
class ClickDetector:
    """Hysteresis state machine turning normalized mouth area into clicks."""

    open_threshold: float = 0.5
    close_threshold: float = 0.2
    min_open_frames: int = 2
    opening: int = 0  # 0 = idle, n > 0 = frames spent open

    def __post_init__(self):
        if not 0.0 < self.close_threshold < self.open_threshold <= 1.0:
            raise ValueError(
                f"need 0 < close < open <= 1, got close={self.close_threshold} open={self.open_threshold}"
            )
        if self.min_open_frames < 1:
            raise ValueError("min_open_frames must be >= 1")


def _dark_candidates(lum: np.ndarray, dark_fraction: float) -> np.ndarray:
    """Darkest-fraction pixel mask.

    Thresholds at the largest gray level whose cumulative count stays within
    the requested fraction; when the darkest level alone exceeds the budget
    it is taken whole.  A "detection" covering most of the window is no
    detection at all (a uniform window has no dark features), which is what
    flags loss after a jump.
    """
    k = max(1, int(dark_fraction * lum.size))
    hist = np.bincount(lum.ravel(), minlength=256)
    cum = np.cumsum(hist)
    eligible = np.nonzero((cum > 0) & (cum <= k))[0]
    level = int(eligible[-1]) if eligible.size else int(lum.min())
    mask = lum <= level
    if int(mask.sum()) * 2 > lum.size:
        return np.zeros_like(mask)
    return mask


def _component_centroids(mask: np.ndarray) -> list[tuple[float, float, int]]:
    """(cx, cy, size) per connected component, 8-connectivity, label order."""
    if not mask.any():
        return []
    labels, n = _label_components(mask, 8)
    out = []
    for lab in range(1, n + 1):
        ys, xs = np.nonzero(labels == lab)
        out.append((float(xs.mean()), float(ys.mean()), int(ys.size)))
    return out


def _best_pair(
    centroids: list[tuple[float, float, int]],
    width: int,
    config: TrackerConfig,
) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Highest-scoring qualifying pair; score = size similarity x horizontality."""
    sep_lo = config.pair_sep_range[0] * width
    sep_hi = config.pair_sep_range[1] * width
    best = None
    best_score = -1.0
    for i in range(len(centroids)):
        for j in range(i + 1, len(centroids)):
            a, b = centroids[i], centroids[j]
            if a[0] > b[0]:
                a, b = b, a
            dx = b[0] - a[0]
            dy = b[1] - a[1]
            dist = math.hypot(dx, dy)
            if not sep_lo <= dist <= sep_hi:
                continue
            tilt = abs(math.degrees(math.atan2(dy, dx)))
            if tilt > config.max_pair_tilt:
                continue
            smin, smax = min(a[2], b[2]), max(a[2], b[2])
            if smax >= 3 * smin:
                continue
            score = (smin / smax) * math.cos(math.radians(tilt))
            if score > best_score:
                best_score = score
                best = ((a[0], a[1]), (b[0], b[1]))
    return best


def nf_init(frame: Frame, config: TrackerConfig | None = None) -> NostrilState:
    """Find the nostril pair in the center top half of the frame.

    Searches the central 60% of the width and the upper 50% of the height:
    components of the darkest-fraction pixels are paired and filtered by
    separation, tilt, and size similarity.  No qualifying pair sets lost.
    """
    config = config or TrackerConfig()
    lum = luminance_array(frame)
    h, w = lum.shape
    x0, x1 = int(round(0.2 * w)), int(round(0.8 * w))
    y0, y1 = 0, int(round(0.5 * h))
    region = lum[y0:y1, x0:x1]
    window = (float(x0), float(y0), float(x1), float(y1))

    candidates = _dark_candidates(region, config.dark_fraction)
    centroids = [(cx + x0, cy + y0, size) for cx, cy, size in _component_centroids(candidates)]
    pair = _best_pair(centroids, w, config)
    if pair is None:
        return NostrilState(
            left=(0.0, 0.0), right=(0.0, 0.0), separation=0.0,
            search_window=window, lost=True, frame_index=0,
        )
    left, right = pair
    return NostrilState(
        left=left, right=right,
        separation=math.dist(left, right),
        search_window=window, lost=False, frame_index=0,
    )


def _window_rect(center: tuple[float, float], radius: float, w: int, h: int) -> tuple[int, int, int, int]:
    x0 = max(0, int(math.floor(center[0] - radius)))
    y0 = max(0, int(math.floor(center[1] - radius)))
    x1 = min(w, int(math.ceil(center[0] + radius)) + 1)
    y1 = min(h, int(math.ceil(center[1] + radius)) + 1)
    return x0, y0, x1, y1


def _relocate_in_window(
    lum: np.ndarray, center: tuple[float, float], radius: float, config: TrackerConfig
) -> tuple[float, float] | None:
    """Centroid of the dark component nearest the previous center, or None."""
    h, w = lum.shape
    x0, y0, x1, y1 = _window_rect(center, radius, w, h)
    if x1 <= x0 or y1 <= y0:
        return None
    sub = lum[y0:y1, x0:x1]
    candidates = _dark_candidates(sub, config.dark_fraction)
    found = _component_centroids(candidates)
    if not found:
        return None
    best = min(found, key=lambda c: (math.hypot(c[0] + x0 - center[0], c[1] + y0 - center[1])))
    return best[0] + x0, best[1] + y0


def nf_update(state: NostrilState, frame: Frame, config: TrackerConfig | None = None) -> NostrilState:
    """Re-detect each nostril inside a window around its previous center and
    smooth the new centers; a vanished nostril (or a crossed pair) sets lost."""
    if state.lost:
        raise ValueError("cannot update a lost nostril track; re-initialize")
    config = config or TrackerConfig()
    lum = luminance_array(frame)
    h, w = lum.shape
    radius = config.window_radius * state.separation

    lx0, ly0, lx1, ly1 = _window_rect(state.left, radius, w, h)
    rx0, ry0, rx1, ry1 = _window_rect(state.right, radius, w, h)
    window = (float(min(lx0, rx0)), float(min(ly0, ry0)), float(max(lx1, rx1)), float(max(ly1, ry1)))

    new_left = _relocate_in_window(lum, state.left, radius, config)
    new_right = _relocate_in_window(lum, state.right, radius, config)
    if new_left is None or new_right is None:
        return replace(state, search_window=window, lost=True, frame_index=state.frame_index + 1)

    a = config.ema_alpha
    left = (a * new_left[0] + (1 - a) * state.left[0], a * new_left[1] + (1 - a) * state.left[1])
    right = (a * new_right[0] + (1 - a) * state.right[0], a * new_right[1] + (1 - a) * state.right[1])
    if left[0] >= right[0]:
        return replace(state, search_window=window, lost=True, frame_index=state.frame_index + 1)
    return NostrilState(
        left=left, right=right,
        separation=math.dist(left, right),
        search_window=window, lost=False,
        frame_index=state.frame_index + 1,
    )


def nf_msroi(state: NostrilState, config: TrackerConfig | None = None) -> OrientedRoi:
    """Mouth-shadow region from the nostril pair: oriented along the pair,
    displaced down the pair normal, sized by the separation."""
    if state.lost:
        raise ValueError("MSROI undefined for a lost nostril track")
    config = config or TrackerConfig()
    dx = state.right[0] - state.left[0]
    dy = state.right[1] - state.left[1]
    angle = math.degrees(math.atan2(dy, dx))
    mid_x = (state.left[0] + state.right[0]) / 2.0
    mid_y = (state.left[1] + state.right[1]) / 2.0
    # Downward normal of the nostril line: (-sin, cos) points toward the mouth.
    theta = math.radians(angle)
    offset = config.msroi_offset * state.separation
    center = (mid_x - offset * math.sin(theta), mid_y + offset * math.cos(theta))
    return OrientedRoi(
        center=center,
        width=config.msroi_width * state.separation,
        height=config.msroi_height * state.separation,
        angle=angle,
    )


def np_init(
    frame: Frame,
    eye_left: tuple[float, float],
    eye_right: tuple[float, float],
    config: TrackerConfig | None = None,
) -> NoseState:
    """Start a nose track from externally supplied eye positions, capturing
    the eye templates used by later updates."""
    config = config or TrackerConfig()
    if eye_left[0] >= eye_right[0]:
        raise ValueError("eye_left must be left of eye_right")
    lum = luminance_array(frame)
    interocular = math.dist(eye_left, eye_right)
    rt = max(2, int(round(config.np_template_radius * interocular)))
    templates = (_extract_patch(lum, eye_left, rt), _extract_patch(lum, eye_right, rt))
    nose = _find_nose(lum, eye_left, eye_right, interocular)
    return NoseState(
        eye_left=eye_left, eye_right=eye_right,
        nose=nose, smoothed_nose=nose, lost=False, templates=templates,
    )


def _extract_patch(lum: np.ndarray, center: tuple[float, float], radius: int) -> np.ndarray:
    cx, cy = int(round(center[0])), int(round(center[1]))
    h, w = lum.shape
    x0, x1 = cx - radius, cx + radius + 1
    y0, y1 = cy - radius, cy + radius + 1
    if x0 < 0 or y0 < 0 or x1 > w or y1 > h:
        raise ValueError(f"template patch around {center} extends outside the frame")
    return lum[y0:y1, x0:x1].copy()


def _match_template(
    lum: np.ndarray, template: np.ndarray, center: tuple[float, float], search_radius: float
) -> tuple[tuple[float, float], float]:
    """Minimum mean-absolute-difference placement; ties go to the smallest
    (row, col) by scan order.

    Scores are exact integer sums (int16 diffs), so tie order never depends
    on float summation order; rows are vectorized for speed.
    """
    h, w = lum.shape
    th, tw = template.shape
    rt = th // 2
    cx, cy = int(round(center[0])), int(round(center[1]))
    r = int(math.ceil(search_radius))
    y_lo, y_hi = max(rt, cy - r), min(h - rt - 1, cy + r)
    x_lo, x_hi = max(rt, cx - r), min(w - rt - 1, cx + r)
    best_score = None
    best = (float(cx), float(cy))
    if y_hi >= y_lo and x_hi >= x_lo:
        t16 = template.astype(np.int16)
        for yy in range(y_lo, y_hi + 1):
            band = lum[yy - rt : yy + rt + 1, x_lo - rt : x_hi + rt + 1].astype(np.int16)
            windows = np.lib.stride_tricks.sliding_window_view(band, (th, tw))[0]
            scores = np.abs(windows - t16).sum(axis=(1, 2), dtype=np.int64)
            xx = int(np.argmin(scores))  # first minimum = smallest col
            score = int(scores[xx])
            if best_score is None or score < best_score:
                best_score = score
                best = (float(x_lo + xx), float(yy))
    if best_score is None:
        return best, math.inf
    return best, best_score / (th * tw)


def _find_nose(
    lum: np.ndarray, eye_left: tuple[float, float], eye_right: tuple[float, float], interocular: float
) -> tuple[float, float]:
    """Brightest point between the eyes, down one interocular distance; ties
    resolve to the smallest (row, col)."""
    h, w = lum.shape
    x0 = max(0, int(math.floor(min(eye_left[0], eye_right[0]))))
    x1 = min(w, int(math.ceil(max(eye_left[0], eye_right[0]))) + 1)
    eye_y = (eye_left[1] + eye_right[1]) / 2.0
    y0 = max(0, int(math.floor(eye_y)))
    y1 = min(h, int(math.ceil(eye_y + interocular)) + 1)
    roi = lum[y0:y1, x0:x1]
    idx = int(np.argmax(roi))  # argmax scans rows then cols = smallest (row, col) tie rule
    ry, rx = divmod(idx, roi.shape[1])
    return float(x0 + rx), float(y0 + ry)


def np_track(state: NoseState, frame: Frame, config: TrackerConfig | None = None) -> NoseState:
    """Re-locate the eyes by template match, take the brightest point in the
    nose region, and smooth the nose estimate."""
    config = config or TrackerConfig()
    if state.templates is None:
        raise ValueError("nose track has no eye templates; initialize with np_init")
    lum = luminance_array(frame)
    interocular = math.dist(state.eye_left, state.eye_right)
    search = config.np_search_radius * interocular
    eye_left, score_l = _match_template(lum, state.templates[0], state.eye_left, search)
    eye_right, score_r = _match_template(lum, state.templates[1], state.eye_right, search)
    if max(score_l, score_r) > config.np_sad_ceiling or eye_left[0] >= eye_right[0]:
        return replace(state, lost=True)
    nose = _find_nose(lum, eye_left, eye_right, math.dist(eye_left, eye_right))
    a = config.ema_alpha
    smoothed = (
        a * nose[0] + (1 - a) * state.smoothed_nose[0],
        a * nose[1] + (1 - a) * state.smoothed_nose[1],
    )
    return NoseState(
        eye_left=eye_left, eye_right=eye_right,
        nose=nose, smoothed_nose=smoothed, lost=False, templates=state.templates,
    )


def np_cursor(
    state: NoseState,
    gain: float,
    reference: tuple[float, float],
    screen: tuple[int, int] = (640, 480),
) -> tuple[float, float] | None:
    """Screen cursor from smoothed nose displacement, clamped to the screen;
    None while the track is lost (callers hold the previous cursor)."""
    if state.lost:
        return None
    sw, sh = screen
    x = sw / 2.0 + gain * (state.smoothed_nose[0] - reference[0])
    y = sh / 2.0 + gain * (state.smoothed_nose[1] - reference[1])
    return min(max(x, 0.0), sw - 1.0), min(max(y, 0.0), sh - 1.0)


def mouth_click(detector: ClickDetector, normalized_area: float) -> tuple[ClickDetector, Click | None]:
    """Advance the open/close state machine one sample.

    A click fires when the area falls to the close threshold after at least
    min_open_frames samples at or above the open threshold; the band between
    the thresholds changes nothing.
    """
    area = min(max(normalized_area, 0.0), 1.0)
    if detector.opening == 0:
        if area >= detector.open_threshold:
            return replace(detector, opening=1), None
        return detector, None
    if area >= detector.open_threshold:
        return replace(detector, opening=detector.opening + 1), None
    if area <= detector.close_threshold:
        fired = detector.opening >= detector.min_open_frames
        idle = replace(detector, opening=0)
        return idle, Click(open_frames=detector.opening) if fired else None
    return detector, None


@dataclass(frozen=True)
class FixedRoiTracker:
    """Head-worn mode: a static region covers the mouth in every frame."""

    roi: OrientedRoi

    def update(self, frame: Frame) -> OrientedRoi:
        return self.roi

    @property
    def lost(self) -> bool:
        return False


def fixed_roi_tracker(roi: OrientedRoi) -> FixedRoiTracker:
    return FixedRoiTracker(roi=roi)
