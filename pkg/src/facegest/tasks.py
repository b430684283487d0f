"""Replayable usability tasks and their analytics.

Circle and ellipse matching tasks hold a controlled figure inside a
tolerance band for a dwell period; the multidirectional tapping task hops
targets across a ring.  Analytics turn trial logs into Fitts throughput and
hold accuracy / precision / signal-to-noise figures.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace

from .mouthseg import MouthShape

SNR_CAP_DB = 120.0


@dataclass(frozen=True)
class CircleTaskConfig:
    """Mouth area drives the radius of a circle; radius = gain * sqrt(area)
    by default, or gain * area with radius_from="area"."""

    gain: float = 1.0
    targets: tuple[float, ...] = (100.0,)
    tolerance: float = 5.0
    hold_ms: int = 3000
    radius_from: str = "sqrt_area"

    def __post_init__(self):
        # JSON round-trips through clients may turn 60.0 into 60; pin the
        # numeric types so logs serialize identically on every path.
        object.__setattr__(self, "gain", float(self.gain))
        object.__setattr__(self, "targets", tuple(float(t) for t in self.targets))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "hold_ms", int(self.hold_ms))
        if self.gain <= 0 or self.tolerance <= 0:
            raise ValueError("gain and tolerance must be positive")
        if self.radius_from not in ("sqrt_area", "area"):
            raise ValueError(f"radius_from must be 'sqrt_area' or 'area', got {self.radius_from!r}")

    def radius(self, area: float) -> float:
        if self.radius_from == "sqrt_area":
            return self.gain * math.sqrt(max(area, 0.0))
        return self.gain * area


@dataclass(frozen=True)
class EllipseTaskConfig:
    """Mouth bounding box drives the width and height of an ellipse."""

    gain_w: float = 1.0
    gain_h: float = 1.0
    targets: tuple[tuple[float, float], ...] = ((120.0, 80.0),)
    tolerance: float = 5.0
    hold_ms: int = 3000

    def __post_init__(self):
        object.__setattr__(self, "gain_w", float(self.gain_w))
        object.__setattr__(self, "gain_h", float(self.gain_h))
        object.__setattr__(
            self, "targets", tuple((float(w), float(h)) for w, h in self.targets)
        )
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "hold_ms", int(self.hold_ms))
        if self.gain_w <= 0 or self.gain_h <= 0 or self.tolerance <= 0:
            raise ValueError("gains and tolerance must be positive")


@dataclass(frozen=True)
class TappingTaskConfig:
    """Ring of n targets (odd n), diameter-crossing acquisition order."""

    n_targets: int = 9
    distance: float = 400.0   # center-to-center hop distance D, px
    width: float = 50.0       # target diameter W, px
    timeout_ms: int = 10000
    center: tuple[float, float] = (320.0, 240.0)

    def __post_init__(self):
        object.__setattr__(self, "n_targets", int(self.n_targets))
        object.__setattr__(self, "distance", float(self.distance))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "timeout_ms", int(self.timeout_ms))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.n_targets < 3 or self.n_targets % 2 == 0:
            raise ValueError(f"n_targets must be odd and >= 3, got {self.n_targets}")
        if not self.distance > self.width > 0:
            raise ValueError("need distance > width > 0")

    def ring_radius(self) -> float:
        """Ring radius such that consecutive targets are exactly D apart."""
        step = (self.n_targets + 1) // 2
        return self.distance / (2.0 * math.sin(math.pi * step / self.n_targets))

    def target_center(self, index: int) -> tuple[float, float]:
        r = self.ring_radius()
        angle = 2.0 * math.pi * index / self.n_targets
        return (self.center[0] + r * math.cos(angle), self.center[1] + r * math.sin(angle))


@dataclass(frozen=True)
class FittsRecord:
    distance: float  # D, px
    width: float     # W, px
    mt: float        # movement time, seconds
    hit: bool

    def __post_init__(self):
        if self.mt <= 0:
            raise ValueError(f"movement time must be positive, got {self.mt}")

    def to_json(self) -> dict:
        return {"D": self.distance, "W": self.width, "MT": self.mt, "hit": self.hit}

    @classmethod
    def from_json(cls, obj: dict) -> "FittsRecord":
        return cls(distance=obj["D"], width=obj["W"], mt=obj["MT"], hit=obj["hit"])


@dataclass(frozen=True)
class HoldAnalysis:
    accuracy: float
    precision: float
    snr_db: float

    def to_json(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "snr_db": self.snr_db}


@dataclass(frozen=True)
class ThroughputReport:
    ids: tuple[float, ...]          # per-record index of difficulty, bits
    mean_mt: float                  # grand mean movement time over hits, s
    throughput: float               # bits/s, mean of per-condition rates
    completion: tuple[bool, ...]    # per-record hit outcomes

    def to_json(self) -> dict:
        return {
            "ids": list(self.ids),
            "mean_MT": self.mean_mt,
            "throughput": self.throughput,
            "completion": list(self.completion),
        }


@dataclass(frozen=True)
class HoldState:
    """Dwell automaton: time the controlled value entered tolerance, if any."""

    trial_index: int = 0
    hold_start_ms: int | None = None
    done: bool = False


@dataclass(frozen=True)
class TrialOutcome:
    trial_index: int
    target: float | tuple[float, float]
    t_success_ms: int


def _step_hold(
    state: HoldState, inside: bool, t_ms: int, hold_ms: int, n_trials: int,
    target: float | tuple[float, float],
) -> tuple[HoldState, TrialOutcome | None]:
    if state.done:
        return state, None
    if not inside:
        if state.hold_start_ms is not None:
            state = replace(state, hold_start_ms=None)
        return state, None
    if state.hold_start_ms is None:
        return replace(state, hold_start_ms=t_ms), None
    if t_ms - state.hold_start_ms >= hold_ms:
        outcome = TrialOutcome(
            trial_index=state.trial_index,
            target=target,
            t_success_ms=state.hold_start_ms + hold_ms,
        )
        nxt = state.trial_index + 1
        return HoldState(trial_index=nxt, hold_start_ms=None, done=nxt >= n_trials), outcome
    return state, None


def circle_step(
    config: CircleTaskConfig, sample: MouthShape, t_ms: int, state: HoldState | None = None
) -> tuple[float, HoldState, TrialOutcome | None]:
    """Advance the circle task one sample; the trial succeeds at the first
    instant the radius has stayed within tolerance for the dwell period."""
    state = state or HoldState()
    radius = config.radius(sample.area)
    if state.done:
        return radius, state, None
    target = config.targets[state.trial_index]
    inside = abs(radius - target) <= config.tolerance
    state, outcome = _step_hold(state, inside, t_ms, config.hold_ms, len(config.targets), target)
    return radius, state, outcome


def ellipse_step(
    config: EllipseTaskConfig, sample: MouthShape, t_ms: int, state: HoldState | None = None
) -> tuple[tuple[float, float], HoldState, TrialOutcome | None]:
    """Advance the ellipse task one sample; both axes must sit inside the
    tolerance band together for the whole dwell period."""
    state = state or HoldState()
    w = config.gain_w * sample.bbox_w
    h = config.gain_h * sample.bbox_h
    if state.done:
        return (w, h), state, None
    tw, th = config.targets[state.trial_index]
    inside = abs(w - tw) <= config.tolerance and abs(h - th) <= config.tolerance
    state, outcome = _step_hold(
        state, inside, t_ms, config.hold_ms, len(config.targets), (tw, th)
    )
    return (w, h), state, outcome


def tapping_sequence(n_targets: int) -> list[int]:
    """Target visit order around the ring: every hop crosses the circle and
    each of the n targets appears exactly once (n odd)."""
    if n_targets < 3 or n_targets % 2 == 0:
        raise ValueError(f"n_targets must be odd and >= 3, got {n_targets}")
    step = (n_targets + 1) // 2
    order = [0]
    for _ in range(n_targets - 1):
        order.append((order[-1] + step) % n_targets)
    return order


@dataclass
class TappingTask:
    """Sequential acquisition of ring targets from a cursor + click stream."""

    config: TappingTaskConfig
    start_ms: int = 0
    _order: list[int] = field(init=False)
    _position: int = field(default=0, init=False)
    _last_event_ms: int | None = field(default=None, init=False)
    records: list[FittsRecord] = field(default_factory=list, init=False)

    def __post_init__(self):
        self._order = tapping_sequence(self.config.n_targets)

    @property
    def done(self) -> bool:
        return self._position >= len(self._order)

    @property
    def current_target(self) -> int | None:
        return None if self.done else self._order[self._position]

    def current_target_center(self) -> tuple[float, float] | None:
        idx = self.current_target
        return None if idx is None else self.config.target_center(idx)

    def _mt_seconds(self, t_ms: int) -> float:
        ref = self._last_event_ms if self._last_event_ms is not None else self.start_ms
        return max(t_ms - ref, 1) / 1000.0

    def click(self, cursor: tuple[float, float], t_ms: int) -> FittsRecord | None:
        """A selection at the cursor: hit when inside the target disk; the
        task advances either way, as the ISO procedure does."""
        if self.done:
            return None
        cx, cy = self.config.target_center(self._order[self._position])
        hit = math.hypot(cursor[0] - cx, cursor[1] - cy) <= self.config.width / 2.0
        record = FittsRecord(
            distance=self.config.distance, width=self.config.width,
            mt=self._mt_seconds(t_ms), hit=hit,
        )
        self.records.append(record)
        self._last_event_ms = t_ms
        self._position += 1
        return record

    def tick(self, t_ms: int) -> FittsRecord | None:
        """Clock advance: a target that outlives timeout_ms is a miss."""
        if self.done:
            return None
        ref = self._last_event_ms if self._last_event_ms is not None else self.start_ms
        if t_ms - ref < self.config.timeout_ms:
            return None
        record = FittsRecord(
            distance=self.config.distance, width=self.config.width,
            mt=self.config.timeout_ms / 1000.0, hit=False,
        )
        self.records.append(record)
        self._last_event_ms = ref + self.config.timeout_ms
        self._position += 1
        return record


def fitts_id(distance: float, width: float) -> float:
    """Shannon index of difficulty, log2(D/W + 1) bits."""
    if distance <= 0 or width <= 0:
        raise ValueError(f"need positive D and W, got D={distance} W={width}")
    return math.log2(distance / width + 1.0)


def throughput(records: list[FittsRecord]) -> ThroughputReport:
    """Mean over (D, W) conditions of ID / mean movement time over hits.

    Misses never enter the time means but stay in the completion outcomes;
    a record set without a single hit has no throughput.
    """
    if not any(r.hit for r in records):
        raise ValueError("throughput needs at least one hit record")
    conditions: dict[tuple[float, float], list[float]] = {}
    for r in records:
        if r.hit:
            conditions.setdefault((r.distance, r.width), []).append(r.mt)
    rates = [
        fitts_id(d, w) / (sum(mts) / len(mts)) for (d, w), mts in conditions.items()
    ]
    hit_mts = [r.mt for r in records if r.hit]
    return ThroughputReport(
        ids=tuple(fitts_id(r.distance, r.width) for r in records),
        mean_mt=sum(hit_mts) / len(hit_mts),
        throughput=sum(rates) / len(rates),
        completion=tuple(r.hit for r in records),
    )


def analyze_hold(series: list[float], target: float) -> HoldAnalysis:
    """Accuracy, precision, and signal-to-noise of a steady-hold window.

    SNR is 20*log10(target / rms error about the target), capped at 120 dB
    when the error underflows one part per million of the target.
    """
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    if len(series) < 2:
        raise ValueError("hold analysis needs at least two samples")
    mean = sum(series) / len(series)
    accuracy = abs(mean - target)
    precision = statistics.stdev(series)
    rms = math.sqrt(sum((s - target) ** 2 for s in series) / len(series))
    if rms < target * 1e-6:
        snr_db = SNR_CAP_DB
    else:
        snr_db = min(20.0 * math.log10(target / rms), SNR_CAP_DB)
    return HoldAnalysis(accuracy=accuracy, precision=precision, snr_db=snr_db)


def gain_sweep(
    config: CircleTaskConfig,
    samples: list[tuple[int, MouthShape]],
    gains: list[float],
) -> list[dict]:
    """Re-run the circle task over the same samples at each gain and tabulate
    hold statistics per (gain, target); one row per combination."""
    rows = []
    for gain in gains:
        cfg = replace(config, gain=gain)
        state: HoldState | None = None
        outcomes: dict[int, TrialOutcome] = {}
        radii = []
        for t_ms, shape in samples:
            radius, state, outcome = circle_step(cfg, shape, t_ms, state)
            radii.append(radius)
            if outcome is not None:
                outcomes[outcome.trial_index] = outcome
        for i, target in enumerate(cfg.targets):
            hold = analyze_hold(radii, target) if len(radii) >= 2 else None
            rows.append({
                "gain": gain,
                "target": target,
                "accuracy": hold.accuracy if hold else None,
                "precision": hold.precision if hold else None,
                "snr_db": hold.snr_db if hold else None,
                "succeeded": i in outcomes,
                "t_success_ms": outcomes[i].t_success_ms if i in outcomes else None,
            })
    return rows
