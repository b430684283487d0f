"""Session engine: one configured pipeline instance processing an ordered
stream of frame and input-event messages into feature records and
application events.

The engine is transport-free; the streaming server and the replay driver
feed it the same message dicts and write out the same response dicts, which
is what makes serve/replay logs comparable byte for byte.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .. import mapping as mp
from .. import tasks, textentry, trackers
from ..frameio import Frame, OrientedRoi, crop_oriented, read_pnm
from ..mouthseg import MouthShape, SegmentationParams, largest_component, shape_stats, threshold_shadow

log = logging.getLogger("facegest.session")

TRACKERS = ("nf", "np", "fixed_roi")
APPLICATIONS = ("none", "circle", "ellipse", "tapping", "text_jp", "text_roman")


class SessionConfigError(ValueError):
    pass


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise SessionConfigError(f"{context} requires {key!r}")
    return obj[key]


@dataclass
class SessionConfig:
    """Parsed and validated session setup."""

    tracker: str = "fixed_roi"
    segmentation: SegmentationParams = field(default_factory=SegmentationParams)
    tracker_config: trackers.TrackerConfig = field(default_factory=trackers.TrackerConfig)
    mappings: list[mp.MappingSpec] = field(default_factory=list)
    application: str = "none"
    app_config: dict = field(default_factory=dict)
    calibration: mp.Calibration | None = None
    live_window_frames: int = 0
    fixed_roi: OrientedRoi | None = None
    np_eyes: tuple[tuple[float, float], tuple[float, float]] | None = None
    cursor_gain: float = 4.0
    cursor_screen: tuple[int, int] = (640, 480)
    cursor_reference: tuple[float, float] | None = None
    click: trackers.ClickDetector | None = None
    frame_period_ms: int = 33
    events: list[dict] = field(default_factory=list)

    @classmethod
    def from_json(cls, obj: dict, base_dir: Path | None = None) -> "SessionConfig":
        if not isinstance(obj, dict):
            raise SessionConfigError("config must be a JSON object")
        cfg = cls()

        cfg.tracker = obj.get("tracker", "fixed_roi")
        if cfg.tracker not in TRACKERS:
            raise SessionConfigError(f"tracker must be one of {TRACKERS}, got {cfg.tracker!r}")

        try:
            if "segmentation" in obj:
                cfg.segmentation = SegmentationParams(**obj["segmentation"])
            if "tracker_config" in obj:
                tc = dict(obj["tracker_config"])
                if "pair_sep_range" in tc:
                    tc["pair_sep_range"] = tuple(tc["pair_sep_range"])
                cfg.tracker_config = trackers.TrackerConfig(**tc)
            cfg.mappings = [mp.MappingSpec.from_json(m) for m in obj.get("mappings", [])]
        except (TypeError, ValueError) as exc:
            raise SessionConfigError(str(exc)) from exc

        cfg.application = obj.get("application", "none")
        if cfg.application not in APPLICATIONS:
            raise SessionConfigError(
                f"application must be one of {APPLICATIONS}, got {cfg.application!r}"
            )
        cfg.app_config = obj.get("app_config", {})

        calib = obj.get("calibration")
        if calib is not None:
            source = _require(calib, "source", "calibration")
            if source == "inline":
                cfg.calibration = mp.Calibration.from_json(calib)
            elif source == "file":
                path = Path(_require(calib, "path", "file calibration"))
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                cfg.calibration = mp.Calibration.from_json(json.loads(path.read_text()))
            elif source == "live_window":
                cfg.live_window_frames = int(_require(calib, "frames", "live_window calibration"))
                if cfg.live_window_frames < 1:
                    raise SessionConfigError("live_window frames must be >= 1")
            else:
                raise SessionConfigError(f"unknown calibration source {source!r}")

        if cfg.tracker == "fixed_roi":
            roi = obj.get("fixed_roi")
            if roi is not None:
                cfg.fixed_roi = OrientedRoi(
                    center=tuple(roi["center"]),
                    width=roi["width"],
                    height=roi["height"],
                    angle=roi.get("angle", 0.0),
                )
        if cfg.tracker == "np":
            eyes = _require(obj, "np_eyes", "np tracker")
            cfg.np_eyes = (tuple(eyes["left"]), tuple(eyes["right"]))

        cursor = obj.get("cursor", {})
        cfg.cursor_gain = cursor.get("gain", 4.0)
        cfg.cursor_screen = tuple(cursor.get("screen", (640, 480)))
        if "reference" in cursor:
            cfg.cursor_reference = tuple(cursor["reference"])

        if "click" in obj:
            c = obj["click"]
            try:
                cfg.click = trackers.ClickDetector(
                    open_threshold=c.get("open_threshold", 0.5),
                    close_threshold=c.get("close_threshold", 0.2),
                    min_open_frames=c.get("min_open_frames", 2),
                )
            except ValueError as exc:
                raise SessionConfigError(str(exc)) from exc

        cfg.frame_period_ms = int(obj.get("frame_period_ms", 33))
        cfg.events = list(obj.get("events", []))

        needs_calibration = cfg.application in ("text_jp", "text_roman") or cfg.click is not None
        if needs_calibration and cfg.calibration is None and cfg.live_window_frames == 0:
            raise SessionConfigError(
                f"application {cfg.application!r} requires a calibration source"
            )
        return cfg


def _build_app(config: SessionConfig):
    app = config.application
    c = config.app_config
    if app == "circle":
        return tasks.CircleTaskConfig(
            gain=c.get("gain", 1.0),
            targets=tuple(c.get("targets", (100.0,))),
            tolerance=c.get("tolerance", 5.0),
            hold_ms=c.get("hold_ms", 3000),
            radius_from=c.get("radius_from", "sqrt_area"),
        )
    if app == "ellipse":
        return tasks.EllipseTaskConfig(
            gain_w=c.get("gain_w", 1.0),
            gain_h=c.get("gain_h", 1.0),
            targets=tuple(tuple(t) for t in c.get("targets", ((120.0, 80.0),))),
            tolerance=c.get("tolerance", 5.0),
            hold_ms=c.get("hold_ms", 3000),
        )
    if app == "tapping":
        return tasks.TappingTaskConfig(
            n_targets=c.get("n_targets", 9),
            distance=c.get("D", 400.0),
            width=c.get("W", 50.0),
            timeout_ms=c.get("timeout_ms", 10000),
            center=tuple(c.get("center", (320.0, 240.0))),
        )
    return None


class Session:
    """Strictly ordered message processor for one client session."""

    def __init__(self, default_config: dict | None = None):
        self.default_config = default_config
        self.config: SessionConfig | None = None
        self._last_seq: int | None = None
        self._nf_state: trackers.NostrilState | None = None
        self._np_state: trackers.NoseState | None = None
        self._calibration: mp.Calibration | None = None
        self._calibration_shapes: list[MouthShape] = []
        self._mouth_state: mp.MouthState | None = None
        self._vowel: str | None = None
        self._cursor: tuple[float, float] | None = None
        self._cursor_reference: tuple[float, float] | None = None
        self._click_detector: trackers.ClickDetector | None = None
        self._mapping_states: list[mp.MappingState] = []
        self._task_config = None
        self._hold_state: tasks.HoldState | None = None
        self._hold_active = False
        self._tapping: tasks.TappingTask | None = None
        self._tapping_started = False
        self._composer: textentry.KanaComposer | None = None
        self._roman_chars: list[str] = []
        self.ended = False

    # -- message dispatch ---------------------------------------------------

    def handle_line(self, line: str) -> list[dict]:
        """Parse one NDJSON line and process it; JSON errors stay in-session."""
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return [{"type": "error", "message": f"malformed JSON: {exc.msg}"}]
        if not isinstance(msg, dict):
            return [{"type": "error", "message": "message must be a JSON object"}]
        return self.handle_message(msg)

    def handle_message(self, msg: dict) -> list[dict]:
        kind = msg.get("type")
        if kind == "hello":
            return self._on_hello(msg)
        if kind == "frame":
            return self._on_frame(msg)
        if kind == "event":
            return self._on_event(msg)
        if kind == "end":
            self.ended = True
            return []
        return [{"type": "error", "message": f"unknown message type {kind!r}"}]

    def _on_hello(self, msg: dict) -> list[dict]:
        config_obj = msg.get("config")
        if config_obj is None:
            config_obj = self.default_config or {}
        try:
            config = SessionConfig.from_json(config_obj)
        except (SessionConfigError, OSError, json.JSONDecodeError) as exc:
            return [{"type": "error", "message": f"bad config: {exc}"}]
        self.config = config
        self._calibration = config.calibration
        self._click_detector = config.click
        self._mapping_states = [mp.MappingState() for _ in config.mappings]
        self._cursor_reference = config.cursor_reference
        self._task_config = _build_app(config)
        if config.application in ("circle", "ellipse"):
            self._hold_state = tasks.HoldState()
        elif config.application == "tapping":
            self._tapping = tasks.TappingTask(config=self._task_config)
        elif config.application == "text_jp":
            self._composer = textentry.KanaComposer()
        log.info("session configured: tracker=%s app=%s", config.tracker, config.application)
        return []

    # -- frame pipeline -----------------------------------------------------

    def _on_frame(self, msg: dict) -> list[dict]:
        if self.config is None:
            return [{"type": "error", "message": "frame before hello"}]
        seq = msg.get("seq")
        if not isinstance(seq, int):
            return [{"type": "error", "message": "frame requires integer seq"}]
        if self._last_seq is not None and seq <= self._last_seq:
            return [{"type": "error", "message": f"seq {seq} not increasing", "seq": seq}]
        if msg.get("encoding", "pnm-base64") != "pnm-base64":
            return [{"type": "error", "message": "unsupported frame encoding", "seq": seq}]
        try:
            frame = read_pnm(base64.b64decode(msg.get("data", ""), validate=True))
        except (ValueError, binascii.Error) as exc:
            return [{"type": "error", "message": f"frame decode failed: {exc}", "seq": seq}]
        self._last_seq = seq
        t_ms = msg.get("t_ms")
        if t_ms is None:
            t_ms = seq * self.config.frame_period_ms
        try:
            return self.process_frame(seq, int(t_ms), frame)
        except (ValueError, TypeError) as exc:
            return [{"type": "error", "message": f"frame processing failed: {exc}", "seq": seq}]

    def process_frame(self, seq: int, t_ms: int, frame: Frame) -> list[dict]:
        config = self.config
        assert config is not None
        responses: list[dict] = []

        roi, tracker_fields = self._track(frame)
        shape = self._segment(frame, roi)

        if self._calibration is None and config.live_window_frames:
            self._calibration_shapes.append(shape)
            if len(self._calibration_shapes) >= config.live_window_frames:
                try:
                    self._calibration = mp.calibrate(self._calibration_shapes)
                except mp.CalibrationError as exc:
                    responses.append({"type": "error", "message": f"calibration failed: {exc}"})
                self._calibration_shapes.clear()

        if self._calibration is not None:
            self._mouth_state = mp.quantize_mouth_state(
                shape, self._calibration, prev=self._mouth_state
            )
            if config.application == "text_jp":
                self._vowel = mp.classify_vowel(shape, self._calibration)

        if config.tracker == "np" and self._np_state is not None and not self._np_state.lost:
            if self._cursor_reference is None:
                self._cursor_reference = self._np_state.smoothed_nose
            cursor = trackers.np_cursor(
                self._np_state, config.cursor_gain, self._cursor_reference, config.cursor_screen
            )
            if cursor is not None:
                self._cursor = cursor

        record = self._feature_record(seq, t_ms, shape, tracker_fields)
        responses.append(record)
        responses.extend(self._app_frame_events(shape, t_ms))

        if self._click_detector is not None and self._calibration is not None:
            self._click_detector, click = trackers.mouth_click(
                self._click_detector, self._calibration.norm_area(shape.area)
            )
            if click is not None:
                responses.append(
                    {"type": "app_event", "kind": "click", "t_ms": t_ms, "open_frames": click.open_frames}
                )
                responses.extend(self._tap(t_ms))
        return responses

    def _track(self, frame: Frame) -> tuple[OrientedRoi | None, dict]:
        config = self.config
        assert config is not None
        if config.tracker == "fixed_roi":
            roi = config.fixed_roi or OrientedRoi(
                center=((frame.width - 1) / 2.0, (frame.height - 1) / 2.0),
                width=frame.width,
                height=frame.height,
            )
            return roi, {"nostrils": None, "nose": None, "lost": False}
        if config.tracker == "nf":
            if self._nf_state is None or self._nf_state.lost:
                self._nf_state = trackers.nf_init(frame, config.tracker_config)
            else:
                self._nf_state = trackers.nf_update(self._nf_state, frame, config.tracker_config)
            state = self._nf_state
            fields = {
                "nostrils": None if state.lost else {"left": list(state.left), "right": list(state.right)},
                "nose": None,
                "lost": state.lost,
            }
            roi = None if state.lost else trackers.nf_msroi(state, config.tracker_config)
            return roi, fields
        # np tracker
        if self._np_state is None:
            assert config.np_eyes is not None
            self._np_state = trackers.np_init(
                frame, config.np_eyes[0], config.np_eyes[1], config.tracker_config
            )
        else:
            if not self._np_state.lost:
                self._np_state = trackers.np_track(self._np_state, frame, config.tracker_config)
        state = self._np_state
        fields = {
            "nostrils": None,
            "nose": None if state.lost else list(state.nose),
            "lost": state.lost,
        }
        return (None if state.lost else _np_msroi(state)), fields

    def _segment(self, frame: Frame, roi: OrientedRoi | None) -> MouthShape:
        if roi is None:
            return MouthShape()
        assert self.config is not None
        roi_frame = crop_oriented(frame, roi)
        mask = threshold_shadow(roi_frame, self.config.segmentation)
        blob = largest_component(mask, self.config.segmentation)
        return shape_stats(blob)

    def _feature_record(self, seq: int, t_ms: int, shape: MouthShape, tracker_fields: dict) -> dict:
        assert self.config is not None
        record: dict = {"type": "features", "seq": seq, "t_ms": t_ms}
        record.update(shape.to_json())
        record.update(tracker_fields)
        record["mouth_state"] = self._mouth_state.value if self._mouth_state else None
        if self.config.application == "text_jp":
            record["vowel"] = self._vowel
        if self.config.tracker == "np":
            record["cursor"] = list(self._cursor) if self._cursor else None
        if self.config.mappings:
            params = {}
            for i, spec in enumerate(self.config.mappings):
                raw = _extract_feature(spec.feature, shape, self._calibration, self._cursor)
                value, self._mapping_states[i] = mp.apply(spec, raw, self._mapping_states[i])
                if value is not None:
                    params[spec.output_name] = value
            record["params"] = params
        return record

    def _app_frame_events(self, shape: MouthShape, t_ms: int) -> list[dict]:
        config = self.config
        assert config is not None
        events: list[dict] = []
        if config.application in ("circle", "ellipse") and self._hold_state is not None:
            was_holding = self._hold_active
            if config.application == "circle":
                value, self._hold_state, outcome = tasks.circle_step(
                    self._task_config, shape, t_ms, self._hold_state
                )
            else:
                value, self._hold_state, outcome = tasks.ellipse_step(
                    self._task_config, shape, t_ms, self._hold_state
                )
            holding = self._hold_state.hold_start_ms is not None
            if outcome is not None:
                events.append({
                    "type": "app_event", "kind": "hold", "status": "success", "t_ms": outcome.t_success_ms,
                })
                events.append({
                    "type": "app_event",
                    "kind": "trial_outcome",
                    "task": config.application,
                    "trial": outcome.trial_index,
                    "target": list(outcome.target) if isinstance(outcome.target, tuple) else outcome.target,
                    "t_success_ms": outcome.t_success_ms,
                })
                self._hold_active = False
            elif holding and not was_holding:
                events.append({"type": "app_event", "kind": "hold", "status": "start", "t_ms": t_ms})
                self._hold_active = True
            elif was_holding and not holding:
                events.append({"type": "app_event", "kind": "hold", "status": "reset", "t_ms": t_ms})
                self._hold_active = False
        elif config.application == "tapping" and self._tapping is not None:
            if not self._tapping_started:
                self._tapping_started = True
                self._tapping.start_ms = t_ms
                events.extend(self._target_event(t_ms))
            else:
                record = self._tapping.tick(t_ms)
                if record is not None:
                    events.append(_tapping_outcome_event(record, t_ms))
                    events.extend(self._target_event(t_ms))
        return events

    def _target_event(self, t_ms: int) -> list[dict]:
        if self._tapping is None or self._tapping.done:
            return []
        idx = self._tapping.current_target
        cx, cy = self._tapping.current_target_center()
        return [{
            "type": "app_event", "kind": "target", "index": idx,
            "center": [cx, cy], "width": self._tapping.config.width, "t_ms": t_ms,
        }]

    # -- input events ---------------------------------------------------------

    def _on_event(self, msg: dict) -> list[dict]:
        if self.config is None:
            return [{"type": "error", "message": "event before hello"}]
        kind = msg.get("kind")
        try:
            t_ms = int(msg.get("t_ms", 0))
        except (TypeError, ValueError):
            return [{"type": "error", "message": f"event t_ms must be a number, got {msg.get('t_ms')!r}"}]
        if kind == "key":
            return self._on_key(str(msg.get("key")), t_ms)
        if kind == "click":
            responses = [{"type": "app_event", "kind": "click", "t_ms": t_ms, "source": "input"}]
            responses.extend(self._tap(t_ms))
            return responses
        return [{"type": "error", "message": f"unknown event kind {kind!r}"}]

    def _on_key(self, key: str, t_ms: int) -> list[dict]:
        config = self.config
        assert config is not None
        if config.application == "text_jp" and self._composer is not None:
            vowel = self._vowel
            if self._mouth_state is mp.MouthState.CLOSED:
                vowel = None  # closed mouth selects no vowel; the w key maps it to ん
            try:
                change = self._composer.feed(key, vowel)
            except ValueError as exc:
                return [{"type": "error", "message": str(exc)}]
            if change is None:
                return []
            return [{
                "type": "app_event", "kind": "kana", "text": change["text"],
                "replace_last": change["replace_last"],
                "transcript": self._composer.transcript, "t_ms": t_ms,
            }]
        if config.application == "text_roman":
            if self._mouth_state is None:
                return [{"type": "error", "message": "text_roman key before calibration"}]
            try:
                letter = textentry.roman_select(key, self._mouth_state)
            except ValueError as exc:
                return [{"type": "error", "message": str(exc)}]
            if letter is None:
                return []
            self._roman_chars.append(letter)
            return [{
                "type": "app_event", "kind": "letter", "letter": letter,
                "transcript": "".join(self._roman_chars), "t_ms": t_ms,
            }]
        return []

    def _tap(self, t_ms: int) -> list[dict]:
        """A click acts as a tapping selection at the current cursor."""
        if self._tapping is None or self._cursor is None or self._tapping.done:
            return []
        record = self._tapping.click(self._cursor, t_ms)
        if record is None:
            return []
        events = [_tapping_outcome_event(record, t_ms)]
        events.extend(self._target_event(t_ms))
        return events


def _tapping_outcome_event(record: tasks.FittsRecord, t_ms: int) -> dict:
    event = {"type": "app_event", "kind": "trial_outcome", "task": "tapping", "t_ms": t_ms}
    event.update(record.to_json())
    return event


def _np_msroi(state: trackers.NoseState) -> OrientedRoi:
    """Mouth region below the nose, scaled and tilted by the eye line.

    The landmark set fixes position and scale; the proportions are session
    plumbing, not tracker output.
    """
    dx = state.eye_right[0] - state.eye_left[0]
    dy = state.eye_right[1] - state.eye_left[1]
    interocular = math.hypot(dx, dy)
    angle = math.degrees(math.atan2(dy, dx))
    theta = math.radians(angle)
    offset = 0.6 * interocular
    center = (
        state.nose[0] - offset * math.sin(theta),
        state.nose[1] + offset * math.cos(theta),
    )
    return OrientedRoi(
        center=center, width=1.2 * interocular, height=0.8 * interocular, angle=angle
    )


def _extract_feature(
    feature: str,
    shape: MouthShape,
    calibration: mp.Calibration | None,
    cursor: tuple[float, float] | None,
) -> float:
    if feature == "area":
        return shape.area
    if feature == "norm_area":
        return calibration.norm_area(shape.area) if calibration else math.nan
    if feature == "bbox_w":
        return shape.bbox_w
    if feature == "bbox_h":
        return shape.bbox_h
    if feature == "aspect":
        return shape.aspect_ratio
    if feature == "angle":
        return shape.principal_angle
    if feature == "lambda1":
        return shape.lambda1
    if feature == "lambda2":
        return shape.lambda2
    if feature == "cursor_x":
        return cursor[0] if cursor else math.nan
    if feature == "cursor_y":
        return cursor[1] if cursor else math.nan
    raise ValueError(f"unknown feature {feature!r}")


def encode_message(msg: dict) -> str:
    """Canonical wire/log encoding: compact separators, raw UTF-8."""
    return json.dumps(msg, ensure_ascii=False, separators=(",", ":"))
