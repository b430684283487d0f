"""Command line: segmentation, tracking replay, task analysis, Fitts
reports, text-entry simulation, and the streaming server.

Exit codes: 0 success, 1 usage error, 2 data error.  The log level comes
from FACEGEST_LOG_LEVEL (error | info | debug).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import os
import sys
from pathlib import Path

from .. import tasks, textentry
from ..frameio import PnmParseError, read_pnm
from ..mouthseg import MouthShape, SegmentationParams, largest_component, shape_stats, threshold_shadow
from .replay import run_replay
from .server import serve_forever
from .session import SessionConfig, SessionConfigError, encode_message

log = logging.getLogger("facegest.cli")

USAGE_EXIT = 1
DATA_EXIT = 2


class CliUsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems with exit code 1 and
    the valid flag list."""

    def error(self, message):
        raise CliUsageError(f"{message}\n{self.format_usage()}valid flags: {self._flag_list()}")

    def _flag_list(self) -> str:
        flags = []
        for action in self._actions:
            flags.extend(action.option_strings)
        return " ".join(flags) if flags else "(none)"


def _configure_logging() -> None:
    level_name = os.environ.get("FACEGEST_LOG_LEVEL", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level_name not in levels:
        print(f"warning: unknown FACEGEST_LOG_LEVEL {level_name!r}, using info", file=sys.stderr)
    logging.basicConfig(
        level=levels.get(level_name, logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )


def build_parser() -> Parser:
    parser = Parser(prog="facegest", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=Parser)

    p_segment = sub.add_parser("segment", help="segment one PNM frame to a shape JSON")
    p_segment.add_argument("frame", help="path to a P5/P6 PNM file")
    p_segment.add_argument("--params", help="segmentation params JSON file")

    p_track = sub.add_parser("track", help="replay a frame sequence through a tracker")
    p_track.add_argument("seqdir", help="directory with manifest.json and frames")
    p_track.add_argument("--tracker", required=True, choices=["nf", "np", "fixed"])
    p_track.add_argument("--out", required=True, help="output JSONL log path")
    p_track.add_argument("--config", help="session config JSON file (merged)")

    p_task = sub.add_parser("task", help="run a control task over a replay log")
    p_task.add_argument("task", choices=["circle", "ellipse", "tapping"])
    p_task.add_argument("--replay", required=True, help="features/app-event JSONL log")
    p_task.add_argument("--config", required=True, help="task config JSON file")
    p_task.add_argument("--report", required=True, help="output report JSON path")

    p_fitts = sub.add_parser("fitts", help="throughput report from trial records")
    p_fitts.add_argument("--log", required=True, help="JSONL with D/W/MT/hit records")
    p_fitts.add_argument("--report", required=True, help="output report JSON path")

    p_text = sub.add_parser("text", help="text entry tools")
    text_sub = p_text.add_subparsers(dest="text_command", parser_class=Parser)
    p_sim = text_sub.add_parser("simulate", help="replay key/mouth events into text")
    p_sim.add_argument("--layout", required=True, choices=["jp", "roman"])
    p_sim.add_argument("--events", required=True, help="events JSONL file")
    p_sim.add_argument("--out", required=True, help="transcript output path")
    p_sim.add_argument("--metrics", required=True, help="metrics JSON output path")

    p_serve = sub.add_parser("serve", help="run the streaming session endpoint")
    p_serve.add_argument("--listen", required=True, help="host:port (port 0 = ephemeral)")
    p_serve.add_argument("--config", help="default session config for hellos that omit one")
    p_serve.add_argument("--ws", action="store_true", help="WebSocket framing instead of TCP NDJSON")

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT

    if args.command is None:
        print(parser.format_usage(), file=sys.stderr)
        return USAGE_EXIT

    try:
        if args.command == "segment":
            return _cmd_segment(args)
        if args.command == "track":
            return _cmd_track(args)
        if args.command == "task":
            return _cmd_task(args)
        if args.command == "fitts":
            return _cmd_fitts(args)
        if args.command == "text":
            if args.text_command != "simulate":
                print("usage error: text requires the 'simulate' subcommand", file=sys.stderr)
                return USAGE_EXIT
            return _cmd_text_simulate(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (OSError, ValueError, KeyError, json.JSONDecodeError, SessionConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    return 0


def _load_json(path: str | Path):
    return json.loads(Path(path).read_text())


def _cmd_segment(args) -> int:
    data = Path(args.frame).read_bytes()
    try:
        frame = read_pnm(data)
    except PnmParseError as exc:
        print(f"error: {args.frame}: {exc}", file=sys.stderr)
        return DATA_EXIT
    params = SegmentationParams(**_load_json(args.params)) if args.params else SegmentationParams()
    mask = threshold_shadow(frame, params)
    shape = shape_stats(largest_component(mask, params))
    print(encode_message(shape.to_json()))
    return 0


def _cmd_track(args) -> int:
    config = _load_json(args.config) if args.config else {}
    config["tracker"] = {"fixed": "fixed_roi"}.get(args.tracker, args.tracker)
    run_replay(args.seqdir, config, args.out)
    print(args.out)
    return 0


def _read_log_lines(path: str | Path) -> list[dict]:
    lines = []
    for i, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not raw.strip():
            continue
        try:
            lines.append(json.loads(raw))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{i + 1}: bad JSONL line: {exc.msg}") from exc
    return lines


def _features_samples(lines: list[dict]) -> list[tuple[int, MouthShape]]:
    samples = []
    for line in lines:
        if line.get("type") == "features":
            samples.append((int(line["t_ms"]), MouthShape.from_json(line)))
    if not samples:
        raise ValueError("replay log contains no features records")
    return samples


def _cmd_task(args) -> int:
    config = _load_json(args.config)
    lines = _read_log_lines(args.replay)
    if args.task == "circle":
        report = _run_circle(config, _features_samples(lines))
    elif args.task == "ellipse":
        report = _run_ellipse(config, _features_samples(lines))
    else:
        report = _run_tapping(config, lines)
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(args.report)
    return 0


def _hold_window(series: list[tuple[int, float]], outcome: tasks.TrialOutcome, hold_ms: int):
    lo = outcome.t_success_ms - hold_ms
    return [v for t, v in series if lo <= t <= outcome.t_success_ms]


def _run_circle(config: dict, samples: list[tuple[int, MouthShape]]) -> dict:
    cfg = tasks.CircleTaskConfig(
        gain=config.get("gain", 1.0),
        targets=tuple(config.get("targets", (100.0,))),
        tolerance=config.get("tolerance", 5.0),
        hold_ms=config.get("hold_ms", 3000),
        radius_from=config.get("radius_from", "sqrt_area"),
    )
    state = None
    series: list[tuple[int, float]] = []
    outcomes: dict[int, tasks.TrialOutcome] = {}
    for t_ms, shape in samples:
        radius, state, outcome = tasks.circle_step(cfg, shape, t_ms, state)
        series.append((t_ms, radius))
        if outcome is not None:
            outcomes[outcome.trial_index] = outcome
    trials = []
    for i, target in enumerate(cfg.targets):
        outcome = outcomes.get(i)
        hold = None
        if outcome is not None:
            window = _hold_window(series, outcome, cfg.hold_ms)
            if len(window) >= 2:
                hold = tasks.analyze_hold(window, target).to_json()
        trials.append({
            "trial": i,
            "target": target,
            "succeeded": outcome is not None,
            "t_success_ms": outcome.t_success_ms if outcome else None,
            "hold": hold,
        })
    report = {"task": "circle", "trials": trials}
    if "gains" in config:
        shapes = [(t, s) for t, s in samples]
        report["sweep"] = tasks.gain_sweep(cfg, shapes, list(config["gains"]))
    return report


def _run_ellipse(config: dict, samples: list[tuple[int, MouthShape]]) -> dict:
    cfg = tasks.EllipseTaskConfig(
        gain_w=config.get("gain_w", 1.0),
        gain_h=config.get("gain_h", 1.0),
        targets=tuple(tuple(t) for t in config.get("targets", ((120.0, 80.0),))),
        tolerance=config.get("tolerance", 5.0),
        hold_ms=config.get("hold_ms", 3000),
    )
    state = None
    series_w: list[tuple[int, float]] = []
    series_h: list[tuple[int, float]] = []
    outcomes: dict[int, tasks.TrialOutcome] = {}
    for t_ms, shape in samples:
        (w, h), state, outcome = tasks.ellipse_step(cfg, shape, t_ms, state)
        series_w.append((t_ms, w))
        series_h.append((t_ms, h))
        if outcome is not None:
            outcomes[outcome.trial_index] = outcome
    trials = []
    for i, (tw, th) in enumerate(cfg.targets):
        outcome = outcomes.get(i)
        hold_w = hold_h = None
        if outcome is not None:
            ww = _hold_window(series_w, outcome, cfg.hold_ms)
            wh = _hold_window(series_h, outcome, cfg.hold_ms)
            if len(ww) >= 2:
                hold_w = tasks.analyze_hold(ww, tw).to_json()
                hold_h = tasks.analyze_hold(wh, th).to_json()
        trials.append({
            "trial": i,
            "target": [tw, th],
            "succeeded": outcome is not None,
            "t_success_ms": outcome.t_success_ms if outcome else None,
            "hold_w": hold_w,
            "hold_h": hold_h,
        })
    return {"task": "ellipse", "trials": trials}


def _run_tapping(config: dict, lines: list[dict]) -> dict:
    cfg = tasks.TappingTaskConfig(
        n_targets=config.get("n_targets", 9),
        distance=config.get("D", 400.0),
        width=config.get("W", 50.0),
        timeout_ms=config.get("timeout_ms", 10000),
        center=tuple(config.get("center", (320.0, 240.0))),
    )
    task = tasks.TappingTask(config=cfg)
    cursor = None
    started = False
    for line in lines:
        if line.get("type") == "features":
            t_ms = int(line["t_ms"])
            if not started:
                task.start_ms = t_ms
                started = True
            else:
                task.tick(t_ms)
            if line.get("cursor"):
                cursor = tuple(line["cursor"])
        elif line.get("type") == "app_event" and line.get("kind") == "click":
            if cursor is None:
                raise ValueError("click before any cursor sample in replay log")
            task.click(cursor, int(line["t_ms"]))
    if not task.records:
        raise ValueError("replay log produced no tapping records")
    report = {
        "task": "tapping",
        "order": tasks.tapping_sequence(cfg.n_targets),
        "records": [r.to_json() for r in task.records],
    }
    if any(r.hit for r in task.records):
        report["throughput"] = tasks.throughput(task.records).to_json()
    return report


def _cmd_fitts(args) -> int:
    records = []
    for line in _read_log_lines(args.log):
        if line.get("type") == "app_event" and line.get("kind") != "trial_outcome":
            continue
        if line.get("type") not in (None, "app_event"):
            continue
        if not all(k in line for k in ("D", "W", "MT", "hit")):
            if line.get("type") is None:
                raise ValueError(f"record missing D/W/MT/hit fields: {line}")
            continue
        records.append(tasks.FittsRecord.from_json(line))
    if not records:
        raise ValueError("no trial records in log")
    report = tasks.throughput(records).to_json()
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(args.report)
    return 0


def _cmd_text_simulate(args) -> int:
    events = _read_log_lines(args.events)
    if args.layout == "jp":
        entry = textentry.simulate_kana(events)
    else:
        entry = textentry.simulate_roman(events)
    Path(args.out).write_text(entry.transcript, encoding="utf-8")
    metrics = {
        "characters": len(entry.transcript),
        "key_presses": sum(1 for e in events if e.get("key") is not None),
        "kspc": textentry.kspc(entry) if entry.transcript else None,
    }
    try:
        metrics["wpm"] = textentry.entry_speed(entry)
    except ValueError:
        metrics["wpm"] = None
    Path(args.metrics).write_text(json.dumps(metrics, indent=2) + "\n")
    print(args.out)
    return 0


def _parse_listen(listen: str) -> tuple[str, int]:
    host, sep, port = listen.rpartition(":")
    if not sep or not port.isdigit():
        raise CliUsageError(f"--listen expects host:port, got {listen!r}")
    return host or "127.0.0.1", int(port)


def _cmd_serve(args) -> int:
    host, port = _parse_listen(args.listen)
    default_config = None
    if args.config:
        default_config = _load_json(args.config)
        SessionConfig.from_json(default_config)  # fail fast on a bad default
    try:
        asyncio.run(serve_forever(host, port, use_websocket=args.ws, default_config=default_config))
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
