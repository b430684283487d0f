"""Replay driver: run a session over an on-disk frame sequence.

Semantics match the streaming server exactly (both feed the same Session),
so a replayed log and a served log over identical frames and config are
byte-identical.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from ..frameio import FrameSequence
from .session import Session, SessionConfig, SessionConfigError, encode_message

log = logging.getLogger("facegest.replay")


def run_replay(seq_dir: str | Path, config: dict, output_path: str | Path) -> Path:
    """Drive a session from a manifest and write every server message as
    one JSONL line; input events in the config merge in timestamp order,
    frames first on ties.  Missing frame files abort by name."""
    seq_dir = Path(seq_dir)
    manifest = json.loads((seq_dir / "manifest.json").read_text())
    config = _merge_manifest_annotations(dict(config), manifest)

    session = Session()
    setup = session.handle_message({"type": "hello", "config": config})
    for resp in setup:
        if resp.get("type") == "error":
            raise SessionConfigError(resp["message"])

    sequence = FrameSequence.load(seq_dir)
    events = sorted(
        (dict(e) for e in config.get("events", [])),
        key=lambda e: int(e.get("t_ms", 0)),
    )

    output_path = Path(output_path)
    lines: list[str] = []
    ev = 0
    for seq, (t_ms, frame) in enumerate(sequence.frames()):
        while ev < len(events) and int(events[ev].get("t_ms", 0)) < t_ms:
            lines.extend(_emit(session, {"type": "event", **events[ev]}))
            ev += 1
        lines.extend(encode_message(m) for m in session.process_frame(seq, t_ms, frame))
    while ev < len(events):
        lines.extend(_emit(session, {"type": "event", **events[ev]}))
        ev += 1
    session.handle_message({"type": "end"})

    output_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    log.info("replayed %d frames from %s -> %s", len(sequence), seq_dir, output_path)
    return output_path


def _emit(session: Session, msg: dict) -> list[str]:
    return [encode_message(m) for m in session.handle_message(msg)]


def _merge_manifest_annotations(config: dict, manifest: dict) -> dict:
    """Eye positions and fixed regions may ride along in the manifest."""
    if "np_eyes" in manifest and "np_eyes" not in config:
        config["np_eyes"] = manifest["np_eyes"]
    if "fixed_roi" in manifest and "fixed_roi" not in config:
        config["fixed_roi"] = manifest["fixed_roi"]
    return config
