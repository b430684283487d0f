import asyncio
import base64
import json
import math

import numpy as np
import pytest

from facegest.frameio import Frame, write_pnm
from facegest.gateway.cli import main as cli_main
from facegest.gateway.replay import run_replay
from facegest.gateway.server import READ_LIMIT, start_tcp_server
from facegest.gateway.session import Session, encode_message
from facegest.synth import (
    face_frame,
    mouth_frame,
    mouth_sequence,
    nostril_sequence,
    write_sequence,
)
from facegest.tasks import TappingTaskConfig, fitts_id, tapping_sequence


def frame_msg(frame, seq, t_ms):
    return {
        "type": "frame",
        "seq": seq,
        "encoding": "pnm-base64",
        "data": base64.b64encode(write_pnm(frame)).decode(),
        "t_ms": t_ms,
    }


def white_frame(w=32, h=24):
    return Frame.from_array(np.full((h, w), 255, dtype=np.uint8))


FIXED_CFG = {"tracker": "fixed_roi", "application": "none"}


class TestSessionProtocol:
    def test_white_frame_yields_empty_features(self):
        session = Session()
        assert session.handle_message({"type": "hello", "config": FIXED_CFG}) == []
        out = session.handle_message(frame_msg(white_frame(), 0, 0))
        assert len(out) == 1
        rec = out[0]
        assert rec["type"] == "features"
        assert rec["empty"] is True and rec["area"] == 0
        assert rec["seq"] == 0 and rec["t_ms"] == 0

    def test_nf_session_tracks_synthetic_pair(self):
        frames, _ = nostril_sequence(5, velocity=(1.0, 0.0))
        session = Session()
        session.handle_message({"type": "hello", "config": {"tracker": "nf"}})
        records = []
        for i, frame in enumerate(frames):
            out = session.handle_message(frame_msg(frame, i, i * 40))
            records.extend(r for r in out if r["type"] == "features")
        assert len(records) == 5
        assert all(r["lost"] is False for r in records)
        assert all(r["nostrils"] is not None for r in records)

    def test_malformed_json_keeps_session_alive(self):
        session = Session()
        session.handle_message({"type": "hello", "config": FIXED_CFG})
        out = session.handle_line("{not json")
        assert out[0]["type"] == "error"
        ok = session.handle_message(frame_msg(white_frame(), 0, 0))
        assert ok[0]["type"] == "features"

    def test_frame_decode_error_names_seq(self):
        session = Session()
        session.handle_message({"type": "hello", "config": FIXED_CFG})
        bad = {"type": "frame", "seq": 7, "encoding": "pnm-base64",
               "data": base64.b64encode(b"P5 notaframe").decode()}
        out = session.handle_message(bad)
        assert out[0]["type"] == "error" and out[0]["seq"] == 7

    def test_seq_must_increase(self):
        session = Session()
        session.handle_message({"type": "hello", "config": FIXED_CFG})
        session.handle_message(frame_msg(white_frame(), 3, 0))
        out = session.handle_message(frame_msg(white_frame(), 3, 40))
        assert out[0]["type"] == "error"

    def test_frame_before_hello_rejected(self):
        session = Session()
        out = session.handle_message(frame_msg(white_frame(), 0, 0))
        assert out[0]["type"] == "error"

    def test_bad_config_reported(self):
        session = Session()
        out = session.handle_message({"type": "hello", "config": {"tracker": "np"}})
        assert out[0]["type"] == "error" and "np_eyes" in out[0]["message"]

    def test_text_app_requires_calibration(self):
        session = Session()
        out = session.handle_message(
            {"type": "hello", "config": {"tracker": "fixed_roi", "application": "text_roman"}}
        )
        assert out[0]["type"] == "error" and "calibration" in out[0]["message"]

    def test_end_is_silent(self):
        session = Session()
        assert session.handle_message({"type": "end"}) == []
        assert session.ended

    def test_default_config_backs_bare_hello(self):
        session = Session(default_config=dict(FIXED_CFG))
        assert session.handle_message({"type": "hello"}) == []
        out = session.handle_message(frame_msg(white_frame(), 0, 0))
        assert out[0]["type"] == "features"

    def test_pipeline_failure_stays_in_session(self):
        # eye templates would extend outside this tiny frame
        config = {"tracker": "np", "np_eyes": {"left": [2, 2], "right": [28, 2]}}
        session = Session()
        assert session.handle_message({"type": "hello", "config": config}) == []
        out = session.handle_message(frame_msg(white_frame(32, 24), 0, 0))
        assert out[0]["type"] == "error" and out[0]["seq"] == 0
        out = session.handle_message({"type": "event", "kind": "click", "t_ms": "soon"})
        assert out[0]["type"] == "error"


class TestTextSessions:
    def roman_config(self):
        return {
            "tracker": "fixed_roi",
            "application": "text_roman",
            "calibration": {"source": "inline", "max_area": 1000.0},
        }

    def test_pucker_key7_selects_s(self):
        session = Session()
        session.handle_message({"type": "hello", "config": self.roman_config()})
        # tall narrow opening: pucker (norm area ~0.5, aspect < 0.9)
        frame = mouth_frame(64, 64, semi_axes=(8.0, 20.0))
        out = session.handle_message(frame_msg(frame, 0, 0))
        assert out[0]["mouth_state"] == "Pucker"
        events = session.handle_message({"type": "event", "kind": "key", "key": "7", "t_ms": 50})
        assert events == [{
            "type": "app_event", "kind": "letter", "letter": "s",
            "transcript": "s", "t_ms": 50,
        }]

    def test_rejected_pucker_on_three_letter_key_is_silent(self):
        session = Session()
        session.handle_message({"type": "hello", "config": self.roman_config()})
        frame = mouth_frame(64, 64, semi_axes=(8.0, 20.0))
        session.handle_message(frame_msg(frame, 0, 0))
        events = session.handle_message({"type": "event", "kind": "key", "key": "2", "t_ms": 50})
        assert events == []

    def test_live_window_calibration_activates_quantizer(self):
        config = {
            "tracker": "fixed_roi",
            "application": "text_roman",
            "calibration": {"source": "live_window", "frames": 3},
        }
        session = Session()
        assert session.handle_message({"type": "hello", "config": config}) == []
        frames = [mouth_frame(64, 64, semi_axes=(14.0 + i, 9.0 + i)) for i in range(4)]
        states = []
        for i, frame in enumerate(frames):
            out = session.handle_message(frame_msg(frame, i, i * 40))
            states.append(out[0]["mouth_state"])
        assert states[:2] == [None, None]       # still collecting
        assert states[3] is not None            # calibrated after the window

    def test_live_window_with_empty_shapes_reports_error(self):
        config = {
            "tracker": "fixed_roi",
            "application": "text_roman",
            "calibration": {"source": "live_window", "frames": 2},
        }
        session = Session()
        session.handle_message({"type": "hello", "config": config})
        session.handle_message(frame_msg(white_frame(), 0, 0))
        out = session.handle_message(frame_msg(white_frame(), 1, 40))
        kinds = [m["type"] for m in out]
        assert kinds == ["error", "features"] or kinds == ["features", "error"]

    def test_file_calibration_source(self, tmp_path):
        calib_path = tmp_path / "calib.json"
        calib_path.write_text(json.dumps({"max_area": 1000.0}))
        config = {
            "tracker": "fixed_roi",
            "application": "text_roman",
            "calibration": {"source": "file", "path": str(calib_path)},
        }
        session = Session()
        assert session.handle_message({"type": "hello", "config": config}) == []
        out = session.handle_message(frame_msg(mouth_frame(64, 64, semi_axes=(8.0, 20.0)), 0, 0))
        assert out[0]["mouth_state"] == "Pucker"

    def test_replay_merges_key_events(self, tmp_path):
        frames = [mouth_frame(64, 64, semi_axes=(8.0, 20.0)) for _ in range(4)]
        seq_dir = write_sequence(tmp_path / "roman", frames, period_ms=40)
        config = {
            "tracker": "fixed_roi",
            "application": "text_roman",
            "calibration": {"source": "inline", "max_area": 1000.0},
            "events": [
                {"kind": "key", "key": "7", "t_ms": 50},
                {"kind": "key", "key": "9", "t_ms": 90},
            ],
        }
        log = run_replay(seq_dir, config, tmp_path / "roman.jsonl")
        letters = [
            json.loads(l)["letter"]
            for l in log.read_text().splitlines()
            if json.loads(l).get("kind") == "letter"
        ]
        assert letters == ["s", "z"]  # pucker selects the fourth letter

    def test_kana_session_composes(self):
        config = {
            "tracker": "fixed_roi",
            "application": "text_jp",
            "calibration": {"source": "inline", "max_area": 1000.0},
        }
        session = Session()
        session.handle_message({"type": "hello", "config": config})
        # wide open mouth: vowel A (norm_area ~0.9 with these axes, aspect ~1.3)
        wide = mouth_frame(96, 96, semi_axes=(19.0, 15.0))
        out = session.handle_message(frame_msg(wide, 0, 0))
        assert out[0]["vowel"] == "A"
        events = session.handle_message({"type": "event", "kind": "key", "key": "2", "t_ms": 10})
        assert events[0]["kind"] == "kana" and events[0]["text"] == "か"


class TestTappingSession:
    def build_messages(self):
        cfg = TappingTaskConfig(n_targets=3, distance=100.0, width=50.0, center=(320.0, 240.0))
        order = tapping_sequence(3)
        ref = (160.0, 130.0)
        messages = []
        seq = 0
        t = 0
        nose_positions = [ref]  # frame 0 establishes the reference
        clicks = []
        for idx in order:
            cx, cy = cfg.target_center(idx)
            # gain 4: small nose motions stay inside the between-the-eyes region
            nose = (round(ref[0] + (cx - 320.0) / 4.0), round(ref[1] + (cy - 240.0) / 4.0))
            for _ in range(5):
                nose_positions.append(nose)
        frames = [face_frame(nose=(int(x), int(y)), nose_radius=0.5) for x, y in nose_positions]
        for frame in frames:
            messages.append(frame_msg(frame, seq, t))
            seq += 1
            t += 40
            if seq in (6, 11, 16):
                messages.append({"type": "event", "kind": "click", "t_ms": t - 20})
        return messages

    def config(self):
        return {
            "tracker": "np",
            "application": "tapping",
            "np_eyes": {"left": [120, 80], "right": [200, 80]},
            "cursor": {"gain": 4.0, "screen": [640, 480]},
            "app_config": {"n_targets": 3, "D": 100.0, "W": 50.0},
        }

    def test_three_targets_hit_in_order(self):
        session = Session()
        assert session.handle_message({"type": "hello", "config": self.config()}) == []
        outcomes = []
        targets = []
        for msg in self.build_messages():
            for resp in session.handle_message(msg):
                if resp["type"] == "app_event" and resp["kind"] == "trial_outcome":
                    outcomes.append(resp)
                if resp["type"] == "app_event" and resp["kind"] == "target":
                    targets.append(resp["index"])
        assert [o["hit"] for o in outcomes] == [True, True, True]
        assert targets == [0, 2, 1]  # tapping_sequence(3)
        assert all(o["D"] == 100.0 and o["W"] == 50.0 for o in outcomes)


def mouth_demo_dir(tmp_path, name="seq"):
    axes = [(10.0 + 2.0 * i, 6.0 + 1.2 * i) for i in range(8)] + [(26.0, 15.6)] * 10
    frames = mouth_sequence(axes, width=96, height=96)
    return write_sequence(tmp_path / name, frames, period_ms=40)


class TestReplay:
    def test_replay_twice_is_byte_identical(self, tmp_path):
        seq_dir = mouth_demo_dir(tmp_path)
        out1 = run_replay(seq_dir, dict(FIXED_CFG), tmp_path / "log1.jsonl")
        out2 = run_replay(seq_dir, dict(FIXED_CFG), tmp_path / "log2.jsonl")
        b1, b2 = out1.read_bytes(), out2.read_bytes()
        assert b1 == b2
        assert len(b1.splitlines()) == 18

    def test_empty_manifest_empty_log(self, tmp_path):
        seq_dir = tmp_path / "empty"
        seq_dir.mkdir()
        (seq_dir / "manifest.json").write_text(json.dumps({"frames": []}))
        out = run_replay(seq_dir, dict(FIXED_CFG), tmp_path / "log.jsonl")
        assert out.read_text() == ""

    def test_missing_frame_aborts_with_name(self, tmp_path):
        seq_dir = tmp_path / "broken"
        seq_dir.mkdir()
        (seq_dir / "manifest.json").write_text(
            json.dumps({"frames": [{"file": "nope.pnm", "t_ms": 0}]})
        )
        with pytest.raises(FileNotFoundError) as err:
            run_replay(seq_dir, dict(FIXED_CFG), tmp_path / "log.jsonl")
        assert "nope.pnm" in str(err.value)

    def test_log_reparse_reserialize_identity(self, tmp_path):
        seq_dir = mouth_demo_dir(tmp_path)
        log = run_replay(seq_dir, dict(FIXED_CFG), tmp_path / "log.jsonl")
        for line in log.read_text(encoding="utf-8").splitlines():
            assert encode_message(json.loads(line)) == line

    def test_nf_replay_matches_direct_session(self, tmp_path):
        frames, _ = nostril_sequence(6, velocity=(2.0, 0.0))
        seq_dir = write_sequence(tmp_path / "nf", frames, period_ms=40)
        log = run_replay(seq_dir, {"tracker": "nf"}, tmp_path / "log.jsonl")
        lines = [json.loads(l) for l in log.read_text().splitlines()]
        session = Session()
        session.handle_message({"type": "hello", "config": {"tracker": "nf"}})
        direct = []
        for i, frame in enumerate(frames):
            direct.extend(session.process_frame(i, i * 40, frame))
        assert lines == direct


class TestServeMatchesReplay:
    def run_serve(self, messages):
        async def scenario():
            server = await start_tcp_server("127.0.0.1", 0)
            port = server.sockets[0].getsockname()[1]
            reader, writer = await asyncio.open_connection("127.0.0.1", port, limit=READ_LIMIT)
            for msg in messages:
                writer.write((encode_message(msg) + "\n").encode())
            await writer.drain()
            lines = []
            while True:
                line = await reader.readline()
                if not line:
                    break
                lines.append(line.decode().rstrip("\n"))
            writer.close()
            await writer.wait_closed()
            server.close()
            await server.wait_closed()
            return lines

        return asyncio.run(scenario())

    @pytest.mark.parametrize("scenario", ["mouth_fixed", "nostrils_nf"])
    def test_cross_path_equivalence(self, tmp_path, scenario):
        if scenario == "mouth_fixed":
            seq_dir = mouth_demo_dir(tmp_path)
            config = dict(FIXED_CFG)
        else:
            frames, _ = nostril_sequence(8, velocity=(2.0, 0.5), roll_per_frame_deg=0.5)
            seq_dir = write_sequence(tmp_path / "nf", frames, period_ms=40)
            config = {"tracker": "nf"}
        replay_log = run_replay(seq_dir, dict(config), tmp_path / "replay.jsonl")
        manifest = json.loads((seq_dir / "manifest.json").read_text())
        messages = [{"type": "hello", "config": dict(config)}]
        for seq, entry in enumerate(manifest["frames"]):
            data = (seq_dir / entry["file"]).read_bytes()
            messages.append({
                "type": "frame", "seq": seq, "encoding": "pnm-base64",
                "data": base64.b64encode(data).decode(), "t_ms": entry["t_ms"],
            })
        messages.append({"type": "end"})
        served_lines = self.run_serve(messages)
        assert served_lines == replay_log.read_text().splitlines()


class TestWebSocketFraming:
    def test_ws_session_matches_tcp(self, tmp_path):
        websockets = pytest.importorskip("websockets")
        from facegest.gateway.server import _serve_ws_forever

        seq_dir = mouth_demo_dir(tmp_path)
        replay_log = run_replay(seq_dir, dict(FIXED_CFG), tmp_path / "replay.jsonl")
        manifest = json.loads((seq_dir / "manifest.json").read_text())

        async def scenario():
            server_task = asyncio.create_task(_serve_ws_forever("127.0.0.1", 18631))
            await asyncio.sleep(0.3)
            lines = []
            try:
                async with websockets.connect("ws://127.0.0.1:18631", max_size=READ_LIMIT) as ws:
                    await ws.send(encode_message({"type": "hello", "config": dict(FIXED_CFG)}))
                    for seq, entry in enumerate(manifest["frames"]):
                        data = (seq_dir / entry["file"]).read_bytes()
                        await ws.send(encode_message({
                            "type": "frame", "seq": seq, "encoding": "pnm-base64",
                            "data": base64.b64encode(data).decode(), "t_ms": entry["t_ms"],
                        }))
                    for _ in range(len(manifest["frames"])):
                        lines.append(await ws.recv())
                    await ws.send(encode_message({"type": "end"}))
            finally:
                server_task.cancel()
            return lines

        lines = asyncio.run(scenario())
        assert lines == replay_log.read_text().splitlines()


class TestCli:
    def test_segment_known_square(self, tmp_path, capsys):
        canvas = np.full((14, 14), 255, dtype=np.uint8)
        canvas[2:12, 2:12] = 0
        path = tmp_path / "square.pnm"
        path.write_bytes(write_pnm(Frame.from_array(canvas)))
        assert cli_main(["segment", str(path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["area"] == 100.0
        assert out["bbox_w"] == 10.0

    def test_segment_bad_file_data_error(self, tmp_path):
        path = tmp_path / "bad.pnm"
        path.write_bytes(b"not a pnm")
        assert cli_main(["segment", str(path)]) == 2

    def test_unknown_flag_usage_error(self, capsys):
        assert cli_main(["fitts", "--bogus", "x"]) == 1
        err = capsys.readouterr().err
        assert "usage" in err and "--log" in err

    def test_fitts_constructed_inverse(self, tmp_path, capsys):
        ident = fitts_id(512.0, 32.0)
        log = tmp_path / "trials.jsonl"
        log.write_text(
            "".join(
                json.dumps({"D": 512.0, "W": 32.0, "MT": ident / 2.0, "hit": True}) + "\n"
                for _ in range(9)
            )
        )
        report_path = tmp_path / "tp.json"
        assert cli_main(["fitts", "--log", str(log), "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert report["throughput"] == pytest.approx(2.0, abs=1e-9)
        assert report["completion"] == [True] * 9

    def test_text_simulate_gojuon_fixture(self, tmp_path):
        from facegest.textentry import BASE_KANA, mouthtype_events_for_text

        events_path = tmp_path / "events.jsonl"
        events = mouthtype_events_for_text("".join(BASE_KANA))
        events_path.write_text("".join(json.dumps(e) + "\n" for e in events))
        out_path = tmp_path / "transcript.txt"
        metrics_path = tmp_path / "metrics.json"
        code = cli_main([
            "text", "simulate", "--layout", "jp",
            "--events", str(events_path),
            "--out", str(out_path), "--metrics", str(metrics_path),
        ])
        assert code == 0
        assert out_path.read_text(encoding="utf-8") == "".join(BASE_KANA)
        metrics = json.loads(metrics_path.read_text())
        assert metrics["kspc"] == 1.0
        assert metrics["characters"] == 45

    def test_track_and_task_circle(self, tmp_path):
        seq_dir = mouth_demo_dir(tmp_path)
        log_path = tmp_path / "log.jsonl"
        assert cli_main([
            "track", str(seq_dir), "--tracker", "fixed", "--out", str(log_path)
        ]) == 0
        # steady-state radius from the final constant frames
        lines = [json.loads(l) for l in log_path.read_text().splitlines()]
        steady = [l for l in lines if l["type"] == "features"][-1]
        target = math.sqrt(steady["area"])
        cfg_path = tmp_path / "circle.json"
        cfg_path.write_text(json.dumps({
            "gain": 1.0, "targets": [target], "tolerance": 2.0, "hold_ms": 200,
        }))
        report_path = tmp_path / "report.json"
        assert cli_main([
            "task", "circle", "--replay", str(log_path),
            "--config", str(cfg_path), "--report", str(report_path),
        ]) == 0
        report = json.loads(report_path.read_text())
        assert report["trials"][0]["succeeded"] is True
        assert report["trials"][0]["hold"]["snr_db"] > 20

    def test_missing_subcommand_usage_error(self, capsys):
        assert cli_main([]) == 1

    def test_circle_gain_sweep_rows(self, tmp_path):
        seq_dir = mouth_demo_dir(tmp_path)
        log_path = tmp_path / "log.jsonl"
        assert cli_main(["track", str(seq_dir), "--tracker", "fixed", "--out", str(log_path)]) == 0
        cfg_path = tmp_path / "circle.json"
        cfg_path.write_text(json.dumps({
            "gain": 1.0, "targets": [20.0, 30.0], "tolerance": 2.0, "hold_ms": 200,
            "gains": [1.0, 2.0],
        }))
        report_path = tmp_path / "report.json"
        assert cli_main([
            "task", "circle", "--replay", str(log_path),
            "--config", str(cfg_path), "--report", str(report_path),
        ]) == 0
        report = json.loads(report_path.read_text())
        assert len(report["sweep"]) == 4  # 2 gains x 2 targets
        by_gain = {}
        for row in report["sweep"]:
            by_gain.setdefault(row["gain"], []).append(row["precision"])
        assert by_gain[2.0][0] == 2.0 * by_gain[1.0][0]

    def test_task_ellipse_replay(self, tmp_path):
        lines = []
        for i in range(20):
            w, h = (40.0, 20.0) if i >= 5 else (10.0 + 6.0 * i, 5.0 + 3.0 * i)
            shape = {
                "area": w * h, "bbox_w": w, "bbox_h": h, "aspect_ratio": w / h,
                "centroid": [0.0, 0.0], "mu20": 0.0, "mu02": 0.0, "mu11": 0.0,
                "principal_angle": 0.0, "lambda1": 0.0, "lambda2": 0.0, "empty": False,
            }
            lines.append(json.dumps({"type": "features", "seq": i, "t_ms": i * 100, **shape}))
        log_path = tmp_path / "ellipse.jsonl"
        log_path.write_text("".join(l + "\n" for l in lines))
        cfg_path = tmp_path / "ellipse.json"
        cfg_path.write_text(json.dumps({
            "gain_w": 1.0, "gain_h": 1.0, "targets": [[40.0, 20.0]],
            "tolerance": 1.0, "hold_ms": 300,
        }))
        report_path = tmp_path / "report.json"
        assert cli_main([
            "task", "ellipse", "--replay", str(log_path),
            "--config", str(cfg_path), "--report", str(report_path),
        ]) == 0
        report = json.loads(report_path.read_text())
        trial = report["trials"][0]
        assert trial["succeeded"] is True
        assert trial["t_success_ms"] == 500 + 300  # entered tolerance at t=500
        assert trial["hold_w"]["accuracy"] == 0.0
        assert trial["hold_h"]["precision"] == 0.0

    def test_tapping_cli_path_matches_session_outcomes(self, tmp_path):
        from facegest.synth import demo_tapping_dir

        fixture = demo_tapping_dir(tmp_path / "tap")
        log_path = tmp_path / "tap.jsonl"
        assert cli_main([
            "track", str(fixture), "--tracker", "np",
            "--out", str(log_path), "--config", str(fixture / "session.json"),
        ]) == 0
        report_path = tmp_path / "tap-report.json"
        assert cli_main([
            "task", "tapping", "--replay", str(log_path),
            "--config", str(fixture / "task.json"), "--report", str(report_path),
        ]) == 0
        report = json.loads(report_path.read_text())
        log_outcomes = [
            {"D": l["D"], "W": l["W"], "MT": l["MT"], "hit": l["hit"]}
            for l in (json.loads(x) for x in log_path.read_text().splitlines())
            if l.get("kind") == "trial_outcome"
        ]
        assert report["records"] == log_outcomes
        assert report["order"] == [0, 5, 1, 6, 2, 7, 3, 8, 4]
        assert all(r["hit"] for r in report["records"])
        fitts_path = tmp_path / "tap-fitts.json"
        assert cli_main(["fitts", "--log", str(log_path), "--report", str(fitts_path)]) == 0
        assert json.loads(fitts_path.read_text())["throughput"] > 0

    def test_sample_configs_parse(self):
        from pathlib import Path

        from facegest.gateway.session import SessionConfig

        config_dir = Path(__file__).parent.parent / "configs"
        paths = sorted(config_dir.glob("*.json"))
        assert len(paths) >= 3
        for path in paths:
            SessionConfig.from_json(json.loads(path.read_text()))

    def test_np_eyes_from_manifest_annotation(self, tmp_path):
        from facegest.synth import face_frame

        frames = [face_frame(nose=(160, 130), nose_radius=0.5) for _ in range(3)]
        seq_dir = write_sequence(
            tmp_path / "np", frames, period_ms=40,
            annotations={"np_eyes": {"left": [120, 80], "right": [200, 80]}},
        )
        log_path = tmp_path / "np.jsonl"
        assert cli_main(["track", str(seq_dir), "--tracker", "np", "--out", str(log_path)]) == 0
        lines = [json.loads(l) for l in log_path.read_text().splitlines()]
        features = [l for l in lines if l["type"] == "features"]
        assert len(features) == 3
        assert all(f["nose"] == [160.0, 130.0] for f in features)
        assert all(not f["lost"] for f in features)
