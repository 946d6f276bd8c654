import struct
from pathlib import Path

import pytest

from evmelt import cli, codec
from evmelt.config import ConfigError, load_config, parse_config_text


class TestConfig:
    def test_defaults_when_no_file(self):
        cfg = load_config(None, {})
        assert cfg["geometry.width"] == 128
        assert cfg["scene.kind"] == "meltpool"

    def test_parse_types_and_comments(self):
        cfg = parse_config_text(
            "# comment\nseed = 3\nscene.fps = 250.5\nscene.kind = ramp  # trailing\n"
        )
        assert cfg == {"seed": 3, "scene.fps": 250.5, "scene.kind": "ramp"}

    def test_parse_error_has_line_number(self):
        with pytest.raises(ConfigError, match=":2:"):
            parse_config_text("seed = 1\nnot a pair\n", source="f")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            load_config(None, {"sensor.gamma": "1.0"})

    def test_scene_keys_are_open(self):
        cfg = load_config(None, {"scene.slope_log_per_s": "2.0"})
        assert cfg["scene.slope_log_per_s"] == 2.0

    def test_file_then_override_precedence(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("seed = 5\ngeometry.width = 32\n")
        cfg = load_config(f, {"seed": "9"})
        assert cfg["seed"] == 9
        assert cfg["geometry.width"] == 32

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.cfg", {})


def run_cli(*argv):
    return cli.run(list(argv))


SMALL = ("--set", "geometry.width=32", "--set", "geometry.height=24",
         "--set", "scene.duration_us=20000", "--set", "scene.fps=500")


class TestExitCodes:
    def test_bad_set_syntax_is_config_error(self, tmp_path, capsys):
        assert run_cli("simulate", "--out", str(tmp_path), "--set", "seed") == 2
        assert "config" in capsys.readouterr().err

    def test_unknown_key_is_config_error(self, tmp_path):
        assert run_cli("simulate", "--out", str(tmp_path), "--set", "nope.x=1") == 2

    def test_bad_scene_parameter_is_validation_error(self, tmp_path, capsys):
        code = run_cli(
            "simulate", "--out", str(tmp_path), "--set", "scene.kind=lava_lamp", *SMALL
        )
        assert code == 3
        assert "validation" in capsys.readouterr().err

    def test_corrupt_input_stream_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.evt1"
        bad.write_bytes(b"NOPE" + bytes(21))
        code = run_cli(
            "stats", "--out", str(tmp_path / "out"),
            "--set", f"io.events={bad}",
        )
        assert code == 3

    def test_missing_input_stream_is_io_error(self, tmp_path, capsys):
        code = run_cli(
            "stats", "--out", str(tmp_path / "out"),
            "--set", f"io.events={tmp_path / 'absent.evt1'}",
        )
        assert code == 4
        assert "io" in capsys.readouterr().err


class TestSimulate:
    def test_constant_scene_writes_empty_container(self, tmp_path, capsys):
        code = run_cli(
            "simulate", "--out", str(tmp_path),
            "--set", "scene.kind=constant", *SMALL,
        )
        assert code == 0
        blob = (tmp_path / "events.evt1").read_bytes()
        assert len(blob) == codec.HEADER_SIZE
        assert struct.unpack_from("<Q", blob, 17)[0] == 0
        assert "events.evt1" in capsys.readouterr().out

    def test_step_scene_event_count(self, tmp_path):
        # exp(0.45) step with threshold 0.15 -> exactly 3 events per pixel
        code = run_cli(
            "simulate", "--out", str(tmp_path),
            "--set", "scene.kind=step", "--set", "scene.factor=1.5683121854901687",
            *SMALL,
        )
        assert code == 0
        s = codec.decode_evt1((tmp_path / "events.evt1").read_bytes())
        assert len(s) == 3 * 32 * 24

    def test_seed_flag_changes_noisy_output(self, tmp_path):
        outs = []
        for seed in (1, 2):
            out = tmp_path / f"s{seed}"
            code = run_cli(
                "simulate", "--out", str(out), "--seed", str(seed),
                "--set", "scene.kind=constant",
                "--set", "sensor.background_rate_hz=500", *SMALL,
            )
            assert code == 0
            outs.append((out / "events.evt1").read_bytes())
        assert outs[0] != outs[1]

    def test_determinism(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli("simulate", "--out", str(out), *SMALL) == 0
            blobs.append((out / "events.evt1").read_bytes())
        assert blobs[0] == blobs[1]


class TestPipelines:
    @pytest.fixture()
    def events_file(self, tmp_path):
        out = tmp_path / "sim"
        assert run_cli("simulate", "--out", str(out), *SMALL) == 0
        return out / "events.evt1"

    def test_frames_writes_pgms_and_manifest(self, tmp_path, events_file):
        out = tmp_path / "fr"
        code = run_cli(
            "frames", "--out", str(out),
            "--set", f"io.events={events_file}",
            "--set", "framing.window_us=5000", "--set", "framing.stride_us=5000",
        )
        assert code == 0
        pgms = sorted(out.glob("frame_*.pgm"))
        assert pgms
        assert pgms[0].read_bytes().startswith(b"P5\n")
        manifest = (out / "frame_manifest.txt").read_text()
        assert manifest.splitlines()[0] == "index,t_start_us,window_us,code"

    def test_coded_uses_configured_code(self, tmp_path, events_file):
        out = tmp_path / "cd"
        code = run_cli(
            "coded", "--out", str(out),
            "--set", f"io.events={events_file}",
            "--set", "framing.code=bandpass", "--set", "framing.center_freq_hz=100",
        )
        assert code == 0
        assert "bandpass" in (out / "coded_manifest.txt").read_text()

    def test_stats_outputs(self, tmp_path, events_file):
        out = tmp_path / "st"
        code = run_cli(
            "stats", "--out", str(out),
            "--set", f"io.events={events_file}",
            "--set", "analytics.bins=20", "--set", "analytics.rate_window_us=2000",
        )
        assert code == 0
        cum = (out / "cumulative.csv").read_text().strip().splitlines()
        assert cum[0] == "bin_center_us,value"
        assert float(cum[-1].split(",")[1]) == 1.0
        assert (out / "burst.txt").read_text().startswith("burst_time_us=")

    def test_footprint_report_cross_check(self, tmp_path, events_file):
        out = tmp_path / "fp"
        code = run_cli(
            "footprint", "--out", str(out),
            "--set", f"io.events={events_file}",
            "--set", "scene.duration_us=20000",
            "--set", "geometry.width=32", "--set", "geometry.height=24",
        )
        assert code == 0
        kv = dict(
            line.split("=", 1)
            for line in (out / "savings_report.kv").read_text().strip().splitlines()
        )
        n = len(codec.decode_evt1(events_file.read_bytes()))
        assert int(kv["event_bytes"]) == 25 + 8 * n
        # 0.02 s at 1000 fps -> 20 frames of 32*24 px at 3 B/px
        assert int(kv["conventional_bytes"]) == 32 * 24 * 3 * 20
        assert float(kv["raw_ratio"]) == pytest.approx(
            int(kv["conventional_bytes"]) / int(kv["event_bytes"])
        )

    def test_meltpool_outputs(self, tmp_path):
        out = tmp_path / "mp"
        code = run_cli(
            "meltpool", "--out", str(out),
            "--set", "geometry.width=48", "--set", "geometry.height=36",
            "--set", "scene.duration_us=100000", "--set", "scene.fps=1000",
        )
        assert code == 0
        series = (out / "pool_series.csv").read_text().strip().splitlines()
        assert series[0] == "t_us,area,aspect_ratio,orientation"
        assert len(series) > 1
        assert (out / "tracks.csv").read_text().startswith("track_id,t_us,cx,cy,density")
