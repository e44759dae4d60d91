import json

import numpy as np
import pytest

import fractalscan as fs

EXPECTED_METRICS_CSV = (
    "kind,direction,shift,continuity,max_adj_gap,mean_adj_gap,gl_measure\n"
    "hilbert,1,0,1.0,53,5.071428571428571,3.625\n"
    "raster,1,0,0.8888888888888888,8,4.5,50.0\n"
    "boustrophedon,1,0,1.0,15,4.5,7.0\n"
    "morton,1,0,0.5079365079365079,22,4.5,50.0\n"
)


class TestCurveCommand:
    def test_csv_depth3(self, run_cli):
        result = run_cli(
            "curve", "--kind", "hilbert", "--depth", "3", "--direction", "1",
            "--format", "csv",
        )
        assert result.returncode == 0
        lines = result.stdout.decode().splitlines()
        assert lines[0] == "index,row,col"
        assert lines[1] == "0,0,0"
        assert lines[-1] == "63,7,0"
        assert len(lines) == 65

    def test_json_echoes_shift(self, run_cli):
        result = run_cli(
            "curve", "--kind", "hilbert", "--depth", "3", "--shift", "1",
            "--format", "json",
        )
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert doc["shift"] == 1
        assert doc["kind"] == "hilbert"

    def test_svg_output(self, run_cli):
        result = run_cli("curve", "--rows", "4", "--cols", "4", "--format", "svg")
        assert result.returncode == 0
        assert result.stdout.startswith(b"<?xml")
        assert b"polyline" in result.stdout

    def test_out_file_matches_stdout(self, run_cli, tmp_path):
        target = tmp_path / "order.json"
        to_file = run_cli("curve", "--depth", "2", "--out", str(target))
        to_stdout = run_cli("curve", "--depth", "2")
        assert to_file.returncode == to_stdout.returncode == 0
        assert to_file.stdout == b""
        assert target.read_bytes() == to_stdout.stdout

    def test_invalid_direction_is_usage_error(self, run_cli):
        result = run_cli("curve", "--direction", "5")
        assert result.returncode == 2

    def test_depth_rejected_for_linear_kinds(self, run_cli):
        result = run_cli("curve", "--kind", "raster", "--depth", "3")
        assert result.returncode == 2

    def test_depth_out_of_range(self, run_cli):
        result = run_cli("curve", "--depth", "13")
        assert result.returncode == 2

    def test_unknown_flag(self, run_cli):
        result = run_cli("curve", "--bogus", "1")
        assert result.returncode == 2

    def test_shift_too_large_is_usage_error(self, run_cli):
        result = run_cli("curve", "--rows", "4", "--cols", "4", "--shift", "4")
        assert result.returncode == 2


class TestMetricsCommand:
    def test_default_four_specs(self, run_cli):
        result = run_cli("metrics")
        assert result.returncode == 0
        assert result.stdout.decode() == EXPECTED_METRICS_CSV

    def test_single_raster_row(self, run_cli):
        result = run_cli("metrics", "--spec", "raster")
        assert result.returncode == 0
        lines = result.stdout.decode().splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("raster,1,0,0.8888888888888888,")

    def test_spec_with_direction_and_shift(self, run_cli):
        result = run_cli("metrics", "--spec", "hilbert:3:1", "--format", "json")
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert doc[0]["direction"] == 3
        assert doc[0]["shift"] == 1

    def test_empty_spec_is_usage_error(self, run_cli):
        result = run_cli("metrics", "--spec", "")
        assert result.returncode == 2

    def test_unknown_kind_is_usage_error(self, run_cli):
        result = run_cli("metrics", "--spec", "peano")
        assert result.returncode == 2

    def test_direction_on_linear_kind_is_usage_error(self, run_cli):
        result = run_cli("metrics", "--spec", "raster:2")
        assert result.returncode == 2


class TestKernelCommand:
    def test_header_and_width(self, run_cli):
        result = run_cli("kernel", "--state-size", "2", "--length", "5", "--seed", "3")
        assert result.returncode == 0
        lines = result.stdout.decode().splitlines()
        assert lines[0] == "k0,k1,k2,k3,k4"
        assert len(lines) == 2
        assert len(lines[1].split(",")) == 5

    def test_values_match_library(self, run_cli):
        result = run_cli("kernel", "--state-size", "3", "--length", "4", "--seed", "1")
        row = [float(v) for v in result.stdout.decode().splitlines()[1].split(",")]
        params = fs.random_stable_params(np.random.default_rng(1), 3)
        want = fs.build_kernel(fs.discretize_zoh(params), 4)
        assert np.array_equal(np.asarray(row), want)

    def test_bad_length_is_usage_error(self, run_cli):
        result = run_cli("kernel", "--length", "0")
        assert result.returncode == 2


class TestBlockCommand:
    def test_identity_round_trip_through_files(self, run_cli, tmp_path):
        rng = np.random.default_rng(5)
        grid = fs.PatchGrid(fs.GridShape(4, 6), rng.standard_normal((4, 6, 2)))
        source = tmp_path / "grid.json"
        source.write_bytes(fs.grid_to_json(grid))
        result = run_cli(
            "block", "--in", str(source), "--param-mode", "identity",
            "--merge", "mean",
        )
        assert result.returncode == 0
        out = fs.grid_from_json(result.stdout.decode())
        assert out.shape == grid.shape
        assert np.abs(out.data - grid.data).max() <= 1e-12

    def test_generated_grid_matches_library(self, run_cli):
        result = run_cli("block", "--rows", "4", "--cols", "4", "--seed", "2")
        assert result.returncode == 0
        got = fs.grid_from_json(result.stdout.decode())
        rng = np.random.default_rng(2)
        grid = fs.PatchGrid(fs.GridShape(4, 4), rng.standard_normal((4, 4, 1)))
        want = fs.block_forward(grid, fs.BlockConfig(param_seed=2))
        assert np.array_equal(got.data, want.data)

    def test_missing_input_file_is_runtime_error(self, run_cli, tmp_path):
        result = run_cli("block", "--in", str(tmp_path / "absent.json"))
        assert result.returncode == 1
        assert b"error" in result.stderr

    def test_malformed_input_is_runtime_error(self, run_cli, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"rows": 2, "cols": 2}')
        result = run_cli("block", "--in", str(bad))
        assert result.returncode == 1


class TestVerifyCommand:
    @pytest.mark.parametrize("suite", ["curves", "ssm", "block"])
    def test_suites_pass(self, run_cli, suite):
        result = run_cli("verify", "--suite", suite)
        assert result.returncode == 0
        lines = result.stdout.decode().splitlines()
        assert all(
            line.startswith("PASS") for line in lines if not line.startswith(("{", " ", "}"))
        )

    def test_json_summary_to_file(self, run_cli, tmp_path):
        target = tmp_path / "summary.json"
        result = run_cli("verify", "--suite", "curves", "--out", str(target))
        assert result.returncode == 0
        assert result.stdout.decode().startswith("PASS ")
        doc = json.loads(target.read_text())
        assert doc["suite"] == "curves"
        assert doc["passed"] is True
        assert doc["checks"]

    def test_seeded_ssm_suite(self, run_cli):
        result = run_cli("verify", "--suite", "ssm", "--seed", "7")
        assert result.returncode == 0
        assert b"finite differences" in result.stdout

    def test_unknown_suite_is_usage_error(self, run_cli):
        result = run_cli("verify", "--suite", "everything")
        assert result.returncode == 2


class TestConfigResolution:
    def test_config_file_supplies_defaults(self, run_cli, tmp_path):
        config = tmp_path / "fs.toml"
        config.write_text('rows = 4\ncols = 4\n')
        result = run_cli("metrics", "--config", str(config), "--spec", "raster")
        assert result.returncode == 0
        assert "raster,1,0,0.8,4,2.5,10.0" in result.stdout.decode()

    def test_environment_supplies_defaults(self, run_cli):
        result = run_cli(
            "metrics", "--spec", "raster",
            env_extra={"FRACTALSCAN_ROWS": "2", "FRACTALSCAN_COLS": "2"},
        )
        assert result.returncode == 0
        assert "raster,1,0,0.6666666666666666,2,1.5,2.0" in result.stdout.decode()

    def test_flags_beat_config_beats_environment(self, run_cli, tmp_path):
        config = tmp_path / "fs.toml"
        config.write_text("rows = 4\n")
        flag_wins = run_cli(
            "metrics", "--config", str(config), "--spec", "raster",
            "--rows", "8", "--cols", "8",
            env_extra={"FRACTALSCAN_ROWS": "16"},
        )
        assert "raster,1,0,0.8888888888888888," in flag_wins.stdout.decode()
        file_wins = run_cli(
            "metrics", "--config", str(config), "--spec", "raster", "--cols", "4",
            env_extra={"FRACTALSCAN_ROWS": "16"},
        )
        assert "raster,1,0,0.8,4,2.5,10.0" in file_wins.stdout.decode()

    def test_bad_env_value_is_usage_error(self, run_cli):
        result = run_cli("curve", env_extra={"FRACTALSCAN_KIND": "bogus"})
        assert result.returncode == 2

    def test_invalid_config_file_is_usage_error(self, run_cli, tmp_path):
        config = tmp_path / "broken.toml"
        config.write_text("rows = [unclosed")
        result = run_cli("metrics", "--config", str(config))
        assert result.returncode == 2

    def test_missing_config_file_is_usage_error(self, run_cli, tmp_path):
        result = run_cli("metrics", "--config", str(tmp_path / "absent.toml"))
        assert result.returncode == 2


class TestDeterminism:
    COMMANDS = [
        ("curve", "--depth", "3", "--format", "json"),
        ("curve", "--depth", "3", "--direction", "4", "--format", "csv"),
        ("curve", "--rows", "5", "--cols", "7", "--format", "svg"),
        ("metrics",),
        ("metrics", "--spec", "hilbert:2:1", "--format", "json"),
        ("kernel", "--state-size", "4", "--length", "16", "--seed", "9"),
        ("block", "--rows", "4", "--cols", "4", "--seed", "3"),
        ("block", "--rows", "4", "--cols", "4", "--param-mode", "identity"),
        ("verify", "--suite", "curves"),
    ]

    @pytest.mark.parametrize("command", COMMANDS, ids=lambda c: " ".join(c))
    def test_byte_identical_across_runs(self, run_cli, command):
        first = run_cli(*command)
        second = run_cli(*command)
        assert first.returncode == second.returncode == 0
        assert first.stdout == second.stdout
