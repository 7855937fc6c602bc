import json
from pathlib import Path

import pytest

from anywhere.cli import main
from anywhere.fixtures import make_foreground_png, write_fixture_pack

ROLE_TABLES = "\n".join(
    f'[{role}]\nbase_url = "http://localhost:9000"'
    for role in ("narrator", "thinker", "ranker", "analyzer",
                 "segmenter", "template_generator", "inpainter", "refiner")
)


@pytest.fixture
def input_png(tmp_path):
    path = tmp_path / "fg.png"
    path.write_bytes(make_foreground_png(0))
    return path


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text("resolution = 64\n")
    return path


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRunCommand:
    def test_mock_accept_exits_zero(self, tmp_path, input_png, small_config, capsys):
        code, out, _ = run_cli(
            capsys, "run", "--input", str(input_png), "--mock",
            "--config", str(small_config),
            "--out", str(tmp_path / "runs"), "--seed", "7",
        )
        assert code == 0
        assert "run_id " in out
        assert "termination accepted" in out

    def test_always_fail_exits_two(self, tmp_path, input_png, small_config, capsys):
        code, out, _ = run_cli(
            capsys, "run", "--input", str(input_png), "--mock",
            "--config", str(small_config),
            "--out", str(tmp_path / "runs"), "--seed", "7",
            "--analyzer-policy", "always_fail",
        )
        assert code == 2
        assert "termination exhausted" in out

    def test_missing_config_without_mock_is_usage_error(self, input_png, capsys,
                                                        monkeypatch):
        monkeypatch.delenv("ANYWHERE_CONFIG", raising=False)
        code, _, err = run_cli(capsys, "run", "--input", str(input_png))
        assert code == 64
        assert "usage error" in err

    def test_unknown_option_is_usage_error(self, input_png, capsys):
        code, _, _ = run_cli(capsys, "run", "--input", str(input_png),
                             "--mock", "--bogus")
        assert code == 64

    def test_replay_byte_identical(self, tmp_path, input_png, small_config, capsys):
        for sub in ("a", "b"):
            code, _, _ = run_cli(
                capsys, "run", "--input", str(input_png), "--mock",
                "--config", str(small_config),
                "--out", str(tmp_path / sub), "--seed", "11",
                "--analyzer-policy", "pass_on_call", "--analyzer-k", "2",
            )
            assert code == 0
        run_id = next((tmp_path / "a").iterdir()).name
        a = (tmp_path / "a" / run_id / "report.json").read_bytes()
        b = (tmp_path / "b" / run_id / "report.json").read_bytes()
        assert a == b

    def test_env_var_config_fallback(self, tmp_path, input_png, capsys, monkeypatch):
        config = tmp_path / "cfg.toml"
        config.write_text("resolution = 64\n")
        monkeypatch.setenv("ANYWHERE_CONFIG", str(config))
        code, _, _ = run_cli(capsys, "run", "--input", str(input_png), "--mock",
                             "--out", str(tmp_path / "runs"))
        assert code == 0
        run_dir = next((tmp_path / "runs").iterdir())
        report = json.loads((run_dir / "report.json").read_text())
        assert report["termination"] == "accepted"


class TestValidateConfigCommand:
    def test_valid_file(self, tmp_path, capsys):
        path = tmp_path / "cfg.toml"
        path.write_text(ROLE_TABLES)
        code, out, _ = run_cli(capsys, "validate-config", "--config", str(path))
        assert code == 0
        assert "config ok" in out

    def test_invalid_field_exits_one(self, tmp_path, capsys):
        path = tmp_path / "cfg.toml"
        path.write_text("tau = 1.5\n" + ROLE_TABLES)
        code, _, err = run_cli(capsys, "validate-config", "--config", str(path))
        assert code == 1
        assert "tau" in err

    def test_missing_file_usage_error(self, tmp_path, capsys):
        code, _, _ = run_cli(capsys, "validate-config", "--config",
                             str(tmp_path / "nope.toml"))
        assert code == 64


class TestInspectCommand:
    def test_table_for_real_report(self, tmp_path, input_png, small_config, capsys):
        run_cli(capsys, "run", "--input", str(input_png), "--mock",
                "--config", str(small_config),
                "--out", str(tmp_path / "runs"), "--seed", "7",
                "--analyzer-policy", "pass_on_call", "--analyzer-k", "2")
        report = next(Path(tmp_path / "runs").rglob("report.json"))
        code, out, _ = run_cli(capsys, "inspect", "--report", str(report))
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("iter")
        assert len(lines) == 2 + 2  # header, two iterations, footer
        assert "termination accepted" in lines[-1]

    def test_malformed_report_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "report.json"
        bad.write_text('{"not": "a report"}')
        code, _, err = run_cli(capsys, "inspect", "--report", str(bad))
        assert code == 1
        assert "malformed report" in err


class TestSelftestCommand:
    def test_deterministic_and_green(self, tmp_path, capsys):
        code, out, _ = run_cli(capsys, "selftest", "--out", str(tmp_path / "st"))
        assert code == 0
        assert "deterministic yes" in out
        assert "termination accepted" in out


class TestBatchCommand:
    def test_summary_and_exit_code(self, tmp_path, small_config, capsys):
        fixture_dir = tmp_path / "inputs"
        fixture_dir.mkdir()
        write_fixture_pack(fixture_dir, count=3)
        code, out, _ = run_cli(
            capsys, "batch", "--input-dir", str(fixture_dir), "--mock",
            "--config", str(small_config),
            "--out", str(tmp_path / "runs"), "--seed", "5",
            "--runs-per-input", "2",
        )
        assert code == 0
        summary = json.loads((tmp_path / "runs" / "summary.json").read_text())
        assert summary["total_runs"] == 6
        assert summary["errors"] == 0
        assert "runs 6 accepted 6" in out

    def test_parallel_matches_serial(self, tmp_path, small_config, capsys):
        fixture_dir = tmp_path / "inputs"
        fixture_dir.mkdir()
        write_fixture_pack(fixture_dir, count=2)
        for sub, workers in (("s", "1"), ("p", "4")):
            code, _, _ = run_cli(
                capsys, "batch", "--input-dir", str(fixture_dir), "--mock",
                "--config", str(small_config),
                "--out", str(tmp_path / sub), "--seed", "5",
                "--runs-per-input", "2", "--parallel", workers,
                "--analyzer-policy", "pass_on_call", "--analyzer-k", "2",
            )
            assert code == 0
        serial = (tmp_path / "s" / "summary.json").read_bytes()
        concurrent = (tmp_path / "p" / "summary.json").read_bytes()
        assert serial == concurrent

    def test_empty_dir_usage_error(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        code, _, _ = run_cli(capsys, "batch", "--input-dir", str(empty), "--mock")
        assert code == 64
