import io
import subprocess

import pytest

from mfclife.__main__ import create_logging_config, run_command
from mfclife.commands import ExitStatus


@pytest.fixture
def run_cli(clean_environment):
    def _run(*argv: str) -> tuple[int, str]:
        out = io.StringIO()
        status = run_command(list(argv), out)
        return status, out.getvalue()

    return _run


def test_synth_command(run_cli):
    status, out = run_cli("synth", "B3/S23")

    assert status == ExitStatus.OK
    assert "w_self = 0.5" in out
    assert "(2.25, 3.75)" in out
    assert "ok (0/18 mismatches)" in out
    assert "a = 3.33333, b = -5.5" in out


def test_synth_always_die(run_cli):
    status, out = run_cli("synth", "B/S")

    assert status == ExitStatus.OK
    assert "cost = 0" in out
    assert "calibration" not in out


def test_synth_quiet(run_cli):
    status, out = run_cli("synth", "B3/S23", "--quiet")

    assert status == ExitStatus.OK
    assert out == ""


def test_synth_plan_feeds_simulate(run_cli, tmp_path):
    plan_path = tmp_path / "gol.ini"
    status, _ = run_cli("synth", "B3/S23", "--out", str(plan_path))
    assert status == ExitStatus.OK
    assert "[plan]" in plan_path.read_text()

    status, out = run_cli("simulate", "--config", str(plan_path), "--inline", "OOO", "--width", "3", "--height", "3", "--offset", "1,0", "--steps", "4")

    assert status == ExitStatus.OK
    assert "equal over 5 samples" in out


def test_run_pattern_file(run_cli, blinker_cells_file):
    status, out = run_cli("run", "--pattern", str(blinker_cells_file), "--steps", "2")

    assert status == ExitStatus.OK
    assert out == "...\nOOO\n...\n"


def test_run_inline_rle(run_cli, blinker_rle):
    status, out = run_cli("run", "--inline", blinker_rle, "--width", "3", "--height", "3", "--offset", "1,0", "--steps", "1")

    assert status == ExitStatus.OK
    assert out == ".O.\n.O.\n.O.\n"


def test_run_all_generations_as_rle(run_cli, blinker_cells_file):
    status, out = run_cli("run", "--pattern", str(blinker_cells_file), "--steps", "1", "--all", "--emit", "rle")

    assert status == ExitStatus.OK
    assert out.splitlines() == [
        "Generation 0:",
        "x = 3, y = 3, rule = B3/S23",
        "$3o!",
        "",
        "Generation 1:",
        "x = 3, y = 3, rule = B3/S23",
        "bo$bo$bo!",
    ]


def test_run_states_csv(run_cli, blinker_cells_file, tmp_path):
    path = tmp_path / "states.csv"
    status, _ = run_cli("run", "--pattern", str(blinker_cells_file), "--steps", "2", "--out", str(path))

    assert status == ExitStatus.OK
    assert len(path.read_text().splitlines()) == 4


def test_simulate_writes_trace(run_cli, tmp_path):
    path = tmp_path / "trace.csv"
    status, out = run_cli("simulate", "--inline", "OOO", "--width", "5", "--height", "5", "--offset", "2,1", "--boundary", "torus", "--steps", "3", "--out", str(path))

    assert status == ExitStatus.OK
    assert "5x5, torus" in out
    assert path.read_text().startswith("time_s,cell_0_0,")


def test_simulate_mfc_preset(run_cli):
    status, out = run_cli("simulate", "--inline", "OOO", "--width", "3", "--height", "3", "--offset", "1,0", "--steps", "2", "--preset", "mfc")

    assert status == ExitStatus.OK
    assert "delay 800 s" in out


def test_demo_blinker(run_cli):
    status, out = run_cli("demo-blinker")

    assert status == ExitStatus.OK
    assert out.splitlines()[0] == "center constant; X2/X4 antiphase"
    assert "X4 X5 X6 high" in out


def test_sweep_to_stdout(run_cli):
    status, out = run_cli("sweep", "--dt", "1e-5")

    assert status == ExitStatus.OK
    lines = out.splitlines()
    assert lines[0] == "time_s,v_in,v_out"
    assert len(lines) == 102


def test_sweep_to_file(run_cli, tmp_path):
    path = tmp_path / "sweep.csv"
    status, out = run_cli("sweep", "--out", str(path))

    assert status == ExitStatus.OK
    assert path.read_text().startswith("time_s,v_in,v_out\n")
    assert "mismatches" in out


def test_sweep_constant_input(run_cli):
    status, out = run_cli("sweep", "--freq", "0", "--dt", "1e-5")

    assert status == ExitStatus.OK
    assert out.splitlines()[1] == "0,5,1"


def test_sweep_negative_frequency_is_a_usage_error(run_cli):
    status, _ = run_cli("sweep", "--freq", "-1000")

    assert status == ExitStatus.USAGE


def test_bad_rule_is_a_usage_error(run_cli, capsys):
    status, out = run_cli("synth", "B9/S2")

    assert status == ExitStatus.USAGE
    assert out == ""
    assert "***" in capsys.readouterr().err


def test_missing_steps_is_a_usage_error(run_cli):
    status, _ = run_cli("run", "--inline", "OOO")

    assert status == ExitStatus.USAGE


def test_pattern_parse_error(run_cli, capsys):
    status, _ = run_cli("run", "--inline", "x = 3, y = 1\n3q!", "--steps", "1")

    assert status == ExitStatus.INPUT_ERROR
    assert "2:2:" in capsys.readouterr().err


def test_config_file_error(run_cli, tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[display]\ncolor = red\n")

    status, _ = run_cli("synth", "--config", str(path))

    assert status == ExitStatus.INPUT_ERROR


def test_config_file_unknown_key(run_cli, tmp_path):
    path = tmp_path / "typo.ini"
    path.write_text("[circuit]\nv_lo = 3\n")

    status, out = run_cli("sweep", "--config", str(path))

    assert status == ExitStatus.INPUT_ERROR
    assert out == ""


def test_unknown_command(run_cli):
    status, _ = run_cli("conway")

    assert status == ExitStatus.USAGE


def test_help(run_cli, capsys):
    status, _ = run_cli("--help")

    assert status == ExitStatus.OK
    assert "demo-blinker" in capsys.readouterr().out


def test_logging_config_levels():
    assert create_logging_config(True, False)["loggers"]["mfc_life"]["level"] == "DEBUG"
    assert create_logging_config(False, True)["loggers"]["mfc_life"]["level"] == "WARNING"
    assert create_logging_config(False, False)["loggers"]["mfc_life"]["level"] == "INFO"


def test_run_command_subprocess_synth():
    proc = subprocess.run(["mfc-life", "synth", "B3/S23"], capture_output=True)
    proc.check_returncode()

    assert "w_self = 0.5" in str(proc.stdout)


def test_run_command_subprocess_exit_status():
    proc = subprocess.run(["mfc-life", "run", "--inline", "OOO"], capture_output=True)

    assert proc.returncode == ExitStatus.USAGE


def test_identical_runs_write_identical_files(run_cli, tmp_path):
    outputs = []
    for name in ("first.csv", "second.csv"):
        path = tmp_path / name
        status, out = run_cli("simulate", "--inline", "OOO", "--width", "4", "--height", "4", "--offset", "1,0", "--steps", "3", "--out", str(path))
        assert status == ExitStatus.OK
        outputs.append((out, path.read_bytes()))

    assert outputs[0] == outputs[1]
