from pathlib import Path

import pytest

from dfs_gates.cli import build_parser, main
from dfs_gates.io_utils import read_csv

FIXTURES = Path(__file__).parent / "fixtures"


def _exit_code(argv) -> int:
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


def test_simulate_writes_csv(tmp_path):
    out = tmp_path / "curve.csv"
    main(["--quiet", "simulate", "--config", str(FIXTURES / "closed_tx.cfg"), "--out", str(out)])
    df = read_csv(out)
    assert len(df) == 21
    assert df["fidelity"].min() >= 1 - 1e-8


def test_simulate_dt_flag_lands_in_provenance(tmp_path):
    out = tmp_path / "curve.csv"
    main(["--dt", "0.002", "simulate", "--config", str(FIXTURES / "closed_tx.cfg"),
          "--out", str(out)])
    assert "dt=0.002" in out.read_text(encoding="utf-8").splitlines()[0]


def test_bad_config_exits_2(tmp_path):
    argv = ["simulate", "--config", str(FIXTURES / "bad_key.cfg"), "--out", str(tmp_path / "x.csv")]
    assert _exit_code(argv) == 2
    assert not (tmp_path / "x.csv").exists()


def test_missing_config_exits_4(tmp_path):
    argv = ["simulate", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "x.csv")]
    assert _exit_code(argv) == 4


def test_instability_exits_3(tmp_path):
    argv = ["simulate", "--config", str(FIXTURES / "unstable.cfg"), "--out", str(tmp_path / "x.csv")]
    assert _exit_code(argv) == 3


def test_sweep_bad_key_exits_2(tmp_path):
    argv = ["sweep", "--config", str(FIXTURES / "tz_mixed.cfg"), "--key", "model.kind",
            "--grid", "1,2", "--out", str(tmp_path / "s.csv")]
    assert _exit_code(argv) == 2


def test_sweep_writes_rows(tmp_path):
    out = tmp_path / "s.csv"
    main(["--quiet", "sweep", "--config", str(FIXTURES / "closed_tx.cfg"), "--key", "control.h",
          "--grid", "0,20", "--out", str(out)])
    df = read_csv(out)
    assert list(df["control.h"]) == [0, 20]


def test_closed_oracle_check_passes(tmp_path):
    report = tmp_path / "oracle.txt"
    main(["--dt", "0.25", "oracle-check", "--closed", "--report", str(report)])
    lines = report.read_text(encoding="utf-8").splitlines()
    assert lines and all(ln.startswith("PASS") for ln in lines)


def test_coarse_oracle_check_exits_1():
    assert _exit_code(["--quiet", "--dt", "0.25", "oracle-check"]) == 1


def test_help_lists_config_defaults(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--help"])
    text = capsys.readouterr().out
    assert "config keys and defaults:" in text
    assert "bath.Gamma = 0.005" in text


def test_unknown_figure_id_is_usage_error(tmp_path):
    assert _exit_code(["figure", "--id", "9z", "--out", str(tmp_path)]) == 2


def test_mistuned_pulse_area_warns_on_stderr(tmp_path, capsys):
    cfg = tmp_path / "pulses.cfg"
    cfg.write_text("\n".join([
        "model.kind = single-logical",
        "bath.Gamma = 0.0",
        "control.kind = pulse_train",
        "control.amplitude = 30",
        "control.tau_over_pi = 0.01",
        "run.theta_max_over_pi = 0.1",
        "run.sample_every = 0.05",
    ]) + "\n", encoding="utf-8")
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "c.csv")])
    err = capsys.readouterr().err
    assert "[WARN] pulse area" in err


def test_tuned_pulse_area_is_quiet(tmp_path, capsys):
    cfg = tmp_path / "pulses.cfg"
    cfg.write_text("model.kind = single-logical\nbath.Gamma = 0.0\ncontrol.kind = pulse_train\n"
                   "control.amplitude = 50\ncontrol.tau_over_pi = 0.01\n"
                   "run.theta_max_over_pi = 0.1\nrun.sample_every = 0.05\n", encoding="utf-8")
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "c.csv")])
    assert "pulse area" not in capsys.readouterr().err
