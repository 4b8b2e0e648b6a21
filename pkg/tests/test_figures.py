import math

import numpy as np
import pandas as pd
import pytest

from dfs_gates import conventions as C
from dfs_gates.errors import ArgumentError
from dfs_gates.experiment import count_column
from dfs_gates.figures import (
    ANCHOR_ALPHA_OVER_PI,
    FIG2C_ALPHAS_OVER_PI,
    FIGURE_IDS,
    FigureResult,
    _threshold_report,
    figure_specs,
    non_increasing,
    run_figure,
)
from dfs_gates.io_utils import read_csv


@pytest.mark.parametrize("figure_id", FIGURE_IDS)
def test_every_figure_has_specs(figure_id):
    specs = figure_specs(figure_id)
    assert specs
    assert len({s.name for s in specs}) == len(specs)
    for s in specs:
        assert s.kind in ("fidelity", "threshold")
        if s.kind == "threshold":
            assert len(s.configs) == len(s.axis_values)


def test_fig1a_curves():
    names = [s.name for s in figure_specs("1a")]
    assert names == ["xy_h0", "xy_h5", "xy_h10", "xy_h20", "xyz_h20", "tz_xy_h0", "tz_xy_h20"]
    h20 = figure_specs("1a")[3].configs[0]
    assert h20.control.kind == "constant" and h20.control.h == 20.0
    assert h20.bath.x and h20.bath.y and not h20.bath.z


def test_fig1b_uses_quarter_turn_pulses():
    cfg = figure_specs("1b")[0].configs[0]
    assert cfg.control.kind == "pulse_train"
    assert cfg.control.amplitude * cfg.control.tau_over_pi * math.pi == pytest.approx(math.pi / 2)
    assert figure_specs("1b")[-1].configs[0].control.kind == "none"


def test_fig2c_alpha_grid_contains_anchor():
    assert ANCHOR_ALPHA_OVER_PI in FIG2C_ALPHAS_OVER_PI
    assert list(FIG2C_ALPHAS_OVER_PI) == sorted(FIG2C_ALPHAS_OVER_PI)
    assert FIG2C_ALPHAS_OVER_PI[-1] == 0.5
    specs = {s.name: s for s in figure_specs("2c")}
    assert specs["logical_Tz"].oracle and not specs["logical_Tx"].oracle
    assert specs["physical_z"].configs[0].bath.Gamma == 0.01
    assert specs["physical_z_text_gamma"].configs[0].bath.Gamma == 1.0


def test_fig4_sweeps_two_logical_gate():
    for fid, axis in (("4a", "bath.gamma"), ("4b", "bath.T")):
        for s in figure_specs(fid):
            assert s.axis == axis and s.oracle
            assert s.configs[0].model.kind == "two-logical"


def test_unknown_figure():
    with pytest.raises(ArgumentError):
        figure_specs("3")


def test_non_increasing_treats_missing_as_infinite():
    assert non_increasing([None, float("nan"), 5, 5, 2])
    assert not non_increasing([2, None])
    assert not non_increasing([1, 2])
    assert non_increasing([])


@pytest.mark.slow
def test_fig1a_passes(tmp_path):
    res = run_figure("1a", tmp_path)
    assert res.passed, [c.line() for c in res.checks if not c.passed]
    assert (tmp_path / "fig1a_xy_h20.csv").exists()
    assert (tmp_path / "fig1a_report.txt").read_text(encoding="utf-8").startswith("Figure 1a")


@pytest.mark.slow
def test_fig1b_passes(tmp_path):
    res = run_figure("1b", tmp_path)
    assert res.passed, [c.line() for c in res.checks if not c.passed]
    final = {name: read_csv(tmp_path / f"fig1b_{name}.csv")["fidelity"].iloc[-1]
             for name in ("xyz_individual", "xyz_collective_z")}
    # half the z weight moved into a collective channel: the curves separate
    assert final["xyz_individual"] == pytest.approx(0.789, abs=0.01)
    assert final["xyz_collective_z"] == pytest.approx(0.478, abs=0.01)


@pytest.mark.slow
def test_fig4a_matches_oracle(tmp_path):
    res = run_figure("4a", tmp_path, workers=2)
    assert res.passed, [c.line() for c in res.checks if not c.passed]
    df = read_csv(tmp_path / "fig4a_alpha0.25pi.csv")
    assert list(df.columns[:3]) == ["gamma", "theta_star_over_pi", "oracle_theta_star_over_pi"]
    assert {"N_0.5pi", "N_1pi", "N_2pi"} <= set(df.columns)


@pytest.mark.slow
def test_fig2a_is_deterministic(tmp_path):
    res = run_figure("2a", tmp_path / "a", workers=2)
    assert res.passed, [c.line() for c in res.checks if not c.passed]
    run_figure("2a", tmp_path / "b")
    for name in ("gamma1", "gamma2", "gamma5"):
        a = (tmp_path / "a" / f"fig2a_{name}.csv").read_bytes()
        b = (tmp_path / "b" / f"fig2a_{name}.csv").read_bytes()
        assert a == b


def test_threshold_report_labels_censored_entries():
    n_col = count_column(math.pi)
    df = pd.DataFrame({"bath.gamma": [1.0, 2.0], "theta_star_over_pi": [np.nan, 3.2],
                       n_col: [np.nan, 3], "theta_reached_over_pi": [60.0, 3.5]})
    res = FigureResult("4a")
    _threshold_report("4a", {"alpha0.25pi": df}, res)
    assert "  alpha0.25pi theta*/pi by bath.gamma: 1: >60, 2: 3.2000" in res.report
    assert "  alpha0.25pi N (theta_gate = pi): >=60, 3" in res.report


@pytest.mark.slow
def test_fig2b_passes(tmp_path):
    res = run_figure("2b", tmp_path, workers=2)
    assert res.passed, [c.line() for c in res.checks if not c.passed]


@pytest.mark.slow
def test_fig2c_passes_with_computed_anchors(tmp_path):
    res = run_figure("2c", tmp_path, workers=2)
    assert res.passed, [c.line() for c in res.checks if not c.passed]
    names = [c.name for c in res.checks]
    assert any("physical_z_text_gamma" in n and "oracle" in n for n in names)
    assert "theta*(T_x) >= theta*(T_z) at alpha = pi/8" in names
    i = FIG2C_ALPHAS_OVER_PI.index(ANCHOR_ALPHA_OVER_PI)
    for gate, expected in C.FIG2C_COMPUTED_ANCHORS.items():
        th = read_csv(tmp_path / f"fig2c_logical_{gate}.csv")["theta_star_over_pi"].iloc[i]
        assert th == pytest.approx(expected, abs=0.02)


@pytest.mark.slow
def test_fig4b_passes(tmp_path):
    res = run_figure("4b", tmp_path, workers=2)
    assert res.passed, [c.line() for c in res.checks if not c.passed]
