from pathlib import Path

import pytest

from dfs_gates.config import load_config
from dfs_gates.errors import ConfigError
from tools.gen_configs import generate, parse_set, value_tag

FIXTURES = Path(__file__).parent / "fixtures"


def test_value_tag():
    assert value_tag("0.25") == "0p25"
    assert value_tag("-1") == "m1"


def test_grid_writes_parseable_configs(tmp_path):
    grid = parse_set(["bath.gamma=1,2", "bath.alpha_z_over_pi=0.25,0.5"])
    paths = generate(FIXTURES / "tz_mixed.cfg", grid, tmp_path, prefix="fig2a")
    assert len(paths) == 4
    assert paths[0].name == "fig2a_gamma1_alpha_z_over_pi0p25.cfg"
    cfgs = [load_config(p) for p in paths]
    assert sorted((c.bath.gamma, c.bath.alpha_z_over_pi) for c in cfgs) == [
        (1.0, 0.25), (1.0, 0.5), (2.0, 0.25), (2.0, 0.5)]
    assert all(c.model.gate == "Tz" for c in cfgs)


def test_bad_set_item():
    with pytest.raises(ConfigError):
        parse_set(["bath.gamma"])


def test_out_of_range_grid_value(tmp_path):
    with pytest.raises(ConfigError):
        generate(FIXTURES / "tz_mixed.cfg", {"bath.alpha_z_over_pi": ["0.9"]}, tmp_path)
