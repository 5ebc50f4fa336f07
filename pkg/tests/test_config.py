import json

import pytest

from dsskit.bva import AxisId, Form, reference_nominal
from dsskit.config import load_config, parse_config
from dsskit.errors import ConfigError
from dsskit.kinematics import AbsoluteScenario, RelativeScenario
from dsskit.reaction import ShiftedGammaParams, quantile


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults():
    config = load_config()
    assert config.scenario == reference_nominal()
    assert config.seed is None
    assert config.accelerations == (-config.env.a_max, -config.env.a_max)
    assert config.derivation.form == Form.RELATIVE


def test_kmh_relative_scenario(tmp_path):
    data = {
        "scenario": {
            "relative": {
                "d_V": 42.56,
                "delta_v": -20,
                "v_L": 100,
                "t_BR": 0.7,
                "speed_unit": "kmh",
            }
        }
    }
    config = load_config(_write(tmp_path, "s.json", json.dumps(data, indent=2)))
    s = config.scenario
    assert isinstance(s, RelativeScenario)
    assert s.v_L == pytest.approx(27.7778, abs=1e-4)
    assert s.delta_v == pytest.approx(-5.5556, abs=1e-4)
    assert s.d_V == 42.56


def test_kmh_keeps_default_speeds(tmp_path):
    text = "scenario:\n  relative:\n    d_V: 30\n    speed_unit: kmh\n"
    s = load_config(_write(tmp_path, "s.yaml", text)).scenario
    assert s.v_L == reference_nominal().v_L
    assert s.delta_v == reference_nominal().delta_v


def test_absolute_scenario(tmp_path):
    data = {
        "env": {"g": 9.81, "mu": 0.8, "l_V": 4.5},
        "scenario": {"absolute": {"x_L": 60, "x_F": 0, "v_L": 20, "v_F": 25}},
    }
    config = load_config(_write(tmp_path, "abs.json", json.dumps(data)))
    assert isinstance(config.scenario, AbsoluteScenario)
    assert config.scenario.t_BR == 0.7
    assert config.env.a_max == pytest.approx(9.81 * 0.8)
    assert config.relative().d_V == pytest.approx(55.5)
    assert config.derivation.env == config.env
    assert config.sim.env == config.env


def test_full_file(tmp_path):
    data = {
        "reaction_time": {"t0": 0.5, "k": 3, "theta": 0.1, "seed": 7},
        "accelerations": {"a_L": -4.0},
        "derivation": {
            "accuracy": 0.02,
            "boundary_tol": 1e-9,
            "form": "absolute",
            "axes": ["x_L", "t_BR"],
            "bounds": {"x_L": [0, 200]},
        },
        "sim": {"dt": 0.05, "samples": 200},
        "sweep": {"ranges": {"d_V": [0, 10]}},
    }
    config = load_config(_write(tmp_path, "full.json", json.dumps(data)))
    assert config.seed == 7
    assert config.reaction == ShiftedGammaParams(t0=0.5, k=3.0, theta=0.1)
    assert config.accelerations == (-4.0, -config.env.a_max)
    assert config.derivation.accuracy == 0.02
    assert config.derivation.boundary_tol == 1e-9
    assert config.derivation.derived_axes == (AxisId.X_L, AxisId.T_BR)
    assert config.derivation.bounds[AxisId.X_L] == (0.0, 200.0)
    assert config.sim.samples == 200
    assert config.sweep_ranges == {"d_V": (0.0, 10.0)}
    assert config.to_dict()["reaction_time"]["seed"] == 7


def test_reaction_quantile(tmp_path):
    text = "scenario:\n  relative:\n    t_BR_quantile: 0.5\n"
    s = load_config(_write(tmp_path, "q.yaml", text)).scenario
    assert s.t_BR == pytest.approx(quantile(ShiftedGammaParams(), 0.5))


def test_unknown_key_reports_line(tmp_path):
    text = """{
  "scenario": {
    "relative": {
      "d_V": 10,
      "bogus": 1
    }
  }
}
"""
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "bad.json", text))
    err = info.value
    assert err.line == 5
    assert err.key == "scenario.relative.bogus"
    assert str(err).startswith(f"{tmp_path / 'bad.json'}:5: ")
    assert err.exit_code == 2


def test_invalid_constant_reports_block(tmp_path):
    text = "# 摩擦系数为 0\nenv:\n  g: 9.81\n  mu: 0.0\n"
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "env.yaml", text))
    assert info.value.line == 2
    assert "mu" in str(info.value)


def test_non_numeric_value(tmp_path):
    text = "derivation:\n  accuracy: fast\n"
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "d.yaml", text))
    assert info.value.line == 2
    assert info.value.key == "derivation.accuracy"


@pytest.mark.parametrize(
    "scenario",
    [
        {"relative": {"d_V": 1}, "absolute": {"x_L": 10, "x_F": 0, "v_L": 1, "v_F": 1}},
        {"absolute": {"x_L": 3, "x_F": 0, "v_L": 1, "v_F": 1}},
        {"absolute": {"x_L": 30, "v_L": 1, "v_F": 1}},
        {"relative": {"d_V": -1}},
        {"relative": {"t_BR": 0.7, "t_BR_quantile": 0.5}},
        {"relative": {"speed_unit": "mph"}},
    ],
)
def test_invalid_scenarios(scenario):
    with pytest.raises(ConfigError):
        parse_config({"scenario": scenario})


@pytest.mark.parametrize(
    "data",
    [
        {"derivation": {"form": "polar"}},
        {"derivation": {"axes": ["d_V", "x_L"]}},
        {"derivation": {"bounds": {"d_V": [1]}}},
        {"sim": {"dt": 0.5}},
        {"reaction_time": {"k": -1}},
        {"sweep": {"ranges": {"x_L": [0, 1]}}},
        {"env": {"g": True}},
        {"extra": {}},
        [1, 2, 3],
    ],
)
def test_invalid_blocks(data):
    with pytest.raises(ConfigError):
        parse_config(data)


def test_yaml_syntax_error(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "broken.yaml", "env:\n  g: [9.81\n"))
    assert info.value.line is not None


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_tab_indented_json(tmp_path):
    data = {"scenario": {"relative": {"d_V": 30}}, "derivation": {"boundary_tol": 1e-7}}
    path = _write(tmp_path, "tabs.json", json.dumps(data, indent="\t"))
    config = load_config(path)
    assert config.scenario.d_V == 30.0
    assert config.derivation.boundary_tol == 1e-7


def test_tab_indented_json_error_without_line(tmp_path):
    data = {"scenario": {"relative": {"d_V": 30, "bogus": 1}}}
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "tabs.json", json.dumps(data, indent="\t")))
    assert info.value.key == "scenario.relative.bogus"
    assert info.value.line is None


def test_broken_json_reports_line(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "broken.json", '{\n  "env": {"g": 9.81,}\n}\n'))
    assert info.value.line == 2


@pytest.mark.parametrize("seed", [-1, 2**64, 2.0, "3", True])
def test_invalid_seed(tmp_path, seed):
    text = json.dumps({"reaction_time": {"seed": seed}}, indent=2)
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, "seed.json", text))
    assert info.value.key == "reaction_time.seed"
    assert info.value.line == 3


def test_largest_seed(tmp_path):
    text = json.dumps({"reaction_time": {"seed": 2**64 - 1}})
    assert load_config(_write(tmp_path, "seed.json", text)).seed == 2**64 - 1
