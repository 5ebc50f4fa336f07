"""命令行: 退出码、JSON 输出与文件导出。"""

import json

import jsonschema
import pytest

from dsskit.cli import main
from dsskit.schemas import get_schema


@pytest.fixture(autouse=True)
def _workdir(tmp_path, monkeypatch):
    # 避免读到仓库根目录下的 .env
    monkeypatch.chdir(tmp_path)


def _config(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return str(path)


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_eval_nominal(capsys):
    assert main(["eval", "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["breakdown"]["a"] == pytest.approx(86.2573, abs=1e-4)
    assert payload["breakdown"]["b"] == pytest.approx(86.2576, abs=1e-4)
    assert payload["criticality"] == "SC"
    assert payload["env"] == {"g": 9.81, "mu": 0.9, "l_V": 5.0}


def test_eval_table(capsys):
    assert main(["eval"]) == 0
    out = capsys.readouterr().out
    assert "DSS" in out
    assert "86.2573" in out


def test_eval_both_stopped(tmp_path, capsys):
    path = _config(
        tmp_path, {"scenario": {"relative": {"d_V": 0, "delta_v": 0, "v_L": 0}}}
    )
    assert main(["eval", "-c", path, "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["breakdown"]["dss"] == 0.0
    assert payload["criticality"] == "NSC"


def test_negative_speed_exit_code(tmp_path, capsys):
    path = _config(
        tmp_path,
        {"scenario": {"absolute": {"x_L": 50, "x_F": 0, "v_L": 10, "v_F": -1}}},
    )
    assert main(["eval", "-c", path]) == 3
    assert "速度不能为负" in capsys.readouterr().err


def test_overlap_is_config_error(tmp_path, capsys):
    path = _config(
        tmp_path,
        {"scenario": {"absolute": {"x_L": 3, "x_F": 0, "v_L": 10, "v_F": 10}}},
    )
    assert main(["eval", "-c", path]) == 2
    assert "重叠" in capsys.readouterr().err


def test_config_from_environment(tmp_path, capsys, monkeypatch):
    path = _config(tmp_path, {"scenario": {"relative": {"d_V": 100}}})
    monkeypatch.setenv("DSSKIT_CONFIG", path)
    assert main(["eval", "--json"]) == 0
    assert _json_out(capsys)["scenario"]["d_V"] == 100.0


def test_classify(capsys):
    assert main(["classify", "--dss", "-0.01", "--json"]) == 0
    assert _json_out(capsys)["criticality"] == "SC"

    assert main(["classify", "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["speed_relevant"] == 1
    assert payload["accel_relevant"] == 1


def test_derive_csv(capsys):
    assert main(["derive", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "\r" not in out
    lines = out.splitlines()
    assert lines[0] == "parameter,TC.1,TC.2,TC.3,TC.4,TC.5,TC.6"
    assert lines[-1] == "criticality,SC,NSC,SC,NSC,SC,NSC"
    assert [line.split(",")[0] for line in lines[1:]] == [
        "d_V",
        "delta_v",
        "t_BR",
        "v_L",
        "a",
        "b",
        "dss",
        "criticality",
    ]


def test_derive_absolute_json(capsys):
    assert main(["derive", "--form", "absolute", "--json", "--seed", "4"]) == 0
    payload = _json_out(capsys)
    assert payload["form"] == "absolute"
    assert len(payload["cases"]) == 10
    assert payload["provenance"]["rng"]["seed"] == 4
    assert payload["provenance"]["rng"]["algorithm"] == "PCG64"


def test_derive_accuracy_flag(capsys):
    assert main(["derive", "--accuracy", "0.02", "--json"]) == 0
    cases = _json_out(capsys)["cases"]
    assert cases[0]["params"]["d_V"] == pytest.approx(42.54, abs=2e-3)


def test_derive_failure_exit_code(tmp_path, capsys):
    path = _config(tmp_path, {"derivation": {"bounds": {"d_V": [100, 200]}}})
    assert main(["derive", "-c", path]) == 4
    assert "d_V" in capsys.readouterr().err


def test_suite_replay(tmp_path, capsys):
    suite_path = tmp_path / "suite.json"
    assert main(["derive", "--json", "-o", str(suite_path)]) == 0
    capsys.readouterr()

    assert main(["eval", "--suite", str(suite_path), "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["passed"]
    assert payload["max_difference"] == 0.0
    assert [r["criticality"] for r in payload["cases"]] == ["SC", "NSC"] * 3

    data = json.loads(suite_path.read_text(encoding="utf-8"))
    data["cases"][2]["expected_dss"] += 1.0
    suite_path.write_text(json.dumps(data), encoding="utf-8")
    assert main(["eval", "--suite", str(suite_path), "--json"]) == 5


def test_simulate(tmp_path, capsys):
    path = _config(
        tmp_path,
        {
            "scenario": {
                "relative": {"d_V": 42.55, "delta_v": -5.5556, "v_L": 27.7778}
            }
        },
    )
    traj = tmp_path / "traj.csv"
    assert main(["simulate", "-c", path, "--traj", str(traj), "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["collided"] is True
    assert payload["min_gap"] < 0
    assert payload["coverage"]["covered"] >= 2

    lines = traj.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,x_L,v_L,x_F,v_F,gap"
    assert len(lines) > 100


def test_verify(capsys):
    assert main(["verify", "--samples", "200", "--seed", "3", "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["passed"] is True
    assert payload["total"] == 200
    assert payload["seed"] == 3
    assert payload["rng"]["algorithm"] == "PCG64"


def test_verify_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DSSKIT_SEED", "17")
    assert main(["verify", "--samples", "10", "--json"]) == 0
    assert _json_out(capsys)["seed"] == 17

    assert main(["verify", "--samples", "10", "--seed", "2", "--json"]) == 0
    assert _json_out(capsys)["seed"] == 2


def test_verify_without_samples(capsys):
    assert main(["verify", "--samples", "0", "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["checked"] == 0
    assert payload["fraction"] == 1.0


def test_sweep_json(capsys):
    assert main(["sweep", "--grid", "3x3", "--json", "--workers", "2"]) == 0
    payload = _json_out(capsys)
    assert payload["axes"] == ["d_V", "delta_v"]
    assert len(payload["points"]) == 9


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    args = ["sweep", "--axis", "v_L,a_F", "--grid", "2x2", "-o", str(out)]
    args += ["--range", "v_L=0:20", "--range", "a_F=-5:0"]
    assert main(args) == 0
    assert "4/4" in capsys.readouterr().out
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "i,j,v_L,a_F,dss,criticality,speed_relevant,accel_relevant"
    assert len(lines) == 5


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--grid", "3by3"],
        ["sweep", "--range", "d_V=oops"],
        ["sweep", "--axis", "d_V,x_L"],
        ["eval", "--workers", "0"],
        ["eval", "-c", "missing.json"],
        ["eval", "--suite", "missing.json"],
        ["bogus"],
    ],
)
def test_usage_errors(args):
    assert main(args) in (2, 3)


def test_schema(capsys):
    assert main(["schema", "derive"]) == 0
    schema = _json_out(capsys)
    assert schema["$schema"].startswith("http://json-schema.org/draft-07")
    assert "cases" in schema["properties"]


@pytest.mark.parametrize(
    "name, args",
    [
        ("eval", ["eval"]),
        ("classify", ["classify"]),
        ("classify", ["classify", "--dss", "0.5"]),
        ("derive", ["derive"]),
        ("derive", ["derive", "--form", "absolute"]),
        ("verify", ["verify", "--samples", "50", "--seed", "1"]),
        ("sweep", ["sweep", "--grid", "2x3"]),
    ],
)
def test_json_output_matches_schema(name, args, capsys):
    assert main([*args, "--json"]) == 0
    jsonschema.validate(_json_out(capsys), get_schema(name))


def test_simulate_output_matches_schema(tmp_path, capsys):
    assert main(["simulate", "--json"]) == 0
    jsonschema.validate(_json_out(capsys), get_schema("simulate"))

    traj = tmp_path / "traj.csv"
    assert main(["simulate", "--traj", str(traj), "--json"]) == 0
    payload = _json_out(capsys)
    assert "coverage" in payload
    jsonschema.validate(payload, get_schema("simulate"))


def test_suite_replay_matches_schema(tmp_path, capsys):
    suite_path = tmp_path / "suite.json"
    assert main(["derive", "--json", "-o", str(suite_path)]) == 0
    capsys.readouterr()
    assert main(["eval", "--suite", str(suite_path), "--json"]) == 0
    jsonschema.validate(_json_out(capsys), get_schema("eval-suite"))


def test_schema_rejects_incomplete_payload():
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"dss": 1.0}, get_schema("eval"))


@pytest.mark.parametrize("seed", ["-1", str(2**64)])
def test_seed_out_of_range(seed, capsys):
    assert main(["derive", "--json", "--seed", seed]) == 2
    assert "--seed" in capsys.readouterr().err
    assert main(["verify", "--samples", "1", "--seed", seed]) == 2


def test_seed_out_of_range_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DSSKIT_SEED", "-3")
    assert main(["verify", "--samples", "1"]) == 2
    assert "DSSKIT_SEED" in capsys.readouterr().err


@pytest.mark.parametrize("seed", [-1, 1.5, "7"])
def test_seed_in_config_file(tmp_path, seed, capsys):
    path = _config(tmp_path, {"reaction_time": {"seed": seed}})
    assert main(["derive", "-c", path, "--json"]) == 2
    assert "reaction_time.seed" in capsys.readouterr().err


@pytest.mark.parametrize(
    "field, value",
    [("criticality", "XX"), ("axis", "speed")],
)
def test_suite_with_invalid_field(tmp_path, field, value, capsys):
    suite_path = tmp_path / "suite.json"
    assert main(["derive", "--json", "-o", str(suite_path)]) == 0
    capsys.readouterr()

    data = json.loads(suite_path.read_text(encoding="utf-8"))
    data["cases"][0][field] = value
    suite_path.write_text(json.dumps(data), encoding="utf-8")
    assert main(["eval", "--suite", str(suite_path)]) == 2
    assert "用例集字段无效" in capsys.readouterr().err


def test_suite_with_invalid_form(tmp_path, capsys):
    suite_path = tmp_path / "suite.json"
    assert main(["derive", "--json", "-o", str(suite_path)]) == 0
    capsys.readouterr()

    data = json.loads(suite_path.read_text(encoding="utf-8"))
    data["config"]["form"] = "polar"
    suite_path.write_text(json.dumps(data), encoding="utf-8")
    assert main(["eval", "--suite", str(suite_path)]) == 2
