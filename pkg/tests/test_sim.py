"""闭式制动仿真与 DSS 一致性校验。"""

import pytest

from dsskit.bva import Criticality
from dsskit.errors import InvalidParamsError
from dsskit.kinematics import RelativeScenario, dss_relative, to_absolute
from dsskit.sim import (
    OracleRecord,
    OracleSummary,
    SimConfig,
    oracle_check,
    random_scenarios,
    run_oracle_batch,
    simulate,
    trajectory_coverage,
)

A_MAX = 9.81 * 0.9


def test_unsafe_case_collides(reference_suite):
    tc1 = reference_suite.get("TC.1")
    outcome = simulate(tc1.params, SimConfig())
    assert outcome.collided
    assert outcome.min_gap < 0
    assert outcome.completed
    assert 0.0 < outcome.collision_time <= outcome.stop_time


def test_safe_case_stops_short(reference_suite):
    tc2 = reference_suite.get("TC.2")
    outcome = simulate(tc2.params, SimConfig())
    assert not outcome.collided
    assert outcome.collision_time is None
    assert outcome.final_gap == pytest.approx(tc2.expected_dss, abs=1e-6)
    assert outcome.min_gap == pytest.approx(0.01, abs=2e-3)


def test_travel_distances(env, nominal):
    outcome = simulate(nominal, SimConfig())
    v_F = nominal.v_F
    assert outcome.leader_travel == pytest.approx(nominal.v_L**2 / (2 * A_MAX))
    assert outcome.follower_travel == pytest.approx(
        v_F * nominal.t_BR + v_F**2 / (2 * A_MAX)
    )
    assert outcome.stop_time == pytest.approx(nominal.t_BR + v_F / A_MAX)


def test_both_stopped():
    s = RelativeScenario(d_V=10.0, delta_v=0.0, t_BR=0.7, v_L=0.0)
    outcome = simulate(s, SimConfig())
    assert not outcome.collided
    assert outcome.min_gap == pytest.approx(10.0)
    assert outcome.final_gap == pytest.approx(10.0)


def test_positive_margin_is_final_gap(env):
    base = RelativeScenario(d_V=0.0, delta_v=-4.0, t_BR=1.0, v_L=20.0)
    bd = dss_relative(base, env)
    s = RelativeScenario(d_V=-bd.dss + 5.0, delta_v=-4.0, t_BR=1.0, v_L=20.0)
    outcome = simulate(s, SimConfig())
    assert outcome.final_gap == pytest.approx(5.0, abs=1e-9)
    assert outcome.min_gap == pytest.approx(5.0, abs=1e-9)


def test_result_does_not_depend_on_dt(reference_suite):
    for case in reference_suite.cases:
        coarse = simulate(case.params, SimConfig(dt=0.1))
        fine = simulate(case.params, SimConfig(dt=0.001))
        assert coarse.collided == fine.collided
        assert coarse.min_gap == fine.min_gap


def test_truncated_run(nominal):
    outcome = simulate(nominal, SimConfig(max_time=1.0))
    assert not outcome.completed
    assert outcome.stop_time == 1.0
    assert outcome.final_gap > 0


def test_trajectory(env, reference_suite):
    tc2 = reference_suite.get("TC.2")
    outcome = simulate(tc2.params, SimConfig(dt=0.05, record_trajectory=True))
    points = outcome.trajectory
    times = [p.t for p in points]

    assert times[0] == 0.0
    assert times[-1] == pytest.approx(outcome.stop_time)
    assert all(b > a for a, b in zip(times, times[1:]))
    assert any(t == pytest.approx(tc2.params.t_BR) for t in times)
    assert points[-1].gap == pytest.approx(outcome.final_gap)
    assert all(p.v_L >= 0 and p.v_F >= 0 for p in points)
    assert all(b.x_F >= a.x_F for a, b in zip(points, points[1:]))

    coverage = trajectory_coverage(outcome)
    assert coverage.states == len(points)
    assert coverage.covered >= 2


def test_trajectory_off_by_default(nominal):
    assert simulate(nominal, SimConfig()).trajectory == []


@pytest.mark.parametrize(
    "kwargs",
    [{"dt": 0.0}, {"dt": 0.2}, {"max_time": 0.0}, {"dead_band": -1.0}, {"samples": -1}],
)
def test_invalid_sim_config(kwargs):
    with pytest.raises(InvalidParamsError):
        SimConfig(**kwargs)


# === 校验 ===


def test_oracle_dead_band(env, reference_suite):
    tc1 = reference_suite.get("TC.1").params
    record = oracle_check(tc1, env, SimConfig())
    assert record.excluded
    assert record.agrees

    strict = oracle_check(tc1, env, SimConfig(dead_band=0.001))
    assert not strict.excluded
    assert strict.predicted == Criticality.SC
    assert strict.collided
    assert strict.agrees


def test_oracle_on_random_scenarios(env):
    scenarios = random_scenarios(1000, seed=3)
    summary = run_oracle_batch(scenarios, env, SimConfig())
    assert len(summary.records) == 1000
    assert summary.checked > 900
    assert summary.passed
    assert summary.fraction == 1.0
    assert summary.max_form_error <= 1e-9
    assert all(r.gap_error is not None for r in summary.records if not r.collided)


def test_parallel_batch_keeps_order(env):
    scenarios = random_scenarios(64, seed=9)
    serial = run_oracle_batch(scenarios, env, SimConfig())
    parallel = run_oracle_batch(scenarios, env, SimConfig(), workers=4)
    assert [r.dss for r in parallel.records] == [r.dss for r in serial.records]
    with pytest.raises(InvalidParamsError):
        run_oracle_batch(scenarios, env, SimConfig(), workers=0)


def test_random_scenarios_are_reproducible():
    first = random_scenarios(20, seed=1)
    assert first == random_scenarios(20, seed=1)
    assert first != random_scenarios(20, seed=2)
    for s in first:
        assert s.v_F > s.v_L
        assert s.t_BR >= 0.4
    assert random_scenarios(0, seed=1) == []


def test_summary_reports_disagreement(env, nominal):
    record = OracleRecord(
        scenario=nominal,
        dss=1.0,
        predicted=Criticality.NSC,
        collided=True,
        excluded=False,
        agrees=False,
        final_gap=-1.0,
    )
    summary = OracleSummary(records=[record])
    assert not summary.passed
    assert summary.fraction == 0.0
    assert summary.to_dict()["disagreements"][0]["dss"] == 1.0

    empty = OracleSummary()
    assert empty.passed
    assert empty.fraction == 1.0


def test_absolute_input(env, nominal):
    absolute = to_absolute(nominal, env, x_F_anchor=-20.0)
    assert simulate(absolute, SimConfig()).final_gap == pytest.approx(
        simulate(nominal, SimConfig()).final_gap, abs=1e-9
    )
