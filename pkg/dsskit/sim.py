"""
两车制动仿真 - DSS 的独立校验

机动过程固定为 DSS 的最坏情形:
- 前车在 t = 0 以 a_max 紧急制动直到停止
- 后车在反应时间 t_BR 内保持匀速，之后以 a_max 制动直到停止

每段加速度恒定，位置按闭式二次式计算，碰撞时刻取段内二次方程的根。
dt 只决定轨迹采样密度，不影响碰撞判定。

碰撞后两车仍按原机动继续运动，因此重叠时 min_gap 为负。
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bva import Criticality, classify
from .errors import InvalidParamsError
from .kinematics import (
    EnvConstants,
    RelativeScenario,
    Scenario,
    dss_absolute,
    dss_relative,
    to_absolute,
)
from .reaction import ReactionTimeSampler, ShiftedGammaParams
from .relevance import CoverageReport, coverage_report

logger = logging.getLogger(__name__)


@dataclass
class SimConfig:
    """仿真配置。"""

    dt: float = 0.01  # 采样步长 s
    max_time: float = 60.0  # s
    env: EnvConstants = field(default_factory=EnvConstants)
    dead_band: float = 0.05  # |DSS| 小于此值的场景不参与校验, m
    gap_tol: float = 1e-6  # 终止间距与 DSS 的容差, m
    samples: int = 1000  # verify 的随机场景数
    record_trajectory: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.dt) and 0 < self.dt <= 0.1):
            raise InvalidParamsError(f"dt 必须在 (0, 0.1] 内，得到 {self.dt}")
        if not (math.isfinite(self.max_time) and self.max_time > 0):
            raise InvalidParamsError(f"max_time 必须大于 0，得到 {self.max_time}")
        if not (math.isfinite(self.dead_band) and self.dead_band >= 0):
            raise InvalidParamsError(f"dead_band 不能为负，得到 {self.dead_band}")
        if not self.gap_tol > 0:
            raise InvalidParamsError(f"gap_tol 必须大于 0，得到 {self.gap_tol}")
        if self.samples < 0:
            raise InvalidParamsError(f"samples 不能为负，得到 {self.samples}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dt": self.dt,
            "max_time": self.max_time,
            "env": self.env.to_dict(),
            "dead_band": self.dead_band,
            "gap_tol": self.gap_tol,
            "samples": self.samples,
        }


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    x_L: float
    x_F: float
    v_L: float
    v_F: float
    a_L: float
    a_F: float
    gap: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "t": self.t,
            "x_L": self.x_L,
            "v_L": self.v_L,
            "x_F": self.x_F,
            "v_F": self.v_F,
            "a_L": self.a_L,
            "a_F": self.a_F,
            "gap": self.gap,
        }


@dataclass
class SimOutcome:
    """仿真结果。collided 当且仅当 min_gap < 0。"""

    collided: bool
    min_gap: float
    stop_time: float
    final_gap: float
    collision_time: Optional[float] = None
    completed: bool = True  # 机动在 max_time 内结束
    leader_travel: float = 0.0
    follower_travel: float = 0.0
    trajectory: List[TrajectoryPoint] = field(default_factory=list)

    def to_dict(self, include_trajectory: bool = False) -> Dict[str, Any]:
        data = {
            "collided": self.collided,
            "min_gap": self.min_gap,
            "stop_time": self.stop_time,
            "final_gap": self.final_gap,
            "collision_time": self.collision_time,
            "completed": self.completed,
            "leader_travel": self.leader_travel,
            "follower_travel": self.follower_travel,
        }
        if include_trajectory:
            data["trajectory"] = [p.to_dict() for p in self.trajectory]
        return data


# === 闭式运动学 ===


class _BrakingVehicle:
    """匀速 t_on 秒后以 decel 制动到停止的车辆。"""

    def __init__(self, x0: float, v0: float, t_on: float, decel: float):
        self.x0 = x0
        self.v0 = v0
        self.t_on = t_on
        self.decel = decel
        self.t_stop = t_on + v0 / decel

    @property
    def travel(self) -> float:
        return self.v0 * self.t_on + self.v0 * self.v0 / (2.0 * self.decel)

    def state(self, t: float) -> Tuple[float, float, float]:
        """(位置, 速度, 加速度)。"""
        if t <= self.t_on:
            return self.x0 + self.v0 * t, self.v0, 0.0
        if t >= self.t_stop:
            return self.x0 + self.travel, 0.0, 0.0
        tau = t - self.t_on
        x = self.x0 + self.v0 * self.t_on + self.v0 * tau - 0.5 * self.decel * tau**2
        return x, self.v0 - self.decel * tau, -self.decel


def _segment_min(g0: float, dv: float, da: float, span: float) -> float:
    """段内 gap(τ) = g0 + dv·τ + da·τ²/2 在 [0, span] 上的最小值。"""
    candidates = [g0, g0 + dv * span + 0.5 * da * span**2]
    if da > 0:
        tau = -dv / da
        if 0 < tau < span:
            candidates.append(g0 + dv * tau + 0.5 * da * tau**2)
    return min(candidates)


def _first_crossing(g0: float, dv: float, da: float, span: float) -> float:
    """段内 gap 首次降到 0 的时刻，调用方保证段内最小值 < 0。"""
    if g0 < 0:
        return 0.0
    if da == 0:
        return -g0 / dv
    disc = max(dv * dv - 2.0 * da * g0, 0.0)
    sq = math.sqrt(disc)
    roots = sorted(((-dv - sq) / da, (-dv + sq) / da))
    for tau in roots:
        if 0 <= tau <= span:
            return tau
    return span


def simulate(s: Scenario, cfg: SimConfig) -> SimOutcome:
    """
    仿真紧急制动机动。

    事件时刻 (前车停止、后车开始制动、后车停止) 把时间轴分成若干段，
    每段内间距是关于时间的二次式，最小间距和碰撞时刻都用闭式求得。
    相对形式的场景以后车位置 0 还原为绝对形式。
    """
    env = cfg.env
    if isinstance(s, RelativeScenario):
        s = to_absolute(s, env)
    # 校验速度和重叠
    dss_absolute(s, env)

    a_max = env.a_max
    leader = _BrakingVehicle(s.x_L, s.v_L, 0.0, a_max)
    follower = _BrakingVehicle(s.x_F, s.v_F, s.t_BR, a_max)

    def gap_at(t: float) -> float:
        return leader.state(t)[0] - follower.state(t)[0] - env.l_V

    end_time = max(leader.t_stop, follower.t_stop)
    completed = end_time <= cfg.max_time
    stop_time = min(end_time, cfg.max_time)
    if not completed:
        logger.warning(
            "机动在 %.3f s 结束，超过 max_time=%.3f s，仿真被截断",
            end_time,
            cfg.max_time,
        )

    inner = (leader.t_stop, follower.t_on, follower.t_stop)
    events = sorted({0.0, stop_time} | {t for t in inner if t < stop_time})
    logger.debug("事件时刻: %s", events)

    min_gap = gap_at(0.0)
    collision_time: Optional[float] = None
    for t0, t1 in zip(events, events[1:]):
        mid = 0.5 * (t0 + t1)
        xl, vl, _ = leader.state(t0)
        xf, vf, _ = follower.state(t0)
        _, _, al = leader.state(mid)
        _, _, af = follower.state(mid)
        g0 = xl - xf - env.l_V
        dv, da, span = vl - vf, al - af, t1 - t0
        seg_min = _segment_min(g0, dv, da, span)
        if seg_min < 0 and collision_time is None:
            collision_time = t0 + _first_crossing(g0, dv, da, span)
        min_gap = min(min_gap, seg_min)

    final_gap = gap_at(stop_time)
    min_gap = min(min_gap, final_gap)

    trajectory: List[TrajectoryPoint] = []
    if cfg.record_trajectory:
        grid = np.arange(0.0, stop_time, cfg.dt)
        extra = [t for t in events if t <= stop_time]
        if collision_time is not None:
            extra.append(collision_time)
        times = np.unique(np.concatenate([grid, extra]))
        for t in times:
            t = float(t)
            xl, vl, al = leader.state(t)
            xf, vf, af = follower.state(t)
            trajectory.append(
                TrajectoryPoint(t, xl, xf, vl, vf, al, af, xl - xf - env.l_V)
            )

    return SimOutcome(
        collided=min_gap < 0,
        min_gap=min_gap,
        stop_time=stop_time,
        final_gap=final_gap,
        collision_time=collision_time,
        completed=completed,
        leader_travel=leader.travel,
        follower_travel=follower.travel,
        trajectory=trajectory,
    )


def trajectory_coverage(outcome: SimOutcome) -> CoverageReport:
    """轨迹上各采样状态对相关组合的覆盖。"""
    return coverage_report((p.v_L, p.v_F, p.a_L, p.a_F) for p in outcome.trajectory)


# === 校验 ===


@dataclass
class OracleRecord:
    """单个场景的 DSS 与仿真对比结果。"""

    scenario: RelativeScenario
    dss: float
    predicted: Criticality
    collided: bool
    excluded: bool  # |DSS| 落在死区内
    agrees: bool
    final_gap: float
    gap_error: Optional[float] = None  # 后车停止点起决定作用时 |final_gap - DSS|
    form_error: float = 0.0  # 绝对/相对两种形式的相对误差

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario.to_dict(),
            "dss": self.dss,
            "predicted": self.predicted.value,
            "collided": self.collided,
            "excluded": self.excluded,
            "agrees": self.agrees,
            "final_gap": self.final_gap,
            "gap_error": self.gap_error,
            "form_error": self.form_error,
        }


def oracle_check(
    s: RelativeScenario, env: EnvConstants, cfg: SimConfig
) -> OracleRecord:
    """对比 DSS 符号与仿真碰撞结果。死区内的场景只记录不判定。"""
    dss = dss_relative(s, env).dss
    absolute = to_absolute(s, env)
    dss_abs = dss_absolute(absolute, env).dss
    form_error = abs(dss_abs - dss) / max(1.0, abs(dss))

    outcome = simulate(absolute, replace(cfg, env=env))
    predicted = classify(dss)
    excluded = abs(dss) <= cfg.dead_band

    gap_error = None
    agrees = (predicted == Criticality.SC) == outcome.collided
    if not outcome.collided and outcome.completed and s.v_F >= s.v_L:
        gap_error = abs(outcome.final_gap - dss)
        agrees = agrees and gap_error <= cfg.gap_tol

    return OracleRecord(
        scenario=s,
        dss=dss,
        predicted=predicted,
        collided=outcome.collided,
        excluded=excluded,
        agrees=True if excluded else agrees,
        final_gap=outcome.final_gap,
        gap_error=gap_error,
        form_error=form_error,
    )


@dataclass
class OracleSummary:
    """批量校验汇总。"""

    records: List[OracleRecord] = field(default_factory=list)

    @property
    def checked(self) -> int:
        return sum(1 for r in self.records if not r.excluded)

    @property
    def excluded(self) -> int:
        return sum(1 for r in self.records if r.excluded)

    @property
    def disagreements(self) -> List[OracleRecord]:
        return [r for r in self.records if not r.excluded and not r.agrees]

    @property
    def fraction(self) -> float:
        """校验一致比例；没有可校验场景时视为 1。"""
        if self.checked == 0:
            return 1.0
        return (self.checked - len(self.disagreements)) / self.checked

    @property
    def max_form_error(self) -> float:
        return max((r.form_error for r in self.records), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.disagreements

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total": len(self.records),
            "checked": self.checked,
            "excluded": self.excluded,
            "fraction": self.fraction,
            "max_form_error": self.max_form_error,
            "passed": self.passed,
            "disagreements": [r.to_dict() for r in self.disagreements],
        }


def random_scenarios(
    n: int,
    seed: int,
    reaction: Optional[ShiftedGammaParams] = None,
    v_L_range: Tuple[float, float] = (0.0, 40.0),
    max_closing_speed: float = 15.0,
    d_V_range: Tuple[float, float] = (0.0, 120.0),
) -> List[RelativeScenario]:
    """
    生成后车快于前车的随机场景。

    运动学量和反应时间使用同一 SeedSequence 派生的两个独立子种子。
    """
    if n < 0:
        raise InvalidParamsError(f"场景数不能为负，得到 {n}")
    kin_seq, reaction_seq = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(kin_seq)
    sampler = ReactionTimeSampler(
        reaction, seed=int(reaction_seq.generate_state(1)[0])
    )

    v_L = rng.uniform(*v_L_range, size=n)
    # (0, max] 区间，保证 v_F > v_L
    closing = max_closing_speed - rng.uniform(0.0, max_closing_speed, size=n)
    d_V = rng.uniform(*d_V_range, size=n)
    t_BR = sampler.sample(n)

    return [
        RelativeScenario(
            d_V=float(d), delta_v=-float(c), t_BR=float(t), v_L=float(v)
        )
        for d, c, t, v in zip(d_V, closing, t_BR, v_L)
    ]


def run_oracle_batch(
    scenarios: Sequence[RelativeScenario],
    env: EnvConstants,
    cfg: SimConfig,
    workers: int = 1,
) -> OracleSummary:
    """批量校验，结果保持输入顺序。"""
    if workers < 1:
        raise InvalidParamsError(f"workers 必须 >= 1，得到 {workers}")

    def check(s: RelativeScenario) -> OracleRecord:
        return oracle_check(s, env, cfg)

    if workers == 1:
        records = [check(s) for s in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(check, scenarios))

    summary = OracleSummary(records=records)
    logger.info(
        "校验 %d 个场景: %d 个参与判定, %d 个在死区内",
        len(records),
        summary.checked,
        summary.excluded,
    )
    if summary.excluded:
        logger.warning(
            "%d 个场景 |DSS| <= %.3g m，未参与判定", summary.excluded, cfg.dead_band
        )
    return summary
