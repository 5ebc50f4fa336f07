"""二维参数网格扫描 - 每个网格点的 DSS 与安全相关性。"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bva import Criticality, classify
from .errors import DomainError
from .kinematics import EnvConstants, RelativeScenario, dss_relative
from .relevance import CoverageReport, classify_state, coverage_report

logger = logging.getLogger(__name__)

SWEEP_AXES = ("d_V", "delta_v", "t_BR", "v_L", "a_L", "a_F")

DEFAULT_RANGES: Dict[str, Tuple[float, float]] = {
    "d_V": (0.0, 100.0),
    "delta_v": (-15.0, 15.0),
    "t_BR": (0.3, 2.0),
    "v_L": (0.0, 40.0),
    "a_L": (-8.829, 2.0),
    "a_F": (-8.829, 2.0),
}


@dataclass(frozen=True)
class SweepState:
    """网格点状态: 相对场景加两车加速度。"""

    scenario: RelativeScenario
    a_L: float
    a_F: float

    def with_value(self, axis: str, value: float) -> "SweepState":
        if axis in ("a_L", "a_F"):
            return replace(self, **{axis: value})
        return replace(self, scenario=replace(self.scenario, **{axis: value}))

    def value(self, axis: str) -> float:
        if axis in ("a_L", "a_F"):
            return getattr(self, axis)
        return getattr(self.scenario, axis)


@dataclass(frozen=True)
class SweepPoint:
    i: int
    j: int
    values: Tuple[float, float]
    dss: float
    criticality: Criticality
    speed_relevant: int
    accel_relevant: int


@dataclass
class SweepResult:
    axes: Tuple[str, str]
    shape: Tuple[int, int]
    points: List[SweepPoint] = field(default_factory=list)
    coverage: Optional[CoverageReport] = None

    def dss_grid(self) -> np.ndarray:
        """按 (i, j) 排列的 DSS 矩阵。"""
        grid = np.empty(self.shape)
        for p in self.points:
            grid[p.i, p.j] = p.dss
        return grid

    def to_dict(self) -> Dict[str, Any]:
        return {
            "axes": list(self.axes),
            "shape": list(self.shape),
            "points": [
                {
                    "i": p.i,
                    "j": p.j,
                    self.axes[0]: p.values[0],
                    self.axes[1]: p.values[1],
                    "dss": p.dss,
                    "criticality": p.criticality.value,
                    "speed_relevant": p.speed_relevant,
                    "accel_relevant": p.accel_relevant,
                }
                for p in self.points
            ],
            "coverage": self.coverage.to_dict() if self.coverage else None,
        }


def axis_values(
    axis: str, n: int, nominal: SweepState, ranges: Dict[str, Tuple[float, float]]
) -> np.ndarray:
    """一维取值；只有 1 个点时取名义值。"""
    if n < 1:
        raise DomainError(f"网格点数必须 >= 1，得到 {n}")
    if n == 1:
        return np.array([nominal.value(axis)])
    lo, hi = ranges.get(axis, DEFAULT_RANGES[axis])
    return np.linspace(lo, hi, n)


def sweep_grid(
    axes: Sequence[str],
    grid: Tuple[int, int],
    nominal: SweepState,
    env: EnvConstants,
    ranges: Optional[Dict[str, Tuple[float, float]]] = None,
    threshold: float = 0.0,
    workers: int = 1,
) -> SweepResult:
    """在两条轴张成的网格上评估 DSS，结果按行优先顺序排列。"""
    if len(axes) != 2 or axes[0] == axes[1]:
        raise DomainError(f"需要两条不同的扫描轴，得到 {list(axes)}")
    for axis in axes:
        if axis not in SWEEP_AXES:
            raise DomainError(
                f"不支持扫描轴 {axis}，可选: {', '.join(SWEEP_AXES)}"
            )

    ranges = ranges or {}
    first = axis_values(axes[0], grid[0], nominal, ranges)
    second = axis_values(axes[1], grid[1], nominal, ranges)

    jobs = [
        (i, j, nominal.with_value(axes[0], float(x)).with_value(axes[1], float(y)))
        for i, x in enumerate(first)
        for j, y in enumerate(second)
    ]

    def evaluate_point(job) -> SweepPoint:
        i, j, state = job
        s = state.scenario
        dss = dss_relative(s, env).dss
        speed, accel = classify_state(s.v_L, s.v_F, state.a_L, state.a_F)
        return SweepPoint(
            i=i,
            j=j,
            values=(state.value(axes[0]), state.value(axes[1])),
            dss=dss,
            criticality=classify(dss, threshold),
            speed_relevant=speed,
            accel_relevant=accel,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            points = list(executor.map(evaluate_point, jobs))
    else:
        points = [evaluate_point(job) for job in jobs]

    coverage = coverage_report(
        (state.scenario.v_L, state.scenario.v_F, state.a_L, state.a_F)
        for _, _, state in jobs
    )
    logger.info("扫描 %s x %s: %d 个网格点", axes[0], axes[1], len(points))
    return SweepResult(
        axes=(axes[0], axes[1]),
        shape=(len(first), len(second)),
        points=points,
        coverage=coverage,
    )
