"""
边界值分析 (BVA) - 由 DSS 推导最小测试用例集

流程:
1. 选定合理可变参数轴 (相对形式: d_V, delta_v, t_BR；绝对形式 5 个)
2. 先把第一条轴 (d_V / x_L) 固定在其边界上，使名义点恰好落在 DSS = 0 曲面
3. 对每条轴二分求 DSS = 阈值 的边界，再按精度要求标定扰动 δ
4. 边界不安全一侧生成 SC 用例，安全一侧生成 NSC 用例

每条轴 n_crit_var = 2 个用例，相对形式共 6 个，绝对形式共 10 个。
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .errors import (
    ConvergenceError,
    DerivationError,
    DomainError,
    NoSignChangeError,
    NonMonotoneAxisError,
)
from .kinematics import (
    NOMINAL_D_V,
    NOMINAL_DELTA_V,
    NOMINAL_T_BR,
    NOMINAL_V_L,
    AbsoluteScenario,
    DssBreakdown,
    EnvConstants,
    RelativeScenario,
    Scenario,
    dss_slope,
    evaluate,
    to_absolute,
    to_relative,
)
from .solvers import bisect, secant

logger = logging.getLogger(__name__)

N_CRIT_VAR = 2
SLOPE_EPS = 1e-12
MONOTONE_SAMPLES = 33


class AxisId(str, Enum):
    """合理可变参数。"""

    D_V = "d_V"
    DELTA_V = "delta_v"
    T_BR = "t_BR"
    X_L = "x_L"
    X_F = "x_F"
    V_L = "v_L"
    V_F = "v_F"


class Form(str, Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


class Criticality(str, Enum):
    SC = "SC"  # 安全关键, DSS < 阈值
    NSC = "NSC"  # 非安全关键, DSS >= 阈值


FORM_AXES: Dict[Form, Tuple[AxisId, ...]] = {
    Form.RELATIVE: (AxisId.D_V, AxisId.DELTA_V, AxisId.T_BR),
    Form.ABSOLUTE: (AxisId.X_L, AxisId.X_F, AxisId.V_L, AxisId.V_F, AxisId.T_BR),
}

# DSS 对这些轴是仿射的，δ = accuracy / |slope| 精确成立
AFFINE_AXES = frozenset({AxisId.D_V, AxisId.T_BR, AxisId.X_L, AxisId.X_F})

DEFAULT_BOUNDS: Dict[AxisId, Tuple[float, float]] = {
    AxisId.D_V: (0.0, 500.0),
    AxisId.DELTA_V: (-50.0, 50.0),
    AxisId.T_BR: (0.0, 5.0),
    AxisId.X_L: (-1000.0, 1000.0),
    AxisId.X_F: (-1000.0, 1000.0),
    AxisId.V_L: (0.0, 70.0),
    AxisId.V_F: (0.0, 70.0),
}

DESCRIPTIONS: Dict[Tuple[AxisId, Criticality], str] = {
    (AxisId.D_V, Criticality.SC): "有效距离过小",
    (AxisId.D_V, Criticality.NSC): "有效距离足够大",
    (AxisId.DELTA_V, Criticality.SC): "速度差过大",
    (AxisId.DELTA_V, Criticality.NSC): "速度差足够小",
    (AxisId.T_BR, Criticality.SC): "反应时间过长",
    (AxisId.T_BR, Criticality.NSC): "反应时间足够短",
    (AxisId.X_L, Criticality.SC): "前车位置过近",
    (AxisId.X_L, Criticality.NSC): "前车位置足够远",
    (AxisId.X_F, Criticality.SC): "后车位置过于靠前",
    (AxisId.X_F, Criticality.NSC): "后车位置足够靠后",
    (AxisId.V_L, Criticality.SC): "前车速度过低",
    (AxisId.V_L, Criticality.NSC): "前车速度足够高",
    (AxisId.V_F, Criticality.SC): "后车速度过高",
    (AxisId.V_F, Criticality.NSC): "后车速度足够低",
}


def reference_nominal() -> RelativeScenario:
    """定量测试用例表对应的名义场景。"""
    return RelativeScenario(
        d_V=NOMINAL_D_V, delta_v=NOMINAL_DELTA_V, t_BR=NOMINAL_T_BR, v_L=NOMINAL_V_L
    )


# === 计数与分类 ===


def count_test_cases(n_params: int, n_crit_var: int = N_CRIT_VAR) -> int:
    """N = n_params * n_crit_var。"""
    if n_params < 1 or n_crit_var < 1:
        raise DomainError(
            f"参数个数和关键性变化因子都必须 >= 1: {n_params}, {n_crit_var}"
        )
    return n_params * n_crit_var


def classify(dss: float, threshold: float = 0.0) -> Criticality:
    """SC 当且仅当 dss < threshold。"""
    if not math.isfinite(dss):
        raise DomainError(f"DSS 必须是有限值，得到 {dss}")
    return Criticality.SC if dss < threshold else Criticality.NSC


# === 参数轴 ===


def with_value(s: Scenario, axis: AxisId, value: float) -> Scenario:
    """返回只改动一个参数的新场景。"""
    return replace(s, **{axis.value: value})


def valid_domain(
    axis: AxisId, nominal: Scenario, env: EnvConstants
) -> Tuple[float, float]:
    """在其余参数固定时，该轴物理有效的取值区间。"""
    if axis in (AxisId.D_V, AxisId.T_BR, AxisId.V_L, AxisId.V_F):
        return 0.0, math.inf
    if axis == AxisId.DELTA_V:
        return -math.inf, nominal.v_L
    if axis == AxisId.X_L:
        return nominal.x_F + env.l_V, math.inf
    if axis == AxisId.X_F:
        return -math.inf, nominal.x_L - env.l_V
    raise DomainError(f"未知参数轴: {axis}")


@dataclass(frozen=True)
class ParameterAxis:
    """带闭区间边界的参数轴。"""

    id: AxisId
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "id", AxisId(self.id))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError(f"{self.id.value} 的边界必须是有限值")
        if not self.lo < self.hi:
            raise DomainError(
                f"{self.id.value} 的边界区间为空: [{self.lo}, {self.hi}]"
            )

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.lo, self.hi

    def clipped(self, nominal: Scenario, env: EnvConstants) -> "ParameterAxis":
        """与物理有效域取交集。"""
        dom_lo, dom_hi = valid_domain(self.id, nominal, env)
        lo, hi = max(self.lo, dom_lo), min(self.hi, dom_hi)
        if not lo < hi:
            raise NoSignChangeError(
                f"边界 [{self.lo}, {self.hi}] 与有效域 [{dom_lo}, {dom_hi}] 不相交",
                axis=self.id.value,
            )
        return ParameterAxis(self.id, lo, hi)


def _axis_function(
    axis: AxisId, nominal: Scenario, env: EnvConstants, threshold: float
) -> Callable[[float], float]:
    def func(x: float) -> float:
        return evaluate(with_value(nominal, axis, x), env).dss - threshold

    return func


def check_monotone(
    axis: ParameterAxis, func: Callable[[float], float], samples: int = MONOTONE_SAMPLES
) -> int:
    """在区间网格上检查严格单调，返回方向 +1 / -1。"""
    grid = np.linspace(axis.lo, axis.hi, samples)
    diffs = np.diff([func(float(x)) for x in grid])
    if np.all(diffs > 0):
        return 1
    if np.all(diffs < 0):
        return -1
    raise NonMonotoneAxisError(
        f"DSS 在 [{axis.lo}, {axis.hi}] 上不是严格单调", axis=axis.id.value
    )


def find_boundary(
    axis: ParameterAxis,
    nominal: Scenario,
    env: EnvConstants,
    tol: float = 1e-7,
    threshold: float = 0.0,
    max_iter: int = 200,
) -> float:
    """
    沿一条轴二分求 DSS = threshold 的边界值。

    区间先与有效域求交，再检查单调性和端点异号。
    """
    try:
        clipped = axis.clipped(nominal, env)
        func = _axis_function(clipped.id, nominal, env, threshold)
        check_monotone(clipped, func)
        result = bisect(func, clipped.lo, clipped.hi, tol=tol, max_iter=max_iter)
    except DerivationError as exc:
        exc.axis = exc.axis or axis.id.value
        raise

    logger.debug(
        "轴 %s 边界 %r (%d 次迭代, 残差 %.3g)",
        axis.id.value,
        result.root,
        result.iterations,
        result.value,
    )
    return result.root


@dataclass(frozen=True)
class Perturbation:
    """边界两侧的扰动量，均为正。"""

    unsafe: float
    safe: float


def unsafe_direction(slope: float) -> float:
    """DSS 减小的方向 (+1 或 -1)。"""
    return -1.0 if slope > 0 else 1.0


def calibrate_delta(
    axis: ParameterAxis,
    boundary: float,
    accuracy: float,
    nominal: Scenario,
    env: EnvConstants,
    threshold: float = 0.0,
    max_iter: int = 100,
) -> Perturbation:
    """
    标定扰动 δ，使 |DSS(boundary ± δ) - threshold| = accuracy。

    仿射轴直接取 accuracy / |slope|；其余轴在两侧分别用割线法迭代。
    """
    if not accuracy > 0:
        raise DomainError(f"accuracy 必须大于 0，得到 {accuracy}")

    at_boundary = with_value(nominal, axis.id, boundary)
    slope = dss_slope(axis.id.value, at_boundary, env)
    if abs(slope) <= SLOPE_EPS:
        raise NonMonotoneAxisError("边界处斜率为 0，无法标定", axis=axis.id.value)

    base = accuracy / abs(slope)
    if axis.id in AFFINE_AXES:
        return Perturbation(unsafe=base, safe=base)

    func = _axis_function(axis.id, nominal, env, threshold)
    direction = unsafe_direction(slope)

    def solve(sign: float) -> float:
        def residual(delta: float) -> float:
            return abs(func(boundary + sign * delta)) - accuracy

        try:
            result = secant(
                residual, base, base * 1.05, tol=accuracy * 1e-6, max_iter=max_iter
            )
        except ConvergenceError as exc:
            exc.axis = axis.id.value
            raise
        if result.root <= 0:
            raise ConvergenceError(
                f"标定得到非正扰动 {result.root}", axis=axis.id.value
            )
        return result.root

    perturbation = Perturbation(unsafe=solve(direction), safe=solve(-direction))
    logger.debug(
        "轴 %s 扰动: 不安全侧 %r, 安全侧 %r",
        axis.id.value,
        perturbation.unsafe,
        perturbation.safe,
    )
    return perturbation


# === 配置与结果 ===


@dataclass
class DerivationConfig:
    """测试用例推导配置。"""

    accuracy: float = 0.01  # m
    boundary_tol: float = 1e-7  # 轴单位
    n_crit_var: int = N_CRIT_VAR
    nominal: Scenario = field(default_factory=reference_nominal)
    env: EnvConstants = field(default_factory=EnvConstants)
    threshold: float = 0.0  # m
    form: Form = Form.RELATIVE
    bounds: Dict[AxisId, Tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_BOUNDS)
    )
    axes: Optional[Tuple[AxisId, ...]] = None  # None = 该形式的全部轴
    max_iter: int = 200

    def __post_init__(self):
        self.form = Form(self.form)
        if not (math.isfinite(self.accuracy) and self.accuracy > 0):
            raise DomainError(f"accuracy 必须大于 0，得到 {self.accuracy}")
        if not (math.isfinite(self.boundary_tol) and self.boundary_tol > 0):
            raise DomainError(
                f"boundary_tol 必须大于 0，得到 {self.boundary_tol}"
            )
        if self.n_crit_var != N_CRIT_VAR:
            raise DomainError(
                f"n_crit_var 固定为 {N_CRIT_VAR}，得到 {self.n_crit_var}"
            )
        if not math.isfinite(self.threshold):
            raise DomainError(f"threshold 必须是有限值，得到 {self.threshold}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter 必须 >= 1，得到 {self.max_iter}")

        bounds = dict(DEFAULT_BOUNDS)
        bounds.update(
            {AxisId(k): (float(v[0]), float(v[1])) for k, v in self.bounds.items()}
        )
        self.bounds = bounds

        if self.axes is not None:
            self.axes = tuple(AxisId(a) for a in self.axes)
            allowed = FORM_AXES[self.form]
            for axis in self.axes:
                if axis not in allowed:
                    raise DomainError(
                        f"{self.form.value} 形式没有参数轴 {axis.value}"
                    )

    @property
    def derived_axes(self) -> Tuple[AxisId, ...]:
        """按固定顺序排列的待推导轴。"""
        if self.axes is None:
            return FORM_AXES[self.form]
        return tuple(a for a in FORM_AXES[self.form] if a in self.axes)

    def axis(self, axis_id: AxisId) -> ParameterAxis:
        lo, hi = self.bounds[AxisId(axis_id)]
        return ParameterAxis(AxisId(axis_id), lo, hi)

    def scenario(self) -> Scenario:
        """名义场景，转换到推导所用的形式。"""
        if self.form == Form.RELATIVE and isinstance(self.nominal, AbsoluteScenario):
            return to_relative(self.nominal, self.env)
        if self.form == Form.ABSOLUTE and isinstance(self.nominal, RelativeScenario):
            return to_absolute(self.nominal, self.env)
        return self.nominal

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "boundary_tol": self.boundary_tol,
            "n_crit_var": self.n_crit_var,
            "threshold": self.threshold,
            "form": self.form.value,
            "nominal": self.nominal.to_dict(),
            "env": self.env.to_dict(),
            "bounds": {a.value: list(b) for a, b in self.bounds.items()},
            "axes": [a.value for a in self.derived_axes],
            "max_iter": self.max_iter,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DerivationConfig":
        return cls(
            accuracy=data.get("accuracy", 0.01),
            boundary_tol=data.get("boundary_tol", 1e-7),
            n_crit_var=data.get("n_crit_var", N_CRIT_VAR),
            nominal=scenario_from_dict(data["nominal"]),
            env=EnvConstants(**data["env"]),
            threshold=data.get("threshold", 0.0),
            form=data.get("form", Form.RELATIVE.value),
            bounds={k: tuple(v) for k, v in data.get("bounds", {}).items()},
            axes=tuple(data["axes"]) if data.get("axes") else None,
            max_iter=data.get("max_iter", 200),
        )


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    """按字段判断场景形式。"""
    if "d_V" in data:
        return RelativeScenario.from_dict(data)
    return AbsoluteScenario.from_dict(data)


@dataclass(frozen=True)
class TestCase:
    """单个边界测试用例。"""

    id: str
    axis: AxisId
    criticality: Criticality
    params: Scenario
    expected_dss: float
    breakdown: DssBreakdown
    description: str = ""
    boundary: float = math.nan
    offset: float = 0.0  # 相对边界的带符号偏移

    __test__ = False  # 避免被 pytest 当作测试类收集

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "axis": self.axis.value,
            "criticality": self.criticality.value,
            "description": self.description,
            "params": self.params.to_dict(),
            "expected_dss": self.expected_dss,
            "breakdown": self.breakdown.to_dict(),
            "boundary": self.boundary,
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TestCase":
        bd = data["breakdown"]
        return cls(
            id=data["id"],
            axis=AxisId(data["axis"]),
            criticality=Criticality(data["criticality"]),
            params=scenario_from_dict(data["params"]),
            expected_dss=float(data["expected_dss"]),
            breakdown=DssBreakdown(
                space_distance_a=bd["a"],
                stop_distance_b=bd["b"],
                x_B_L=bd["x_B_L"],
                x_R_F=bd["x_R_F"],
                x_B_F=bd["x_B_F"],
                dss=bd["dss"],
            ),
            description=data.get("description", ""),
            boundary=float(data.get("boundary", math.nan)),
            offset=float(data.get("offset", 0.0)),
        )


@dataclass(frozen=True)
class SkippedAxis:
    """未生成用例的轴及原因。"""

    axis: AxisId
    reason: str

    def to_dict(self) -> Dict[str, str]:
        return {"axis": self.axis.value, "reason": self.reason}


@dataclass
class Provenance:
    """推导来源信息。"""

    tool_version: str
    created_at: str
    rng: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_timestamp: bool = True) -> Dict[str, Any]:
        data = {"tool_version": self.tool_version, "rng": dict(self.rng)}
        if include_timestamp:
            data["created_at"] = self.created_at
        return data


@dataclass
class TestSuite:
    """推导得到的测试用例集。"""

    cases: List[TestCase]
    config: DerivationConfig
    provenance: Provenance
    skipped: List[SkippedAxis] = field(default_factory=list)

    __test__ = False

    @property
    def form(self) -> Form:
        return self.config.form

    @property
    def sc_cases(self) -> List[TestCase]:
        return [c for c in self.cases if c.criticality == Criticality.SC]

    @property
    def nsc_cases(self) -> List[TestCase]:
        return [c for c in self.cases if c.criticality == Criticality.NSC]

    def get(self, case_id: str) -> Optional[TestCase]:
        for case in self.cases:
            if case.id == case_id:
                return case
        return None

    def to_dict(self, include_timestamp: bool = True) -> Dict[str, Any]:
        return {
            "form": self.form.value,
            "cases": [c.to_dict() for c in self.cases],
            "skipped": [s.to_dict() for s in self.skipped],
            "config": self.config.to_dict(),
            "provenance": self.provenance.to_dict(include_timestamp),
        }

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(include_timestamp), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TestSuite":
        prov = data.get("provenance", {})
        return cls(
            cases=[TestCase.from_dict(c) for c in data["cases"]],
            config=DerivationConfig.from_dict(data["config"]),
            provenance=Provenance(
                tool_version=prov.get("tool_version", ""),
                created_at=prov.get("created_at", ""),
                rng=prov.get("rng", {}),
            ),
            skipped=[
                SkippedAxis(AxisId(s["axis"]), s["reason"])
                for s in data.get("skipped", [])
            ],
        )


# === 推导 ===


def _at_domain_edge(axis: ParameterAxis, value: float, tol: float) -> bool:
    return abs(value - axis.lo) <= tol or abs(value - axis.hi) <= tol


def derive_suite(
    config: DerivationConfig, rng: Optional[Dict[str, Any]] = None
) -> TestSuite:
    """
    按固定轴顺序推导最小测试用例集。

    第一条轴的边界先固定到名义点上，其余轴的用例只在本轴上偏离该点。
    """
    from . import __version__

    env = config.env
    nominal = config.scenario()
    pin_axis = FORM_AXES[config.form][0]

    def boundary_of(axis_id: AxisId, at: Scenario) -> float:
        return find_boundary(
            config.axis(axis_id),
            at,
            env,
            tol=config.boundary_tol,
            threshold=config.threshold,
            max_iter=config.max_iter,
        )

    pin_value = boundary_of(pin_axis, nominal)
    pinned = with_value(nominal, pin_axis, pin_value)
    logger.debug("名义点固定: %s = %r", pin_axis.value, pin_value)

    cases: List[TestCase] = []
    skipped: List[SkippedAxis] = []

    def skip(axis_id: AxisId, reason: str) -> None:
        logger.warning("跳过轴 %s: %s", axis_id.value, reason)
        skipped.append(SkippedAxis(axis_id, reason))

    for axis_id in config.derived_axes:
        slope = dss_slope(axis_id.value, pinned, env)
        if abs(slope) <= SLOPE_EPS:
            skip(axis_id, "名义点处 DSS 对该轴斜率为 0")
            continue

        axis = config.axis(axis_id)
        current = getattr(pinned, axis_id.value)
        clipped = axis.clipped(pinned, env)
        at_edge = axis_id != pin_axis and _at_domain_edge(
            clipped, current, config.boundary_tol
        )
        if at_edge:
            skip(axis_id, "边界位于有效域端点，无法在两侧构造用例")
            continue

        boundary = pin_value if axis_id == pin_axis else boundary_of(axis_id, pinned)
        try:
            delta = calibrate_delta(
                axis, boundary, config.accuracy, pinned, env, config.threshold
            )
            direction = unsafe_direction(slope)
            unsafe = with_value(pinned, axis_id, boundary + direction * delta.unsafe)
            safe = with_value(pinned, axis_id, boundary - direction * delta.safe)
            unsafe_bd = evaluate(unsafe, env)
            safe_bd = evaluate(safe, env)
        except DomainError as exc:
            skip(axis_id, f"扰动后场景超出有效域: {exc}")
            continue

        if (
            classify(unsafe_bd.dss, config.threshold) != Criticality.SC
            or classify(safe_bd.dss, config.threshold) != Criticality.NSC
        ):
            raise DerivationError(
                f"边界两侧分类未交替: DSS={unsafe_bd.dss!r} / {safe_bd.dss!r}",
                axis=axis_id.value,
            )

        n = len(cases)
        for offset, params, bd, crit, number in (
            (direction * delta.unsafe, unsafe, unsafe_bd, Criticality.SC, n + 1),
            (-direction * delta.safe, safe, safe_bd, Criticality.NSC, n + 2),
        ):
            cases.append(
                TestCase(
                    id=f"TC.{number}",
                    axis=axis_id,
                    criticality=crit,
                    params=params,
                    expected_dss=bd.dss,
                    breakdown=bd,
                    description=DESCRIPTIONS[(axis_id, crit)],
                    boundary=boundary,
                    offset=offset,
                )
            )

    logger.info(
        "推导完成: %d 个用例, %d 条轴跳过 (%s 形式)",
        len(cases),
        len(skipped),
        config.form.value,
    )
    return TestSuite(
        cases=cases,
        config=config,
        provenance=Provenance(
            tool_version=__version__,
            created_at=datetime.now(timezone.utc).isoformat(),
            rng=dict(rng or {}),
        ),
        skipped=skipped,
    )
