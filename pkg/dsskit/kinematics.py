"""
运动学核心 - DSS (Difference Space Stopping) 安全指标

两车跟驰场景下:
- 空间距离 a = d_V + x_B,L  (有效距离 + 前车制动距离)
- 停车距离 b = x_R,F + x_B,F  (后车反应距离 + 后车制动距离)
- DSS = a - b，小于 0 表示安全关键

同一指标有两种表示:
- 绝对形式: (x_L, x_F, v_L, v_F, t_BR)
- 相对形式: (d_V, delta_v, t_BR)，另携带前车速度 v_L 作为上下文

所有量均为 SI 单位。所有值对象构造后不可变，计算函数无共享状态。
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Union

from .errors import DomainError, InvalidConstantsError

KMH_PER_MS = 3.6

# 由定量测试用例表反推出的名义值
NOMINAL_V_L = 27.7778  # m/s (100 km/h)
NOMINAL_DELTA_V = -5.5556  # m/s (-20 km/h)
NOMINAL_T_BR = 0.7  # s
NOMINAL_D_V = 42.56  # m


def kmh_to_ms(v: float) -> float:
    """km/h 转 m/s，换算因子精确为 1/3.6。"""
    return v / KMH_PER_MS


def ms_to_kmh(v: float) -> float:
    """m/s 转 km/h。"""
    return v * KMH_PER_MS


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} 必须是有限值，得到 {value}")


@dataclass(frozen=True)
class EnvConstants:
    """环境常量: 重力加速度、摩擦系数、车长。"""

    g: float = 9.81  # m/s²
    mu: float = 0.9  # 无量纲
    l_V: float = 5.0  # m

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """校验不变式: g > 0, 0 < mu <= 1.5, l_V >= 0。"""
        for name in ("g", "mu", "l_V"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidConstantsError(f"{name} 必须是有限数值，得到 {value!r}")
        if self.g <= 0:
            raise InvalidConstantsError(f"g 必须大于 0，得到 {self.g}")
        if not 0 < self.mu <= 1.5:
            raise InvalidConstantsError(f"mu 必须在 (0, 1.5] 内，得到 {self.mu}")
        if self.l_V < 0:
            raise InvalidConstantsError(f"l_V 不能为负，得到 {self.l_V}")

    @property
    def a_max(self) -> float:
        """最大制动减速度 a_B,max = g * mu。"""
        return max_braking_decel(self)

    def to_dict(self) -> Dict[str, float]:
        return {"g": self.g, "mu": self.mu, "l_V": self.l_V}


@dataclass(frozen=True)
class AbsoluteScenario:
    """绝对形式的跟驰场景。"""

    x_L: float  # 前车位置 m
    x_F: float  # 后车位置 m
    v_L: float  # 前车速度 m/s
    v_F: float  # 后车速度 m/s
    t_BR: float  # 后车制动反应时间 s

    def __post_init__(self):
        _require_finite(
            x_L=self.x_L, x_F=self.x_F, v_L=self.v_L, v_F=self.v_F, t_BR=self.t_BR
        )
        if self.t_BR < 0:
            raise DomainError(f"t_BR 不能为负，得到 {self.t_BR}")

    def effective_distance(self, env: EnvConstants) -> float:
        return effective_distance(self.x_L, self.x_F, env.l_V)

    def to_dict(self) -> Dict[str, float]:
        return {
            "x_L": self.x_L,
            "x_F": self.x_F,
            "v_L": self.v_L,
            "v_F": self.v_F,
            "t_BR": self.t_BR,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AbsoluteScenario":
        return cls(
            x_L=float(data["x_L"]),
            x_F=float(data["x_F"]),
            v_L=float(data["v_L"]),
            v_F=float(data["v_F"]),
            t_BR=float(data["t_BR"]),
        )


@dataclass(frozen=True)
class RelativeScenario:
    """
    相对形式的跟驰场景。

    相对公式中仍然出现 v_L，因此 v_L 作为显式上下文字段保留。
    """

    d_V: float  # 有效距离 m
    delta_v: float  # 速度差 v_L - v_F, m/s
    t_BR: float  # 反应时间 s
    v_L: float = NOMINAL_V_L  # 前车速度上下文 m/s

    def __post_init__(self):
        _require_finite(
            d_V=self.d_V, delta_v=self.delta_v, t_BR=self.t_BR, v_L=self.v_L
        )
        if self.d_V < 0:
            raise DomainError(f"d_V 不能为负 (车辆重叠)，得到 {self.d_V}")
        if self.t_BR < 0:
            raise DomainError(f"t_BR 不能为负，得到 {self.t_BR}")

    @property
    def v_F(self) -> float:
        """后车速度 v_F = v_L - delta_v。"""
        return self.v_L - self.delta_v

    def to_dict(self) -> Dict[str, float]:
        return {
            "d_V": self.d_V,
            "delta_v": self.delta_v,
            "t_BR": self.t_BR,
            "v_L": self.v_L,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RelativeScenario":
        return cls(
            d_V=float(data["d_V"]),
            delta_v=float(data["delta_v"]),
            t_BR=float(data["t_BR"]),
            v_L=float(data.get("v_L", NOMINAL_V_L)),
        )


Scenario = Union[AbsoluteScenario, RelativeScenario]


@dataclass(frozen=True)
class DssBreakdown:
    """DSS 的分项结果。"""

    space_distance_a: float
    stop_distance_b: float
    x_B_L: float  # 前车制动距离
    x_R_F: float  # 后车反应距离
    x_B_F: float  # 后车制动距离
    dss: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "a": self.space_distance_a,
            "b": self.stop_distance_b,
            "x_B_L": self.x_B_L,
            "x_R_F": self.x_R_F,
            "x_B_F": self.x_B_F,
            "dss": self.dss,
        }


# === 基本量 ===


def max_braking_decel(env: EnvConstants) -> float:
    """a_B,max = g * mu，严格为正。"""
    env.validate()
    return env.g * env.mu


def effective_distance(x_L: float, x_F: float, l_V: float) -> float:
    """有效距离 d = x_L - x_F - l_V，可能为负 (表示重叠)。"""
    return x_L - x_F - l_V


def braking_distance(v: float, a_max: float) -> float:
    """以 a_max 从速度 v 制动到停止的距离 v² / (2 a_max)。"""
    if not math.isfinite(v) or not math.isfinite(a_max):
        raise DomainError(f"非有限输入: v={v}, a_max={a_max}")
    if a_max <= 0:
        raise DomainError(f"a_max 必须大于 0，得到 {a_max}")
    if v < 0:
        raise DomainError(f"速度不能为负，得到 {v}")
    return v * v / (2.0 * a_max)


def _breakdown(
    d_V: float, v_L: float, v_F: float, t_BR: float, a_max: float
) -> DssBreakdown:
    x_B_L = braking_distance(v_L, a_max)
    x_R_F = v_F * t_BR
    x_B_F = braking_distance(v_F, a_max)
    a = d_V + x_B_L
    b = x_R_F + x_B_F
    return DssBreakdown(
        space_distance_a=a,
        stop_distance_b=b,
        x_B_L=x_B_L,
        x_R_F=x_R_F,
        x_B_F=x_B_F,
        dss=a - b,
    )


# === DSS ===


def dss_absolute(s: AbsoluteScenario, env: EnvConstants) -> DssBreakdown:
    """绝对形式 DSS。"""
    a_max = max_braking_decel(env)
    if s.v_L < 0 or s.v_F < 0:
        raise DomainError(f"速度不能为负: v_L={s.v_L}, v_F={s.v_F}")
    d_V = s.effective_distance(env)
    if d_V < 0:
        raise DomainError(f"车辆重叠: x_L - x_F - l_V = {d_V}")
    return _breakdown(d_V, s.v_L, s.v_F, s.t_BR, a_max)


def dss_relative(s: RelativeScenario, env: EnvConstants) -> DssBreakdown:
    """相对形式 DSS，代入 v_F = v_L - delta_v。"""
    a_max = max_braking_decel(env)
    if s.v_L < 0:
        raise DomainError(f"v_L 不能为负，得到 {s.v_L}")
    v_F = s.v_F
    if v_F < 0:
        raise DomainError(
            f"后车速度 v_L - delta_v = {v_F} 为负 (v_L={s.v_L}, delta_v={s.delta_v})"
        )
    return _breakdown(s.d_V, s.v_L, v_F, s.t_BR, a_max)


def evaluate(s: Scenario, env: EnvConstants) -> DssBreakdown:
    """按场景类型分派到绝对/相对形式。"""
    if isinstance(s, AbsoluteScenario):
        return dss_absolute(s, env)
    return dss_relative(s, env)


# === 形式转换 ===


def to_relative(s: AbsoluteScenario, env: EnvConstants) -> RelativeScenario:
    """d_V = x_L - x_F - l_V, delta_v = v_L - v_F。"""
    return RelativeScenario(
        d_V=s.effective_distance(env),
        delta_v=s.v_L - s.v_F,
        t_BR=s.t_BR,
        v_L=s.v_L,
    )


def to_absolute(
    s: RelativeScenario, env: EnvConstants, x_F_anchor: float = 0.0
) -> AbsoluteScenario:
    """以 x_F_anchor 为后车位置还原绝对形式。"""
    v_F = s.v_F
    if v_F < 0:
        raise DomainError(f"隐含的后车速度 v_F = {v_F} 为负")
    return AbsoluteScenario(
        x_L=x_F_anchor + s.d_V + env.l_V,
        x_F=x_F_anchor,
        v_L=s.v_L,
        v_F=v_F,
        t_BR=s.t_BR,
    )


# === 解析偏导 ===


def dss_slope(axis: str, s: Scenario, env: EnvConstants) -> float:
    """
    DSS 对单个参数的解析偏导。

    相对形式: d_V -> 1, delta_v -> t_BR + v_F/a, t_BR -> -v_F
    绝对形式: x_L -> 1, x_F -> -1, v_L -> v_L/a, v_F -> -(t_BR + v_F/a), t_BR -> -v_F
    """
    a_max = max_braking_decel(env)
    v_F = s.v_F

    if isinstance(s, RelativeScenario):
        slopes = {
            "d_V": 1.0,
            "delta_v": s.t_BR + v_F / a_max,
            "t_BR": -v_F,
        }
    else:
        slopes = {
            "x_L": 1.0,
            "x_F": -1.0,
            "v_L": s.v_L / a_max,
            "v_F": -(s.t_BR + v_F / a_max),
            "t_BR": -v_F,
        }

    if axis not in slopes:
        raise DomainError(f"{type(s).__name__} 没有参数轴 {axis}")
    return slopes[axis]
