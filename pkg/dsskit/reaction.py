"""
反应时间模型 - 平移 Gamma 分布

t_BR = t0 + X, X ~ Gamma(k, theta)

默认参数 t0 = 0.4 s, k = 2, theta = 0.15 s，使均值等于名义反应时间 0.7 s。
分布函数 (pdf/cdf/quantile) 是纯函数；采样只通过持有独立随机数生成器的
ReactionTimeSampler 进行，一个采样器同一时间只归一个线程使用。
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from scipy import stats

from .errors import DomainError, InvalidParamsError


@dataclass(frozen=True)
class ShiftedGammaParams:
    """平移 Gamma 分布参数。"""

    t0: float = 0.4  # 平移 s
    k: float = 2.0  # 形状
    theta: float = 0.15  # 尺度 s

    def __post_init__(self):
        for name in ("t0", "k", "theta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParamsError(f"{name} 必须是有限数值，得到 {value!r}")
        if self.t0 < 0:
            raise InvalidParamsError(f"t0 不能为负，得到 {self.t0}")
        if self.k <= 0:
            raise InvalidParamsError(f"k 必须大于 0，得到 {self.k}")
        if self.theta <= 0:
            raise InvalidParamsError(f"theta 必须大于 0，得到 {self.theta}")

    @property
    def mean(self) -> float:
        return self.t0 + self.k * self.theta

    @property
    def variance(self) -> float:
        return self.k * self.theta**2

    def frozen(self):
        """对应的 scipy 冻结分布。"""
        return stats.gamma(a=self.k, loc=self.t0, scale=self.theta)

    def to_dict(self) -> Dict[str, float]:
        return {"t0": self.t0, "k": self.k, "theta": self.theta}


def pdf(params: ShiftedGammaParams, t: float) -> float:
    return float(params.frozen().pdf(t))


def cdf(params: ShiftedGammaParams, t: float) -> float:
    return float(params.frozen().cdf(t))


def quantile(params: ShiftedGammaParams, p: float) -> float:
    """逆 CDF: t0 + Gamma^-1(p; k, theta)，对 p 严格递增。"""
    if not (0.0 < p < 1.0):
        raise DomainError(f"概率 p 必须在 (0, 1) 内，得到 {p}")
    return float(params.frozen().ppf(p))


class ReactionTimeSampler:
    """
    可复现的反应时间采样器。

    使用 numpy 的 PCG64 生成器；相同种子得到逐位相同的序列。
    """

    def __init__(self, params: Optional[ShiftedGammaParams] = None, seed: int = 0):
        self.params = params or ShiftedGammaParams()
        self.seed = int(seed)
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def sample(self, n: int) -> List[float]:
        """抽取 n 个反应时间，每个都 >= t0。"""
        if n < 0:
            raise DomainError(f"样本数不能为负，得到 {n}")
        if n == 0:
            return []
        draws = self._rng.gamma(shape=self.params.k, scale=self.params.theta, size=n)
        return (self.params.t0 + draws).tolist()

    def metadata(self) -> Dict[str, Any]:
        """随机数算法标识，写入输出的来源信息。"""
        return {
            "algorithm": type(self._rng.bit_generator).__name__,
            "seed": self.seed,
            "numpy": np.__version__,
            "distribution": "shifted_gamma",
            **self.params.to_dict(),
        }


def sample(params: ShiftedGammaParams, seed: int, n: int) -> List[float]:
    """用新的采样器抽取 n 个样本。"""
    return ReactionTimeSampler(params, seed).sample(n)
