"""求根算法 - 夹逼二分法和割线法。"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

from .errors import ConvergenceError, NoSignChangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootResult:
    root: float
    value: float  # func(root)
    iterations: int


def bisect(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-7,
    max_iter: int = 200,
) -> RootResult:
    """
    在 [lo, hi] 上用二分法求 func 的根。

    要求 func(lo) 与 func(hi) 严格异号；区间半宽 <= tol 时停止。
    """
    if not lo < hi:
        raise NoSignChangeError(f"区间为空: [{lo}, {hi}]")
    if tol <= 0:
        raise ConvergenceError(f"容差必须大于 0，得到 {tol}")

    f_lo = func(lo)
    f_hi = func(hi)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise NoSignChangeError(
            f"区间端点函数值非有限: f({lo})={f_lo}, f({hi})={f_hi}"
        )
    if f_lo * f_hi >= 0:
        raise NoSignChangeError(
            f"区间两端没有符号变化: f({lo})={f_lo:.6g}, f({hi})={f_hi:.6g}"
        )

    for iteration in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if f_mid == 0:
            logger.debug("二分法在 %d 次迭代后命中精确根 %r", iteration, mid)
            return RootResult(root=mid, value=f_mid, iterations=iteration)
        if (f_lo < 0) == (f_mid < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if 0.5 * (hi - lo) <= tol:
            root = 0.5 * (lo + hi)
            logger.debug("二分法 %d 次迭代收敛到 %r", iteration, root)
            return RootResult(root=root, value=func(root), iterations=iteration)

    raise ConvergenceError(
        f"二分法在 {max_iter} 次迭代内未收敛 (区间 [{lo}, {hi}], tol={tol})"
    )


def secant(
    func: Callable[[float], float],
    x0: float,
    x1: float,
    tol: float,
    max_iter: int = 100,
) -> RootResult:
    """割线法，|func(x)| < tol 时返回。"""
    init_x0, init_x1 = x0, x1
    f0 = func(x0)
    f1 = func(x1)

    for iteration in range(max_iter):
        if abs(f1) < tol:
            logger.debug("割线法 %d 次迭代收敛到 %r", iteration, x1)
            return RootResult(root=x1, value=f1, iterations=iteration)
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x0, f0 = x1, f1
        x1, f1 = x2, func(x2)

    if abs(f1) < tol:
        return RootResult(root=x1, value=f1, iterations=max_iter)
    raise ConvergenceError(
        f"割线法未收敛 (x0={init_x0}, x1={init_x1}, tol={tol}, max_iter={max_iter})"
    )
