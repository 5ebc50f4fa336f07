"""
异常层次 - 所有 dsskit 错误的统一出口

每个异常类都带一个稳定的 `exit_code`，CLI 在顶层捕获 `DssError`
并以该退出码结束:

- 2: 配置错误 (ConfigError)
- 3: 领域错误 (DomainError 及其子类)
- 4: 推导错误 (DerivationError 及其子类)
- 5: 仿真预言或回放校验不一致 (OracleDisagreementError)
"""

from typing import Optional


class DssError(Exception):
    """dsskit 所有错误的基类。"""

    exit_code: int = 1


class ConfigError(DssError, ValueError):
    """配置文件无法加载或不满足不变式。"""

    exit_code = 2

    def __init__(
        self,
        message: str,
        source: Optional[str] = None,
        line: Optional[int] = None,
        key: Optional[str] = None,
    ):
        self.message = message
        self.source = source
        self.line = line
        self.key = key
        super().__init__(message)

    def __str__(self) -> str:
        location = self.source or "<config>"
        if self.line is not None:
            location = f"{location}:{self.line}"
        if self.key:
            return f"{location}: {self.key}: {self.message}"
        return f"{location}: {self.message}"


class DomainError(DssError, ValueError):
    """输入超出运动学定义域 (负速度、重叠、非有限值等)。"""

    exit_code = 3


class InvalidConstantsError(DomainError):
    """环境常量 (g, mu, l_V) 违反不变式。"""


class InvalidParamsError(DomainError):
    """分布参数违反不变式。"""


class DerivationError(DssError):
    """测试用例推导失败，可携带出错的参数轴。"""

    exit_code = 4

    def __init__(self, message: str, axis: Optional[str] = None):
        self.message = message
        self.axis = axis
        super().__init__(message)

    def __str__(self) -> str:
        if self.axis:
            return f"轴 {self.axis}: {self.message}"
        return self.message


class NoSignChangeError(DerivationError):
    """区间两端的 DSS 没有相反符号，无法夹逼边界。"""


class NonMonotoneAxisError(DerivationError):
    """DSS 在该轴区间上不是严格单调。"""


class ConvergenceError(DerivationError):
    """迭代在上限内没有收敛。"""


class OracleDisagreementError(DssError):
    """仿真结果与 DSS 符号不一致。"""

    exit_code = 5
