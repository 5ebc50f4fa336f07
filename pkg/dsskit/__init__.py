"""
dsskit - 基于 DSS 安全指标的跟驰场景测试用例推导

DSS (Difference Space Stopping) 比较前车的空间距离与后车的停车距离，
小于 0 表示安全关键。在此基础上用边界值分析推导最小测试用例集，
并用独立的两车制动仿真校验。

核心组件:
- kinematics: DSS 的绝对/相对形式与形式转换
- relevance: 速度/加速度安全相关性矩阵与覆盖率
- reaction: 平移 Gamma 反应时间模型
- bva: 边界求解、扰动标定与测试用例集推导
- sim: 闭式分段制动仿真与一致性校验
- sweep: 二维参数网格扫描
"""

__version__ = "0.1.0"

from .bva import (
    AxisId,
    Criticality,
    DerivationConfig,
    Form,
    ParameterAxis,
    TestCase,
    TestSuite,
    calibrate_delta,
    classify,
    count_test_cases,
    derive_suite,
    find_boundary,
)
from .config import DsskitConfig, load_config
from .errors import (
    ConfigError,
    DerivationError,
    DomainError,
    DssError,
    OracleDisagreementError,
)
from .kinematics import (
    AbsoluteScenario,
    DssBreakdown,
    EnvConstants,
    RelativeScenario,
    dss_absolute,
    dss_relative,
    evaluate,
    to_absolute,
    to_relative,
)
from .reaction import ReactionTimeSampler, ShiftedGammaParams
from .relevance import ACCEL_MATRIX, SPEED_MATRIX, Sign, coverage_report
from .sim import SimConfig, SimOutcome, oracle_check, simulate
from .sweep import sweep_grid

__all__ = [
    # 运动学
    "EnvConstants",
    "AbsoluteScenario",
    "RelativeScenario",
    "DssBreakdown",
    "dss_absolute",
    "dss_relative",
    "evaluate",
    "to_relative",
    "to_absolute",
    # 相关性
    "Sign",
    "SPEED_MATRIX",
    "ACCEL_MATRIX",
    "coverage_report",
    # 反应时间
    "ShiftedGammaParams",
    "ReactionTimeSampler",
    # 边界值分析
    "AxisId",
    "Form",
    "Criticality",
    "ParameterAxis",
    "DerivationConfig",
    "TestCase",
    "TestSuite",
    "count_test_cases",
    "classify",
    "find_boundary",
    "calibrate_delta",
    "derive_suite",
    # 仿真
    "SimConfig",
    "SimOutcome",
    "simulate",
    "oracle_check",
    "sweep_grid",
    # 配置与错误
    "DsskitConfig",
    "load_config",
    "DssError",
    "ConfigError",
    "DomainError",
    "DerivationError",
    "OracleDisagreementError",
]
