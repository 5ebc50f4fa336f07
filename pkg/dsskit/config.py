"""
场景配置文件加载

配置文件为 JSON (也接受 YAML)，所有块都是可选的:

    env:           {g, mu, l_V}
    scenario:      {relative: {...}} 或 {absolute: {...}}
    accelerations: {a_L, a_F}
    reaction_time: {t0, k, theta, seed}
    derivation:    {accuracy, boundary_tol, threshold, form, max_iter, axes, bounds}
    sim:           {dt, max_time, dead_band, samples, gap_tol}
    sweep:         {ranges: {axis: [lo, hi]}}

速度可以用 speed_unit: kmh 标注，加载时精确除以 3.6。
错误信息带有出错字段所在的行号。
"""

import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple, Union

import yaml

from .bva import AxisId, DerivationConfig, Form, reference_nominal
from .errors import ConfigError, DomainError
from .kinematics import (
    NOMINAL_D_V,
    NOMINAL_DELTA_V,
    NOMINAL_T_BR,
    NOMINAL_V_L,
    AbsoluteScenario,
    EnvConstants,
    RelativeScenario,
    Scenario,
    effective_distance,
    kmh_to_ms,
    to_absolute,
    to_relative,
)
from .reaction import ShiftedGammaParams, quantile
from .sim import SimConfig
from .sweep import SWEEP_AXES, SweepState

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64

BLOCKS = {
    "env": ("g", "mu", "l_V"),
    "scenario": ("relative", "absolute"),
    "accelerations": ("a_L", "a_F"),
    "reaction_time": ("t0", "k", "theta", "seed"),
    "derivation": (
        "accuracy",
        "boundary_tol",
        "threshold",
        "form",
        "max_iter",
        "axes",
        "bounds",
    ),
    "sim": ("dt", "max_time", "dead_band", "samples", "gap_tol"),
    "sweep": ("ranges",),
}

RELATIVE_KEYS = ("d_V", "delta_v", "t_BR", "t_BR_quantile", "v_L", "speed_unit")
ABSOLUTE_KEYS = ("x_L", "x_F", "v_L", "v_F", "t_BR", "t_BR_quantile", "speed_unit")
SPEED_UNITS = ("si", "kmh")


@dataclass
class DsskitConfig:
    """一次命令运行所需的全部配置。"""

    env: EnvConstants = field(default_factory=EnvConstants)
    scenario: Scenario = field(default_factory=reference_nominal)
    a_L: Optional[float] = None  # 缺省为 -a_max
    a_F: Optional[float] = None
    reaction: ShiftedGammaParams = field(default_factory=ShiftedGammaParams)
    seed: Optional[int] = None  # 缺省时由 CLI 取 $DSSKIT_SEED 或 0
    derivation: DerivationConfig = field(default_factory=DerivationConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    sweep_ranges: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    source: str = "<默认>"

    def relative(self) -> RelativeScenario:
        if isinstance(self.scenario, AbsoluteScenario):
            return to_relative(self.scenario, self.env)
        return self.scenario

    def absolute(self) -> AbsoluteScenario:
        if isinstance(self.scenario, RelativeScenario):
            return to_absolute(self.scenario, self.env)
        return self.scenario

    @property
    def accelerations(self) -> Tuple[float, float]:
        """(a_L, a_F)，缺省为两车都以最大减速度制动。"""
        a_L = -self.env.a_max if self.a_L is None else self.a_L
        a_F = -self.env.a_max if self.a_F is None else self.a_F
        return a_L, a_F

    def sweep_state(self) -> SweepState:
        a_L, a_F = self.accelerations
        return SweepState(scenario=self.relative(), a_L=a_L, a_F=a_F)

    def to_dict(self) -> Dict[str, Any]:
        a_L, a_F = self.accelerations
        return {
            "source": self.source,
            "env": self.env.to_dict(),
            "scenario": self.scenario.to_dict(),
            "accelerations": {"a_L": a_L, "a_F": a_F},
            "reaction_time": {**self.reaction.to_dict(), "seed": self.seed},
            "derivation": self.derivation.to_dict(),
            "sim": self.sim.to_dict(),
            "sweep": {"ranges": {k: list(v) for k, v in self.sweep_ranges.items()}},
        }


# === 行号定位 ===


class _Locator:
    """按键路径查找 YAML 节点所在行。"""

    def __init__(self, source: str, root: Optional[yaml.Node]):
        self.source = source
        self.root = root

    def line(self, *path: str) -> Optional[int]:
        node = self.root
        line = None
        for key in path:
            if not isinstance(node, yaml.MappingNode):
                break
            for key_node, value_node in node.value:
                if key_node.value == key:
                    line = key_node.start_mark.line + 1
                    node = value_node
                    break
            else:
                break
        return line

    def error(self, message: str, *path: str) -> ConfigError:
        return ConfigError(
            message, source=self.source, line=self.line(*path), key=".".join(path)
        )

    @contextmanager
    def block(self, *path: str) -> Iterator[None]:
        """把构造类型对象时的校验错误转换为带行号的 ConfigError。"""
        try:
            yield
        except ConfigError:
            raise
        except (DomainError, TypeError, ValueError) as exc:
            raise self.error(str(exc), *path) from exc


def _mapping(
    loc: _Locator, data: Any, allowed: Tuple[str, ...], *path: str
) -> Dict[str, Any]:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise loc.error("应为映射 (对象)", *path)
    for key in data:
        if key not in allowed:
            raise loc.error(
                f"未知字段 {key!r}，可选: {', '.join(allowed)}", *path, str(key)
            )
    return data


def _number(loc: _Locator, value: Any, *path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise loc.error(f"应为数值，得到 {value!r}", *path)
    return float(value)


def _seed_problem(value: Any) -> Optional[str]:
    if isinstance(value, bool) or not isinstance(value, int):
        return f"种子应为整数，得到 {value!r}"
    if not 0 <= value < SEED_LIMIT:
        return f"种子应在 [0, 2**64) 内，得到 {value}"
    return None


def check_seed(value: Any, source: Optional[str] = None, key: str = "seed") -> int:
    """种子必须是 [0, 2**64) 内的整数，否则抛出 ConfigError。"""
    problem = _seed_problem(value)
    if problem:
        raise ConfigError(problem, source=source, key=key)
    return value


def _numbers(loc: _Locator, block: Dict[str, Any], *path: str) -> Dict[str, float]:
    return {k: _number(loc, v, *path, k) for k, v in block.items()}


def _pair(loc: _Locator, value: Any, *path: str) -> Tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise loc.error(f"应为 [lo, hi]，得到 {value!r}", *path)
    return _number(loc, value[0], *path), _number(loc, value[1], *path)


# === 各块解析 ===


def _parse_t_BR(
    loc: _Locator, block: Dict[str, Any], reaction: ShiftedGammaParams, *path: str
) -> float:
    if "t_BR" in block and "t_BR_quantile" in block:
        raise loc.error(
            "t_BR 与 t_BR_quantile 只能给出一个", *path, "t_BR_quantile"
        )
    if "t_BR_quantile" in block:
        p = _number(loc, block["t_BR_quantile"], *path, "t_BR_quantile")
        with loc.block(*path, "t_BR_quantile"):
            return quantile(reaction, p)
    return _number(loc, block.get("t_BR", NOMINAL_T_BR), *path, "t_BR")


def _speed_scale(loc: _Locator, block: Dict[str, Any], *path: str):
    unit = block.get("speed_unit", "si")
    if unit not in SPEED_UNITS:
        raise loc.error(f"speed_unit 只能是 si 或 kmh，得到 {unit!r}", *path)
    return kmh_to_ms if unit == "kmh" else float


def _parse_scenario(
    loc: _Locator, data: Any, env: EnvConstants, reaction: ShiftedGammaParams
) -> Scenario:
    block = _mapping(loc, data, BLOCKS["scenario"], "scenario")
    if not block:
        return reference_nominal()
    if len(block) != 1:
        raise loc.error("relative 与 absolute 必须恰好给出一个", "scenario")

    if "relative" in block:
        path = ("scenario", "relative")
        body = _mapping(loc, block["relative"], RELATIVE_KEYS, *path)
        speed = _speed_scale(loc, body, *path, "speed_unit")
        t_BR = _parse_t_BR(loc, body, reaction, *path)
        # 缺省值已是 m/s，只换算文件中给出的速度
        values = {
            k: _number(loc, body[k], *path, k)
            for k in ("d_V", "delta_v", "v_L")
            if k in body
        }
        with loc.block(*path):
            return RelativeScenario(
                d_V=values.get("d_V", NOMINAL_D_V),
                delta_v=(
                    speed(values["delta_v"]) if "delta_v" in values else NOMINAL_DELTA_V
                ),
                t_BR=t_BR,
                v_L=speed(values["v_L"]) if "v_L" in values else NOMINAL_V_L,
            )

    path = ("scenario", "absolute")
    body = _mapping(loc, block["absolute"], ABSOLUTE_KEYS, *path)
    for key in ("x_L", "x_F", "v_L", "v_F"):
        if key not in body:
            raise loc.error(f"缺少字段 {key}", *path)
    speed = _speed_scale(loc, body, *path, "speed_unit")
    t_BR = _parse_t_BR(loc, body, reaction, *path)
    values = {
        k: _number(loc, body[k], *path, k) for k in ("x_L", "x_F", "v_L", "v_F")
    }
    gap = effective_distance(values["x_L"], values["x_F"], env.l_V)
    if gap < 0:
        raise loc.error(f"车辆重叠: x_L - x_F - l_V = {gap}", *path, "x_L")
    with loc.block(*path):
        return AbsoluteScenario(
            x_L=values["x_L"],
            x_F=values["x_F"],
            v_L=speed(values["v_L"]),
            v_F=speed(values["v_F"]),
            t_BR=t_BR,
        )


def _parse_derivation(
    loc: _Locator, data: Any, scenario: Scenario, env: EnvConstants
) -> DerivationConfig:
    block = _mapping(loc, data, BLOCKS["derivation"], "derivation")
    kwargs: Dict[str, Any] = {}
    for key in ("accuracy", "boundary_tol", "threshold"):
        if key in block:
            kwargs[key] = _number(loc, block[key], "derivation", key)
    if "max_iter" in block:
        max_iter = _number(loc, block["max_iter"], "derivation", "max_iter")
        kwargs["max_iter"] = int(max_iter)
    if "form" in block:
        if block["form"] not in [f.value for f in Form]:
            raise loc.error(
                f"form 只能是 relative 或 absolute，得到 {block['form']!r}",
                "derivation",
                "form",
            )
        kwargs["form"] = block["form"]
    if "axes" in block:
        if not isinstance(block["axes"], list) or not block["axes"]:
            raise loc.error("axes 应为非空列表", "derivation", "axes")
        kwargs["axes"] = tuple(block["axes"])
    if "bounds" in block:
        axis_names = tuple(a.value for a in AxisId)
        bounds = _mapping(loc, block["bounds"], axis_names, "derivation", "bounds")
        kwargs["bounds"] = {
            k: _pair(loc, v, "derivation", "bounds", k) for k, v in bounds.items()
        }
    with loc.block("derivation"):
        return DerivationConfig(nominal=scenario, env=env, **kwargs)


def parse_config(
    data: Any, source: str = "<config>", root: Optional[yaml.Node] = None
) -> DsskitConfig:
    """由已解析的字典构造 DsskitConfig。"""
    loc = _Locator(source, root)
    top = _mapping(loc, data, tuple(BLOCKS))

    env_block = _numbers(
        loc, _mapping(loc, top.get("env"), BLOCKS["env"], "env"), "env"
    )
    with loc.block("env"):
        env = EnvConstants(**env_block)

    rt_block = _mapping(
        loc, top.get("reaction_time"), BLOCKS["reaction_time"], "reaction_time"
    )
    seed = None
    if "seed" in rt_block:
        problem = _seed_problem(rt_block["seed"])
        if problem:
            raise loc.error(problem, "reaction_time", "seed")
        seed = rt_block["seed"]
    params = {
        k: _number(loc, v, "reaction_time", k)
        for k, v in rt_block.items()
        if k != "seed"
    }
    with loc.block("reaction_time"):
        reaction = ShiftedGammaParams(**params)

    scenario = _parse_scenario(loc, top.get("scenario"), env, reaction)

    acc_block = _mapping(
        loc, top.get("accelerations"), BLOCKS["accelerations"], "accelerations"
    )
    acc = _numbers(loc, acc_block, "accelerations")

    derivation = _parse_derivation(loc, top.get("derivation"), scenario, env)

    sim_block = _numbers(
        loc, _mapping(loc, top.get("sim"), BLOCKS["sim"], "sim"), "sim"
    )
    if "samples" in sim_block:
        sim_block["samples"] = int(sim_block["samples"])
    with loc.block("sim"):
        sim = SimConfig(env=env, **sim_block)

    sweep_block = _mapping(loc, top.get("sweep"), BLOCKS["sweep"], "sweep")
    ranges_block = _mapping(
        loc, sweep_block.get("ranges"), SWEEP_AXES, "sweep", "ranges"
    )
    ranges = {k: _pair(loc, v, "sweep", "ranges", k) for k, v in ranges_block.items()}

    return DsskitConfig(
        env=env,
        scenario=scenario,
        a_L=acc.get("a_L"),
        a_F=acc.get("a_F"),
        reaction=reaction,
        seed=seed,
        derivation=derivation,
        sim=sim,
        sweep_ranges=ranges,
        source=source,
    )


def load_config(path: Optional[Union[str, Path]] = None) -> DsskitConfig:
    """
    从文件加载配置；path 为空时返回内置名义配置。

    .json 文件的数据用 json 模块读取，避免 YAML 1.1 把 1e-7 这类写法当成字符串。
    行号取自 YAML 节点；JSON 文本不是合法 YAML 时 (例如用制表符缩进) 不带行号。
    """
    if path is None:
        return DsskitConfig()

    path = Path(path)
    source = str(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(
            f"无法读取配置文件: {exc.strerror}", source=source
        ) from exc

    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"解析失败: {exc.msg}", source=source, line=exc.lineno
            ) from exc
        try:
            root = yaml.compose(text)
        except yaml.YAMLError:
            logger.debug("%s 无法按 YAML 定位行号", source)
            root = None
    else:
        try:
            root = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ConfigError(
                f"解析失败: {getattr(exc, 'problem', None) or exc}",
                source=source,
                line=mark.line + 1 if mark else None,
            ) from exc

    logger.debug("加载配置 %s", source)
    return parse_config(data or {}, source=source, root=root)
