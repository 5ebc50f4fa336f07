"""
dsskit CLI 接口

子命令:
- eval      计算场景 DSS (或回放推导出的用例集)
- classify  SC / NSC 分类与安全相关性
- derive    推导边界值测试用例
- simulate  两车紧急制动仿真
- verify    随机场景上的 DSS / 仿真一致性校验
- sweep     二维参数网格扫描
- schema    打印 --json 输出的 JSON Schema
"""

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from rich.console import Console
from rich.markup import escape

from .bva import Form, TestSuite, classify, derive_suite
from .config import DsskitConfig, check_seed, load_config
from .errors import ConfigError, DssError, OracleDisagreementError
from .kinematics import evaluate
from .logs import setup_logging
from .reaction import ReactionTimeSampler
from .relevance import classify_state
from .report import (
    Theme,
    render_breakdown,
    render_oracle,
    render_outcome,
    render_suite,
    render_sweep,
    suite_csv,
    sweep_csv,
    trajectory_csv,
)
from .schemas import SCHEMAS, get_schema
from .sim import random_scenarios, run_oracle_batch, simulate, trajectory_coverage
from .sweep import SWEEP_AXES, sweep_grid

logger = logging.getLogger(__name__)

ROUND_TRIP_TOL = 1e-12


def _load_env():
    """加载 .env 文件到环境变量。"""
    try:
        from dotenv import load_dotenv

        load_dotenv()
    except ImportError:
        pass


def _env_int(name: str) -> Optional[int]:
    value = os.environ.get(name)
    if value is None or value == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(
            f"应为整数，得到 {value!r}", source="环境变量", key=name
        )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", "-c", help="场景配置文件 (默认: $DSSKIT_CONFIG 或内置名义场景)"
    )
    common.add_argument("--json", action="store_true", help="输出 JSON")
    common.add_argument("--seed", type=int, help="随机种子 (默认: $DSSKIT_SEED)")
    common.add_argument("--out", "-o", help="输出文件")
    common.add_argument("--verbose", "-v", action="store_true", help="输出调试日志")
    common.add_argument(
        "--workers", type=int, help="并行线程数 (默认: $DSSKIT_WORKERS 或 1)"
    )

    parser = argparse.ArgumentParser(
        prog="dsskit",
        description="dsskit - 基于 DSS 安全指标的跟驰场景测试用例推导",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  dsskit eval                              # 内置名义场景的 DSS
  dsskit derive --format csv -o tc.csv     # 推导 6 个测试用例
  dsskit derive --form absolute --json     # 绝对形式, 10 个用例
  dsskit simulate -c tc1.json --traj t.csv # 仿真并导出轨迹
  dsskit verify --samples 1000 --seed 7    # 随机一致性校验
  dsskit sweep --axis d_V,delta_v --grid 3x3

环境变量:
  DSSKIT_CONFIG      默认配置文件
  DSSKIT_SEED        默认随机种子
  DSSKIT_LOG_LEVEL   日志级别 (默认: WARNING)
  DSSKIT_WORKERS     默认并行线程数

退出码: 0 成功, 2 配置错误, 3 领域错误, 4 推导失败, 5 校验不一致
""",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    eval_parser = subparsers.add_parser("eval", parents=[common], help="计算 DSS")
    eval_parser.add_argument("--suite", help="回放 derive --json 生成的用例集")

    classify_parser = subparsers.add_parser(
        "classify", parents=[common], help="SC/NSC 分类"
    )
    classify_parser.add_argument("--dss", type=float, help="直接分类给定的 DSS 值")

    derive_parser = subparsers.add_parser(
        "derive", parents=[common], help="推导测试用例"
    )
    derive_parser.add_argument("--form", choices=[f.value for f in Form])
    derive_parser.add_argument("--accuracy", type=float, help="精度要求 (m)")
    derive_parser.add_argument(
        "--format", choices=["table", "json", "csv"], default="table"
    )

    sim_parser = subparsers.add_parser("simulate", parents=[common], help="制动仿真")
    sim_parser.add_argument("--traj", help="轨迹 CSV 输出路径")

    verify_parser = subparsers.add_parser(
        "verify", parents=[common], help="DSS 与仿真一致性校验"
    )
    verify_parser.add_argument("--samples", type=int, help="随机场景数")
    verify_parser.add_argument("--dead-band", type=float, help="死区宽度 (m)")

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="网格扫描")
    sweep_parser.add_argument(
        "--axis",
        default="d_V,delta_v",
        help=f"两条轴，可选: {','.join(SWEEP_AXES)}",
    )
    sweep_parser.add_argument("--grid", default="3x3", help="网格大小 NxM")
    sweep_parser.add_argument(
        "--range",
        action="append",
        default=[],
        metavar="AXIS=LO:HI",
        help="覆盖某条轴的取值范围 (可重复)",
    )

    schema_parser = subparsers.add_parser("schema", help="打印 JSON Schema")
    schema_parser.add_argument("name", choices=sorted(SCHEMAS))

    return parser


# === 输出 ===


def _write(args: argparse.Namespace, text: str, path: Optional[str] = None) -> None:
    """写入 --out 指定的文件，否则写到标准输出。"""
    path = path or getattr(args, "out", None)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info("已写入 %s", path)
    else:
        sys.stdout.write(text)


def _emit_json(args: argparse.Namespace, payload: Dict[str, Any]) -> None:
    _write(args, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def _csv_text(writer_fn, obj) -> str:
    buffer = io.StringIO(newline="")
    writer_fn(obj, buffer)
    return buffer.getvalue()


# === 子命令 ===


def cmd_eval(args, config: DsskitConfig, console: Console) -> int:
    if args.suite:
        return _eval_suite(args, console)

    s = config.scenario
    breakdown = evaluate(s, config.env)
    threshold = config.derivation.threshold
    crit = classify(breakdown.dss, threshold)
    if args.json:
        _emit_json(
            args,
            {
                "scenario": s.to_dict(),
                "env": config.env.to_dict(),
                "breakdown": breakdown.to_dict(),
                "criticality": crit.value,
                "threshold": threshold,
            },
        )
    else:
        render_breakdown(console, s, breakdown, crit)
    return 0


def _load_suite(path: str) -> TestSuite:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return TestSuite.from_dict(data)
    except OSError as exc:
        raise ConfigError(f"无法读取用例集: {exc.strerror}", source=path) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, source=path, line=exc.lineno) from exc
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"用例集缺少字段 {exc}", source=path) from exc
    except ValueError as exc:
        raise ConfigError(f"用例集字段无效: {exc}", source=path) from exc


def _eval_suite(args, console: Console) -> int:
    suite = _load_suite(args.suite)
    env = suite.config.env
    threshold = suite.config.threshold
    rows = []
    for case in suite.cases:
        dss = evaluate(case.params, env).dss
        rows.append(
            {
                "id": case.id,
                "stored_dss": case.expected_dss,
                "dss": dss,
                "difference": abs(dss - case.expected_dss),
                "criticality": classify(dss, threshold).value,
            }
        )
    max_diff = max((r["difference"] for r in rows), default=0.0)
    passed = max_diff <= ROUND_TRIP_TOL

    if args.json:
        _emit_json(args, {"cases": rows, "max_difference": max_diff, "passed": passed})
    else:
        for r in rows:
            console.print(
                f"[{Theme.LABEL}]{r['id']}[/] DSS={r['dss']:.4f} "
                f"{r['criticality']} 偏差={r['difference']:.3g}"
            )
    if not passed:
        raise OracleDisagreementError(
            f"回放 DSS 与存储值偏差 {max_diff:.3g} 超过 {ROUND_TRIP_TOL:g}"
        )
    return 0


def cmd_classify(args, config: DsskitConfig, console: Console) -> int:
    threshold = config.derivation.threshold
    if args.dss is not None:
        crit = classify(args.dss, threshold)
        if args.json:
            _emit_json(
                args,
                {"dss": args.dss, "criticality": crit.value, "threshold": threshold},
            )
        else:
            console.print(f"DSS={args.dss:.4f} -> [{Theme.LABEL}]{crit.value}[/]")
        return 0

    s = config.scenario
    breakdown = evaluate(s, config.env)
    crit = classify(breakdown.dss, threshold)
    a_L, a_F = config.accelerations
    speed, accel = classify_state(s.v_L, s.v_F, a_L, a_F)
    if args.json:
        _emit_json(
            args,
            {
                "dss": breakdown.dss,
                "criticality": crit.value,
                "threshold": threshold,
                "speed_relevant": speed,
                "accel_relevant": accel,
            },
        )
    else:
        render_breakdown(
            console, s, breakdown, crit, relevance={"速度": speed, "加速度": accel}
        )
    return 0


def cmd_derive(args, config: DsskitConfig, console: Console) -> int:
    derivation = config.derivation
    overrides: Dict[str, Any] = {}
    if args.form:
        overrides["form"] = args.form
    if args.accuracy is not None:
        overrides["accuracy"] = args.accuracy
    if overrides:
        derivation = replace(derivation, **overrides)

    rng = ReactionTimeSampler(config.reaction, config.seed).metadata()
    suite = derive_suite(derivation, rng=rng)

    fmt = "json" if args.json else args.format
    if fmt == "json":
        _write(args, suite.to_json() + "\n")
    elif fmt == "csv":
        _write(args, _csv_text(suite_csv, suite))
    else:
        render_suite(console, suite)
        if args.out:
            _write(args, suite.to_json() + "\n")
    return 0


def cmd_simulate(args, config: DsskitConfig, console: Console) -> int:
    cfg = replace(config.sim, record_trajectory=bool(args.traj))
    outcome = simulate(config.absolute(), cfg)
    coverage = trajectory_coverage(outcome) if args.traj else None
    if args.traj:
        _write(args, _csv_text(trajectory_csv, outcome), path=args.traj)

    if args.json:
        payload = outcome.to_dict()
        if coverage is not None:
            payload["coverage"] = coverage.to_dict()
        _emit_json(args, payload)
    else:
        render_outcome(console, outcome, coverage)
    return 0


def cmd_verify(args, config: DsskitConfig, console: Console) -> int:
    cfg = config.sim
    if args.dead_band is not None:
        cfg = replace(cfg, dead_band=args.dead_band)
    samples = cfg.samples if args.samples is None else args.samples

    scenarios = random_scenarios(samples, config.seed, config.reaction)
    summary = run_oracle_batch(scenarios, config.env, cfg, workers=args.workers)

    if args.json:
        payload = summary.to_dict()
        payload["seed"] = config.seed
        payload["rng"] = ReactionTimeSampler(config.reaction, config.seed).metadata()
        _emit_json(args, payload)
    else:
        render_oracle(console, summary)

    if not summary.passed:
        first = summary.disagreements[0]
        count = len(summary.disagreements)
        raise OracleDisagreementError(
            f"{count} 个场景不一致，例如 {first.scenario.to_dict()}"
        )
    return 0


def _parse_grid(text: str) -> Tuple[int, int]:
    try:
        n, m = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"网格应为 NxM，得到 {text!r}", key="--grid")
    return n, m


def _parse_ranges(items: List[str]) -> Dict[str, Tuple[float, float]]:
    ranges = {}
    for item in items:
        try:
            axis, bounds = item.split("=", 1)
            lo, hi = (float(v) for v in bounds.split(":"))
        except ValueError:
            raise ConfigError(
                f"范围应为 AXIS=LO:HI，得到 {item!r}", key="--range"
            )
        ranges[axis.strip()] = (lo, hi)
    return ranges


def cmd_sweep(args, config: DsskitConfig, console: Console) -> int:
    axes = [a.strip() for a in args.axis.split(",")]
    grid = _parse_grid(args.grid)
    ranges = {**config.sweep_ranges, **_parse_ranges(args.range)}

    result = sweep_grid(
        axes,
        grid,
        config.sweep_state(),
        config.env,
        ranges=ranges,
        threshold=config.derivation.threshold,
        workers=args.workers,
    )

    if args.json:
        _emit_json(args, result.to_dict())
        return 0
    render_sweep(console, result)
    if args.out:
        _write(args, _csv_text(sweep_csv, result))
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "classify": cmd_classify,
    "derive": cmd_derive,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def _resolve(args: argparse.Namespace) -> DsskitConfig:
    """合并配置文件、环境变量和命令行参数，命令行优先。"""
    config = load_config(args.config or os.environ.get("DSSKIT_CONFIG") or None)

    if args.seed is not None:
        config.seed = check_seed(args.seed, source="命令行", key="--seed")
    elif config.seed is None:
        env_seed = _env_int("DSSKIT_SEED")
        config.seed = (
            0
            if env_seed is None
            else check_seed(env_seed, source="环境变量", key="DSSKIT_SEED")
        )

    if args.workers is None:
        args.workers = _env_int("DSSKIT_WORKERS") or 1
    if args.workers < 1:
        raise ConfigError(
            f"workers 必须 >= 1，得到 {args.workers}", key="--workers"
        )
    return config


def main(argv: Optional[List[str]] = None) -> int:
    # 首先加载 .env 文件
    _load_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    verbose = getattr(args, "verbose", False)
    setup_logging("DEBUG" if verbose else os.environ.get("DSSKIT_LOG_LEVEL"))
    console = Console()
    err_console = Console(stderr=True)

    try:
        if args.command == "schema":
            sys.stdout.write(
                json.dumps(get_schema(args.name), indent=2, ensure_ascii=False) + "\n"
            )
            return 0
        config = _resolve(args)
        return COMMANDS[args.command](args, config, console)
    except DssError as exc:
        err_console.print(f"[{Theme.FAIL}]错误:[/] {escape(str(exc))}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
