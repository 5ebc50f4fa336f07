"""
终端与文件输出

- 人类可读: Rich 表格，数值保留 4 位小数
- CSV: 逗号分隔、表头、LF 换行，浮点数保持完整精度
"""

import csv
from typing import IO, Any, Dict, List, Optional, Sequence

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .bva import Criticality, TestSuite
from .kinematics import DssBreakdown, Scenario
from .relevance import CoverageReport
from .sim import OracleSummary, SimOutcome
from .sweep import SweepResult


class Theme:
    """输出的颜色主题。"""

    HEADER = "bold white on blue"
    LABEL = "bold cyan"
    STATUS = "dim"

    # 关键性
    SC = "bold red"
    NSC = "bold green"

    # 校验结果
    OK = "green"
    FAIL = "bold red"
    WARN = "yellow"


def fmt(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{value:.4f}"


def criticality_text(crit: Criticality) -> Text:
    return Text(crit.value, style=Theme.SC if crit == Criticality.SC else Theme.NSC)


def _kv_table(rows: Sequence[Sequence[Any]]) -> Table:
    table = Table(show_header=False, box=None, padding=(0, 2))
    table.add_column(style=Theme.LABEL)
    table.add_column(justify="right")
    for row in rows:
        table.add_row(*row)
    return table


# === eval / classify ===


def render_breakdown(
    console: Console,
    scenario: Scenario,
    breakdown: DssBreakdown,
    criticality: Criticality,
    relevance: Optional[Dict[str, int]] = None,
) -> None:
    rows = [(k, fmt(v)) for k, v in scenario.to_dict().items()]
    rows += [
        ("a", fmt(breakdown.space_distance_a)),
        ("b", fmt(breakdown.stop_distance_b)),
        ("x_B,L", fmt(breakdown.x_B_L)),
        ("x_R,F", fmt(breakdown.x_R_F)),
        ("x_B,F", fmt(breakdown.x_B_F)),
        ("DSS", fmt(breakdown.dss)),
        ("关键性", criticality_text(criticality)),
    ]
    if relevance:
        rows += [(f"{k} 相关", str(v)) for k, v in relevance.items()]
    console.print(Panel(_kv_table(rows), title="[DSS]", border_style="blue"))


# === derive ===


def suite_rows(suite: TestSuite) -> List[List[Any]]:
    """按参数行、用例列排列的原始数值。"""
    if not suite.cases:
        return []
    params = list(suite.cases[0].params.to_dict())
    rows: List[List[Any]] = [
        [name] + [c.params.to_dict()[name] for c in suite.cases] for name in params
    ]
    rows.append(["a"] + [c.breakdown.space_distance_a for c in suite.cases])
    rows.append(["b"] + [c.breakdown.stop_distance_b for c in suite.cases])
    rows.append(["dss"] + [c.expected_dss for c in suite.cases])
    rows.append(["criticality"] + [c.criticality.value for c in suite.cases])
    return rows


def render_suite(console: Console, suite: TestSuite) -> None:
    table = Table(
        title=f"测试用例 ({suite.form.value}, {len(suite.cases)} 个)",
        box=box.ROUNDED,
        header_style=Theme.HEADER,
    )
    table.add_column("参数", style=Theme.LABEL)
    for case in suite.cases:
        table.add_column(case.id, justify="right")

    for row in suite_rows(suite):
        name, values = row[0], row[1:]
        if name == "criticality":
            cells = [criticality_text(Criticality(v)) for v in values]
        else:
            cells = [fmt(v) for v in values]
        table.add_row(name, *cells)
    table.add_row("说明", *[c.description for c in suite.cases], style=Theme.STATUS)
    console.print(table)

    for skipped in suite.skipped:
        console.print(f"[{Theme.WARN}]跳过轴 {skipped.axis.value}:[/] {skipped.reason}")


def suite_csv(suite: TestSuite, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["parameter"] + [c.id for c in suite.cases])
    writer.writerows(suite_rows(suite))


# === simulate ===


def render_outcome(
    console: Console, outcome: SimOutcome, coverage: Optional[CoverageReport] = None
) -> None:
    collided = Text(
        "是" if outcome.collided else "否",
        style=Theme.FAIL if outcome.collided else Theme.OK,
    )
    rows = [
        ("碰撞", collided),
        ("最小间距", fmt(outcome.min_gap)),
        ("终止间距", fmt(outcome.final_gap)),
        ("停止时刻", fmt(outcome.stop_time)),
        ("碰撞时刻", fmt(outcome.collision_time)),
        ("前车行驶", fmt(outcome.leader_travel)),
        ("后车行驶", fmt(outcome.follower_travel)),
    ]
    if not outcome.completed:
        rows.append(("状态", Text("超过 max_time 被截断", style=Theme.WARN)))
    console.print(Panel(_kv_table(rows), title="[仿真]", border_style="blue"))
    if coverage is not None:
        render_coverage(console, coverage)


def trajectory_csv(outcome: SimOutcome, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["t", "x_L", "v_L", "x_F", "v_F", "gap"])
    for p in outcome.trajectory:
        writer.writerow([p.t, p.x_L, p.v_L, p.x_F, p.v_F, p.gap])


# === verify ===


def render_oracle(console: Console, summary: OracleSummary) -> None:
    style = Theme.OK if summary.passed else Theme.FAIL
    rows = [
        ("场景数", str(len(summary.records))),
        ("参与判定", str(summary.checked)),
        ("死区排除", str(summary.excluded)),
        ("一致比例", Text(f"{summary.fraction:.2%}", style=style)),
        ("形式误差上限", f"{summary.max_form_error:.3g}"),
    ]
    console.print(Panel(_kv_table(rows), title="[校验]", border_style="blue"))

    for record in summary.disagreements[:5]:
        console.print(
            f"[{Theme.FAIL}]反例:[/] {record.scenario.to_dict()} "
            f"DSS={record.dss!r} 碰撞={record.collided} 间距误差={record.gap_error}"
        )


# === sweep ===


def render_coverage(console: Console, coverage: CoverageReport) -> None:
    table = Table(title="相关组合覆盖", box=box.ROUNDED)
    table.add_column("组合", style=Theme.LABEL)
    table.add_column("命中", justify="right")
    for label, count in coverage.hits.items():
        table.add_row(label, Text(str(count), style=Theme.OK if count else Theme.WARN))
    table.caption = f"{coverage.covered}/{coverage.total} ({coverage.states} 个状态)"
    console.print(table)


def render_sweep(console: Console, result: SweepResult) -> None:
    first = [p.values[0] for p in result.points if p.j == 0]
    second = [p.values[1] for p in result.points if p.i == 0]

    table = Table(
        title=f"DSS: {result.axes[0]} \\ {result.axes[1]}",
        box=box.ROUNDED,
        header_style=Theme.HEADER,
    )
    table.add_column(result.axes[0], style=Theme.LABEL)
    for value in second:
        table.add_column(fmt(value), justify="right")
    for i, value in enumerate(first):
        cells = [
            Text(fmt(p.dss), style=criticality_text(p.criticality).style)
            for p in result.points
            if p.i == i
        ]
        table.add_row(fmt(value), *cells)
    console.print(table)
    if result.coverage is not None:
        render_coverage(console, result.coverage)


def sweep_csv(result: SweepResult, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(
        [
            "i",
            "j",
            *result.axes,
            "dss",
            "criticality",
            "speed_relevant",
            "accel_relevant",
        ]
    )
    for p in result.points:
        writer.writerow(
            [
                p.i,
                p.j,
                p.values[0],
                p.values[1],
                p.dss,
                p.criticality.value,
                p.speed_relevant,
                p.accel_relevant,
            ]
        )
