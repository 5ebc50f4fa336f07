"""
安全相关性矩阵 - 速度/加速度符号组合

两张 3x3 矩阵，行是后车符号，列是前车符号 (负 / 零 / 正):

    v 矩阵              a 矩阵
         vL<0 vL=0 vL>0       aL<0 aL=0 aL>0
    vF<0   0    0    0   aF<0   1    0    0
    vF=0   0    0    0   aF=0   1    0    0
    vF>0   0    1    1   aF>0   0    0    0

两者的 1 单元交叉组合得到 DSS 覆盖的 4 种追尾情形:
- 前车前行或停止，后车前行
- 前车制动，后车同样制动或保持匀速
"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import DomainError

DEFAULT_ZERO_TOL = 1e-6


class Sign(IntEnum):
    """三态符号，自然顺序 负 < 零 < 正。"""

    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1

    @classmethod
    def of(cls, x: float, zero_tol: float = DEFAULT_ZERO_TOL) -> "Sign":
        """|x| <= zero_tol 视为零。"""
        if zero_tol < 0:
            raise DomainError(f"zero_tol 不能为负，得到 {zero_tol}")
        if abs(x) <= zero_tol:
            return cls.ZERO
        return cls.POSITIVE if x > 0 else cls.NEGATIVE

    @property
    def symbol(self) -> str:
        return {-1: "<0", 0: "=0", 1: ">0"}[int(self)]

    @property
    def index(self) -> int:
        """矩阵行/列下标。"""
        return int(self) + 1


class MatrixKind(str, Enum):
    SPEED = "speed"
    ACCELERATION = "acceleration"


@dataclass(frozen=True)
class RelevanceMatrix:
    """按 (后车符号, 前车符号) 索引的 0/1 矩阵。"""

    kind: MatrixKind
    cells: Tuple[Tuple[int, int, int], Tuple[int, int, int], Tuple[int, int, int]]

    def __post_init__(self):
        if len(self.cells) != 3 or any(len(row) != 3 for row in self.cells):
            raise ValueError("相关性矩阵必须是 3x3")
        if any(c not in (0, 1) for row in self.cells for c in row):
            raise ValueError("相关性矩阵单元只能是 0 或 1")

    @property
    def variable(self) -> str:
        return "v" if self.kind == MatrixKind.SPEED else "a"

    def lookup(self, follower: Sign, leader: Sign) -> int:
        return self.cells[follower.index][leader.index]

    def row_sums(self) -> Tuple[int, int, int]:
        return tuple(sum(row) for row in self.cells)

    def column_sums(self) -> Tuple[int, int, int]:
        return tuple(sum(row[j] for row in self.cells) for j in range(3))

    def relevant_cells(self) -> List[Tuple[Sign, Sign]]:
        """所有值为 1 的 (后车符号, 前车符号)。"""
        return [
            (follower, leader)
            for follower in Sign
            for leader in Sign
            if self.lookup(follower, leader)
        ]

    def cell_label(self, follower: Sign, leader: Sign) -> str:
        v = self.variable
        return f"{v}_F{follower.symbol},{v}_L{leader.symbol}"


SPEED_MATRIX = RelevanceMatrix(
    kind=MatrixKind.SPEED,
    cells=((0, 0, 0), (0, 0, 0), (0, 1, 1)),
)

ACCEL_MATRIX = RelevanceMatrix(
    kind=MatrixKind.ACCELERATION,
    cells=((1, 0, 0), (1, 0, 0), (0, 0, 0)),
)


@dataclass(frozen=True)
class RelevantCombination:
    """速度相关单元与加速度相关单元的一个交叉组合。"""

    speed: Tuple[Sign, Sign]
    accel: Tuple[Sign, Sign]

    @property
    def label(self) -> str:
        return (
            f"{SPEED_MATRIX.cell_label(*self.speed)}|"
            f"{ACCEL_MATRIX.cell_label(*self.accel)}"
        )


RELEVANT_COMBINATIONS: Tuple[RelevantCombination, ...] = tuple(
    RelevantCombination(speed=s, accel=a)
    for s in SPEED_MATRIX.relevant_cells()
    for a in ACCEL_MATRIX.relevant_cells()
)


# === 分类 ===


def classify_speed(
    v_L: float, v_F: float, zero_tol: float = DEFAULT_ZERO_TOL
) -> int:
    """速度矩阵查表，返回 0 或 1。"""
    return SPEED_MATRIX.lookup(Sign.of(v_F, zero_tol), Sign.of(v_L, zero_tol))


def classify_accel(
    a_L: float, a_F: float, zero_tol: float = DEFAULT_ZERO_TOL
) -> int:
    """加速度矩阵查表，返回 0 或 1。"""
    return ACCEL_MATRIX.lookup(Sign.of(a_F, zero_tol), Sign.of(a_L, zero_tol))


def classify_state(
    v_L: float,
    v_F: float,
    a_L: float,
    a_F: float,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> Tuple[int, int]:
    """一个状态在两张矩阵上的 (速度, 加速度) 相关性。"""
    return classify_speed(v_L, v_F, zero_tol), classify_accel(a_L, a_F, zero_tol)


# === 覆盖率 ===


@dataclass
class CoverageReport:
    """场景集合对 4 种相关组合的覆盖情况。"""

    hits: Dict[str, int] = field(default_factory=dict)
    speed_hits: Dict[str, int] = field(default_factory=dict)
    accel_hits: Dict[str, int] = field(default_factory=dict)
    states: int = 0

    @property
    def covered(self) -> int:
        return sum(1 for count in self.hits.values() if count > 0)

    @property
    def total(self) -> int:
        return len(RELEVANT_COMBINATIONS)

    @property
    def fraction(self) -> float:
        return self.covered / self.total

    def missing(self) -> List[str]:
        return [label for label, count in self.hits.items() if count == 0]

    def to_dict(self) -> Dict:
        return {
            "states": self.states,
            "covered": self.covered,
            "total": self.total,
            "fraction": self.fraction,
            "hits": dict(self.hits),
            "speed_hits": dict(self.speed_hits),
            "accel_hits": dict(self.accel_hits),
            "missing": self.missing(),
        }


def coverage_report(
    scenarios: Iterable[Sequence[float]], zero_tol: float = DEFAULT_ZERO_TOL
) -> CoverageReport:
    """
    统计 (v_L, v_F, a_L, a_F) 状态集合对相关组合的命中次数。

    速度轴和加速度轴也分别独立计数。
    """
    report = CoverageReport(
        hits={c.label: 0 for c in RELEVANT_COMBINATIONS},
        speed_hits={
            SPEED_MATRIX.cell_label(*c): 0 for c in SPEED_MATRIX.relevant_cells()
        },
        accel_hits={
            ACCEL_MATRIX.cell_label(*c): 0 for c in ACCEL_MATRIX.relevant_cells()
        },
    )

    for v_L, v_F, a_L, a_F in scenarios:
        report.states += 1
        speed_cell = (Sign.of(v_F, zero_tol), Sign.of(v_L, zero_tol))
        accel_cell = (Sign.of(a_F, zero_tol), Sign.of(a_L, zero_tol))
        speed_ok = SPEED_MATRIX.lookup(*speed_cell) == 1
        accel_ok = ACCEL_MATRIX.lookup(*accel_cell) == 1

        if speed_ok:
            report.speed_hits[SPEED_MATRIX.cell_label(*speed_cell)] += 1
        if accel_ok:
            report.accel_hits[ACCEL_MATRIX.cell_label(*accel_cell)] += 1
        if speed_ok and accel_ok:
            label = RelevantCombination(speed=speed_cell, accel=accel_cell).label
            report.hits[label] += 1

    return report
