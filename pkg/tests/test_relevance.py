import pytest

from dsskit.errors import DomainError
from dsskit.relevance import (
    ACCEL_MATRIX,
    RELEVANT_COMBINATIONS,
    SPEED_MATRIX,
    Sign,
    classify_accel,
    classify_speed,
    classify_state,
    coverage_report,
)


def test_sign_with_tolerance():
    assert Sign.of(0.0) == Sign.ZERO
    assert Sign.of(1e-7) == Sign.ZERO
    assert Sign.of(-0.5) == Sign.NEGATIVE
    assert Sign.of(0.5, zero_tol=1.0) == Sign.ZERO
    assert Sign.POSITIVE.symbol == ">0"
    with pytest.raises(DomainError):
        Sign.of(1.0, zero_tol=-1.0)


def test_matrix_sums():
    assert SPEED_MATRIX.row_sums() == (0, 0, 2)
    assert ACCEL_MATRIX.column_sums() == (2, 0, 0)
    assert ACCEL_MATRIX.row_sums() == (1, 1, 0)


def test_relevant_cells():
    assert SPEED_MATRIX.relevant_cells() == [
        (Sign.POSITIVE, Sign.ZERO),
        (Sign.POSITIVE, Sign.POSITIVE),
    ]
    assert ACCEL_MATRIX.relevant_cells() == [
        (Sign.NEGATIVE, Sign.NEGATIVE),
        (Sign.ZERO, Sign.NEGATIVE),
    ]
    assert len(RELEVANT_COMBINATIONS) == 4


@pytest.mark.parametrize(
    "v_L, v_F, expected",
    [
        (0.0, 5.0, 1),  # 前车静止，后车驶近
        (20.0, 25.0, 1),
        (10.0, 0.0, 0),  # 后车静止
        (0.0, 0.0, 0),
        (-3.0, 5.0, 0),  # 前车倒车
    ],
)
def test_classify_speed(v_L, v_F, expected):
    assert classify_speed(v_L, v_F) == expected


@pytest.mark.parametrize(
    "a_L, a_F, expected",
    [
        (-3.0, 0.0, 1),  # 前车制动，后车尚未反应
        (-3.0, -3.0, 1),
        (0.0, -3.0, 0),
        (-3.0, 2.0, 0),
        (1.0, 0.0, 0),
    ],
)
def test_classify_accel(a_L, a_F, expected):
    assert classify_accel(a_L, a_F) == expected


def test_classify_state():
    assert classify_state(20.0, 25.0, -8.829, 0.0) == (1, 1)
    assert classify_state(20.0, 0.0, 0.0, 0.0) == (0, 0)


def test_single_state_covers_one_combination():
    report = coverage_report([(20.0, 25.0, -3.0, -3.0)])
    assert report.states == 1
    assert report.covered == 1
    assert report.fraction == pytest.approx(0.25)
    assert len(report.missing()) == 3


def test_full_coverage():
    states = [
        (0.0, 5.0, -3.0, 0.0),
        (0.0, 5.0, -3.0, -3.0),
        (20.0, 25.0, -3.0, 0.0),
        (20.0, 25.0, -3.0, -3.0),
        (20.0, 0.0, 0.0, 0.0),  # 不相关
    ]
    report = coverage_report(states)
    assert report.states == 5
    assert report.covered == report.total == 4
    assert report.fraction == 1.0
    assert report.missing() == []
    data = report.to_dict()
    assert data["covered"] == 4
    assert sum(data["speed_hits"].values()) == 4
    assert sum(data["accel_hits"].values()) == 4


def test_empty_coverage():
    report = coverage_report([])
    assert report.states == 0
    assert report.covered == 0
    assert set(report.hits) == {c.label for c in RELEVANT_COMBINATIONS}
