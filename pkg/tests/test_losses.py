"""
@file: test_losses.py
@desc: 結合関数・損失表・合成損失の評価のテスト
"""

import numpy as np
import pytest

from src.core.losses import (
    CombinerKind,
    CombiningFunction,
    ObliviousLossTable,
    clip,
    eval_composite,
    identity_combiner,
    make_linear_combiner,
    make_max_combiner,
    make_min_combiner,
    validate_action,
)


def test_make_linear_combiner_normalizes():
    assert make_linear_combiner([0.5, 0.5]).coeffs == (0.5, 0.5)
    assert make_linear_combiner([2, 2]).coeffs == (0.5, 0.5)

    delayed = make_linear_combiner([1, 0])
    assert delayed.memory == 1
    assert delayed.coeffs == (1.0, 0.0)
    assert delayed.kind is CombinerKind.LINEAR


@pytest.mark.parametrize("coeffs", [[], [-1, 2], [0, 0]])
def test_make_linear_combiner_rejects_invalid(coeffs):
    with pytest.raises(ValueError):
        make_linear_combiner(coeffs)


def test_delay_is_first_nonzero_coefficient():
    assert make_linear_combiner([0.5, 0.5]).delay == 0
    assert make_linear_combiner([0, 1]).delay == 1
    assert make_linear_combiner([0, 0, 3, 1]).delay == 2
    with pytest.raises(ValueError):
        make_min_combiner().delay


def test_combining_function_validation():
    with pytest.raises(ValueError):
        CombiningFunction(CombinerKind.MIN, 2)
    with pytest.raises(ValueError):
        CombiningFunction(CombinerKind.MAX, 1, (0.5, 0.5))
    with pytest.raises(ValueError):
        CombiningFunction(CombinerKind.LINEAR, 1, (0.7, 0.7))
    with pytest.raises(ValueError):
        CombiningFunction(CombinerKind.LINEAR, 2, (0.5, 0.5))


def test_apply_examples():
    assert make_min_combiner().apply([0.3, 0.7]) == 0.3
    assert make_max_combiner().apply([0.3, 0.7]) == 0.7
    assert make_linear_combiner([0.5, 0.5]).apply([0.2, 0.6]) == pytest.approx(0.4)
    # a_0 は最新の値に掛かる
    assert make_linear_combiner([1, 0]).apply([0.2, 0.6]) == 0.6
    assert make_linear_combiner([0, 1]).apply([0.2, 0.6]) == 0.2
    with pytest.raises(ValueError):
        make_min_combiner().apply([0.1])


@pytest.mark.parametrize("value,expected", [(1.7, 1.0), (-0.2, 0.0), (0.42, 0.42)])
def test_clip(value, expected):
    assert clip(value) == expected


def test_validate_action():
    assert validate_action(1, 2) == 1
    with pytest.raises(ValueError):
        validate_action(2, 2)
    with pytest.raises(ValueError):
        validate_action(0, 1)


def test_table_rejects_out_of_range_unless_unbounded():
    with pytest.raises(ValueError):
        ObliviousLossTable(np.array([[0.5, 1.2]]))
    table = ObliviousLossTable(np.array([[0.5, 1.2]]), bounded=False)
    assert table.value(1, 1) == 1.2
    with pytest.raises(ValueError):
        ObliviousLossTable(np.array([[0.5, np.nan]]))
    with pytest.raises(ValueError):
        ObliviousLossTable(np.array([0.5, 0.5]))


def test_table_zero_before_first_round_and_read_only():
    table = ObliviousLossTable(np.array([[0.2, 0.9], [0.8, 0.1]]))
    assert table.value(0, 1) == 0.0
    assert table.value(-3, 0) == 0.0
    assert table.horizon == 2
    assert table.n_actions == 2
    with pytest.raises(ValueError):
        table.value(3, 0)
    with pytest.raises(ValueError):
        table.values[0, 0] = 0.5


def test_eval_composite_pads_with_zero():
    table = ObliviousLossTable(np.array([[0.2, 0.9], [0.8, 0.1], [0.5, 0.5]]))
    actions = [0, 1, 0]
    assert eval_composite(make_min_combiner(), table, actions, 1) == 0.0
    assert eval_composite(make_min_combiner(), table, actions, 2) == 0.1
    assert eval_composite(make_max_combiner(), table, actions, 1) == 0.2
    g = make_linear_combiner([0.25, 0.25, 0.25, 0.25])
    assert eval_composite(g, table, actions, 2) == pytest.approx(0.25 * (0.2 + 0.1))
    assert eval_composite(identity_combiner(), table, actions, 3) == 0.5


def test_eval_composite_in_unit_interval(rng):
    for _ in range(200):
        T = int(rng.integers(1, 8))
        k = int(rng.integers(2, 5))
        table = ObliviousLossTable(rng.random((T, k)))
        actions = rng.integers(0, k, size=T).tolist()
        m = int(rng.integers(0, 4))
        for g in (make_min_combiner(), make_max_combiner(), make_linear_combiner(rng.random(m + 1) + 0.01)):
            for t in range(1, T + 1):
                assert 0.0 <= eval_composite(g, table, actions, t) <= 1.0 + 1e-12


def test_eval_composite_argument_checks():
    table = ObliviousLossTable(np.array([[0.2, 0.9]]))
    with pytest.raises(ValueError):
        eval_composite(make_min_combiner(), table, [0], 2)
    with pytest.raises(ValueError):
        eval_composite(make_min_combiner(), table, [], 1)
