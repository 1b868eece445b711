"""
@file: test_linear_composite.py
@desc: 線形合成損失プレイヤー（z_t の復元・インスタンスの巡回・クレジット）のテスト
"""

import logging

import numpy as np
import pytest

from src.adversary.easy_environments import build_linear_env
from src.engine.environment import FeedbackModel
from src.engine.game import run_game, verify_z_recovery
from src.player.linear_composite import LinearCompositePlayer, pool_budgets, recovery_growth

COMPOSITE = FeedbackModel.parse("composite")


def random_stable_coeffs(rng, m):
    """先頭の非ゼロ係数が残りの和より大きい係数列（z の漸化式が安定）"""
    d = int(rng.integers(0, m + 1))
    coeffs = np.zeros(m + 1)
    coeffs[d] = 1.0
    if d < m:
        coeffs[d + 1:] = rng.dirichlet(np.ones(m - d)) * rng.uniform(0.0, 0.95)
    return coeffs


def play(env, rng):
    player = LinearCompositePlayer(env.n_actions, env.horizon, env.combiner.coeffs)
    transcript = run_game(env, player, COMPOSITE, rng)
    return player, transcript


def test_recovery_growth():
    assert recovery_growth([0.8, 0.2]) == pytest.approx(0.25)
    assert recovery_growth([0.2, 0.8]) == pytest.approx(4.0)
    assert recovery_growth([0, 1]) == 0.0
    assert recovery_growth([1]) == 0.0


def test_unstable_coefficients_warn(caplog):
    with caplog.at_level(logging.WARNING):
        LinearCompositePlayer(2, 10, [0.2, 0.8])
    assert "不安定" in caplog.text


def test_pool_budgets():
    assert pool_budgets(10, 1) == [10]
    assert pool_budgets(10, 2) == [5, 5]
    assert pool_budgets(10, 3) == [3, 4, 3]
    assert sum(pool_budgets(1000, 4)) == 1000


def test_pool_layout():
    player = LinearCompositePlayer(3, 100, [0, 0, 2, 1])
    assert player.delay == 2
    assert player.memory == 3
    assert player.pool_size == 3
    assert [player.active_instance(t) for t in range(1, 7)] == [1, 2, 0, 1, 2, 0]
    assert player.name == "linear"


def test_delayed_loss_recovers_previous_round(rng):
    env = build_linear_env(200, 2, [0, 1], 0.05, rng)
    player, transcript = play(env, rng)
    assert player.delay == 1
    assert player.recovered[0] == 0.0
    for t in range(2, 201):
        assert player.recovered[t - 1] == transcript.losses[t - 1]
        assert player.recovered[t - 1] == env.table.value(t - 1, transcript.actions[t - 2])


def test_single_instance_when_no_delay(rng):
    env = build_linear_env(300, 3, [0.6, 0.3, 0.1], 0.05, rng)
    player, transcript = play(env, rng)
    assert player.pool_size == 1
    assert player.credited_rounds[0] == list(range(1, 301))
    assert verify_z_recovery(env, transcript, player) <= 1e-9


def test_instances_learn_only_on_their_rounds(rng):
    env = build_linear_env(301, 2, [0, 0, 0.7, 0.3], 0.05, rng)
    player, _ = play(env, rng)
    for j, rounds in enumerate(player.credited_rounds):
        assert rounds
        assert all(s % 3 == j for s in rounds)
        assert player.pool[j].n_updates == len(rounds)
    assert sum(len(r) for r in player.credited_rounds) == 301 - 2


def test_z_recovery_on_random_games(rng):
    for _ in range(30):
        k = int(rng.integers(2, 5))
        m = int(rng.integers(1, 4))
        env = build_linear_env(256, k, random_stable_coeffs(rng, m), 0.05, rng)
        player, transcript = play(env, rng)
        assert verify_z_recovery(env, transcript, player) <= 1e-9


@pytest.mark.slow
def test_z_recovery_acceptance(rng):
    for _ in range(200):
        k = int(rng.integers(2, 5))
        m = int(rng.integers(1, 4))
        env = build_linear_env(1024, k, random_stable_coeffs(rng, m), 0.05, rng)
        player, transcript = play(env, rng)
        assert verify_z_recovery(env, transcript, player) <= 1e-9


def test_rejects_non_composite_feedback(rng):
    env = build_linear_env(20, 2, [0.5, 0.5], 0.05, rng)
    player = LinearCompositePlayer(2, 20, [0.5, 0.5])
    with pytest.raises(ValueError):
        run_game(env, player, FeedbackModel.parse("oblivious"), rng)


def test_out_of_range_recovery_aborts(rng):
    player = LinearCompositePlayer(2, 10, [0.5, 0.5])
    action = player.select(1, rng)
    player.observe(1, action, 0.4)
    action = player.select(2, rng)
    with pytest.raises(RuntimeError):
        player.observe(2, action, 0.0)


def test_feedback_for_unplayed_action(rng):
    player = LinearCompositePlayer(2, 10, [1.0])
    action = player.select(1, rng)
    with pytest.raises(RuntimeError):
        player.observe(1, 1 - action, 0.5)
