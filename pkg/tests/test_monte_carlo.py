"""
@file: test_monte_carlo.py
@desc: シード導出・反復・集計と並列度に依存しない結果のテスト
"""

import numpy as np
import pytest

from src.engine.environment import FeedbackModel
from src.engine.game import policy_regret, run_game
from src.engine.monte_carlo import (
    QUANTILES,
    ReplicationResult,
    default_checkpoints,
    derive_seeds,
    monte_carlo,
    run_replication,
    summarize,
)
from src.experiment.config import EnvironmentSpec
from src.player.baselines import ConstantPlayer
from src.player.factory import PlayerSpec

COMPOSITE = FeedbackModel.parse("composite")


def chi_player(env):
    return ConstantPlayer(env.n_actions, env.horizon, env.chi)


def other_player(env):
    return ConstantPlayer(env.n_actions, env.horizon, 1 - env.chi)


def linear_spec(T):
    return EnvironmentSpec.from_dict({"kind": "linear", "k": 2, "coeffs": [0.6, 0.4], "gap": 0.05}).for_horizon(T)


def test_derive_seeds_is_pure():
    a_env, a_game = derive_seeds(7, 1024, 3)
    b_env, b_game = derive_seeds(7, 1024, 3)
    assert np.array_equal(a_env.generate_state(4), b_env.generate_state(4))
    assert np.array_equal(a_game.generate_state(4), b_game.generate_state(4))
    assert not np.array_equal(a_env.generate_state(4), a_game.generate_state(4))
    c_env, _ = derive_seeds(7, 1024, 4)
    d_env, _ = derive_seeds(7, 2048, 3)
    assert not np.array_equal(a_env.generate_state(4), c_env.generate_state(4))
    assert not np.array_equal(a_env.generate_state(4), d_env.generate_state(4))


def test_default_checkpoints():
    points = default_checkpoints(1000)
    assert points[0] == 1
    assert points[-1] == 1000
    assert np.all(np.diff(points) > 0)
    assert list(default_checkpoints(3)) == [1, 2, 3]


def test_single_rep_matches_single_run():
    env_factory = linear_spec(256)
    player_factory = PlayerSpec.parse("linear")
    stats = monte_carlo(env_factory, player_factory, n_reps=1, master_seed=5)

    env_seed, game_seed = derive_seeds(5, 256, 0)
    env = env_factory(np.random.default_rng(env_seed), int(env_seed.generate_state(1)[0]))
    transcript = run_game(env, player_factory(env), COMPOSITE, np.random.default_rng(game_seed))
    assert stats.n_reps == 1
    assert stats.mean_regret == policy_regret(env, transcript)
    assert stats.std_regret == 0.0
    assert stats.mean_switches == transcript.switch_count
    assert set(stats.regret_quantiles) == set(QUANTILES)


def test_replication_records_environment_seed():
    env_factory = linear_spec(64)
    result = run_replication(env_factory, PlayerSpec.parse("exp3"), COMPOSITE, 1, np.array([64]), True, 2)
    env_seed, _ = derive_seeds(1, 64, 2)
    assert result.env_seed == int(env_seed.generate_state(1)[0])
    assert result.rep_index == 2
    assert result.curve[-1] == pytest.approx(result.regret)


def test_summarize_orders_by_rep_index():
    checkpoints = np.array([10])
    results = [
        ReplicationResult(rep_index=i, regret=float(i) * 0.1, switches=i, curve=np.array([0.1 * i]), env_seed=i)
        for i in range(5)
    ]
    forward = summarize(results, checkpoints)
    backward = summarize(list(reversed(results)), checkpoints)
    assert np.array_equal(forward.regrets, backward.regrets)
    assert forward.mean_regret == backward.mean_regret
    assert forward.std_regret == pytest.approx(np.std([0.0, 0.1, 0.2, 0.3, 0.4], ddof=1))
    assert forward.regret_quantiles[50] == pytest.approx(0.2)
    assert forward.to_dict()["regret_quantiles"]["50"] == forward.regret_quantiles[50]


def test_identical_across_parallelism():
    env_factory = linear_spec(200)
    player_factory = PlayerSpec.parse("batched:exp3:B=auto")
    serial = monte_carlo(env_factory, player_factory, n_reps=6, master_seed=3, parallelism=1)
    parallel = monte_carlo(env_factory, player_factory, n_reps=6, master_seed=3, parallelism=2)
    assert np.array_equal(serial.regrets, parallel.regrets)
    assert np.array_equal(serial.switches, parallel.switches)
    assert serial.mean_regret == parallel.mean_regret
    assert np.array_equal(serial.mean_curve, parallel.mean_curve)


def test_constant_gap_difference_on_unclipped_env():
    T = 500
    gap = 0.05
    env_factory = EnvironmentSpec.from_dict({"kind": "gap", "gap": gap, "clipped": False}).for_horizon(T)
    good = monte_carlo(env_factory, chi_player, n_reps=40, master_seed=0)
    bad = monte_carlo(env_factory, other_player, n_reps=40, master_seed=0)
    difference = bad.regrets - good.regrets
    assert difference.mean() == pytest.approx(gap * T, rel=1e-6)


def test_invalid_arguments():
    env_factory = linear_spec(16)
    with pytest.raises(ValueError):
        monte_carlo(env_factory, PlayerSpec.parse("exp3"), n_reps=0, master_seed=0)
    with pytest.raises(ValueError):
        monte_carlo(env_factory, PlayerSpec.parse("exp3"), n_reps=1, master_seed=0, parallelism=0)
