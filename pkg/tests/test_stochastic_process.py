"""
@file: test_stochastic_process.py
@desc: ノイズ・ウォーク・ギャップ過程・クリップ・切り替えコスト環境のテスト
"""

import math

import numpy as np
import pytest

from src.process.parent_functions import (
    ParentFunction,
    chain_parent_function,
    depth,
    gcd_parent_function,
    star_parent_function,
)
from src.process.stochastic_process import (
    GapProcess,
    NoiseSequence,
    WalkSequence,
    build_gap_process,
    build_switching_cost_instance,
    build_walk,
    clip_to_table,
    clipped_fraction,
    concentration_bound,
    default_sigma,
    default_switching_gap,
    sample_noise,
    switching_cost_env,
)
from src.core.losses import ObliviousLossTable


def test_sample_noise_rejects_degenerate_sigma(rng):
    with pytest.raises(ValueError):
        sample_noise(4, 0.0, rng)
    with pytest.raises(ValueError):
        sample_noise(0, 1.0, rng)


def test_sample_noise_is_deterministic(make_rng):
    a = sample_noise(4, 0.3, make_rng(3))
    b = sample_noise(4, 0.3, make_rng(3))
    assert np.array_equal(a.values, b.values)


def test_sample_noise_moments(rng):
    T = 10 ** 4
    noise = sample_noise(T, 1.0, rng)
    assert abs(noise.values.mean()) < 4 / math.sqrt(T)
    assert abs(noise.values.var() - 1.0) < 0.1


def test_build_walk_examples(rng):
    noise = NoiseSequence(values=np.array([0.1, 0.2, 0.3]), sigma=0.1)
    walk = build_walk(ParentFunction(np.array([0, 0, 1, 1])), noise)
    assert walk.values[0] == 0.0
    assert np.allclose(walk.values[1:], [0.1, 0.3, 0.4])

    noise = sample_noise(50, 0.5, rng)
    assert np.array_equal(build_walk(star_parent_function(50), noise).values[1:], noise.values)
    assert np.allclose(build_walk(chain_parent_function(50), noise).values[1:], np.cumsum(noise.values))


def test_build_walk_length_mismatch(rng):
    with pytest.raises(ValueError):
        build_walk(star_parent_function(5), sample_noise(4, 1.0, rng))


def test_build_gap_process_examples():
    walk = WalkSequence(values=np.array([0.0, 0.0, 0.6]))
    gap = build_gap_process(walk, chi=0, epsilon=0.1)
    assert gap.z(1, 0) == pytest.approx(0.4)
    assert gap.z(1, 1) == pytest.approx(0.5)

    gap = build_gap_process(walk, chi=1, epsilon=0.2)
    assert gap.z(2, 1) == pytest.approx(0.9)
    assert gap.z(2, 0) == pytest.approx(1.1)

    with pytest.raises(ValueError):
        build_gap_process(walk, chi=0, epsilon=0.0)
    with pytest.raises(ValueError):
        build_gap_process(walk, chi=2, epsilon=0.1)


def test_gap_identity_is_exact(rng):
    walk = build_walk(gcd_parent_function(256), sample_noise(256, 0.05, rng))
    gap = build_gap_process(walk, chi=1, epsilon=0.01)
    assert np.array_equal(gap.values[:, 1], gap.values[:, 0] - 0.01)


def test_clip_to_table():
    gap = GapProcess(chi=0, epsilon=0.1, values=np.array([[1.3, 0.4]]))
    tables = clip_to_table(gap)
    assert list(tables.clipped.values[0]) == [1.0, 0.4]
    assert list(tables.unclipped.values[0]) == [1.3, 0.4]
    assert clipped_fraction(tables) == 0.5

    spiked = clip_to_table(gap, np.array([[0.0, 0.25]]))
    assert spiked.clipped.values[0, 1] == pytest.approx(0.65)

    with pytest.raises(ValueError):
        clip_to_table(gap, np.zeros((2, 2)))


def test_switching_cost_env_constant_and_alternating(rng):
    table = ObliviousLossTable(rng.random((10, 2)))
    env = switching_cost_env(table)
    assert env.switching
    assert env.feedback_scale == 0.5

    constant = env.evaluate(np.zeros(10, dtype=int))
    assert constant.sum() == pytest.approx(table.values[:, 0].sum())

    alternating = np.arange(10) % 2
    penalty = env.evaluate(alternating).sum() - table.values[np.arange(10), alternating].sum()
    assert penalty == pytest.approx(9.0)


def test_default_sigma_and_bound():
    assert default_sigma(4, 100, 0.1) == pytest.approx((4 * math.log(1000)) ** -0.5)
    assert default_sigma(4, 100) == pytest.approx((4 * math.log(100 * 100)) ** -0.5)
    assert concentration_bound(0.5, 4, 100, 0.1) == pytest.approx(0.5 * math.sqrt(8 * math.log(1000)))
    assert default_switching_gap(1000) == pytest.approx(0.1 / math.log(1000))
    with pytest.raises(ValueError):
        default_sigma(4, 100, 1.5)


def test_switching_cost_instance_is_reproducible(make_rng):
    a = build_switching_cost_instance(128, make_rng(5), seed=5)
    b = build_switching_cost_instance(128, make_rng(5), seed=5)
    assert np.array_equal(a.table.values, b.table.values)
    assert a.chi == b.chi
    assert a.kind == "switching"
    assert a.params["depth"] == depth(gcd_parent_function(128))
    assert a.audit.gap.chi == a.chi


def test_switching_cost_instance_rejects_short_horizon(rng):
    with pytest.raises(ValueError):
        build_switching_cost_instance(1, rng)


def test_clipped_fraction_small_with_tuned_sigma(rng):
    T = 4096
    rho = gcd_parent_function(T)
    sigma = default_sigma(depth(rho), T, 0.1)
    fractions = []
    for _ in range(20):
        walk = build_walk(rho, sample_noise(T, sigma, rng))
        tables = clip_to_table(build_gap_process(walk, 0, default_switching_gap(T)))
        fractions.append(clipped_fraction(tables))
    assert np.mean(fractions) < 0.05


@pytest.mark.slow
def test_walk_concentration(rng):
    T = 4096
    delta = 0.1
    rho = gcd_parent_function(T)
    d = depth(rho)
    sigma = default_sigma(d, T, delta)
    bound = concentration_bound(sigma, d, T, delta)
    violations = 0
    runs = 1000
    for _ in range(runs):
        walk = build_walk(rho, sample_noise(T, sigma, rng))
        violations += np.max(np.abs(walk.values)) > bound
    assert violations / runs <= delta + 0.02
