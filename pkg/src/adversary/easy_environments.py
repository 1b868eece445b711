"""
@file: easy_environments.py
@desc: 線形合成損失の環境（√T で学習できる簡単な側）と、ギャップ過程の期待差を測るための環境
"""

import logging
from typing import Optional, Sequence

import numpy as np

from src.core.losses import ObliviousLossTable, identity_combiner, make_linear_combiner
from src.engine.environment import RealizedEnvironment
from src.process.parent_functions import star_parent_function
from src.process.stochastic_process import (
    HARD_INSTANCE_ACTIONS,
    build_gap_process,
    build_walk,
    clip_to_table,
    sample_noise,
)

# ロガー設定
logger = logging.getLogger(__name__)


def build_gap_table(
    T: int,
    k: int,
    gap: float,
    best: int,
    rng: np.random.Generator
) -> ObliviousLossTable:
    """
    i.i.d. 一様損失に、最良行動以外へ一定のギャップを足した損失表

    Args:
        T: ホライズン
        k: 行動数
        gap: ギャップ（0 <= gap < 1）
        best: 最良行動
        rng: 乱数生成器

    Returns:
        ℓ_t(x) ~ U[0, 1-gap] + gap·1{x != best}
    """
    if T < 1:
        raise ValueError(f"ホライズンは1以上が必要です: {T}")
    if k < 2:
        raise ValueError(f"行動数 k は2以上が必要です: k={k}")
    if not 0 <= gap < 1:
        raise ValueError(f"ギャップは [0, 1) の値が必要です: {gap}")
    if not 0 <= best < k:
        raise ValueError(f"最良行動が範囲外です: {best} (k={k})")
    values = rng.uniform(0.0, 1.0 - gap, size=(T, k))
    values += gap
    values[:, best] -= gap
    return ObliviousLossTable(np.clip(values, 0.0, 1.0))


def build_linear_env(
    T: int,
    k: int,
    coeffs: Sequence[float],
    gap: float,
    rng: np.random.Generator,
    seed: Optional[int] = None
) -> RealizedEnvironment:
    """
    線形合成損失の環境 f_t = Σ_i a_i ℓ_{t-i}(x_{t-i})

    最良行動を先に一様に引き、χ として記録する。coeffs=(1,) は通常の忘却的バンディット。
    """
    combiner = make_linear_combiner(coeffs)
    best = int(rng.integers(0, k))
    table = build_gap_table(T, k, gap, best, rng)
    kind = "oblivious" if combiner == identity_combiner() else "linear"
    return RealizedEnvironment(
        table=table,
        combiner=combiner,
        chi=best,
        seed=seed,
        kind=kind,
        params={"gap": float(gap), "coeffs": list(combiner.coeffs)},
    )


def build_gap_env(
    T: int,
    gap: float,
    rng: np.random.Generator,
    clipped: bool = True,
    sigma: float = 0.1,
    seed: Optional[int] = None
) -> RealizedEnvironment:
    """
    i.i.d. の W（星型の親関数）に対するギャップ過程 Z_t(x) = W_t + 1/2 - ε·1{x = χ}

    clipped=False のときはクリップ前の値をそのまま損失表にする（期待差 εT の検証用）。

    Args:
        T: ホライズン
        gap: ε
        rng: 乱数生成器
        clipped: クリップするかどうか
        sigma: W のノイズの標準偏差
        seed: メタデータとして記録するシード

    Returns:
        忘却的損失の環境
    """
    noise = sample_noise(T, sigma, rng)
    walk = build_walk(star_parent_function(T), noise)
    chi = int(rng.integers(0, HARD_INSTANCE_ACTIONS))
    tables = clip_to_table(build_gap_process(walk, chi, gap))
    table = tables.clipped if clipped else tables.unclipped
    return RealizedEnvironment(
        table=table,
        combiner=identity_combiner(),
        chi=chi,
        seed=seed,
        kind="gap" if clipped else "gap-unclipped",
        params={"gap": float(gap), "sigma": float(sigma)},
        unclipped=tables.unclipped,
    )
