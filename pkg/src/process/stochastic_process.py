"""
@file: stochastic_process.py
@desc: ガウスノイズ ξ、多重スケールウォーク W、ギャップ過程 Z、クリップ済み損失表 L の生成と切り替えコスト環境の構築
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, NamedTuple, Optional

import numpy as np

from src.core.losses import ObliviousLossTable, identity_combiner
from src.engine.environment import RealizedEnvironment
from src.process.parent_functions import ParentFunction, depth, gcd_parent_function

# ロガー設定
logger = logging.getLogger(__name__)

# 困難インスタンスはすべて2行動
HARD_INSTANCE_ACTIONS = 2


@dataclass(frozen=True, eq=False)
class NoiseSequence:
    """独立な平均0・分散 σ² のガウス列 ξ_{1:T}（values[t-1] が ξ_t）"""
    values: np.ndarray
    sigma: float

    @property
    def horizon(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class WalkSequence:
    """W_{0:T}（values[t] が W_t、W_0 = 0）"""
    values: np.ndarray

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1


@dataclass(frozen=True, eq=False)
class GapProcess:
    """
    Z_t(x) = W_t + 1/2 - ε·1{x = χ}（クリップ前）

    values[t-1, x] が Z_t(x)。
    """
    chi: int
    epsilon: float
    values: np.ndarray

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    def z(self, t: int, action: int) -> float:
        return float(self.values[t - 1, action])


class LossTables(NamedTuple):
    """クリップ済み損失表と、区間チェック用のクリップ前テーブル"""
    clipped: ObliviousLossTable
    unclipped: ObliviousLossTable


@dataclass(frozen=True, eq=False)
class ProcessAudit:
    """環境ダンプ用に保持する生成過程の記録"""
    parent: ParentFunction
    noise: NoiseSequence
    walk: WalkSequence
    gap: GapProcess

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "parents": self.parent.parents,
            "noise": self.noise.values,
            "walk": self.walk.values,
            "gap": self.gap.values,
        }


def sample_noise(T: int, sigma: float, rng: np.random.Generator) -> NoiseSequence:
    """
    ξ_1, ..., ξ_T をラウンド順に引く

    Args:
        T: ホライズン
        sigma: 標準偏差 σ
        rng: 乱数生成器

    Returns:
        ノイズ列
    """
    if T < 1:
        raise ValueError(f"ホライズンは1以上が必要です: {T}")
    if not sigma > 0:
        raise ValueError(f"σ は正の値が必要です: {sigma}")
    values = rng.normal(0.0, sigma, size=T)
    values.setflags(write=False)
    return NoiseSequence(values=values, sigma=float(sigma))


def build_walk(rho: ParentFunction, noise: NoiseSequence) -> WalkSequence:
    """W_0 = 0, W_t = W_{ρ(t)} + ξ_t"""
    if rho.horizon != noise.horizon:
        raise ValueError(f"親関数とノイズの長さが一致しません: {rho.horizon} != {noise.horizon}")
    walk = np.zeros(rho.horizon + 1)
    parents = rho.parents
    xi = noise.values
    for t in range(1, rho.horizon + 1):
        walk[t] = walk[parents[t]] + xi[t - 1]
    walk.setflags(write=False)
    return WalkSequence(values=walk)


def build_gap_process(walk: WalkSequence, chi: int, epsilon: float) -> GapProcess:
    """
    ギャップ過程 Z を構築（クリップはしない）

    Args:
        walk: W_{0:T}
        chi: 良い方の行動 χ
        epsilon: ギャップ ε

    Returns:
        ギャップ過程
    """
    if not epsilon > 0:
        raise ValueError(f"ε は正の値が必要です: {epsilon}")
    if chi not in (0, 1):
        raise ValueError(f"χ は0か1です: {chi}")
    base = walk.values[1:] + 0.5
    values = np.column_stack([base, base])
    values[:, chi] = base - epsilon
    values.setflags(write=False)
    return GapProcess(chi=int(chi), epsilon=float(epsilon), values=values)


def clip_to_table(gap: GapProcess, spikes: Optional[Any] = None) -> LossTables:
    """
    L_t(x) = clip(Z_t(x) + S_t(x))

    Args:
        gap: ギャップ過程
        spikes: スパイク列（values 属性を持つオブジェクトか (T, 2) 配列）。None なら S ≡ 0

    Returns:
        クリップ済み／クリップ前の損失表
    """
    raw = np.array(gap.values, dtype=np.float64)
    if spikes is not None:
        spike_values = np.asarray(getattr(spikes, "values", spikes), dtype=np.float64)
        if spike_values.shape != raw.shape:
            raise ValueError(f"スパイク列の形状が一致しません: {spike_values.shape} != {raw.shape}")
        raw = raw + spike_values
    clipped = np.clip(raw, 0.0, 1.0)
    return LossTables(
        clipped=ObliviousLossTable(clipped),
        unclipped=ObliviousLossTable(raw, bounded=False)
    )


def clipped_fraction(tables: LossTables) -> float:
    """クリップで値が変わった要素の割合"""
    return float(np.mean(tables.clipped.values != tables.unclipped.values))


def switching_cost_env(
    table: ObliviousLossTable,
    unclipped: Optional[ObliviousLossTable] = None,
    **metadata: Any
) -> RealizedEnvironment:
    """
    忘却的損失に切り替えコストを足した環境 f_t = ℓ_t(x_t) + 1{x_t != x_{t-1}}

    Args:
        table: 忘却的損失表
        unclipped: クリップ前テーブル（任意）
        metadata: chi / seed / params / audit など環境に付けるメタデータ

    Returns:
        切り替えコスト環境
    """
    return RealizedEnvironment(
        table=table,
        combiner=identity_combiner(),
        switching=True,
        kind="switching",
        unclipped=unclipped,
        **metadata
    )


def default_sigma(walk_depth: int, T: int, delta: Optional[float] = None) -> float:
    """σ = (d(ρ) ln(T/δ))^{-1/2}（δ の既定値は 1/T）"""
    if delta is None:
        delta = 1.0 / T
    if not 0 < delta < 1:
        raise ValueError(f"δ は (0, 1) の値が必要です: {delta}")
    return (walk_depth * math.log(T / delta)) ** -0.5


def concentration_bound(sigma: float, walk_depth: int, T: int, delta: float) -> float:
    """max_t |W_t| の高確率上界 σ √(2 d(ρ) ln(T/δ))"""
    return sigma * math.sqrt(2.0 * walk_depth * math.log(T / delta))


def default_switching_gap(T: int) -> float:
    """ε = T^{-1/3} / ln T"""
    return T ** (-1.0 / 3.0) / math.log(T)


def build_switching_cost_instance(
    T: int,
    rng: np.random.Generator,
    epsilon: Optional[float] = None,
    sigma: Optional[float] = None,
    delta: Optional[float] = None,
    seed: Optional[int] = None
) -> RealizedEnvironment:
    """
    切り替えコスト付き2腕バンディットの困難インスタンス

    gcd 親関数 → ξ → W → χ → Z → クリップの順に構築する。

    Args:
        T: ホライズン
        rng: 乱数生成器
        epsilon: ギャップ（既定 T^{-1/3}/ln T）
        sigma: ノイズの標準偏差（既定は default_sigma）
        delta: σ 調整用の δ（既定 1/T）
        seed: メタデータとして記録するシード

    Returns:
        切り替えコスト環境
    """
    if T < 2:
        raise ValueError(f"ホライズンは2以上が必要です: {T}")
    rho = gcd_parent_function(T)
    walk_depth = depth(rho)
    if sigma is None:
        sigma = default_sigma(walk_depth, T, delta)
    if epsilon is None:
        epsilon = default_switching_gap(T)

    noise = sample_noise(T, sigma, rng)
    walk = build_walk(rho, noise)
    chi = int(rng.integers(0, HARD_INSTANCE_ACTIONS))
    gap = build_gap_process(walk, chi, epsilon)
    tables = clip_to_table(gap)

    logger.debug(
        f"切り替えコストインスタンス: T={T}, σ={sigma:.4g}, ε={epsilon:.4g}, "
        f"χ={chi}, クリップ率={clipped_fraction(tables):.3%}"
    )
    return switching_cost_env(
        tables.clipped,
        unclipped=tables.unclipped,
        chi=chi,
        seed=seed,
        params={"sigma": float(sigma), "epsilon": float(epsilon), "depth": int(walk_depth)},
        audit=ProcessAudit(parent=rho, noise=noise, walk=walk, gap=gap),
    )
