"""
@file: parent_functions.py
@desc: 多重スケールランダムウォークの依存構造（親関数 ρ）の生成と、祖先・深さ・カット・幅の計算
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence, Tuple

import numpy as np

# ロガー設定
logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ParentFunction:
    """
    親関数 ρ: [T] → {0} ∪ [T]（ρ(t) < t）

    parents[t] が ρ(t)。parents[0] は未使用で0を入れておく。
    """
    parents: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        parents = np.array(self.parents, dtype=np.int64)
        if parents.ndim != 1 or parents.shape[0] < 2:
            raise ValueError("親関数には T >= 1 の長さ T+1 の配列が必要です")
        if parents[0] != 0:
            raise ValueError("parents[0] は0でなければなりません")
        rounds = np.arange(parents.shape[0])
        if np.any(parents[1:] < 0) or np.any(parents[1:] >= rounds[1:]):
            raise ValueError("ρ(t) < t を満たさない親が含まれています")
        parents.setflags(write=False)
        object.__setattr__(self, "parents", parents)

    @property
    def horizon(self) -> int:
        return self.parents.shape[0] - 1

    def __call__(self, t: int) -> int:
        if not 1 <= t <= self.horizon:
            raise ValueError(f"ラウンドが範囲外です: t={t} (T={self.horizon})")
        return int(self.parents[t])


@dataclass(frozen=True, eq=False)
class RandomParentTrace:
    """ランダム親関数と、その生成に使ったベルヌーイ列 B_{1:T} および U_0=0, U_1, ... の記録"""
    parent: ParentFunction
    bits: np.ndarray
    renamed_indices: Tuple[int, ...]


def gcd_parent(t: int, T: int) -> int:
    """
    ρ̃(t) = t - gcd(t, 2^T)（最下位の1ビットを0にする）

    Args:
        t: ラウンド
        T: ホライズン

    Returns:
        親ラウンド
    """
    if not 1 <= t <= T:
        raise ValueError(f"ラウンドが範囲外です: t={t} (T={T})")
    # gcd(t, 2^T) は t の最下位ビット
    return t & (t - 1)


def gcd_parent_function(T: int) -> ParentFunction:
    """gcd 親関数 ρ̃ を [1, T] 全体で構築"""
    if T < 1:
        raise ValueError(f"ホライズンは1以上が必要です: {T}")
    rounds = np.arange(T + 1, dtype=np.int64)
    parents = rounds & (rounds - 1)
    parents[0] = 0
    return ParentFunction(parents, name="gcd")


def chain_parent_function(T: int) -> ParentFunction:
    """ρ(t) = t-1（ガウスランダムウォーク）"""
    if T < 1:
        raise ValueError(f"ホライズンは1以上が必要です: {T}")
    parents = np.maximum(np.arange(T + 1, dtype=np.int64) - 1, 0)
    return ParentFunction(parents, name="chain")


def star_parent_function(T: int) -> ParentFunction:
    """ρ(t) = 0（i.i.d. ガウス列）"""
    if T < 1:
        raise ValueError(f"ホライズンは1以上が必要です: {T}")
    return ParentFunction(np.zeros(T + 1, dtype=np.int64), name="star")


def build_random_parent(
    T: int,
    rng: Optional[np.random.Generator] = None,
    bits: Optional[Sequence[int]] = None
) -> RandomParentTrace:
    """
    ランダム親関数を構築

    B_t = 0 なら ρ(t) = t-1。B_t = 1 のラウンドを順に U_1, U_2, ... と名付け（U_0 = 0）、
    t = U_k なら ρ(t) = U_{ρ̃(k)} とする。

    Args:
        T: ホライズン
        rng: 乱数生成器（bits を与えない場合に B_{1:T} を引く）
        bits: 検証用に固定する B_{1:T}

    Returns:
        ランダム親関数のトレース
    """
    if T < 1:
        raise ValueError(f"ホライズンは1以上が必要です: {T}")
    if bits is None:
        if rng is None:
            raise ValueError("rng か bits のどちらかが必要です")
        bits = rng.integers(0, 2, size=T)
    bits = np.array(bits, dtype=np.int8)
    if bits.shape != (T,) or np.any((bits != 0) & (bits != 1)):
        raise ValueError("B は長さ T の0/1列でなければなりません")

    parents = np.zeros(T + 1, dtype=np.int64)
    renamed = [0]
    for t in range(1, T + 1):
        if bits[t - 1] == 0:
            parents[t] = t - 1
        else:
            renamed.append(t)
            k = len(renamed) - 1
            parents[t] = renamed[k & (k - 1)]

    bits.setflags(write=False)
    return RandomParentTrace(
        parent=ParentFunction(parents, name="random"),
        bits=bits,
        renamed_indices=tuple(renamed)
    )


def ancestors(rho: ParentFunction, t: int) -> FrozenSet[int]:
    """
    祖先集合 ρ*(t) = ρ*(ρ(t)) ∪ {ρ(t)}、ρ*(0) = {}

    t >= 1 では0が必ず含まれる。
    """
    if not 0 <= t <= rho.horizon:
        raise ValueError(f"ラウンドが範囲外です: t={t} (T={rho.horizon})")
    found = set()
    while t != 0:
        t = int(rho.parents[t])
        found.add(t)
    return frozenset(found)


def ancestor_counts(rho: ParentFunction) -> np.ndarray:
    """各 t について |ρ*(t)| を返す（ρ(t) < t なので前向き1パスで求まる）"""
    counts = np.zeros(rho.horizon + 1, dtype=np.int64)
    parents = rho.parents
    for t in range(1, rho.horizon + 1):
        counts[t] = counts[parents[t]] + 1
    return counts


def depth(rho: ParentFunction) -> int:
    """深さ d(ρ) = max_t |ρ*(t)|"""
    return int(ancestor_counts(rho)[1:].max())


def cut(rho: ParentFunction, t: int) -> FrozenSet[int]:
    """cut(t) = {s ∈ [T] : ρ(s) < t <= s}"""
    if not 1 <= t <= rho.horizon:
        raise ValueError(f"ラウンドが範囲外です: t={t} (T={rho.horizon})")
    s = np.arange(t, rho.horizon + 1)
    return frozenset(int(x) for x in s[rho.parents[t:] < t])


def cut_sizes(rho: ParentFunction) -> np.ndarray:
    """
    全ての t の |cut(t)|

    s は t ∈ (ρ(s), s] のカットに入るので差分配列で O(T) で数える。
    """
    T = rho.horizon
    diff = np.zeros(T + 2, dtype=np.int64)
    s = np.arange(1, T + 1)
    np.add.at(diff, rho.parents[1:] + 1, 1)
    np.add.at(diff, s + 1, -1)
    return np.cumsum(diff)[: T + 1]


def width(rho: ParentFunction) -> int:
    """幅 w(ρ) = max_t |cut(t)|"""
    return int(cut_sizes(rho)[1:].max())
