"""
@file: losses.py
@desc: 行動・損失値・結合関数・合成損失の評価など、全モジュール共通の基本型
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

# ロガー設定
logger = logging.getLogger(__name__)

# 係数の総和チェックに使う許容誤差
COEFF_SUM_TOLERANCE = 1e-12

# 行動は [0, k) の整数インデックス
Action = int


def validate_action(action: int, k: int) -> int:
    """
    行動インデックスの妥当性を検証

    Args:
        action: 行動インデックス
        k: 行動数

    Returns:
        検証済みの行動インデックス
    """
    if k < 2:
        raise ValueError(f"行動数 k は2以上が必要です: k={k}")
    if not 0 <= int(action) < k:
        raise ValueError(f"行動インデックスが範囲外です: {action} (k={k})")
    return int(action)


def clip(alpha: float) -> float:
    """[0, 1] へのクリッピング"""
    return min(max(alpha, 0.0), 1.0)


class CombinerKind(str, Enum):
    """結合関数の種類"""
    MIN = "min"
    MAX = "max"
    LINEAR = "linear"


@dataclass(frozen=True)
class CombiningFunction:
    """
    直近 m+1 ラウンドの忘却的損失値を1つの損失にまとめる結合関数 g

    窓は (ℓ_{t-m}, ..., ℓ_t) の順に並び、線形の係数 a_i は ℓ_{t-i} に掛かる。
    """
    kind: CombinerKind
    memory: int
    coeffs: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.memory < 0:
            raise ValueError(f"memory は0以上が必要です: {self.memory}")
        if self.kind is CombinerKind.LINEAR:
            if self.coeffs is None or len(self.coeffs) != self.memory + 1:
                raise ValueError("線形結合関数には memory+1 個の係数が必要です")
            if any(a < 0 for a in self.coeffs):
                raise ValueError(f"係数に負の値が含まれています: {self.coeffs}")
            if not any(a != 0 for a in self.coeffs):
                raise ValueError("係数がすべて0です")
            if abs(sum(self.coeffs) - 1.0) > COEFF_SUM_TOLERANCE:
                raise ValueError(f"係数の総和が1ではありません: {sum(self.coeffs)}")
        else:
            if self.memory != 1:
                raise ValueError(f"min/max 結合関数の memory は1です: {self.memory}")
            if self.coeffs is not None:
                raise ValueError("min/max 結合関数は係数を持ちません")

    @property
    def delay(self) -> int:
        """最初の非ゼロ係数のインデックス d（線形のみ）"""
        if self.kind is not CombinerKind.LINEAR:
            raise ValueError("delay は線形結合関数でのみ定義されます")
        return next(i for i, a in enumerate(self.coeffs) if a != 0)

    def apply(self, window: Sequence[float]) -> float:
        """
        窓 (ℓ_{t-m}, ..., ℓ_t) に g を適用

        Args:
            window: 長さ m+1 の損失値列（古い順）

        Returns:
            結合後の損失値
        """
        if len(window) != self.memory + 1:
            raise ValueError(f"窓の長さが不正です: {len(window)} != {self.memory + 1}")
        if self.kind is CombinerKind.MIN:
            return min(window)
        if self.kind is CombinerKind.MAX:
            return max(window)
        # window[-1-i] が ℓ_{t-i}
        return float(sum(a * window[-1 - i] for i, a in enumerate(self.coeffs)))

    def label(self) -> str:
        if self.kind is CombinerKind.LINEAR:
            return f"linear[m={self.memory}]"
        return self.kind.value


def make_min_combiner() -> CombiningFunction:
    return CombiningFunction(CombinerKind.MIN, 1)


def make_max_combiner() -> CombiningFunction:
    return CombiningFunction(CombinerKind.MAX, 1)


def make_linear_combiner(coeffs: Sequence[float]) -> CombiningFunction:
    """
    係数列から線形結合関数を生成（総和1に正規化）

    Args:
        coeffs: 係数 (a_0, ..., a_m)。a_i は ℓ_{t-i} に掛かる

    Returns:
        正規化済みの線形結合関数
    """
    values = [float(a) for a in coeffs]
    if not values:
        raise ValueError("係数列が空です")
    if any(a < 0 for a in values):
        raise ValueError(f"係数に負の値が含まれています: {values}")
    total = sum(values)
    if total <= 0:
        raise ValueError("係数がすべて0です")
    normalized = tuple(a / total for a in values)
    return CombiningFunction(CombinerKind.LINEAR, len(values) - 1, normalized)


def identity_combiner() -> CombiningFunction:
    """f_t = ℓ_t(x_t) となる m=0 の線形結合関数"""
    return make_linear_combiner([1.0])


@dataclass(frozen=True, eq=False)
class ObliviousLossTable:
    """
    忘却的損失表 ℓ_{1:T}（ラウンド × 行動）

    values[t-1, x] が ℓ_t(x)。t <= 0 の問い合わせは常に0を返す。
    bounded=False はクリップ前の診断用テーブルで、[0,1] 外の値を許す。
    """
    values: np.ndarray
    bounded: bool = True

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 2:
            raise ValueError(f"損失表の形状が不正です: {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("損失表に有限でない値が含まれています")
        if self.bounded and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("損失表の値が [0, 1] の範囲外です")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def value(self, t: int, action: int) -> float:
        """ℓ_t(x)。t <= 0 なら0"""
        if t <= 0:
            return 0.0
        if t > self.horizon:
            raise ValueError(f"ラウンドが範囲外です: t={t} (T={self.horizon})")
        return float(self.values[t - 1, action])


def eval_composite(
    g: CombiningFunction,
    table: ObliviousLossTable,
    actions: Sequence[int],
    t: int
) -> float:
    """
    合成損失 f_t(x_{1:t}) = g(ℓ_{t-m}(x_{t-m}), ..., ℓ_t(x_t)) を評価

    Args:
        g: 結合関数
        table: 忘却的損失表
        actions: 行動列。actions[s-1] がラウンド s の行動
        t: 評価するラウンド（1始まり）

    Returns:
        合成損失値
    """
    if not 1 <= t <= table.horizon:
        raise ValueError(f"ラウンドが範囲外です: t={t} (T={table.horizon})")
    if len(actions) < t:
        raise ValueError(f"ラウンド {t} までの行動が不足しています: {len(actions)}")
    window = [
        table.value(s, actions[s - 1]) if s >= 1 else 0.0
        for s in range(t - g.memory, t + 1)
    ]
    return g.apply(window)
