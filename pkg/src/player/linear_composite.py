"""
@file: linear_composite.py
@desc: 線形合成損失用のプレイヤー（d+1 個の Exp3 を巡回させ、遅延した忘却的損失 z_t を復元して学習する）
"""

import logging
from collections import deque
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.core.losses import clip, make_linear_combiner
from src.engine.environment import FeedbackKind
from src.player.base import Feedback, Player
from src.player.exp3 import Exp3State

# ロガー設定
logger = logging.getLogger(__name__)

# 復元値 z_t の許容範囲 [-Z_TOLERANCE, 1 + Z_TOLERANCE]
Z_TOLERANCE = 1e-6


def recovery_growth(coeffs: Sequence[float]) -> float:
    """
    z の漸化式の誤差増幅率（特性多項式 a_d x^{m-d} + ... + a_m の根の絶対値の最大）

    1 を超えると f_t の丸め誤差がラウンドごとに幾何級数的に増える。

    Args:
        coeffs: 係数 (a_0, ..., a_m)

    Returns:
        スペクトル半径（m = d なら0）
    """
    combiner = make_linear_combiner(coeffs)
    tail = combiner.coeffs[combiner.delay:]
    if len(tail) == 1:
        return 0.0
    return float(np.max(np.abs(np.roots(tail))))


def pool_budgets(horizon: int, pool_size: int) -> List[int]:
    """各インスタンス A_j が担当するラウンド数 |{t <= T : t mod (d+1) = j}|"""
    return [
        max(1, len(range(j if j > 0 else pool_size, horizon + 1, pool_size)))
        for j in range(pool_size)
    ]


class LinearCompositePlayer(Player):
    """
    線形合成損失 f_t = Σ_i a_i ℓ_{t-i}(x_{t-i}) に対するプレイヤー

    ラウンド t では A_{t mod (d+1)} が行動を選ぶ。観測した f_t から
    z_t = (f_t - Σ_{i=d+1}^{m} a_i z_{t-i+d}) / a_d = ℓ_{t-d}(x_{t-d}) を復元し、
    x_{t-d} を選んだインスタンスに、選んだときの確率で損失 z_t を渡す。
    """

    accepted_feedback = frozenset({FeedbackKind.COMPOSITE_BANDIT})

    def __init__(self, n_actions: int, horizon: int, coeffs: Sequence[float]):
        """
        初期化

        Args:
            n_actions: 行動数
            horizon: ホライズン
            coeffs: 係数 (a_0, ..., a_m)。総和1に正規化される
        """
        super().__init__(n_actions, horizon)
        self.combiner = make_linear_combiner(coeffs)
        self.delay = self.combiner.delay
        self.memory = self.combiner.memory
        self.pool_size = self.delay + 1
        self.pool = [Exp3State(n_actions, n) for n in pool_budgets(horizon, self.pool_size)]

        # z_{t-1}, z_{t-2}, ...（新しい順、初期値0）
        self._z_history = deque([0.0] * self.memory, maxlen=max(self.memory, 1))
        self._pending: Dict[int, Tuple[int, int, float]] = {}
        self.recovered: List[float] = []
        # A_j がフィードバックを受けたラウンド（x_{t-d} の選択ラウンド）
        self.credited_rounds: List[List[int]] = [[] for _ in range(self.pool_size)]

        growth = recovery_growth(self.combiner.coeffs)
        if growth > 1.0:
            logger.warning(
                f"係数 {self.combiner.coeffs} では z の復元が数値的に不安定です (増幅率={growth:.3g})"
            )

    @property
    def name(self) -> str:
        return "linear"

    def active_instance(self, t: int) -> int:
        return t % self.pool_size

    def select(self, t: int, rng: np.random.Generator) -> int:
        j = self.active_instance(t)
        action, prob = self.pool[j].sample(rng)
        self._pending[t] = (j, action, prob)
        return action

    def recover(self, feedback: float) -> float:
        """観測した f_t から z_t を計算（履歴は更新しない）"""
        coeffs = self.combiner.coeffs
        d = self.delay
        residual = feedback
        for i in range(d + 1, self.memory + 1):
            residual -= coeffs[i] * self._z_history[i - d - 1]
        return residual / coeffs[d]

    def observe(self, t: int, action: int, feedback: Feedback):
        if t not in self._pending or self._pending[t][1] != action:
            raise RuntimeError(f"選択していない行動へのフィードバックです: t={t}, x={action}")
        z = self.recover(float(feedback))
        if not -Z_TOLERANCE <= z <= 1.0 + Z_TOLERANCE:
            raise RuntimeError(f"ラウンド {t} の復元値 z_t={z} が許容範囲外です")
        self.recovered.append(z)
        if self.memory > 0:
            self._z_history.appendleft(z)

        source = t - self.delay
        if source >= 1:
            j, played, prob = self._pending.pop(source)
            self.pool[j].update(played, clip(z), prob)
            self.credited_rounds[j].append(source)
