"""
@file: exp3.py
@desc: 損失ベースの Exp3（重要度重み付き指数重み、一様混合なし）
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.player.base import Feedback, Player

# ロガー設定
logger = logging.getLogger(__name__)


def default_learning_rate(k: int, round_budget: int) -> float:
    """学習率 √(2 ln k / (n k))"""
    return math.sqrt(2.0 * math.log(k) / (round_budget * k))


class Exp3State:
    """
    Exp3 の内部状態

    重みは対数で保持し、確率は更新のたびに計算し直してキャッシュする。
    """

    def __init__(self, k: int, round_budget: int, learning_rate: Optional[float] = None):
        """
        初期化

        Args:
            k: 腕の数
            round_budget: 学習率の調整に使うラウンド数 n
            learning_rate: 学習率（省略時は default_learning_rate）
        """
        if k < 2:
            raise ValueError(f"行動数 k は2以上が必要です: k={k}")
        if round_budget < 1:
            raise ValueError(f"ラウンド数は1以上が必要です: {round_budget}")
        if learning_rate is None:
            learning_rate = default_learning_rate(k, round_budget)
        if not learning_rate > 0:
            raise ValueError(f"学習率は正の値が必要です: {learning_rate}")

        self.k = k
        self.round_budget = round_budget
        self.learning_rate = learning_rate
        self.log_weights = np.zeros(k)
        self.n_updates = 0
        self._probabilities = np.full(k, 1.0 / k)
        self._cdf = np.cumsum(self._probabilities)

    @property
    def weights(self) -> np.ndarray:
        """最大の重みを1とした正規化済みの重み"""
        return np.exp(self.log_weights - self.log_weights.max())

    @property
    def probabilities(self) -> np.ndarray:
        return self._probabilities

    def sample(self, rng: np.random.Generator) -> Tuple[int, float]:
        """
        p_x = w_x / Σ w から腕を引く

        Returns:
            (腕, その腕を引いた確率)
        """
        # 累積分布の二分探索で1つ引く
        action = min(int(np.searchsorted(self._cdf, rng.random(), side="right")), self.k - 1)
        return action, float(self._probabilities[action])

    def update(self, action: int, loss: float, prob: Optional[float] = None):
        """
        ℓ̂_x = loss·1{x = action} / p で重みを更新

        Args:
            action: 引いた腕
            loss: 観測した損失（[0, 1]）
            prob: 腕を引いたときの確率（省略時は現在の確率）
        """
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"Exp3 に渡す損失は [0, 1] が必要です: {loss}")
        if not 0 <= action < self.k:
            raise ValueError(f"腕が範囲外です: {action} (k={self.k})")
        if prob is None:
            prob = float(self._probabilities[action])
        if not prob > 0:
            raise ValueError(f"確率0の腕は更新できません: {action}")

        self.n_updates += 1
        if loss == 0.0:
            return
        self.log_weights[action] -= self.learning_rate * loss / prob
        shifted = np.exp(self.log_weights - self.log_weights.max())
        self._probabilities = shifted / shifted.sum()
        self._cdf = np.cumsum(self._probabilities)


def exp3_sample(state: Exp3State, rng: np.random.Generator) -> int:
    return state.sample(rng)[0]


def exp3_update(state: Exp3State, action: int, loss: float) -> Exp3State:
    state.update(action, loss)
    return state


class Exp3Player(Player):
    """Exp3 を1つだけ使うバンディットプレイヤー"""

    def __init__(self, n_actions: int, horizon: int, learning_rate: Optional[float] = None):
        super().__init__(n_actions, horizon)
        self.state = Exp3State(n_actions, horizon, learning_rate)
        self._last: Optional[Tuple[int, int, float]] = None

    @property
    def name(self) -> str:
        return "exp3"

    def select(self, t: int, rng: np.random.Generator) -> int:
        action, prob = self.state.sample(rng)
        self._last = (t, action, prob)
        return action

    def observe(self, t: int, action: int, feedback: Feedback):
        if self._last is None or self._last[:2] != (t, action):
            raise RuntimeError(f"選択していない行動へのフィードバックです: t={t}, x={action}")
        self.state.update(action, float(feedback), self._last[2])
