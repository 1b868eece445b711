"""
@file: baselines.py
@desc: 定数・バッチ化・スクリプト・交互・確率的切り替えなど、比較用と検証用のプレイヤー
"""

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.core.losses import validate_action
from src.player.base import ALL_FEEDBACK, Feedback, Player

# ロガー設定
logger = logging.getLogger(__name__)

# (行動数, ホライズン) からプレイヤーを作る関数
PlayerFactory = Callable[[int, int], Player]


class ConstantPlayer(Player):
    """常に同じ行動を取る（後知恵の比較対象となる方策）"""

    accepted_feedback = ALL_FEEDBACK

    def __init__(self, n_actions: int, horizon: int, action: int):
        super().__init__(n_actions, horizon)
        self.action = validate_action(action, n_actions)

    @property
    def name(self) -> str:
        return f"constant:{self.action}"

    def select(self, t: int, rng: np.random.Generator) -> int:
        return self.action

    def observe(self, t: int, action: int, feedback: Feedback):
        pass


class ScriptedPlayer(Player):
    """与えられた行動列をそのまま再生する"""

    accepted_feedback = ALL_FEEDBACK

    def __init__(self, n_actions: int, horizon: int, actions: Sequence[int]):
        super().__init__(n_actions, horizon)
        if len(actions) < horizon:
            raise ValueError(f"行動列がホライズンより短いです: {len(actions)} < {horizon}")
        self.actions = [validate_action(a, n_actions) for a in actions[:horizon]]

    @property
    def name(self) -> str:
        return "scripted"

    def select(self, t: int, rng: np.random.Generator) -> int:
        return self.actions[t - 1]

    def observe(self, t: int, action: int, feedback: Feedback):
        pass


class AlternatingPlayer(Player):
    """行動 0, 1, ..., k-1 を巡回し、毎ラウンド切り替える"""

    accepted_feedback = ALL_FEEDBACK

    @property
    def name(self) -> str:
        return "alternate"

    def select(self, t: int, rng: np.random.Generator) -> int:
        return (t - 1) % self.n_actions

    def observe(self, t: int, action: int, feedback: Feedback):
        pass


class SwitchingProbePlayer(Player):
    """各ラウンド確率 p で別の行動へ一様に切り替える検証用プレイヤー"""

    accepted_feedback = ALL_FEEDBACK

    def __init__(self, n_actions: int, horizon: int, switch_prob: float):
        super().__init__(n_actions, horizon)
        if not 0.0 <= switch_prob <= 1.0:
            raise ValueError(f"切り替え確率は [0, 1] の値が必要です: {switch_prob}")
        self.switch_prob = switch_prob
        self._current: Optional[int] = None

    @property
    def name(self) -> str:
        return f"switch:{self.switch_prob:g}"

    def select(self, t: int, rng: np.random.Generator) -> int:
        if self._current is None:
            self._current = int(rng.integers(0, self.n_actions))
        elif rng.random() < self.switch_prob:
            shift = int(rng.integers(1, self.n_actions))
            self._current = (self._current + shift) % self.n_actions
        return self._current

    def observe(self, t: int, action: int, feedback: Feedback):
        pass


def auto_batch_size(horizon: int) -> int:
    """B = ⌈T^{1/3}⌉"""
    batch = max(1, round(horizon ** (1.0 / 3.0)))
    while batch ** 3 < horizon:
        batch += 1
    while batch > 1 and (batch - 1) ** 3 >= horizon:
        batch -= 1
    return batch


class BatchedPlayer(Player):
    """
    内側のプレイヤーを ⌈T/B⌉ 回のメタラウンドで動かす

    バッチ内では同じ行動を繰り返し、バッチの終わりに観測値の平均を内側へ渡す。
    """

    def __init__(self, n_actions: int, horizon: int, inner: PlayerFactory, batch_size: int):
        """
        初期化

        Args:
            n_actions: 行動数
            horizon: ホライズン T
            inner: 内側のプレイヤーのファクトリ
            batch_size: バッチサイズ B
        """
        super().__init__(n_actions, horizon)
        if batch_size < 1:
            raise ValueError(f"バッチサイズは1以上が必要です: {batch_size}")
        self.batch_size = batch_size
        self.n_batches = math.ceil(horizon / batch_size)
        self.inner = inner(n_actions, self.n_batches)
        self.accepted_feedback = self.inner.accepted_feedback
        self._action: Optional[int] = None
        self._observed: List[Feedback] = []

    @property
    def name(self) -> str:
        return f"batched:{self.inner.name}:B={self.batch_size}"

    def batch_index(self, t: int) -> int:
        return (t - 1) // self.batch_size + 1

    def select(self, t: int, rng: np.random.Generator) -> int:
        if (t - 1) % self.batch_size == 0:
            self._action = self.inner.select(self.batch_index(t), rng)
            self._observed = []
        return self._action

    def observe(self, t: int, action: int, feedback: Feedback):
        self._observed.append(feedback)
        if t % self.batch_size == 0 or t == self.horizon:
            average = np.mean(self._observed, axis=0)
            if np.ndim(average) == 0:
                average = float(average)
            self.inner.observe(self.batch_index(t), self._action, average)


def constant_player(action: int, n_actions: int, horizon: int) -> ConstantPlayer:
    return ConstantPlayer(n_actions, horizon, action)


def batched_player(inner: PlayerFactory, batch_size: int, n_actions: int, horizon: int) -> BatchedPlayer:
    return BatchedPlayer(n_actions, horizon, inner, batch_size)
