"""
@file: base.py
@desc: プレイヤーの共通インターフェース
"""

import logging
from abc import ABC, abstractmethod
from typing import ClassVar, FrozenSet, Union

import numpy as np

from src.engine.environment import FeedbackKind

# ロガー設定
logger = logging.getLogger(__name__)

# スカラー（f_t または ℓ_t(X_t)）か全行動の ℓ_t(·)
Feedback = Union[float, np.ndarray]

SCALAR_FEEDBACK = frozenset({FeedbackKind.COMPOSITE_BANDIT, FeedbackKind.OBLIVIOUS_VALUE})
ALL_FEEDBACK = frozenset(FeedbackKind)


class Player(ABC):
    """
    ラウンドごとに行動を選び、フィードバックを受け取るプレイヤー

    1ゲームにつき1インスタンスを使い捨てる（状態は単一の所有者が更新する）。
    """

    # 受け付けるフィードバックモデル
    accepted_feedback: ClassVar[FrozenSet[FeedbackKind]] = SCALAR_FEEDBACK

    def __init__(self, n_actions: int, horizon: int):
        if n_actions < 2:
            raise ValueError(f"行動数 k は2以上が必要です: k={n_actions}")
        if horizon < 1:
            raise ValueError(f"ホライズンは1以上が必要です: {horizon}")
        self.n_actions = n_actions
        self.horizon = horizon

    @property
    def name(self) -> str:
        return type(self).__name__

    def accepts(self, kind: FeedbackKind) -> bool:
        return kind in self.accepted_feedback

    @abstractmethod
    def select(self, t: int, rng: np.random.Generator) -> int:
        """ラウンド t の行動を選ぶ"""

    @abstractmethod
    def observe(self, t: int, action: int, feedback: Feedback):
        """ラウンド t のフィードバックを受け取る"""
