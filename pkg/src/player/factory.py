"""
@file: factory.py
@desc: 文字列指定（"exp3", "linear", "constant:0", "batched:exp3:B=32" など）からプレイヤーを生成
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from src.engine.environment import RealizedEnvironment
from src.player.base import Player
from src.player.baselines import (
    AlternatingPlayer,
    BatchedPlayer,
    ConstantPlayer,
    SwitchingProbePlayer,
    auto_batch_size,
)
from src.player.exp3 import Exp3Player
from src.player.linear_composite import LinearCompositePlayer

# ロガー設定
logger = logging.getLogger(__name__)

SIMPLE_KINDS = ("exp3", "linear", "alternate")
BATCH_AUTO = "auto"


@dataclass(frozen=True)
class PlayerSpec:
    """
    プレイヤーの指定

    文法: exp3 | linear | constant:<x> | alternate | switch:<p> | batched:<inner>:B=<int|auto>
    auto は B = ⌈T^{1/3}⌉。プロセス間で受け渡せるよう文字列と解析結果だけを持つ。
    """
    text: str
    kind: str
    action: Optional[int] = None
    switch_prob: Optional[float] = None
    inner: Optional["PlayerSpec"] = None
    batch_size: Optional[int] = None

    @classmethod
    def parse(cls, text: str) -> "PlayerSpec":
        """
        文字列を解析

        Args:
            text: プレイヤー指定

        Returns:
            解析済みの指定

        Raises:
            ValueError: 文法に合わない場合
        """
        text = text.strip()
        if text in SIMPLE_KINDS:
            return cls(text=text, kind=text)

        head, _, rest = text.partition(":")
        if head == "constant":
            try:
                action = int(rest)
            except ValueError:
                raise ValueError(f"constant の行動が整数ではありません: {text}")
            if action < 0:
                raise ValueError(f"constant の行動が負です: {text}")
            return cls(text=text, kind="constant", action=action)

        if head == "switch":
            try:
                prob = float(rest)
            except ValueError:
                raise ValueError(f"switch の確率が数値ではありません: {text}")
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"switch の確率は [0, 1] の値が必要です: {text}")
            return cls(text=text, kind="switch", switch_prob=prob)

        if head == "batched":
            inner_text, _, batch_text = rest.rpartition(":")
            if not inner_text or not batch_text.startswith("B="):
                raise ValueError(f"batched の指定は batched:<inner>:B=<int|auto> です: {text}")
            inner = cls.parse(inner_text)
            if inner.kind in ("batched", "linear"):
                raise ValueError(f"batched の内側に {inner.kind} は使えません: {text}")
            value = batch_text[2:]
            if value == BATCH_AUTO:
                batch_size = None
            else:
                try:
                    batch_size = int(value)
                except ValueError:
                    raise ValueError(f"バッチサイズが整数ではありません: {text}")
                if batch_size < 1:
                    raise ValueError(f"バッチサイズは1以上が必要です: {text}")
            return cls(text=text, kind="batched", inner=inner, batch_size=batch_size)

        raise ValueError(f"未知のプレイヤー指定です: {text}")

    def build(
        self,
        n_actions: int,
        horizon: int,
        coeffs: Optional[Sequence[float]] = None
    ) -> Player:
        """
        プレイヤーを生成

        Args:
            n_actions: 行動数
            horizon: ホライズン
            coeffs: linear に渡す線形結合の係数

        Returns:
            新しいプレイヤー
        """
        if self.kind == "exp3":
            return Exp3Player(n_actions, horizon)
        if self.kind == "linear":
            if coeffs is None:
                raise ValueError("linear プレイヤーには線形結合の係数が必要です")
            return LinearCompositePlayer(n_actions, horizon, coeffs)
        if self.kind == "constant":
            return ConstantPlayer(n_actions, horizon, self.action)
        if self.kind == "alternate":
            return AlternatingPlayer(n_actions, horizon)
        if self.kind == "switch":
            return SwitchingProbePlayer(n_actions, horizon, self.switch_prob)
        batch_size = self.batch_size if self.batch_size is not None else auto_batch_size(horizon)
        return BatchedPlayer(n_actions, horizon, self.inner.build, batch_size)

    def __call__(self, env: RealizedEnvironment) -> Player:
        """環境に合わせてプレイヤーを生成（linear は環境の係数を使う）"""
        coeffs = env.combiner.coeffs if self.kind == "linear" else None
        if self.kind == "linear" and (coeffs is None or env.switching):
            raise ValueError(f"linear プレイヤーは線形合成損失の環境でのみ使えます: {env.label()}")
        return self.build(env.n_actions, env.horizon, coeffs)


def make_player_factory(text: str) -> PlayerSpec:
    return PlayerSpec.parse(text)
