"""
@file: environment.py
@desc: 実現済み環境（忘却的損失表＋結合規則）とフィードバックモデル、環境ダンプの保存・読み込み
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.core.losses import (
    CombinerKind,
    CombiningFunction,
    ObliviousLossTable,
    eval_composite,
    identity_combiner,
)

# ロガー設定
logger = logging.getLogger(__name__)


class FeedbackKind(str, Enum):
    """フィードバックモデルの種類"""
    COMPOSITE_BANDIT = "composite"
    OBLIVIOUS_VALUE = "oblivious"
    FULL_OBLIVIOUS = "full"


@dataclass(frozen=True)
class FeedbackModel:
    """
    プレイヤーに返す情報の種類

    COMPOSITE_BANDIT は f_t(X_{1:t})、OBLIVIOUS_VALUE は ℓ_t(X_t)、
    FULL_OBLIVIOUS は全行動の ℓ_t(·) を返す。
    """
    kind: FeedbackKind

    @classmethod
    def parse(cls, text: str) -> "FeedbackModel":
        try:
            return cls(FeedbackKind(text))
        except ValueError:
            choices = ", ".join(k.value for k in FeedbackKind)
            raise ValueError(f"未知のフィードバックモデルです: {text} (選択肢: {choices})")

    @property
    def is_scalar(self) -> bool:
        return self.kind is not FeedbackKind.FULL_OBLIVIOUS


@dataclass(frozen=True, eq=False)
class RealizedEnvironment:
    """
    全ラウンド分を事前にサンプル済みの環境

    合成損失 g(ℓ_{t-m}, ..., ℓ_t) か、忘却的損失＋切り替えコスト 1{x_t != x_{t-1}}
    のどちらか一方の意味論を持つ。切り替えコスト環境の結合関数は m=0 の恒等関数。
    """
    table: ObliviousLossTable
    combiner: CombiningFunction
    switching: bool = False
    chi: Optional[int] = None
    seed: Optional[int] = None
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)
    unclipped: Optional[ObliviousLossTable] = None
    audit: Optional[Any] = None

    def __post_init__(self):
        if self.switching and self.combiner != identity_combiner():
            raise ValueError("切り替えコスト環境の結合関数は m=0 の恒等関数でなければなりません")
        if self.chi is not None and not 0 <= self.chi < self.table.n_actions:
            raise ValueError(f"χ が行動の範囲外です: {self.chi}")
        if self.unclipped is not None and self.unclipped.values.shape != self.table.values.shape:
            raise ValueError("クリップ前テーブルの形状が一致しません")

    @property
    def horizon(self) -> int:
        return self.table.horizon

    @property
    def n_actions(self) -> int:
        return self.table.n_actions

    @property
    def feedback_scale(self) -> float:
        """合成損失を [0,1] に収めるための倍率（切り替えコスト環境は 1/2）"""
        return 0.5 if self.switching else 1.0

    def label(self) -> str:
        if self.switching:
            return "switching"
        if self.kind in ("min", "max"):
            return self.kind
        return self.combiner.label()

    def round_loss(self, actions: Sequence[int], t: int) -> float:
        """ラウンド t の損失 f_t(x_{1:t})（切り替えコストは未スケール）"""
        loss = eval_composite(self.combiner, self.table, actions, t)
        if self.switching and t >= 2 and actions[t - 1] != actions[t - 2]:
            loss += 1.0
        return loss

    def evaluate(self, actions: Sequence[int]) -> np.ndarray:
        """
        行動列全体に対する f_1, ..., f_T をまとめて計算

        Args:
            actions: 長さ T の行動列

        Returns:
            ラウンドごとの損失（round_loss と同じ演算順で計算）
        """
        actions = np.asarray(actions, dtype=np.int64)
        T = self.horizon
        if actions.shape != (T,):
            raise ValueError(f"行動列の長さが T と一致しません: {actions.shape} (T={T})")
        if actions.min() < 0 or actions.max() >= self.n_actions:
            raise ValueError("行動列に範囲外の行動が含まれています")

        own = self.table.values[np.arange(T), actions]
        m = self.combiner.memory
        padded = np.concatenate([np.zeros(m), own])
        # lags[i] が ℓ_{t-i}(x_{t-i})
        lags = [padded[m - i: m - i + T] for i in range(m + 1)]

        if self.combiner.kind is CombinerKind.MIN:
            losses = np.minimum.reduce(lags)
        elif self.combiner.kind is CombinerKind.MAX:
            losses = np.maximum.reduce(lags)
        else:
            losses = np.zeros(T)
            for a, lag in zip(self.combiner.coeffs, lags):
                losses = losses + a * lag
        losses = np.array(losses, dtype=np.float64)

        if self.switching:
            losses[1:] += (actions[1:] != actions[:-1]).astype(np.float64)
        return losses

    def constant_losses(self, action: int) -> np.ndarray:
        """常に同じ行動を取る方策の損失列 f_t(x, ..., x)"""
        return self.evaluate(np.full(self.horizon, action, dtype=np.int64))

    def unclipped_view(self) -> "RealizedEnvironment":
        """クリップ前テーブルで評価する診断用の環境"""
        if self.unclipped is None:
            raise ValueError("この環境はクリップ前テーブルを保持していません")
        return replace(self, table=self.unclipped, unclipped=None)


def save_environment(env: RealizedEnvironment, path: str) -> str:
    """
    環境を .npz にダンプ（ラウンド順の損失表とメタデータ、監査情報）

    Args:
        env: 保存する環境
        path: 出力パス

    Returns:
        書き出したファイルのパス
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    metadata = {
        "kind": env.kind,
        "T": env.horizon,
        "k": env.n_actions,
        "combiner": env.combiner.kind.value,
        "memory": env.combiner.memory,
        "coeffs": list(env.combiner.coeffs) if env.combiner.coeffs else None,
        "switching": env.switching,
        "chi": env.chi,
        "seed": env.seed,
        "params": env.params,
    }
    arrays = {"values": env.table.values}
    if env.unclipped is not None:
        arrays["unclipped"] = env.unclipped.values
    if env.audit is not None and hasattr(env.audit, "to_arrays"):
        arrays.update(env.audit.to_arrays())

    with open(path, "wb") as f:
        np.savez(f, metadata=np.array(json.dumps(metadata, sort_keys=True)), **arrays)
    logger.info(f"環境ダンプを書き出しました: {path}")
    return path


def load_environment(path: str) -> Tuple[RealizedEnvironment, Dict[str, np.ndarray]]:
    """
    ダンプから環境を復元

    Returns:
        (環境, 監査用配列の辞書)
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"環境ダンプが見つかりません: {path}")
    with np.load(path, allow_pickle=False) as data:
        metadata = json.loads(str(data["metadata"]))
        arrays = {name: data[name] for name in data.files if name != "metadata"}

    coeffs = metadata["coeffs"]
    combiner = CombiningFunction(
        CombinerKind(metadata["combiner"]),
        metadata["memory"],
        tuple(coeffs) if coeffs is not None else None
    )

    unclipped = arrays.pop("unclipped", None)
    env = RealizedEnvironment(
        table=ObliviousLossTable(arrays.pop("values")),
        combiner=combiner,
        switching=metadata["switching"],
        chi=metadata["chi"],
        seed=metadata["seed"],
        kind=metadata["kind"],
        params=metadata["params"],
        unclipped=ObliviousLossTable(unclipped, bounded=False) if unclipped is not None else None,
    )
    return env, arrays
