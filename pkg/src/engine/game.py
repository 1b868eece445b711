"""
@file: game.py
@desc: プレイヤーと実現済み環境の T ラウンドのゲーム、方策リグレット、ラウンドごとのリグレット、記録の検証と書き出し
"""

import csv
import logging
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.engine.environment import FeedbackKind, FeedbackModel, RealizedEnvironment
from src.player.base import Player

# ロガー設定
logger = logging.getLogger(__name__)

# プレイヤーに渡すフィードバックの範囲チェックの許容誤差
FEEDBACK_TOLERANCE = 1e-9

# z_t の復元チェックの許容誤差
RECOVERY_TOLERANCE = 1e-9

TRANSCRIPT_HEADER = ["t", "action", "loss", "feedback", "switch"]


@dataclass(frozen=True, eq=False)
class Transcript:
    """
    1ゲームの記録

    actions[t-1] が X_t、losses[t-1] が f_t(X_{1:t})（切り替えコストは未スケール）、
    feedback[t-1] がプレイヤーに渡した値（全情報モデルでは長さ k の行）。
    """
    actions: np.ndarray
    losses: np.ndarray
    feedback: np.ndarray
    switches: np.ndarray
    player: str
    feedback_kind: FeedbackKind

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    @property
    def switch_count(self) -> int:
        """M = |{t >= 2 : X_t != X_{t-1}}|"""
        return int(self.switches.sum())

    @property
    def total_loss(self) -> float:
        return float(self.losses.sum())


def _feedback(env: RealizedEnvironment, model: FeedbackModel, actions: List[int], t: int, loss: float):
    if model.kind is FeedbackKind.COMPOSITE_BANDIT:
        value = loss * env.feedback_scale
    elif model.kind is FeedbackKind.OBLIVIOUS_VALUE:
        value = env.table.value(t, actions[t - 1])
    else:
        return np.array(env.table.values[t - 1])

    if env.table.bounded:
        if not -FEEDBACK_TOLERANCE <= value <= 1.0 + FEEDBACK_TOLERANCE:
            raise RuntimeError(f"ラウンド {t} のフィードバックが [0, 1] の範囲外です: {value}")
        value = min(max(value, 0.0), 1.0)
    return value


def run_game(
    env: RealizedEnvironment,
    player: Player,
    feedback: FeedbackModel,
    rng: np.random.Generator
) -> Transcript:
    """
    T ラウンドのゲームを実行

    各ラウンドでプレイヤーが X_t を選び、環境が f_t を計算し、フィードバックモデルに
    従った値をプレイヤーに渡す。環境は変更しない。

    Args:
        env: 実現済み環境
        player: プレイヤー（このゲーム専用）
        feedback: フィードバックモデル
        rng: プレイヤーが使う乱数生成器

    Returns:
        ゲームの記録
    """
    if player.n_actions != env.n_actions:
        raise ValueError(f"行動数が一致しません: プレイヤー {player.n_actions}, 環境 {env.n_actions}")
    if player.horizon != env.horizon:
        raise ValueError(f"ホライズンが一致しません: プレイヤー {player.horizon}, 環境 {env.horizon}")
    if not player.accepts(feedback.kind):
        raise ValueError(f"{player.name} はフィードバックモデル {feedback.kind.value} を受け付けません")

    T = env.horizon
    actions: List[int] = []
    losses = np.empty(T)
    observed = []
    for t in range(1, T + 1):
        action = int(player.select(t, rng))
        if not 0 <= action < env.n_actions:
            raise RuntimeError(f"ラウンド {t} の行動が範囲外です: {action}")
        actions.append(action)
        losses[t - 1] = env.round_loss(actions, t)
        value = _feedback(env, feedback, actions, t, losses[t - 1])
        observed.append(value)
        player.observe(t, action, value)

    action_array = np.array(actions, dtype=np.int64)
    switches = np.zeros(T, dtype=bool)
    switches[1:] = action_array[1:] != action_array[:-1]
    return Transcript(
        actions=action_array,
        losses=losses,
        feedback=np.array(observed, dtype=np.float64),
        switches=switches,
        player=player.name,
        feedback_kind=feedback.kind,
    )


def best_constant(env: RealizedEnvironment) -> Tuple[int, float]:
    """後知恵で最良の定数方策 (x, Σ_t f_t(x, ..., x))"""
    totals = [float(env.constant_losses(x).sum()) for x in range(env.n_actions)]
    best = int(np.argmin(totals))
    return best, totals[best]


def policy_regret(env: RealizedEnvironment, transcript: Transcript) -> float:
    """
    Σ_t f_t(X_{1:t}) - min_x Σ_t f_t(x, ..., x)

    比較対象は実現済みの損失表から反実仮想的に計算する。
    """
    if transcript.horizon != env.horizon:
        raise ValueError("記録と環境のホライズンが一致しません")
    return transcript.total_loss - best_constant(env)[1]


def per_round_regret(
    env: RealizedEnvironment,
    transcript: Transcript,
    chi: Optional[int] = None
) -> np.ndarray:
    """
    R_t = f_t(X_{1:t}) - f_t(χ, ..., χ)

    Args:
        env: χ を持つ困難インスタンス
        transcript: ゲームの記録
        chi: 比較する行動（省略時は環境の χ）

    Returns:
        ラウンドごとのリグレット
    """
    if chi is None:
        chi = env.chi
    if chi is None:
        raise ValueError("この環境は χ を記録していません")
    return transcript.losses - env.constant_losses(chi)


def regret_curve(
    env: RealizedEnvironment,
    transcript: Transcript,
    checkpoints: Sequence[int]
) -> np.ndarray:
    """チェックポイントのラウンドまでの累積リグレット（比較対象は T での最良定数方策）"""
    best, _ = best_constant(env)
    gap = np.cumsum(transcript.losses - env.constant_losses(best))
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    if checkpoints.size and (checkpoints.min() < 1 or checkpoints.max() > env.horizon):
        raise ValueError(f"チェックポイントが範囲外です: {checkpoints}")
    return gap[checkpoints - 1]


def verify_transcript(env: RealizedEnvironment, transcript: Transcript):
    """損失の再評価と切り替え回数の数え直しで記録を検証"""
    recomputed = env.evaluate(transcript.actions)
    if not np.array_equal(recomputed, transcript.losses):
        mismatch = int(np.flatnonzero(recomputed != transcript.losses)[0]) + 1
        raise RuntimeError(f"ラウンド {mismatch} の損失が再評価と一致しません")
    recount = sum(
        1 for t in range(1, transcript.horizon)
        if transcript.actions[t] != transcript.actions[t - 1]
    )
    if recount != transcript.switch_count:
        raise RuntimeError(f"切り替え回数が一致しません: {transcript.switch_count} != {recount}")


def verify_z_recovery(env: RealizedEnvironment, transcript: Transcript, player) -> float:
    """
    z_t = ℓ_{t-d}(x_{t-d}) を全ラウンドで確認

    Args:
        env: 線形合成損失の環境
        transcript: ゲームの記録
        player: ゲームに使った LinearCompositePlayer

    Returns:
        最大誤差
    """
    recovered = np.asarray(player.recovered)
    if recovered.shape != (transcript.horizon,):
        raise ValueError("プレイヤーの復元記録がゲームの長さと一致しません")
    d = player.delay
    expected = np.zeros(transcript.horizon)
    rounds = np.arange(d, transcript.horizon)
    expected[d:] = env.table.values[rounds - d, transcript.actions[rounds - d]]
    error = float(np.max(np.abs(recovered - expected)))
    if error > RECOVERY_TOLERANCE:
        raise RuntimeError(f"z_t の復元誤差が許容範囲を超えました: {error:.3g}")
    return error


def write_transcript(transcript: Transcript, path: str) -> str:
    """1ラウンド1行で t, X_t, f_t, フィードバック, 切り替えフラグを書き出す"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TRANSCRIPT_HEADER)
        for t in range(1, transcript.horizon + 1):
            value = transcript.feedback[t - 1]
            if np.ndim(value):
                value = " ".join(repr(float(v)) for v in value)
            else:
                value = repr(float(value))
            writer.writerow([
                t,
                int(transcript.actions[t - 1]),
                repr(float(transcript.losses[t - 1])),
                value,
                int(transcript.switches[t - 1]),
            ])
    logger.info(f"記録を書き出しました: {path}")
    return path
