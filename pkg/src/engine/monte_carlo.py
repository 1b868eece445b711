"""
@file: monte_carlo.py
@desc: シードを導出した独立な反復でゲームを繰り返し、リグレットと切り替え回数の統計を集計する
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.engine.environment import FeedbackKind, FeedbackModel, RealizedEnvironment
from src.engine.game import policy_regret, regret_curve, run_game, verify_transcript, verify_z_recovery
from src.player.base import Player

# ロガー設定
logger = logging.getLogger(__name__)

QUANTILES = (5, 25, 50, 75, 95)

# (乱数生成器, 記録用シード) から環境を作る関数。horizon 属性を持つこと
EnvironmentFactory = Callable[[np.random.Generator, int], RealizedEnvironment]
# 環境に合わせてプレイヤーを作る関数
PlayerFactory = Callable[[RealizedEnvironment], Player]


def derive_seeds(master_seed: int, horizon: int, rep_index: int) -> Tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """
    反復ごとのシード（環境用, ゲーム用）を導出

    SeedSequence(entropy=master_seed, spawn_key=(T, rep_index)).spawn(2) の純関数。
    """
    root = np.random.SeedSequence(entropy=master_seed, spawn_key=(horizon, rep_index))
    env_seed, game_seed = root.spawn(2)
    return env_seed, game_seed


class ReplicationResult(NamedTuple):
    """1回の反復の結果"""
    rep_index: int
    regret: float
    switches: int
    curve: np.ndarray
    env_seed: int


@dataclass(frozen=True, eq=False)
class RegretStats:
    """反復全体のリグレットと切り替え回数 M の統計"""
    n_reps: int
    mean_regret: float
    std_regret: float
    regret_quantiles: Dict[int, float]
    mean_switches: float
    std_switches: float
    switch_quantiles: Dict[int, float]
    regrets: np.ndarray
    switches: np.ndarray
    checkpoints: np.ndarray
    mean_curve: np.ndarray

    def to_dict(self) -> Dict[str, object]:
        return {
            "n_reps": self.n_reps,
            "mean_regret": self.mean_regret,
            "std_regret": self.std_regret,
            "regret_quantiles": {str(q): v for q, v in self.regret_quantiles.items()},
            "mean_switches": self.mean_switches,
            "std_switches": self.std_switches,
            "switch_quantiles": {str(q): v for q, v in self.switch_quantiles.items()},
        }


def _std(values: np.ndarray) -> float:
    return float(values.std(ddof=1)) if values.shape[0] > 1 else 0.0


def summarize(results: Sequence[ReplicationResult], checkpoints: np.ndarray) -> RegretStats:
    """反復番号順に並べてから集計（並列度によらず同じ浮動小数点演算になる）"""
    ordered = sorted(results, key=lambda r: r.rep_index)
    regrets = np.array([r.regret for r in ordered])
    switches = np.array([r.switches for r in ordered], dtype=np.float64)
    curves = np.array([r.curve for r in ordered]).reshape(len(ordered), checkpoints.shape[0])
    return RegretStats(
        n_reps=len(ordered),
        mean_regret=float(regrets.mean()),
        std_regret=_std(regrets),
        regret_quantiles={q: float(np.percentile(regrets, q)) for q in QUANTILES},
        mean_switches=float(switches.mean()),
        std_switches=_std(switches),
        switch_quantiles={q: float(np.percentile(switches, q)) for q in QUANTILES},
        regrets=regrets,
        switches=switches,
        checkpoints=checkpoints,
        mean_curve=curves.mean(axis=0),
    )


def run_replication(
    env_factory: EnvironmentFactory,
    player_factory: PlayerFactory,
    feedback: FeedbackModel,
    master_seed: int,
    checkpoints: np.ndarray,
    verify: bool,
    rep_index: int
) -> ReplicationResult:
    """
    1回の反復（環境の生成 → ゲーム → リグレット計算）

    Args:
        env_factory: 環境ファクトリ
        player_factory: プレイヤーファクトリ
        feedback: フィードバックモデル
        master_seed: マスターシード
        checkpoints: リグレット曲線のチェックポイント
        verify: 記録と z_t 復元の検証を行うか
        rep_index: 反復番号

    Returns:
        反復の結果
    """
    env_seed, game_seed = derive_seeds(master_seed, env_factory.horizon, rep_index)
    recorded_seed = int(env_seed.generate_state(1)[0])
    env = env_factory(np.random.default_rng(env_seed), recorded_seed)
    player = player_factory(env)
    transcript = run_game(env, player, feedback, np.random.default_rng(game_seed))

    if verify:
        verify_transcript(env, transcript)
        if hasattr(player, "recovered") and feedback.kind is FeedbackKind.COMPOSITE_BANDIT:
            verify_z_recovery(env, transcript, player)

    return ReplicationResult(
        rep_index=rep_index,
        regret=policy_regret(env, transcript),
        switches=transcript.switch_count,
        curve=regret_curve(env, transcript, checkpoints),
        env_seed=recorded_seed,
    )


def default_checkpoints(horizon: int, n_points: int = 16) -> np.ndarray:
    """1..T を対数間隔で区切ったチェックポイント（T を必ず含む）"""
    points = np.unique(np.geomspace(1, horizon, num=min(n_points, horizon)).round().astype(np.int64))
    points[-1] = horizon
    return points


def monte_carlo(
    env_factory: EnvironmentFactory,
    player_factory: PlayerFactory,
    n_reps: int,
    master_seed: int,
    parallelism: int = 1,
    feedback: Optional[FeedbackModel] = None,
    checkpoints: Optional[Sequence[int]] = None,
    verify: bool = True,
    progress: bool = False
) -> RegretStats:
    """
    n_reps 回の独立な反復を実行して統計を返す

    反復ごとのシードは derive_seeds で (master_seed, T, rep_index) から決まるので、
    結果は並列度に依存しない。

    Args:
        env_factory: 環境ファクトリ（pickle 可能なこと）
        player_factory: プレイヤーファクトリ（pickle 可能なこと）
        n_reps: 反復回数
        master_seed: マスターシード
        parallelism: ワーカープロセス数（1なら逐次実行）
        feedback: フィードバックモデル（既定は合成損失のバンディット）
        checkpoints: リグレット曲線のチェックポイント
        verify: 記録と z_t 復元の検証を行うか
        progress: tqdm で進捗を表示するか

    Returns:
        リグレット統計
    """
    if n_reps < 1:
        raise ValueError(f"反復回数は1以上が必要です: {n_reps}")
    if parallelism < 1:
        raise ValueError(f"並列度は1以上が必要です: {parallelism}")
    if feedback is None:
        feedback = FeedbackModel(FeedbackKind.COMPOSITE_BANDIT)
    horizon = env_factory.horizon
    if checkpoints is None:
        checkpoints = default_checkpoints(horizon)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)

    task = partial(run_replication, env_factory, player_factory, feedback, master_seed, checkpoints, verify)
    indices = range(n_reps)
    description = f"T={horizon}"

    results: List[ReplicationResult]
    if parallelism == 1:
        results = [task(i) for i in tqdm(indices, desc=description, disable=not progress)]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as executor:
            results = list(tqdm(executor.map(task, indices), total=n_reps, desc=description, disable=not progress))

    stats = summarize(results, checkpoints)
    logger.debug(
        f"T={horizon}: 平均リグレット={stats.mean_regret:.4f}, 標準偏差={stats.std_regret:.4f}, "
        f"平均切り替え回数={stats.mean_switches:.1f}"
    )
    return stats
