"""
@file: runner.py
@desc: 設定に従ってホライズンを掃引し、結果 CSV・サマリー JSON・リグレット曲線 CSV を書き出す
"""

import csv
import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from src.engine.environment import save_environment
from src.engine.monte_carlo import RegretStats, derive_seeds, monte_carlo
from src.experiment.config import ExperimentConfig
from src.experiment.fitting import MIN_FIT_POINTS, ScalingFit, fit_exponent
from src.player.factory import PlayerSpec

# ロガー設定
logger = logging.getLogger(__name__)

CSV_HEADER = ["env", "player", "T", "n_reps", "mean_regret", "std_regret", "mean_switches", "seed"]
CURVE_HEADER = ["env", "player", "T", "t", "mean_regret"]


@dataclass
class ExperimentReport:
    """run_experiment の出力"""
    csv_path: str
    summary_path: str
    curves_path: str
    rows: List[Dict[str, Any]]
    fits: Dict[str, Optional[ScalingFit]]
    stats: Dict[str, List[RegretStats]]


def format_float(value: float) -> str:
    """CSV 用の決定的な浮動小数点表記（最短の往復可能表現）"""
    return repr(float(value))


def _ensure_parent(path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def write_results_csv(rows: List[Dict[str, Any]], path: str) -> str:
    """結果の行を CSV に書き出す"""
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([
                row["env"],
                row["player"],
                row["T"],
                row["n_reps"],
                format_float(row["mean_regret"]),
                format_float(row["std_regret"]),
                format_float(row["mean_switches"]),
                row["seed"],
            ])
    logger.info(f"結果 CSV を書き出しました: {path}")
    return path


def fit_key(env: str, player: str) -> str:
    return f"{env}|{player}"


def fit_rows(rows: List[Dict[str, Any]]) -> Dict[str, Optional[ScalingFit]]:
    """(環境, プレイヤー) ごとに指数をフィット（点が足りなければ None）"""
    groups: Dict[str, List] = {}
    for row in rows:
        groups.setdefault(fit_key(row["env"], row["player"]), []).append((row["T"], row["mean_regret"]))
    fits: Dict[str, Optional[ScalingFit]] = {}
    for key, points in groups.items():
        if len(points) < MIN_FIT_POINTS:
            logger.info(f"{key}: 点が {len(points)} 点のためフィットしません")
            fits[key] = None
            continue
        try:
            fits[key] = fit_exponent(points)
            logger.info(f"{key}: 傾き={fits[key].slope:.4f}")
        except ValueError as e:
            logger.warning(f"{key}: フィットできません ({e})")
            fits[key] = None
    return fits


def run_experiment(config: ExperimentConfig, progress: bool = False) -> ExperimentReport:
    """
    ホライズン × プレイヤーごとにモンテカルロを実行してレポートを書き出す

    Args:
        config: 実験設定
        progress: 反復の進捗を表示するか

    Returns:
        書き出したファイルと集計結果
    """
    prefix = config.output_prefix
    env_label = config.environment.label()
    feedback = config.feedback_model

    rows: List[Dict[str, Any]] = []
    row_stats: List[RegretStats] = []
    curves: List[List[Any]] = []
    all_stats: Dict[str, List[RegretStats]] = {}

    for player_text in config.players:
        player_factory = PlayerSpec.parse(player_text)
        for T in config.horizons:
            logger.info(f"実行中: env={env_label}, player={player_text}, T={T}, n_reps={config.n_reps}")
            env_factory = config.environment.for_horizon(T)
            stats = monte_carlo(
                env_factory,
                player_factory,
                n_reps=config.n_reps,
                master_seed=config.master_seed,
                parallelism=config.parallelism,
                feedback=feedback,
                progress=progress,
            )
            all_stats.setdefault(fit_key(env_label, player_text), []).append(stats)
            row_stats.append(stats)
            rows.append({
                "env": env_label,
                "player": player_text,
                "T": T,
                "n_reps": stats.n_reps,
                "mean_regret": stats.mean_regret,
                "std_regret": stats.std_regret,
                "mean_switches": stats.mean_switches,
                "seed": config.master_seed,
            })
            for t, value in zip(stats.checkpoints, stats.mean_curve):
                curves.append([env_label, player_text, T, int(t), format_float(value)])

    csv_path = write_results_csv(rows, f"{prefix}.csv")

    curves_path = f"{prefix}_curves.csv"
    _ensure_parent(curves_path)
    with open(curves_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        writer.writerows(curves)

    fits = fit_rows(rows)
    summary = {
        "config": config.to_dict(),
        "results": [
            {
                "env": row["env"],
                "player": row["player"],
                "T": row["T"],
                **stats.to_dict(),
            }
            for row, stats in zip(rows, row_stats)
        ],
        "fits": {key: fit.to_dict() if fit else None for key, fit in fits.items()},
    }
    summary_path = f"{prefix}_summary.json"
    with open(summary_path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, ensure_ascii=False, sort_keys=True)
    logger.info(f"サマリーを書き出しました: {summary_path}")

    return ExperimentReport(
        csv_path=csv_path,
        summary_path=summary_path,
        curves_path=curves_path,
        rows=rows,
        fits=fits,
        stats=all_stats,
    )


def dump_environment(config: ExperimentConfig, horizon: Optional[int] = None, rep_index: int = 0) -> str:
    """
    監査用に実現済み環境を1つ書き出す（run と同じシード導出を使う）

    Args:
        config: 実験設定
        horizon: ホライズン（省略時は最初の horizons）
        rep_index: 反復番号

    Returns:
        書き出した .npz のパス
    """
    T = horizon if horizon is not None else config.horizons[0]
    env_factory = config.environment.for_horizon(T)
    env_seed, _ = derive_seeds(config.master_seed, T, rep_index)
    recorded_seed = int(env_seed.generate_state(1)[0])
    env = env_factory(np.random.default_rng(env_seed), recorded_seed)
    path = f"{config.output_prefix}_env_T{T}_rep{rep_index}.npz"
    return save_environment(env, path)
