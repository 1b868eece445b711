"""
@file: fitting.py
@desc: 平均リグレットの T 依存性 R ≈ c·T^α の指数 α を両対数の最小二乗で推定する
"""

import csv
import logging
import math
import os
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

# ロガー設定
logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 3


@dataclass(frozen=True)
class ScalingFit:
    """両対数フィットの結果（points は (ln T, ln R) の組）"""
    slope: float
    intercept: float
    residual: float
    points: List[Tuple[float, float]]
    dropped: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "points": [list(p) for p in self.points],
            "dropped": list(self.dropped),
        }


def fit_exponent(points: Sequence[Tuple[int, float]]) -> ScalingFit:
    """
    (ln T, ln R) に対する通常の最小二乗

    平均リグレットが正でない点は除外して警告する。

    Args:
        points: (T, 平均リグレット) の列

    Returns:
        傾き・切片・残差の二乗平均平方根

    Raises:
        ValueError: 使える点が3点未満の場合
    """
    dropped = [int(T) for T, regret in points if not regret > 0]
    if dropped:
        logger.warning(f"平均リグレットが正でない点をフィットから除外しました: T={dropped}")
    usable = [(math.log(T), math.log(regret)) for T, regret in points if regret > 0]
    if len(usable) < MIN_FIT_POINTS:
        raise ValueError(f"フィットには正の点が {MIN_FIT_POINTS} 点以上必要です: {len(usable)} 点")

    x = np.array([p[0] for p in usable])
    y = np.array([p[1] for p in usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return ScalingFit(
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        points=usable,
        dropped=dropped,
    )


def read_result_points(csv_path: str) -> "OrderedDict[Tuple[str, str], List[Tuple[int, float]]]":
    """
    結果 CSV から (環境, プレイヤー) ごとの (T, 平均リグレット) を読み出す

    Args:
        csv_path: run が書き出した CSV

    Returns:
        出現順の辞書
    """
    if not os.path.exists(csv_path):
        raise FileNotFoundError(f"CSV が見つかりません: {csv_path}")
    groups: "OrderedDict[Tuple[str, str], List[Tuple[int, float]]]" = OrderedDict()
    with open(csv_path, "r", newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        for row in reader:
            key = (row["env"], row["player"])
            groups.setdefault(key, []).append((int(row["T"]), float(row["mean_regret"])))
    return groups
