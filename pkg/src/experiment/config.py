"""
@file: config.py
@desc: 実験設定（JSON）の読み込みと検証、環境ファクトリの定義
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from dotenv import load_dotenv

from src.adversary.easy_environments import build_gap_env, build_linear_env
from src.core.losses import make_linear_combiner
from src.adversary.hard_adversaries import (
    HardnessParams,
    build_max_adversary,
    build_min_adversary,
    default_schedule,
)
from src.engine.environment import FeedbackModel, RealizedEnvironment
from src.player.factory import PlayerSpec
from src.player.linear_composite import recovery_growth
from src.process.stochastic_process import build_switching_cost_instance

# 環境変数の読み込み
load_dotenv()

# ロガー設定
logger = logging.getLogger(__name__)

SCHEDULE_AUTO = "schedule:auto"
# z の漸化式の誤差増幅率の上限（linear プレイヤーで使える係数）
MAX_RECOVERY_GROWTH = 1.0 + 1e-9
DEFAULT_HORIZONS = [2 ** p for p in range(10, 17)]
DEFAULT_REPS = int(os.environ.get("SIM_DEFAULT_REPS", "100"))
DEFAULT_PARALLELISM = int(os.environ.get("SIM_PARALLELISM", "1"))
DEFAULT_OUTPUT_DIR = os.environ.get("SIM_OUTPUT_DIR", "data/output")

# 環境の種類ごとに受け付けるキー
ENVIRONMENT_KEYS = {
    "min": {"kind", "params"},
    "max": {"kind", "params"},
    "switching": {"kind", "epsilon", "sigma", "delta"},
    "linear": {"kind", "k", "coeffs", "gap"},
    "oblivious": {"kind", "k", "gap"},
    "gap": {"kind", "gap", "sigma", "clipped"},
}
EXPERIMENT_KEYS = {
    "name", "environment", "player", "players", "horizons", "n_reps",
    "master_seed", "feedback", "output", "parallelism",
}


class ConfigError(ValueError):
    """実験設定の誤り"""


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class EnvironmentSpec:
    """
    環境ファクトリ

    options は JSON の環境指定（kind 以外）をキー順のタプルにしたもの。
    プロセス間で受け渡せるよう、乱数生成器以外の状態は持たない。
    """
    kind: str
    options: Tuple[Tuple[str, Any], ...] = ()
    horizon: Optional[int] = None
    hardness: Optional[HardnessParams] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EnvironmentSpec":
        """
        JSON の環境指定を検証

        Args:
            data: {"kind": ..., ...}

        Returns:
            ホライズン未設定の環境指定
        """
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigError(f"環境指定には kind が必要です: {data}")
        kind = data["kind"]
        if kind not in ENVIRONMENT_KEYS:
            raise ConfigError(f"未知の環境です: {kind} (選択肢: {', '.join(ENVIRONMENT_KEYS)})")
        unknown = set(data) - ENVIRONMENT_KEYS[kind]
        if unknown:
            raise ConfigError(f"環境 {kind} に未知のキーがあります: {sorted(unknown)}")

        options = {key: value for key, value in data.items() if key != "kind"}
        if kind in ("min", "max"):
            params = options.get("params", SCHEDULE_AUTO)
            if params != SCHEDULE_AUTO:
                if not isinstance(params, dict) or set(params) != {"epsilon", "sigma", "tau", "eta"}:
                    raise ConfigError(
                        f"params は {SCHEDULE_AUTO!r} か epsilon/sigma/tau/eta の辞書です: {params}"
                    )
                try:
                    HardnessParams(**params)
                except ValueError as e:
                    raise ConfigError(str(e))
                params = tuple(sorted(params.items()))
            options["params"] = params
        if kind == "linear":
            if "coeffs" not in options:
                raise ConfigError("linear 環境には coeffs が必要です")
            coeffs = options["coeffs"]
            if not isinstance(coeffs, (list, tuple)) or not all(_is_number(a) for a in coeffs):
                raise ConfigError(f"coeffs は数値のリストが必要です: {coeffs}")
            try:
                make_linear_combiner(coeffs)
            except ValueError as e:
                raise ConfigError(str(e))
            options["coeffs"] = tuple(float(a) for a in coeffs)
        return cls(kind=kind, options=tuple(sorted(options.items())))

    def for_horizon(self, horizon: int) -> "EnvironmentSpec":
        """ホライズンを固定した環境指定（min/max のスケジュールはここで確定）"""
        hardness = None
        if self.kind in ("min", "max"):
            params = dict(self.options)["params"]
            try:
                hardness = default_schedule(horizon) if params == SCHEDULE_AUTO else HardnessParams(**dict(params))
            except ValueError as e:
                raise ConfigError(str(e))
        return replace(self, horizon=horizon, hardness=hardness)

    @property
    def coeffs(self) -> Optional[Tuple[float, ...]]:
        return dict(self.options).get("coeffs")

    def label(self) -> str:
        if self.kind == "linear":
            return "linear[" + " ".join(f"{a:g}" for a in self.coeffs) + "]"
        return self.kind

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        for key, value in self.options:
            if key == "params" and value != SCHEDULE_AUTO:
                value = dict(value)
            elif isinstance(value, tuple):
                value = list(value)
            data[key] = value
        return data

    def __call__(self, rng: np.random.Generator, seed: Optional[int] = None) -> RealizedEnvironment:
        if self.horizon is None:
            raise ValueError("ホライズンが未設定です（for_horizon を先に呼んでください）")
        options = dict(self.options)
        T = self.horizon
        if self.kind == "min":
            return build_min_adversary(T, self.hardness, rng, seed=seed)
        if self.kind == "max":
            return build_max_adversary(T, self.hardness, rng, seed=seed)
        if self.kind == "switching":
            return build_switching_cost_instance(
                T, rng,
                epsilon=options.get("epsilon"),
                sigma=options.get("sigma"),
                delta=options.get("delta"),
                seed=seed,
            )
        if self.kind == "linear":
            return build_linear_env(T, options.get("k", 2), options["coeffs"], options.get("gap", 0.05), rng, seed=seed)
        if self.kind == "oblivious":
            return build_linear_env(T, options.get("k", 2), (1.0,), options.get("gap", 0.05), rng, seed=seed)
        return build_gap_env(
            T, options.get("gap", 0.05), rng,
            clipped=options.get("clipped", True),
            sigma=options.get("sigma", 0.1),
            seed=seed,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """実験設定"""
    name: str
    environment: EnvironmentSpec
    players: List[str]
    horizons: List[int] = field(default_factory=lambda: list(DEFAULT_HORIZONS))
    n_reps: int = DEFAULT_REPS
    master_seed: int = 0
    feedback: str = "composite"
    output: Optional[str] = None
    parallelism: int = DEFAULT_PARALLELISM

    def __post_init__(self):
        if not self.players:
            raise ConfigError("プレイヤーが指定されていません")
        for text in self.players:
            try:
                spec = PlayerSpec.parse(text)
            except ValueError as e:
                raise ConfigError(str(e))
            if spec.kind == "linear" and self.environment.kind != "linear":
                raise ConfigError(f"linear プレイヤーは linear 環境でのみ使えます: {self.environment.kind}")
            if spec.kind == "linear":
                growth = recovery_growth(self.environment.coeffs)
                if growth > MAX_RECOVERY_GROWTH:
                    raise ConfigError(
                        f"係数 {list(self.environment.coeffs)} では z の復元が不安定です"
                        f"（誤差増幅率 {growth:.3g} > 1）。先頭の非ゼロ係数が支配的な係数を指定してください"
                    )
        if not isinstance(self.horizons, list) or not all(_is_int(T) for T in self.horizons):
            raise ConfigError(f"horizons は整数のリストが必要です: {self.horizons}")
        for key in ("n_reps", "master_seed", "parallelism"):
            if not _is_int(getattr(self, key)):
                raise ConfigError(f"{key} は整数が必要です: {getattr(self, key)!r}")
        if not self.horizons:
            raise ConfigError("horizons が空です")
        if any(T < 1 for T in self.horizons):
            raise ConfigError(f"horizons は正の整数が必要です: {self.horizons}")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ConfigError(f"horizons は狭義単調増加が必要です: {self.horizons}")
        if self.n_reps < 1:
            raise ConfigError(f"n_reps は1以上が必要です: {self.n_reps}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism は1以上が必要です: {self.parallelism}")
        try:
            FeedbackModel.parse(self.feedback)
        except ValueError as e:
            raise ConfigError(str(e))

    @property
    def feedback_model(self) -> FeedbackModel:
        return FeedbackModel.parse(self.feedback)

    @property
    def output_prefix(self) -> str:
        return self.output or os.path.join(DEFAULT_OUTPUT_DIR, self.name)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """None でない値だけを上書きした設定を返す"""
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["environment"] = self.environment.to_dict()
        return data


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """
    JSON の辞書から設定を生成（未知のキーは拒否）

    Raises:
        ConfigError: 設定が不正な場合
    """
    if not isinstance(data, dict):
        raise ConfigError("設定は JSON オブジェクトが必要です")
    unknown = set(data) - EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"未知のキーがあります: {sorted(unknown)}")
    for key in ("name", "environment"):
        if key not in data:
            raise ConfigError(f"{key} が必要です")
    if ("player" in data) == ("players" in data):
        raise ConfigError("player か players のどちらか一方を指定してください")

    players = [data["player"]] if "player" in data else list(data["players"])
    if not all(isinstance(p, str) for p in players):
        raise ConfigError(f"プレイヤー指定は文字列が必要です: {players}")

    kwargs: Dict[str, Any] = {}
    for key in ("horizons", "n_reps", "master_seed", "feedback", "output", "parallelism"):
        if key in data:
            kwargs[key] = data[key]
    return ExperimentConfig(
        name=str(data["name"]),
        environment=EnvironmentSpec.from_dict(data["environment"]),
        players=players,
        **kwargs
    )


def load_config(path: str) -> ExperimentConfig:
    """
    JSON ファイルから実験設定を読み込む

    Args:
        path: 設定ファイルのパス

    Returns:
        検証済みの設定
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"設定ファイルが見つかりません: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"設定ファイルの JSON が不正です: {path} ({e})")
    config = config_from_dict(data)
    logger.info(f"設定を読み込みました: {path} (名前={config.name}, horizons={config.horizons})")
    return config
