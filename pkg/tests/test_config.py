"""
@file: test_config.py
@desc: 実験設定の読み込み・検証と環境ファクトリのテスト
"""

import json
from pathlib import Path

import numpy as np
import pytest

from src.adversary.hard_adversaries import HardnessParams, default_schedule
from src.experiment.config import (
    SCHEDULE_AUTO,
    ConfigError,
    EnvironmentSpec,
    config_from_dict,
    load_config,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config" / "experiments"

BASE = {
    "name": "sample",
    "environment": {"kind": "linear", "k": 2, "coeffs": [0.6, 0.4], "gap": 0.05},
    "players": ["linear", "exp3"],
    "horizons": [64, 128, 256],
    "n_reps": 3,
}


def test_from_dict_defaults():
    config = config_from_dict(BASE)
    assert config.name == "sample"
    assert config.environment.label() == "linear[0.6 0.4]"
    assert config.master_seed == 0
    assert config.feedback == "composite"
    assert config.players == ["linear", "exp3"]


def test_single_player_key():
    data = {key: value for key, value in BASE.items() if key != "players"}
    config = config_from_dict({**data, "player": "exp3"})
    assert config.players == ["exp3"]
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, "player": "exp3"})
    with pytest.raises(ConfigError):
        config_from_dict(data)


@pytest.mark.parametrize("override", [
    {"unknown": 1},
    {"horizons": [128, 64]},
    {"horizons": [64, 64]},
    {"horizons": []},
    {"n_reps": 0},
    {"parallelism": 0},
    {"feedback": "partial"},
    {"players": ["exp3:eta=1"]},
    {"environment": {"kind": "linear", "k": 2}},
    {"environment": {"kind": "nope"}},
    {"environment": {"kind": "min", "gap": 0.1}},
    {"environment": {"kind": "min", "params": {"epsilon": 0.1}}},
    {"horizons": [64.5, 128]},
    {"horizons": [64, "128"]},
    {"n_reps": "3"},
    {"n_reps": 2.0},
    {"master_seed": 1.5},
    {"parallelism": True},
    {"environment": {"kind": "linear", "k": 2, "coeffs": ["a", 1]}},
    {"environment": {"kind": "linear", "k": 2, "coeffs": [-0.5, 1.5]}},
])
def test_rejects_invalid(override):
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, **override})


def test_linear_player_needs_linear_env():
    with pytest.raises(ConfigError):
        config_from_dict({**BASE, "environment": {"kind": "min"}})


def test_unstable_coefficients_rejected_for_linear_player():
    unstable = {"kind": "linear", "k": 2, "coeffs": [0.3, 0.7], "gap": 0.05}
    with pytest.raises(ConfigError, match="不安定"):
        config_from_dict({**BASE, "environment": unstable})
    config = config_from_dict({**BASE, "environment": unstable, "players": ["exp3"]})
    assert config.environment.coeffs == (0.3, 0.7)


def test_boundary_growth_accepted():
    config = config_from_dict({**BASE, "environment": {"kind": "linear", "k": 2, "coeffs": [0.5, 0.5]}})
    assert config.players == ["linear", "exp3"]


def test_with_overrides_ignores_none():
    config = config_from_dict(BASE)
    changed = config.with_overrides(master_seed=9, n_reps=None, output="out/x")
    assert changed.master_seed == 9
    assert changed.n_reps == 3
    assert changed.output_prefix == "out/x"


def test_to_dict_round_trip():
    config = config_from_dict(BASE)
    again = config_from_dict({key: value for key, value in config.to_dict().items() if key in BASE})
    assert again.environment == config.environment


def test_schedule_resolved_per_horizon():
    spec = EnvironmentSpec.from_dict({"kind": "min"})
    assert dict(spec.options)["params"] == SCHEDULE_AUTO
    assert spec.for_horizon(4096).hardness == default_schedule(4096)
    with pytest.raises(ConfigError):
        spec.for_horizon(8)


def test_explicit_params():
    params = {"epsilon": 0.01, "sigma": 0.1, "tau": 0.02, "eta": 0.1}
    spec = EnvironmentSpec.from_dict({"kind": "max", "params": params}).for_horizon(64)
    assert spec.hardness == HardnessParams(**params)
    env = spec(np.random.default_rng(0), 17)
    assert env.kind == "max"
    assert env.seed == 17
    assert env.horizon == 64


def test_factory_requires_horizon():
    with pytest.raises(ValueError):
        EnvironmentSpec.from_dict({"kind": "oblivious"})(np.random.default_rng(0))


def test_factory_is_deterministic():
    spec = EnvironmentSpec.from_dict({"kind": "switching"}).for_horizon(128)
    first = spec(np.random.default_rng(5))
    second = spec(np.random.default_rng(5))
    assert np.array_equal(first.table.values, second.table.values)
    assert first.switching


def test_load_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(BASE), encoding="utf-8")
    assert load_config(str(path)).horizons == [64, 128, 256]

    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(broken))
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.json"))


@pytest.mark.parametrize("name", ["linear_easy", "oblivious_exp3", "min_hard", "max_hard", "switching"])
def test_shipped_configs_are_valid(name):
    config = load_config(str(CONFIG_DIR / f"{name}.json"))
    assert config.master_seed == 0
    for T in config.horizons:
        config.environment.for_horizon(T)
