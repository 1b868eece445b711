"""
@file: conftest.py
@desc: テスト共通の設定（パス・乱数生成器・slow マーカー）
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="受け入れ規模の実験（slow）も実行する")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 受け入れ規模の実験（--runslow で実行）")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="--runslow を指定すると実行します")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_rng():
    """シードを指定して乱数生成器を作る"""
    def factory(seed: int) -> np.random.Generator:
        return np.random.default_rng(seed)
    return factory
