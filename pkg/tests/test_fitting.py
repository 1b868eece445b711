"""
@file: test_fitting.py
@desc: 両対数フィットと結果 CSV の読み出しのテスト
"""

import math

import pytest

from src.experiment.fitting import fit_exponent, read_result_points

HORIZONS = [2 ** p for p in range(10, 17)]


@pytest.mark.parametrize("exponent", [1.0, 0.5, 2.0 / 3.0])
def test_recovers_exact_power_law(exponent):
    fit = fit_exponent([(T, 3.0 * T ** exponent) for T in HORIZONS])
    assert fit.slope == pytest.approx(exponent, abs=1e-6)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-6)
    assert fit.residual == pytest.approx(0.0, abs=1e-9)
    assert fit.dropped == []


def test_drops_nonpositive_points(caplog):
    points = [(T, T ** 0.5) for T in HORIZONS[:4]] + [(HORIZONS[4], 0.0), (HORIZONS[5], -1.5)]
    fit = fit_exponent(points)
    assert fit.dropped == [HORIZONS[4], HORIZONS[5]]
    assert len(fit.points) == 4
    assert fit.slope == pytest.approx(0.5, abs=1e-6)
    assert "除外" in caplog.text


def test_too_few_points():
    with pytest.raises(ValueError):
        fit_exponent([(10, 1.0), (100, 2.0)])
    with pytest.raises(ValueError):
        fit_exponent([(10, 1.0), (100, 2.0), (1000, -1.0)])


def test_to_dict():
    data = fit_exponent([(10, 10.0), (100, 100.0), (1000, 1000.0)]).to_dict()
    assert set(data) == {"slope", "intercept", "residual", "points", "dropped"}
    assert data["slope"] == pytest.approx(1.0)


def test_read_result_points(tmp_path):
    path = tmp_path / "results.csv"
    path.write_text(
        "env,player,T,n_reps,mean_regret,std_regret,mean_switches,seed\n"
        "min,exp3,1024,10,5.5,1.0,3.0,0\n"
        "min,exp3,2048,10,8.25,1.0,3.0,0\n"
        "min,batched:exp3:B=auto,1024,10,2.0,1.0,3.0,0\n",
        encoding="utf-8",
    )
    groups = read_result_points(str(path))
    assert list(groups) == [("min", "exp3"), ("min", "batched:exp3:B=auto")]
    assert groups[("min", "exp3")] == [(1024, 5.5), (2048, 8.25)]


def test_read_missing_csv(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_result_points(str(tmp_path / "none.csv"))
