"""
@file: hard_adversaries.py
@desc: min / max 結合関数の困難インスタンス（イベント検出・スパイク注入・環境構築）と構造チェック
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from src.core.losses import make_max_combiner, make_min_combiner
from src.engine.environment import RealizedEnvironment
from src.process.parent_functions import RandomParentTrace, build_random_parent
from src.process.stochastic_process import (
    HARD_INSTANCE_ACTIONS,
    GapProcess,
    NoiseSequence,
    WalkSequence,
    build_gap_process,
    build_walk,
    clip_to_table,
    sample_noise,
)

# ロガー設定
logger = logging.getLogger(__name__)

# 区間チェックの浮動小数点許容誤差
INTERVAL_TOLERANCE = 1e-12

# default_schedule が受け付ける最小ホライズン
MIN_SCHEDULE_HORIZON = 16

# max 版のスパイクの大きさ
MAX_SPIKE = 1.0


@dataclass(frozen=True)
class HardnessParams:
    """困難インスタンスのパラメータ（ギャップ ε・ノイズ σ・許容幅 τ・スパイク η）"""
    epsilon: float
    sigma: float
    tau: float
    eta: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} は正の値が必要です: {value}")


class ScheduleDiagnostics(NamedTuple):
    """パラメータの大小関係 η ≫ τ と ητ/σ ≫ ε の数値確認"""
    eta_over_tau: float
    signal_over_gap: float
    log_cubed: float
    tau_below_eta: bool
    gap_below_signal: bool


def schedule_diagnostics(params: HardnessParams, T: int) -> ScheduleDiagnostics:
    """
    スケジュールの制約がどの程度満たされているかを計算

    Args:
        params: パラメータ
        T: ホライズン

    Returns:
        比 η/τ, ητ/(σε) と各制約の成否
    """
    signal = params.eta * params.tau / params.sigma
    return ScheduleDiagnostics(
        eta_over_tau=params.eta / params.tau,
        signal_over_gap=signal / params.epsilon,
        log_cubed=math.log(T) ** 3,
        tau_below_eta=params.eta > params.tau,
        gap_below_signal=signal > params.epsilon,
    )


def default_schedule(T: int) -> HardnessParams:
    """
    η = ln^{-2} T, σ = ln^{-1} T, τ = ln^{-5} T, ε = T^{-1/3} / ln T

    Args:
        T: ホライズン

    Returns:
        パラメータ
    """
    if T < MIN_SCHEDULE_HORIZON:
        raise ValueError(
            f"T={T} ではスケジュールの制約を満たせません（T >= {MIN_SCHEDULE_HORIZON} が必要）"
        )
    log_t = math.log(T)
    params = HardnessParams(
        epsilon=T ** (-1.0 / 3.0) / log_t,
        sigma=1.0 / log_t,
        tau=log_t ** -5,
        eta=log_t ** -2,
    )
    diagnostics = schedule_diagnostics(params, T)
    if not diagnostics.tau_below_eta:
        raise ValueError(f"制約 η > τ が成り立ちません: η={params.eta}, τ={params.tau}")
    if not diagnostics.gap_below_signal:
        logger.warning(
            f"T={T}: 制約 ητ/σ > ε は漸近的にのみ成立します "
            f"(ητ/(σε)={diagnostics.signal_over_gap:.3g})"
        )
    logger.debug(f"スケジュール T={T}: {params}")
    return params


@dataclass(frozen=True, eq=False)
class EventSequence:
    """
    トリガーイベント E_t

    flags[t] が E_t（長さ T+1、検出範囲外は False）。
    """
    flags: np.ndarray
    kind: str

    @property
    def horizon(self) -> int:
        return self.flags.shape[0] - 1

    def rounds(self) -> List[int]:
        return [int(t) for t in np.flatnonzero(self.flags)]

    def __getitem__(self, t: int) -> bool:
        if t < 0 or t > self.horizon:
            return False
        return bool(self.flags[t])


@dataclass(frozen=True, eq=False)
class SpikeSequence:
    """
    スパイク S_t(x) と向き Λ_t

    values[t-1, x] が S_t(x)、orientations[t] が Λ_t（t ∈ [2, T-1] 以外は -1）。
    """
    values: np.ndarray
    orientations: np.ndarray
    magnitude: float

    def spiked_rounds(self) -> List[int]:
        return [int(t) + 1 for t in np.flatnonzero(self.values.any(axis=1))]


def detect_min_events(walk: WalkSequence, tau: float) -> EventSequence:
    """
    E_t = {|W_{t-1} - W_t| <= τ} ∧ {W_{t+1} < W_t - τ} ∧ {W_{t+2} < W_{t+1} - τ}（2 <= t <= T-2）
    """
    T = walk.horizon
    if T < 4:
        raise ValueError(f"min イベントの検出には T >= 4 が必要です: {T}")
    w = walk.values
    t = np.arange(2, T - 1)
    flags = np.zeros(T + 1, dtype=bool)
    flags[t] = (
        (np.abs(w[t - 1] - w[t]) <= tau)
        & (w[t + 1] < w[t] - tau)
        & (w[t + 2] < w[t + 1] - tau)
    )
    flags.setflags(write=False)
    return EventSequence(flags=flags, kind="min")


def detect_max_events(walk: WalkSequence, tau: float, eta: float) -> EventSequence:
    """
    E_t = {|W_{t-1} - W_t| <= τ} ∧ {W_{t+1} > W_t + η}（2 <= t <= T-1）

    W_{t+1} までしか参照しないので t = T-1 まで検出する。
    """
    T = walk.horizon
    if T < 3:
        raise ValueError(f"max イベントの検出には T >= 3 が必要です: {T}")
    w = walk.values
    t = np.arange(2, T)
    flags = np.zeros(T + 1, dtype=bool)
    flags[t] = (np.abs(w[t - 1] - w[t]) <= tau) & (w[t + 1] > w[t] + eta)
    flags.setflags(write=False)
    return EventSequence(flags=flags, kind="max")


def event_overlaps(events: EventSequence, lags: Sequence[int] = (1, 2)) -> List[int]:
    """E_t と E_{t+lag} が同時に立つ t の一覧"""
    flags = events.flags
    found = set()
    for lag in lags:
        both = flags[:-lag] & flags[lag:]
        found.update(int(t) for t in np.flatnonzero(both))
    return sorted(found)


def draw_orientations(T: int, rng: np.random.Generator) -> np.ndarray:
    """Λ_2, ..., Λ_{T-1} を独立な公平ベルヌーイで一括して引く"""
    orientations = np.full(T + 1, -1, dtype=np.int8)
    if T >= 3:
        orientations[2:T] = rng.integers(0, 2, size=T - 2)
    orientations.setflags(write=False)
    return orientations


def _resolve_orientations(
    T: int,
    rng: Optional[np.random.Generator],
    orientations: Optional[Sequence[int]]
) -> np.ndarray:
    if orientations is None:
        if rng is None:
            raise ValueError("rng か orientations のどちらかが必要です")
        return draw_orientations(T, rng)
    resolved = np.array(orientations, dtype=np.int8)
    if resolved.shape != (T + 1,):
        raise ValueError(f"Λ の長さは T+1 が必要です: {resolved.shape}")
    return resolved


def assign_spikes_min(
    events: EventSequence,
    params: HardnessParams,
    rng: Optional[np.random.Generator] = None,
    orientations: Optional[Sequence[int]] = None
) -> SpikeSequence:
    """
    S_t(x) = η ⇔ (E_t ∧ x = Λ_t) ∨ (E_{t+1} ∧ x != Λ_{t+1})

    ラウンド t のイベントは、ラウンド t-1 の行動 1-Λ_t とラウンド t の行動 Λ_t にスパイクを置く。

    Args:
        events: min イベント列
        params: パラメータ（η を使う）
        rng: Λ を引く乱数生成器
        orientations: 検証用に固定する Λ（長さ T+1）

    Returns:
        スパイク列
    """
    T = events.horizon
    lam = _resolve_orientations(T, rng, orientations)
    values = np.zeros((T, HARD_INSTANCE_ACTIONS))
    for t in events.rounds():
        if lam[t] not in (0, 1):
            raise ValueError(f"イベントラウンド {t} の Λ が未定義です")
        _place(values, t - 1, 1 - lam[t], params.eta)
        _place(values, t, lam[t], params.eta)
    values.setflags(write=False)
    return SpikeSequence(values=values, orientations=lam, magnitude=params.eta)


def assign_spikes_max(
    events: EventSequence,
    rng: Optional[np.random.Generator] = None,
    orientations: Optional[Sequence[int]] = None
) -> SpikeSequence:
    """S_{t-1}(Λ_t) = S_t(Λ_t) = 1（E_t が立つラウンドのみ）"""
    T = events.horizon
    lam = _resolve_orientations(T, rng, orientations)
    values = np.zeros((T, HARD_INSTANCE_ACTIONS))
    for t in events.rounds():
        if lam[t] not in (0, 1):
            raise ValueError(f"イベントラウンド {t} の Λ が未定義です")
        _place(values, t - 1, lam[t], MAX_SPIKE)
        _place(values, t, lam[t], MAX_SPIKE)
    values.setflags(write=False)
    return SpikeSequence(values=values, orientations=lam, magnitude=MAX_SPIKE)


def _place(values: np.ndarray, t: int, action: int, magnitude: float):
    # 異なるイベントのスパイクは同じ (t, x) に重ならない
    if values[t - 1, action] != 0:
        raise RuntimeError(f"スパイクが重複しています: t={t}, x={action}")
    values[t - 1, action] = magnitude


@dataclass(frozen=True, eq=False)
class HardInstanceAudit:
    """困難インスタンスの生成過程（ρ・ξ・W・Z・イベント・Λ・スパイク）の記録"""
    trace: RandomParentTrace
    noise: NoiseSequence
    walk: WalkSequence
    gap: GapProcess
    events: EventSequence
    spikes: SpikeSequence
    params: HardnessParams

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "parents": self.trace.parent.parents,
            "bits": self.trace.bits,
            "noise": self.noise.values,
            "walk": self.walk.values,
            "gap": self.gap.values,
            "events": self.events.flags,
            "orientations": self.spikes.orientations,
            "spikes": self.spikes.values,
        }


def _build_hard_instance(
    kind: str,
    T: int,
    params: HardnessParams,
    rng: np.random.Generator,
    seed: Optional[int]
) -> RealizedEnvironment:
    # 乱数の消費順は B → ξ → χ → Λ で固定
    trace = build_random_parent(T, rng)
    noise = sample_noise(T, params.sigma, rng)
    walk = build_walk(trace.parent, noise)
    chi = int(rng.integers(0, HARD_INSTANCE_ACTIONS))
    gap = build_gap_process(walk, chi, params.epsilon)

    if kind == "min":
        events = detect_min_events(walk, params.tau)
        spikes = assign_spikes_min(events, params, rng)
        combiner = make_min_combiner()
    else:
        events = detect_max_events(walk, params.tau, params.eta)
        spikes = assign_spikes_max(events, rng)
        combiner = make_max_combiner()

    tables = clip_to_table(gap, spikes)
    logger.debug(f"{kind} 困難インスタンス: T={T}, χ={chi}, イベント数={len(events.rounds())}")
    return RealizedEnvironment(
        table=tables.clipped,
        combiner=combiner,
        chi=chi,
        seed=seed,
        kind=kind,
        params=asdict(params),
        unclipped=tables.unclipped,
        audit=HardInstanceAudit(
            trace=trace, noise=noise, walk=walk, gap=gap,
            events=events, spikes=spikes, params=params
        ),
    )


def build_min_adversary(
    T: int,
    params: HardnessParams,
    rng: np.random.Generator,
    seed: Optional[int] = None
) -> RealizedEnvironment:
    """
    min 結合関数による困難インスタンス F_t = min(L_{t-1}(x_{t-1}), L_t(x_t))

    Args:
        T: ホライズン（4以上）
        params: パラメータ
        rng: 乱数生成器
        seed: メタデータとして記録するシード

    Returns:
        実現済み環境（audit に生成過程を保持）
    """
    return _build_hard_instance("min", T, params, rng, seed)


def build_max_adversary(
    T: int,
    params: HardnessParams,
    rng: np.random.Generator,
    seed: Optional[int] = None
) -> RealizedEnvironment:
    """max 結合関数による困難インスタンス（スパイクの大きさは1）"""
    if T < 3:
        raise ValueError(f"max 困難インスタンスには T >= 3 が必要です: {T}")
    return _build_hard_instance("max", T, params, rng, seed)


class IntervalViolation(NamedTuple):
    """区間チェックに違反したイベントラウンド"""
    t: int
    penalized_switch: bool
    loss: float
    low: float
    high: float


def _require_min_audit(env: RealizedEnvironment) -> HardInstanceAudit:
    if env.kind != "min" or not isinstance(env.audit, HardInstanceAudit):
        raise ValueError("min 困難インスタンス（生成記録つき）が必要です")
    return env.audit


def check_spike_intervals(env: RealizedEnvironment, actions: Sequence[int]) -> List[IntervalViolation]:
    """
    E_t が立つ各ラウンドで、クリップ前の損失が区間に入っているかを確認

    X_{t-1} = 1-Λ_t から X_t = Λ_t への切り替えは [Z_t(0) + η - (ε+τ), Z_t(0) + η + (ε+τ)]、
    それ以外は [Z_t(0) - (ε+τ), Z_t(0) + (ε+τ)] に入る。

    Args:
        env: min 困難インスタンス
        actions: 長さ T の行動列

    Returns:
        違反の一覧（空なら全て区間内）
    """
    audit = _require_min_audit(env)
    raw = env.unclipped.values
    params = audit.params
    lam = audit.spikes.orientations
    width = params.epsilon + params.tau + INTERVAL_TOLERANCE

    violations = []
    for t in audit.events.rounds():
        previous, current = actions[t - 2], actions[t - 1]
        loss = min(raw[t - 2, previous], raw[t - 1, current])
        penalized = previous == 1 - lam[t] and current == lam[t]
        center = audit.gap.z(t, 0) + (params.eta if penalized else 0.0)
        if not center - width <= loss <= center + width:
            violations.append(IntervalViolation(t, penalized, loss, center - width, center + width))
    return violations


def check_no_spike_after_event(env: RealizedEnvironment) -> List[int]:
    """E_{t-1} が立つのにラウンド t にスパイクがある t の一覧"""
    audit = _require_min_audit(env)
    spikes = audit.spikes.values
    T = env.horizon
    return [
        t + 1 for t in audit.events.rounds()
        if t + 1 <= T and spikes[t].any()
    ]
