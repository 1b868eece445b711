"""
@file: brute_force.py
@desc: テスト用の素朴な再実装（祖先・深さ・幅、合成損失、方策リグレット）。本体の実装とはコードを共有しない
"""

import logging
from typing import Dict, List, Sequence, Set, Tuple

# ロガー設定
logger = logging.getLogger(__name__)


def brute_ancestors_depth_width(parents: Sequence[int]) -> Tuple[Dict[int, Set[int]], int, int]:
    """
    親の列から祖先集合・深さ・幅を定義どおりに計算

    Args:
        parents: parents[t] が ρ(t)（parents[0] は無視）

    Returns:
        ({t: ρ*(t)}, 深さ, 幅)
    """
    T = len(parents) - 1

    def ancestors_of(t: int) -> Set[int]:
        found: Set[int] = set()
        while t != 0:
            t = int(parents[t])
            found.add(t)
        return found

    ancestor_sets = {t: ancestors_of(t) for t in range(0, T + 1)}
    depth = max(len(ancestor_sets[t]) for t in range(1, T + 1))

    width = 0
    for t in range(1, T + 1):
        cut = [s for s in range(1, T + 1) if int(parents[s]) < t <= s]
        width = max(width, len(cut))
    return ancestor_sets, depth, width


def brute_composite_eval(g, table, actions: Sequence[int], t: int) -> float:
    """
    窓 (ℓ_{t-m}(x_{t-m}), ..., ℓ_t(x_t)) をそのまま組み立てて g を適用（ℓ_{<=0} = 0）
    """
    window: List[float] = []
    for s in range(t - g.memory, t + 1):
        if s <= 0:
            window.append(0.0)
        else:
            window.append(float(table.values[s - 1][actions[s - 1]]))

    kind = g.kind.value
    if kind == "min":
        return min(window)
    if kind == "max":
        return max(window)
    total = 0
    for i in range(g.memory + 1):
        total = total + g.coeffs[i] * window[g.memory - i]
    return total


def _total(env, actions: Sequence[int]) -> float:
    total = 0.0
    for t in range(1, len(actions) + 1):
        loss = brute_composite_eval(env.combiner, env.table, actions, t)
        if env.switching and t >= 2 and actions[t - 1] != actions[t - 2]:
            loss += 1.0
        total += loss
    return total


def brute_policy_regret(env, actions: Sequence[int]) -> float:
    """Σ_t f_t(X_{1:t}) - min_x Σ_t f_t(x, ..., x) を二重ループで計算"""
    T = env.table.values.shape[0]
    k = env.table.values.shape[1]
    player_total = _total(env, list(actions))
    best = None
    for x in range(k):
        constant_total = _total(env, [x] * T)
        if best is None or constant_total < best:
            best = constant_total
    return player_total - best
