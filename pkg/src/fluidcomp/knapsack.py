"""Per-chunk service selection under the consumer's current-intensity cap."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ChunkItem:
    service_id: str
    intensity_ma: float
    energy_mah: float


def total_energy(items: Sequence[ChunkItem]) -> float:
    return math.fsum(it.energy_mah for it in items)


def _int_ma(value: float) -> int:
    if not float(value).is_integer():
        raise ValueError(f"intensity must be a whole number of mA, got {value}")
    return int(value)


def select_knapsack(items: Sequence[ChunkItem], ci_ma: float) -> list[ChunkItem]:
    """Exact 0/1 knapsack maximizing energy subject to sum(intensity) <= ci_ma.

    Dynamic program over capacity in 1 mA units. Among optimal subsets the
    lexicographically smallest sorted tuple of service ids is returned.
    Items with zero energy are never selected; items that alone exceed the
    cap are skipped.
    """
    if not ci_ma > 0:
        raise ValueError("ci_ma must be positive")
    cap = int(math.floor(ci_ma))
    pool = sorted(
        (it for it in items if it.energy_mah > 0 and _int_ma(it.intensity_ma) <= cap),
        key=lambda it: it.service_id,
    )
    n = len(pool)
    if n == 0:
        return []
    w = [_int_ma(it.intensity_ma) for it in pool]
    # best[i, c]: max energy from pool[i:] within capacity c
    best = np.zeros((n + 1, cap + 1))
    for i in range(n - 1, -1, -1):
        nxt = best[i + 1]
        row = nxt.copy()
        if w[i] <= cap:
            take = nxt[: cap + 1 - w[i]] + pool[i].energy_mah
            np.maximum(row[w[i]:], take, out=row[w[i]:])
        best[i] = row

    chosen, c = [], cap
    for i in range(n):
        if w[i] <= c and best[i + 1, c - w[i]] + pool[i].energy_mah >= best[i, c]:
            chosen.append(pool[i])
            c -= w[i]
    return chosen


def select_greedy(items: Sequence[ChunkItem], ci_ma: float) -> list[ChunkItem]:
    """Take items by decreasing energy while the aggregate intensity fits."""
    if not ci_ma > 0:
        raise ValueError("ci_ma must be positive")
    chosen, used = [], 0.0
    for it in sorted(items, key=lambda it: (-it.energy_mah, it.service_id)):
        if used + it.intensity_ma <= ci_ma:
            chosen.append(it)
            used += it.intensity_ma
    return sorted(chosen, key=lambda it: it.service_id)


SELECTORS = {"knapsack": select_knapsack, "greedy": select_greedy}
