"""Provision series, disconnections and intermittence metrics.

A service's availability pattern gives, per tick, where its provider most
likely is and with what probability. Toward a given request this becomes a
binary provision series: 1 when the provider is present and within wireless
range of the consumer.
"""
from __future__ import annotations

import math
import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import (
    AvailabilityPattern,
    ConfinedArea,
    EnergyRequest,
    EnergyService,
    Location,
    ProvisionSeries,
    distance,
)

MODES = ("expected", "threshold", "sampled")


@dataclass(frozen=True)
class Disconnection:
    start_tick: int
    end_tick: int

    @property
    def length_ticks(self) -> int:
        return self.end_tick - self.start_tick


@dataclass(frozen=True)
class HistoryRecord:
    """One past visit of a provider to a venue: a location per tick."""

    service_owner_id: str
    ticks: tuple[int, ...]
    locations: tuple[Location, ...]
    venue: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ticks", tuple(self.ticks))
        object.__setattr__(self, "locations", tuple(self.locations))
        if len(self.ticks) != len(self.locations):
            raise ValueError("history record needs one location per tick")
        if any(b <= a for a, b in zip(self.ticks, self.ticks[1:])):
            raise ValueError("history ticks must be strictly increasing")


def _cell(loc: Location, area: ConfinedArea, cell_m: float) -> tuple[int, int]:
    nx = max(1, math.ceil(area.width_m / cell_m))
    ny = max(1, math.ceil(area.height_m / cell_m))
    return min(int(loc.x_m // cell_m), nx - 1), min(int(loc.y_m // cell_m), ny - 1)


def _cell_center(cell: tuple[int, int], area: ConfinedArea, cell_m: float) -> Location:
    x0, y0 = cell[0] * cell_m, cell[1] * cell_m
    x1, y1 = min(x0 + cell_m, area.width_m), min(y0 + cell_m, area.height_m)
    return Location((x0 + x1) / 2, (y0 + y1) / 2)


def estimate_availability(
    history: Sequence[HistoryRecord],
    area: ConfinedArea,
    st: int,
    et: int,
    cell_m: float = 1.0,
) -> AvailabilityPattern:
    """Per-tick modal cell over past visits.

    The probability at a tick is the fraction of visits that were in the
    modal cell at that tick; visits absent at the tick count against it.
    Ties between cells go to the lowest (column, row) index. Ticks nobody
    observed get the area center with probability 0.
    """
    if not history:
        raise ValueError("no history")
    by_tick: dict[int, Counter] = {}
    for rec in history:
        for tick, loc in zip(rec.ticks, rec.locations):
            if not area.contains(loc):
                raise ValueError(
                    f"history of {rec.service_owner_id} leaves the area at tick {tick}"
                )
            if st <= tick < et:
                by_tick.setdefault(tick, Counter())[_cell(loc, area, cell_m)] += 1

    n = len(history)
    ticks, locs, probs = [], [], []
    center = Location(area.width_m / 2, area.height_m / 2)
    for tick in range(st, et):
        counts = by_tick.get(tick)
        ticks.append(tick)
        if not counts:
            locs.append(center)
            probs.append(0.0)
            continue
        best = max(counts.values())
        cell = min(c for c, k in counts.items() if k == best)
        locs.append(_cell_center(cell, area, cell_m))
        probs.append(best / n)
    return AvailabilityPattern(ticks, locs, probs)


def derive_provision(
    svc: EnergyService,
    req: EnergyRequest,
    mode: str = "expected",
    *,
    tau: float = 0.5,
    seed: Optional[int] = None,
) -> ProvisionSeries:
    """Provision series of ``svc`` toward ``req`` over their common window.

    ``mode`` decides how the presence probability becomes a yes/no:
    ``expected`` uses theta >= 0.5, ``threshold`` uses theta >= tau and
    ``sampled`` draws Bernoulli(theta) from ``seed``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown provision mode {mode!r}")
    if mode == "threshold" and not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0,1], got {tau}")
    start = max(svc.start_tick, req.t)
    end = min(svc.end_tick, req.end_tick)
    if end <= start:
        return ProvisionSeries(svc.eid, req.rid, start, start, ())

    av = svc.availability
    offset = start - av.ticks[0]
    if offset < 0 or offset + (end - start) > len(av.ticks):
        raise ValueError(f"availability of {svc.eid} does not cover [{start},{end})")
    theta = np.asarray(av.probabilities[offset:offset + end - start], dtype=float)
    if mode == "expected":
        present = theta >= 0.5
    elif mode == "threshold":
        present = theta >= tau
    else:
        rng = np.random.default_rng(seed)
        present = rng.random(len(theta)) < theta

    r = svc.qos.range_m
    locs = av.locations[offset:offset + end - start]
    in_range = np.fromiter((distance(req.l, loc) <= r for loc in locs), bool, len(locs))
    return ProvisionSeries(svc.eid, req.rid, start, end, (present & in_range).astype(int))


def _runs(pr: Sequence[int], value: int) -> list[tuple[int, int]]:
    """Maximal runs of ``value`` as index pairs [i, j)."""
    out = []
    i, n = 0, len(pr)
    while i < n:
        if pr[i] != value:
            i += 1
            continue
        j = i
        while j < n and pr[j] == value:
            j += 1
        out.append((i, j))
        i = j
    return out


def extract_disconnections(ps: ProvisionSeries) -> list[Disconnection]:
    return [Disconnection(ps.start_tick + i, ps.start_tick + j) for i, j in _runs(ps.pr, 0)]


def connected_segments(ps: ProvisionSeries) -> list[tuple[int, int]]:
    """Maximal connected runs as absolute tick intervals."""
    return [(ps.start_tick + i, ps.start_tick + j) for i, j in _runs(ps.pr, 1)]


def count_connected_runs(pr: Iterable[int]) -> int:
    runs, prev = 0, 0
    for v in pr:
        if v and not prev:
            runs += 1
        prev = v
    return runs


def stability_score(ps: ProvisionSeries) -> float:
    """1 - 1/z for z disconnected ticks; 0 when z is 0 (or 1).

    Higher means more disconnected time.
    """
    z = len(ps.pr) - sum(ps.pr)
    if z == 0:
        return 0.0
    return 1.0 - 1.0 / z


def disconnection_ratio(ps: ProvisionSeries) -> float:
    if len(ps.pr) == 0:
        raise ValueError("empty series")
    return sum(d.length_ticks for d in extract_disconnections(ps)) / len(ps.pr)


def provision_map(
    services: Iterable[EnergyService],
    req: EnergyRequest,
    mode: str = "expected",
    *,
    tau: float = 0.5,
    seed: Optional[int] = None,
) -> dict[str, ProvisionSeries]:
    """Provision series of every service toward ``req``, keyed by service id.

    In sampled mode each (service, request) pair draws from its own stream
    derived from ``seed`` so that services are not correlated.
    """
    out = {}
    for svc in services:
        s = seed
        if mode == "sampled":
            s = zlib.crc32(f"{seed}:{svc.eid}:{req.rid}".encode())
        out[svc.eid] = derive_provision(svc, req, mode, tau=tau, seed=s)
    return out
