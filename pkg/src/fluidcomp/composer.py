"""Composition algorithms: heuristic fluid, brute force, static and lossy.

Every algorithm produces a :class:`CompositionPlan`: a set of timed
invocations of physical services. Invocations of one service that touch
end-to-start are coalesced, so one invocation is one connection as planned.
Energy follows the uniform-rate model: a service delivers
``dec_mah / (end_tick - start_tick)`` per connected tick.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .knapsack import SELECTORS, ChunkItem
from .mobility import (
    Disconnection,
    count_connected_runs,
    derive_provision,
    disconnection_ratio,
    extract_disconnections,
    provision_map,
    stability_score,
)
from .model import EnergyRequest, EnergyService, ProvisionSeries, Scenario
from .selection import chunk_timeline

ALGORITHMS = ("fluid", "brute", "static", "lossy")


@dataclass(frozen=True)
class HeuristicConfig:
    mu: float = 0.8
    d_max: float = 0.5
    g_min: int = 3

    def __post_init__(self):
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"mu must lie in [0,1), got {self.mu}")
        if not 0.0 < self.d_max <= 1.0:
            raise ValueError(f"d_max must lie in (0,1], got {self.d_max}")
        if int(self.g_min) != self.g_min or self.g_min < 1:
            raise ValueError(f"g_min must be an integer >= 1, got {self.g_min}")


@dataclass(frozen=True)
class Invocation:
    service_id: str
    start_tick: int
    end_tick: int
    expected_intensity_ma: float


@dataclass(frozen=True)
class CompositionPlan:
    request_id: str
    invocations: tuple[Invocation, ...]
    predicted_energy_mah: float
    switch_count: int
    algorithm: str = ""


@dataclass(frozen=True)
class DeliveryReport:
    request_id: str
    delivered_mah: float
    served: bool
    switch_count: int
    wasted_switches: int


@dataclass(frozen=True)
class MergedService:
    """A base service whose long gaps are covered by substitutes.

    ``providers`` names the physical service active at each tick of
    ``effective``'s window; exactly one provider per tick.
    """

    base_service_id: str
    substitutes: tuple[tuple[Disconnection, tuple[str, ...]], ...]
    effective: ProvisionSeries
    providers: tuple[str, ...]
    added_switches: int

    def provider_at(self, tick: int) -> str:
        return self.providers[tick - self.effective.start_tick]


# --- substitutes ------------------------------------------------------------


def _series_of(svc, req, series) -> ProvisionSeries:
    if series is not None and svc.eid in series:
        return series[svc.eid]
    return derive_provision(svc, req)


def find_substitutes(
    dis: Disconnection,
    candidates: Sequence[EnergyService],
    req: EnergyRequest,
    series: Optional[Mapping[str, ProvisionSeries]] = None,
    ratios: Optional[Mapping[str, float]] = None,
) -> list[EnergyService]:
    """Services connected over the whole gap, best first.

    Ranked by lowest disconnection ratio, then highest per-tick rate, then id.
    ``ratios`` may carry precomputed disconnection ratios by service id.
    """
    found = []
    for svc in candidates:
        if svc.qos.intensity_ma > req.ci_ma:
            continue
        ps = _series_of(svc, req, series)
        if ps.start_tick > dis.start_tick or ps.end_tick < dis.end_tick:
            continue
        i, j = dis.start_tick - ps.start_tick, dis.end_tick - ps.start_tick
        if all(ps.pr[i:j]):
            ratio = ratios[svc.eid] if ratios is not None else disconnection_ratio(ps)
            found.append((ratio, -svc.qos.rate_mah, svc.eid, svc))
    found.sort(key=lambda x: x[:3])
    return [x[3] for x in found]


def merge_with_substitutes(
    base: EnergyService,
    patches: Sequence[tuple[Disconnection, EnergyService]],
    req: EnergyRequest,
    series: Optional[Mapping[str, ProvisionSeries]] = None,
) -> MergedService:
    """Fold substitutes into the base service as a single effective service.

    Each patched gap costs two extra switches (over to the substitute and
    back), or one when the gap touches either end of the window.
    """
    ps = _series_of(base, req, series)
    pr = list(ps.pr)
    providers = [base.eid] * len(pr)
    ordered = sorted(patches, key=lambda p: p[0].start_tick)
    for (d1, _), (d2, _) in zip(ordered, ordered[1:]):
        if d2.start_tick < d1.end_tick:
            raise ValueError("conflicting substitutes")

    added = 0
    subs = []
    for dis, sub in ordered:
        if not (ps.start_tick <= dis.start_tick < dis.end_tick <= ps.end_tick):
            raise ValueError(f"gap [{dis.start_tick},{dis.end_tick}) outside window of {base.eid}")
        sps = _series_of(sub, req, series)
        if any(sps.at(k) != 1 for k in range(dis.start_tick, dis.end_tick)):
            raise ValueError(f"substitute {sub.eid} does not cover [{dis.start_tick},{dis.end_tick})")
        if sub.qos.intensity_ma > req.ci_ma:
            raise ValueError(f"substitute {sub.eid} exceeds the intensity cap")
        for k in range(dis.start_tick, dis.end_tick):
            pr[k - ps.start_tick] = 1
            providers[k - ps.start_tick] = sub.eid
        touches_edge = dis.start_tick == ps.start_tick or dis.end_tick == ps.end_tick
        added += 1 if touches_edge else 2
        subs.append((dis, (sub.eid,)))

    effective = ProvisionSeries(base.eid, req.rid, ps.start_tick, ps.end_tick, pr)
    return MergedService(base.eid, tuple(subs), effective, tuple(providers), added)


# --- plan assembly ------------------------------------------------------------


def _coalesce(pieces, intensity: Mapping[str, float]) -> tuple[Invocation, ...]:
    by_svc = defaultdict(list)
    for eid, a, b in pieces:
        if a < b:
            by_svc[eid].append((a, b))
    out = []
    for eid, spans in by_svc.items():
        spans.sort()
        cur_a, cur_b = spans[0]
        for a, b in spans[1:]:
            if a <= cur_b:
                cur_b = max(cur_b, b)
            else:
                out.append(Invocation(eid, cur_a, cur_b, intensity[eid]))
                cur_a, cur_b = a, b
        out.append(Invocation(eid, cur_a, cur_b, intensity[eid]))
    out.sort(key=lambda inv: (inv.start_tick, inv.service_id))
    return tuple(out)


def _replay(invocations, by_id, series) -> tuple[float, int, int]:
    """Energy, connection count and dead invocations under ``series``."""
    energy, switches, wasted = 0.0, 0, 0
    parts = []
    for inv in invocations:
        ps = series[inv.service_id]
        window = [ps.at(k) for k in range(inv.start_tick, inv.end_tick)]
        parts.append(by_id[inv.service_id].qos.rate_mah * sum(window))
        runs = count_connected_runs(window)
        switches += runs
        wasted += runs == 0
    energy = math.fsum(parts)
    return energy, switches, wasted


def _plan_from_pieces(req, pieces, by_id, series, switch_cost, algorithm) -> CompositionPlan:
    intensity = {eid: svc.qos.intensity_ma for eid, svc in by_id.items()}
    invocations = _coalesce(pieces, intensity)
    if series is None:
        # blind to intermittence: full advertised delivery, one connection each
        energy = math.fsum(
            by_id[inv.service_id].qos.rate_mah * (inv.end_tick - inv.start_tick)
            for inv in invocations
        )
        switches = len(invocations)
    else:
        energy, switches, _ = _replay(invocations, by_id, series)
    predicted = max(0.0, energy - switch_cost * switches)
    return CompositionPlan(req.rid, invocations, predicted, switches, algorithm)


def _empty_plan(req, algorithm) -> CompositionPlan:
    return CompositionPlan(req.rid, (), 0.0, 0, algorithm)


# --- algorithms ---------------------------------------------------------------


def gate_fluid(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    cfg: HeuristicConfig,
    series: Mapping[str, ProvisionSeries],
) -> list[EnergyService]:
    """Services kept by the stability and disconnection-ratio gates."""
    kept = []
    for svc in services:
        ps = series[svc.eid]
        if len(ps) == 0:
            continue
        if stability_score(ps) > cfg.mu or disconnection_ratio(ps) >= cfg.d_max:
            continue
        kept.append(svc)
    return kept


class _Track:
    """A merged service cut into runs of constant provider and connectivity.

    A patch listed in ``dropped`` is left unfilled: the base waits out the
    gap, holding its own intensity but delivering nothing.
    """

    def __init__(self, m: MergedService, by_id):
        base = by_id[m.base_service_id]
        self.eid = m.base_service_id
        self.base_intensity = base.qos.intensity_ma
        self.keys = []
        self.subs = []
        patch_of = {}
        for idx, (dis, (sub,)) in enumerate(m.substitutes):
            self.keys.append((self.eid, sub, dis.start_tick))
            self.subs.append((sub, dis.start_tick, dis.end_tick))
            patch_of[dis.start_tick] = idx
        # (lo, hi, patch index or -1, connected, rate, intensity)
        self.runs = []
        st = m.effective.start_tick
        pr, providers = m.effective.pr, m.providers
        lo = 0
        for k in range(1, len(pr) + 1):
            if k < len(pr) and pr[k] == pr[lo] and providers[k] == providers[lo]:
                continue
            svc = by_id[providers[lo]]
            idx = patch_of.get(st + lo, -1) if providers[lo] != self.eid else -1
            self.runs.append(
                (st + lo, st + k, idx, bool(pr[lo]), svc.qos.rate_mah, svc.qos.intensity_ma)
            )
            lo = k
        self.run_ends = [r[1] for r in self.runs]

    def _overlapping(self, a: int, b: int):
        for run in self.runs[bisect_right(self.run_ends, a):]:
            if run[0] >= b:
                break
            yield run

    def _off(self, dropped) -> set:
        if not dropped:
            return set()
        return {idx for idx, key in enumerate(self.keys) if key in dropped}

    def item(self, a: int, b: int, dropped) -> Optional[ChunkItem]:
        off = self._off(dropped)
        parts, peak = [], 0.0
        for lo, hi, idx, connected, rate, intensity in self._overlapping(a, b):
            x, y = max(lo, a), min(hi, b)
            if x >= y:
                continue
            if idx in off:
                peak = max(peak, self.base_intensity)
                continue
            peak = max(peak, intensity)
            if connected:
                parts.append(rate * (y - x))
        energy = math.fsum(parts)
        if energy <= 0:
            return None
        return ChunkItem(self.eid, peak, energy)

    def pieces(self, a: int, b: int, dropped) -> list[tuple[str, int, int]]:
        off = self._off(dropped)
        out = []
        for lo, hi, idx, _, _, _ in self._overlapping(a, b):
            x, y = max(lo, a), min(hi, b)
            if x >= y:
                continue
            provider = self.eid if idx < 0 or idx in off else self.subs[idx][0]
            out.append((provider, x, y))
        return out


def _conflicting_patch(chunk, selected, tracks, dropped):
    """First patch whose substitute is already busy in this chunk, or None.

    Chosen services occupy the chunk themselves; patches then claim their
    substitutes in order of base id and gap start.
    """
    a, b = chunk.start_tick, chunk.end_tick
    busy = defaultdict(list)
    for eid in selected:
        busy[eid].append((a, b))
    for eid in selected:
        tr = tracks[eid]
        for key, (sub, ga, gb) in zip(tr.keys, tr.subs):
            lo, hi = max(a, ga), min(b, gb)
            if lo >= hi or key in dropped:
                continue
            if any(x < hi and lo < y for x, y in busy[sub]):
                return key
            busy[sub].append((lo, hi))
    return None


def compose_fluid(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    cfg: HeuristicConfig = HeuristicConfig(),
    *,
    switch_cost_mah: float = 0.0,
    selector: str = "knapsack",
    mode: str = "expected",
    series: Optional[Mapping[str, ProvisionSeries]] = None,
) -> CompositionPlan:
    """Heuristic fluid composition over pre-filtered composable services.

    Unstable services are gated out, short gaps tolerated and each long gap
    patched by its best covering substitute. The merged services are then
    chunked on advertised boundaries and selected per chunk. A substitute
    cannot serve twice at once: when a chosen set uses one both on its own
    and as a patch (or for two patches), the later patch is dropped for that
    chunk and the chunk is selected again.
    """
    select = SELECTORS[selector]
    series = dict(series) if series is not None else provision_map(services, req, mode)
    by_id = {svc.eid: svc for svc in services}

    ratios = {eid: disconnection_ratio(ps) for eid, ps in series.items() if len(ps)}
    tracks: dict[str, _Track] = {}
    kept = gate_fluid(services, req, cfg, series)
    for svc in kept:
        patches = []
        long_gaps = [d for d in extract_disconnections(series[svc.eid]) if d.length_ticks >= cfg.g_min]
        others = [o for o in services if o.eid != svc.eid] if long_gaps else []
        for dis in long_gaps:
            subs = find_substitutes(dis, others, req, series, ratios)
            if subs:
                patches.append((dis, subs[0]))
        tracks[svc.eid] = _Track(merge_with_substitutes(svc, patches, req, series), by_id)
    if not tracks:
        return _empty_plan(req, "fluid")

    pieces = []
    for chunk in chunk_timeline(kept, req, "advertised"):
        dropped: set = set()
        while True:
            items = []
            for eid in chunk.candidates:
                it = tracks[eid].item(chunk.start_tick, chunk.end_tick, dropped)
                if it is not None:
                    items.append(it)
            selected = [it.service_id for it in select(items, req.ci_ma)]
            clash = _conflicting_patch(chunk, selected, tracks, dropped)
            if clash is None:
                break
            dropped.add(clash)
        for eid in selected:
            pieces.extend(tracks[eid].pieces(chunk.start_tick, chunk.end_tick, dropped))
    return _plan_from_pieces(req, pieces, by_id, series, switch_cost_mah, "fluid")


def compose_bruteforce(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    *,
    switch_cost_mah: float = 0.0,
    selector: str = "knapsack",
    mode: str = "expected",
    series: Optional[Mapping[str, ProvisionSeries]] = None,
) -> CompositionPlan:
    """Every connected segment is its own service; re-select at every fine chunk."""
    select = SELECTORS[selector]
    series = dict(series) if series is not None else provision_map(services, req, mode)
    by_id = {svc.eid: svc for svc in services}
    pieces = []
    for chunk in chunk_timeline(services, req, "fine", series):
        items = [
            ChunkItem(eid, by_id[eid].qos.intensity_ma, by_id[eid].qos.rate_mah * chunk.length)
            for eid in chunk.candidates
        ]
        for it in select(items, req.ci_ma):
            pieces.append((it.service_id, chunk.start_tick, chunk.end_tick))
    if not pieces:
        return _empty_plan(req, "brute")
    return _plan_from_pieces(req, pieces, by_id, series, switch_cost_mah, "brute")


def compose_static(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    *,
    switch_cost_mah: float = 0.0,
    selector: str = "knapsack",
    algorithm: str = "static",
) -> CompositionPlan:
    """Advertisement-only composition that assumes full delivery."""
    select = SELECTORS[selector]
    by_id = {svc.eid: svc for svc in services}
    pieces = []
    for chunk in chunk_timeline(services, req, "advertised"):
        items = [
            ChunkItem(eid, by_id[eid].qos.intensity_ma, by_id[eid].qos.rate_mah * chunk.length)
            for eid in chunk.candidates
        ]
        for it in select(items, req.ci_ma):
            pieces.append((it.service_id, chunk.start_tick, chunk.end_tick))
    if not pieces:
        return _empty_plan(req, algorithm)
    return _plan_from_pieces(req, pieces, by_id, None, switch_cost_mah, algorithm)


def lossy_survivors(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    mu: float,
    series: Mapping[str, ProvisionSeries],
) -> list[EnergyService]:
    out = []
    for svc in services:
        ps = series[svc.eid]
        if 0 in ps.pr and stability_score(ps) > mu:
            continue
        out.append(svc)
    return out


def compose_lossy(
    services: Sequence[EnergyService],
    req: EnergyRequest,
    mu: float = HeuristicConfig.mu,
    *,
    switch_cost_mah: float = 0.0,
    selector: str = "knapsack",
    mode: str = "expected",
    series: Optional[Mapping[str, ProvisionSeries]] = None,
) -> CompositionPlan:
    """Drop highly intermittent services, then compose statically."""
    series = dict(series) if series is not None else provision_map(services, req, mode)
    survivors = lossy_survivors(services, req, mu, series)
    return compose_static(
        survivors, req, switch_cost_mah=switch_cost_mah, selector=selector, algorithm="lossy"
    )


def compose(
    algorithm: str,
    services: Sequence[EnergyService],
    req: EnergyRequest,
    cfg: HeuristicConfig = HeuristicConfig(),
    *,
    switch_cost_mah: float = 0.0,
    selector: str = "knapsack",
    mode: str = "expected",
    series: Optional[Mapping[str, ProvisionSeries]] = None,
) -> CompositionPlan:
    kw = dict(switch_cost_mah=switch_cost_mah, selector=selector)
    if algorithm == "fluid":
        return compose_fluid(services, req, cfg, mode=mode, series=series, **kw)
    if algorithm == "brute":
        return compose_bruteforce(services, req, mode=mode, series=series, **kw)
    if algorithm == "static":
        return compose_static(services, req, **kw)
    if algorithm == "lossy":
        return compose_lossy(services, req, cfg.mu, mode=mode, series=series, **kw)
    raise ValueError(f"unknown algorithm {algorithm!r}")


# --- ground truth -------------------------------------------------------------


def evaluate_plan(
    plan: CompositionPlan,
    scenario: Scenario,
    req: EnergyRequest,
    *,
    mode: str = "expected",
    seed: Optional[int] = None,
) -> DeliveryReport:
    """Replay a plan against the services' true provision series.

    Every connected run inside an invocation is one connection establishment
    and pays the scenario switch cost. Invocations that never connect are
    counted as wasted switches and cost nothing.
    """
    by_id = scenario.services_by_id()
    for inv in plan.invocations:
        if inv.start_tick < req.t or inv.end_tick > req.end_tick or inv.start_tick >= inv.end_tick:
            raise ValueError(
                f"invocation of {inv.service_id} [{inv.start_tick},{inv.end_tick}) "
                f"outside request window [{req.t},{req.end_tick})"
            )
        if inv.service_id not in by_id:
            raise ValueError(f"plan references unknown service {inv.service_id}")
    used = [by_id[eid] for eid in sorted({inv.service_id for inv in plan.invocations})]
    truth = provision_map(used, req, mode, seed=seed)
    energy, switches, wasted = _replay(plan.invocations, by_id, truth)
    delivered = max(0.0, energy - scenario.switch_cost_mah * switches)
    return DeliveryReport(req.rid, delivered, delivered >= req.re_mah, switches, wasted)


def plan_violations(
    plan: CompositionPlan, req: EnergyRequest, services: Mapping[str, EnergyService]
) -> list[str]:
    """Structural checks: intensity cap per tick, window bounds, no self-overlap."""
    out = []
    load = defaultdict(float)
    spans = defaultdict(list)
    for inv in plan.invocations:
        svc = services.get(inv.service_id)
        if svc is None:
            out.append(f"unknown service {inv.service_id}")
            continue
        if not (req.t <= inv.start_tick < inv.end_tick <= req.end_tick):
            out.append(f"{inv.service_id}: invocation outside request window")
        if not (svc.start_tick <= inv.start_tick and inv.end_tick <= svc.end_tick):
            out.append(f"{inv.service_id}: invocation outside advertised window")
        for k in range(inv.start_tick, inv.end_tick):
            load[k] += svc.qos.intensity_ma
        spans[inv.service_id].append((inv.start_tick, inv.end_tick))
    for k, total in sorted(load.items()):
        if total > req.ci_ma + 1e-9:
            out.append(f"tick {k}: intensity {total} exceeds cap {req.ci_ma}")
    for eid, ss in spans.items():
        ss.sort()
        for (a1, b1), (a2, b2) in zip(ss, ss[1:]):
            if a2 < b1:
                out.append(f"{eid}: overlapping invocations [{a1},{b1}) and [{a2},{b2})")
    return out


# --- JSON ---------------------------------------------------------------------


def plan_to_dict(plan: CompositionPlan) -> dict:
    return {
        "request_id": plan.request_id,
        "algorithm": plan.algorithm,
        "invocations": [
            {
                "service_id": inv.service_id,
                "start_tick": inv.start_tick,
                "end_tick": inv.end_tick,
                "expected_intensity_ma": inv.expected_intensity_ma,
            }
            for inv in plan.invocations
        ],
        "predicted_energy_mah": plan.predicted_energy_mah,
        "switch_count": plan.switch_count,
    }


def plan_from_dict(d: dict) -> CompositionPlan:
    return CompositionPlan(
        request_id=d["request_id"],
        invocations=tuple(
            Invocation(x["service_id"], int(x["start_tick"]), int(x["end_tick"]),
                       float(x["expected_intensity_ma"]))
            for x in d["invocations"]
        ),
        predicted_energy_mah=float(d["predicted_energy_mah"]),
        switch_count=int(d["switch_count"]),
        algorithm=d.get("algorithm", ""),
    )


def report_to_dict(rep: DeliveryReport) -> dict:
    return {
        "request_id": rep.request_id,
        "delivered_mah": rep.delivered_mah,
        "served": rep.served,
        "switch_count": rep.switch_count,
        "wasted_switches": rep.wasted_switches,
    }
