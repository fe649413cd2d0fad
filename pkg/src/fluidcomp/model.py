"""Domain types for crowdsourced energy services and their JSON scenario format.

Time is an integer tick grid (one tick = ``TimeGrid.resolution_min`` minutes).
Intervals are half-open ``[start, end)``; energy is in mAh, current in mA and
lengths in meters.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

DEFAULT_RANGE_M = 5.0


@dataclass(frozen=True)
class ConfinedArea:
    width_m: float
    height_m: float

    def contains(self, loc: "Location") -> bool:
        return 0.0 <= loc.x_m <= self.width_m and 0.0 <= loc.y_m <= self.height_m


@dataclass(frozen=True)
class Location:
    x_m: float
    y_m: float


@dataclass(frozen=True)
class TimeGrid:
    epoch: str = "1970-01-01T00:00:00"
    resolution_min: int = 1


@dataclass(frozen=True)
class QoS:
    start_tick: int
    end_tick: int
    dec_mah: float
    intensity_ma: float
    range_m: float = DEFAULT_RANGE_M
    tsr: float = 1.0
    reliability: float = 1.0

    @property
    def duration(self) -> int:
        return self.end_tick - self.start_tick

    @property
    def rate_mah(self) -> float:
        """Energy delivered per connected tick under the uniform-rate model."""
        return self.dec_mah / self.duration if self.duration > 0 else 0.0


@dataclass(frozen=True)
class AvailabilityPattern:
    """Per-tick modal location and the probability of being there."""

    ticks: tuple[int, ...]
    locations: tuple[Location, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ticks", tuple(self.ticks))
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "probabilities", tuple(self.probabilities))


@dataclass(frozen=True)
class ProvisionSeries:
    """Binary provision status of one service toward one request, per tick."""

    service_id: str
    request_id: str
    start_tick: int
    end_tick: int
    pr: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "pr", tuple(int(v) for v in self.pr))
        if len(self.pr) != self.end_tick - self.start_tick:
            raise ValueError(
                f"series length {len(self.pr)} != {self.end_tick - self.start_tick}"
            )
        if any(v not in (0, 1) for v in self.pr):
            raise ValueError("provision values must be 0 or 1")

    def __len__(self) -> int:
        return len(self.pr)

    def at(self, tick: int) -> int:
        if self.start_tick <= tick < self.end_tick:
            return self.pr[tick - self.start_tick]
        return 0


@dataclass(frozen=True)
class EnergyService:
    eid: str
    owner_id: str
    qos: QoS
    availability: AvailabilityPattern
    functionality: str = "energy"
    intermittence: Optional[ProvisionSeries] = None

    @property
    def start_tick(self) -> int:
        return self.qos.start_tick

    @property
    def end_tick(self) -> int:
        return self.qos.end_tick


@dataclass(frozen=True)
class EnergyRequest:
    rid: str
    t: int
    l: Location
    re_mah: float
    ci_ma: float
    du_ticks: int

    @property
    def end_tick(self) -> int:
        return self.t + self.du_ticks


@dataclass(frozen=True)
class Scenario:
    area: ConfinedArea
    grid: TimeGrid
    services: tuple[EnergyService, ...]
    requests: tuple[EnergyRequest, ...]
    switch_cost_mah: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "services", tuple(self.services))
        object.__setattr__(self, "requests", tuple(self.requests))

    def service(self, eid: str) -> EnergyService:
        for svc in self.services:
            if svc.eid == eid:
                return svc
        raise KeyError(eid)

    def services_by_id(self) -> dict[str, EnergyService]:
        return {svc.eid: svc for svc in self.services}


def distance(a: Location, b: Location) -> float:
    return math.hypot(a.x_m - b.x_m, a.y_m - b.y_m)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _validate_service(svc: EnergyService, area: ConfinedArea) -> list[str]:
    out = []
    q = svc.qos
    tag = f"service {svc.eid}"
    if not (_is_int(q.start_tick) and _is_int(q.end_tick)):
        out.append(f"{tag}: interval on tick grid violated")
    if not q.start_tick < q.end_tick:
        out.append(f"{tag}: start_tick < end_tick violated")
    if not q.dec_mah >= 0:
        out.append(f"{tag}: dec_mah >= 0 violated")
    if not q.intensity_ma > 0:
        out.append(f"{tag}: intensity_ma > 0 violated")
    if not q.range_m > 0:
        out.append(f"{tag}: range_m > 0 violated")
    if not 0 <= q.tsr <= 1:
        out.append(f"{tag}: 0 <= tsr <= 1 violated")
    if not 0 <= q.reliability <= 1:
        out.append(f"{tag}: 0 <= reliability <= 1 violated")

    av = svc.availability
    if not len(av.ticks) == len(av.locations) == len(av.probabilities):
        out.append(f"{tag}: |ticks| = |locations| = |probabilities| violated")
    if any(b <= a for a, b in zip(av.ticks, av.ticks[1:])):
        out.append(f"{tag}: availability ticks strictly increasing violated")
    if tuple(av.ticks) != tuple(range(q.start_tick, q.end_tick)):
        out.append(f"{tag}: availability spans [start_tick, end_tick) violated")
    for tick, p in zip(av.ticks, av.probabilities):
        if not 0 <= p <= 1:
            out.append(f"{tag}: probability in [0,1] violated at tick {tick}")
    for tick, loc in zip(av.ticks, av.locations):
        if not area.contains(loc):
            out.append(f"{tag}: location inside area violated at tick {tick}")
    return out


def _validate_request(req: EnergyRequest, area: ConfinedArea) -> list[str]:
    out = []
    tag = f"request {req.rid}"
    if not (_is_int(req.t) and _is_int(req.du_ticks)):
        out.append(f"{tag}: interval on tick grid violated")
    if not req.re_mah > 0:
        out.append(f"{tag}: re_mah > 0 violated")
    if not req.ci_ma > 0:
        out.append(f"{tag}: ci_ma > 0 violated")
    if not req.du_ticks >= 1:
        out.append(f"{tag}: du_ticks >= 1 violated")
    if not area.contains(req.l):
        out.append(f"{tag}: location inside area violated")
    return out


def validate_scenario(s: Scenario) -> list[str]:
    """Return one description per violated invariant; empty when well formed."""
    out = []
    if not (s.area.width_m > 0 and s.area.height_m > 0):
        out.append("area: width_m > 0 and height_m > 0 violated")
    if not (_is_int(s.grid.resolution_min) and s.grid.resolution_min >= 1):
        out.append("grid: resolution_min >= 1 violated")
    if not s.switch_cost_mah >= 0:
        out.append("scenario: switch_cost_mah >= 0 violated")
    seen = set()
    for svc in s.services:
        if svc.eid in seen:
            out.append(f"service {svc.eid}: unique eid violated")
        seen.add(svc.eid)
        out.extend(_validate_service(svc, s.area))
    seen = set()
    for req in s.requests:
        if req.rid in seen:
            out.append(f"request {req.rid}: unique rid violated")
        seen.add(req.rid)
        out.extend(_validate_request(req, s.area))
    return out


# --- JSON scenario format -------------------------------------------------


def _loc_dict(loc: Location) -> dict:
    return {"x_m": loc.x_m, "y_m": loc.y_m}


def _loc(d: dict) -> Location:
    return Location(float(d["x_m"]), float(d["y_m"]))


def series_to_dict(ps: ProvisionSeries) -> dict:
    return {
        "service_id": ps.service_id,
        "request_id": ps.request_id,
        "start_tick": ps.start_tick,
        "end_tick": ps.end_tick,
        "pr": list(ps.pr),
    }


def series_from_dict(d: dict) -> ProvisionSeries:
    return ProvisionSeries(
        d["service_id"], d["request_id"], int(d["start_tick"]), int(d["end_tick"]), d["pr"]
    )


def service_to_dict(svc: EnergyService) -> dict:
    q = svc.qos
    av = svc.availability
    return {
        "eid": svc.eid,
        "owner_id": svc.owner_id,
        "functionality": svc.functionality,
        "qos": {
            "range_m": q.range_m,
            "start_tick": q.start_tick,
            "end_tick": q.end_tick,
            "dec_mah": q.dec_mah,
            "intensity_ma": q.intensity_ma,
            "tsr": q.tsr,
            "reliability": q.reliability,
        },
        "availability": {
            "ticks": list(av.ticks),
            "locations": [_loc_dict(loc) for loc in av.locations],
            "probabilities": list(av.probabilities),
        },
        "intermittence": None if svc.intermittence is None else series_to_dict(svc.intermittence),
    }


def service_from_dict(d: dict) -> EnergyService:
    q = d["qos"]
    av = d["availability"]
    inter = d.get("intermittence")
    return EnergyService(
        eid=str(d["eid"]),
        owner_id=str(d["owner_id"]),
        functionality=d.get("functionality", "energy"),
        qos=QoS(
            start_tick=int(q["start_tick"]),
            end_tick=int(q["end_tick"]),
            dec_mah=float(q["dec_mah"]),
            intensity_ma=float(q["intensity_ma"]),
            range_m=float(q.get("range_m", DEFAULT_RANGE_M)),
            tsr=float(q.get("tsr", 1.0)),
            reliability=float(q.get("reliability", 1.0)),
        ),
        availability=AvailabilityPattern(
            ticks=[int(t) for t in av["ticks"]],
            locations=[_loc(x) for x in av["locations"]],
            probabilities=[float(p) for p in av["probabilities"]],
        ),
        intermittence=None if inter is None else series_from_dict(inter),
    )


def request_to_dict(req: EnergyRequest) -> dict:
    return {
        "rid": req.rid,
        "t": req.t,
        "l": _loc_dict(req.l),
        "re_mah": req.re_mah,
        "ci_ma": req.ci_ma,
        "du_ticks": req.du_ticks,
    }


def request_from_dict(d: dict) -> EnergyRequest:
    return EnergyRequest(
        rid=str(d["rid"]),
        t=int(d["t"]),
        l=_loc(d["l"]),
        re_mah=float(d["re_mah"]),
        ci_ma=float(d["ci_ma"]),
        du_ticks=int(d["du_ticks"]),
    )


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "area": {"width_m": s.area.width_m, "height_m": s.area.height_m},
        "grid": {"epoch": s.grid.epoch, "resolution_min": s.grid.resolution_min},
        "services": [service_to_dict(svc) for svc in s.services],
        "requests": [request_to_dict(req) for req in s.requests],
        "switch_cost_mah": s.switch_cost_mah,
        "rng_seed": s.rng_seed,
    }


def scenario_from_dict(d: dict) -> Scenario:
    missing = {"area", "grid", "services", "requests"} - d.keys()
    if missing:
        raise ValueError(f"scenario document missing keys: {sorted(missing)}")
    return Scenario(
        area=ConfinedArea(float(d["area"]["width_m"]), float(d["area"]["height_m"])),
        grid=TimeGrid(str(d["grid"].get("epoch", TimeGrid.epoch)), int(d["grid"]["resolution_min"])),
        services=[service_from_dict(x) for x in d["services"]],
        requests=[request_from_dict(x) for x in d["requests"]],
        switch_cost_mah=float(d.get("switch_cost_mah", 0.0)),
        rng_seed=int(d.get("rng_seed", 0)),
    )


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=1)


def loads_scenario(text: str) -> Scenario:
    return scenario_from_dict(json.loads(text))


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(s))


def load_scenario(path) -> Scenario:
    return loads_scenario(Path(path).read_text())
