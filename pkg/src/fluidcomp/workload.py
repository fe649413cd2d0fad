"""Synthetic scenarios, the disconnection randomizer and dataset ingestion.

Two CSV layouts are understood:

* check-ins: ``business_id,weekday,hour,checkins`` (crowd size per hour)
* energy: ``house_id,date,p01..p48,c01..c48`` (Wh per half-hour slot,
  production then consumption)

Scenario ticks are minutes from the epoch's midnight when built from
datasets; the synthetic generator starts its horizon at ``start_hour``.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from .model import (
    AvailabilityPattern,
    ConfinedArea,
    EnergyRequest,
    EnergyService,
    Location,
    QoS,
    Scenario,
    TimeGrid,
)

SLOTS = 48
SLOT_MIN = 30
DEFAULT_VOLTAGE = 5.0

# Relative crowd size per hour of day for a food court.
FOOD_COURT_CHECKINS = (
    1, 1, 1, 1, 1, 2, 4, 8, 12, 10, 9, 14,
    22, 20, 12, 9, 9, 11, 18, 20, 14, 8, 4, 2,
)


@dataclass(frozen=True)
class GeneratorConfig:
    n_services: int = 200
    n_requests: int = 50
    area_width_m: float = 6.0
    area_height_m: float = 6.0
    horizon_ticks: int = 600
    start_hour: int = 12
    hourly_checkins: tuple[float, ...] = FOOD_COURT_CHECKINS
    service_du_min: int = 10
    service_du_max: int = 30
    dec_min_mah: float = 100.0
    dec_max_mah: float = 600.0
    intensities_ma: tuple[float, ...] = (500.0, 1000.0, 1500.0)
    range_m: float = 5.0
    wander_m: float = 1.0
    speed_m_per_tick: float = 0.5
    request_du_min: int = 10
    request_du_max: int = 30
    re_min_mah: float = 100.0
    re_max_mah: float = 800.0
    ci_choices_ma: tuple[float, ...] = (1000.0, 2000.0, 3000.0)
    disconnection_freq: float = 0.0
    disconnection_len_min: int = 1
    disconnection_len_max: int = 5
    switch_cost_mah: float = 0.0
    nominal_voltage: float = DEFAULT_VOLTAGE
    seed: int = 42

    def __post_init__(self):
        for name in ("hourly_checkins", "intensities_ma", "ci_choices_ma"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        problems = []
        for lo, hi in (
            ("service_du_min", "service_du_max"),
            ("dec_min_mah", "dec_max_mah"),
            ("request_du_min", "request_du_max"),
            ("re_min_mah", "re_max_mah"),
            ("disconnection_len_min", "disconnection_len_max"),
        ):
            if getattr(self, lo) > getattr(self, hi):
                problems.append(f"{lo} > {hi}")
        for name in ("horizon_ticks", "service_du_min", "request_du_min", "disconnection_len_min"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if self.n_services < 0 or self.n_requests < 0:
            problems.append("counts must be >= 0")
        if self.area_width_m <= 0 or self.area_height_m <= 0:
            problems.append("area dims must be positive")
        if self.disconnection_freq < 0:
            problems.append("disconnection_freq must be >= 0")
        if not self.intensities_ma or not self.ci_choices_ma:
            problems.append("intensity and CI sets must be nonempty")
        if any(v <= 0 for v in self.intensities_ma + self.ci_choices_ma):
            problems.append("intensities must be positive")
        if len(self.hourly_checkins) != 24 or sum(self.hourly_checkins) <= 0:
            problems.append("hourly_checkins needs 24 weights with a positive sum")
        if self.dec_min_mah < 0 or self.re_min_mah <= 0 or self.range_m <= 0:
            problems.append("energy bounds and range must be positive")
        if problems:
            raise ValueError("invalid generator config: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown generator config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    def replace(self, **kw) -> "GeneratorConfig":
        return dataclasses.replace(self, **kw)


def load_generator_config(path) -> GeneratorConfig:
    return GeneratorConfig.from_dict(json.loads(Path(path).read_text()))


# --- mobility traces --------------------------------------------------------


def _clip(area: ConfinedArea, x: float, y: float) -> tuple[float, float]:
    return min(max(x, 0.0), area.width_m), min(max(y, 0.0), area.height_m)


def random_waypoint(
    rng: np.random.Generator,
    area: ConfinedArea,
    seat: Location,
    n_ticks: int,
    wander_m: float,
    speed: float,
) -> list[Location]:
    """Random-waypoint walk around a seat, one position per tick.

    Waypoints are drawn uniformly in the disc of radius ``wander_m`` around
    the seat (clipped to the area); the walker moves ``speed`` meters per
    tick toward the current waypoint.
    """
    x, y = seat.x_m, seat.y_m
    out = []
    wx, wy = x, y
    for _ in range(n_ticks):
        out.append(Location(round(x, 6), round(y, 6)))
        if math.hypot(wx - x, wy - y) < 1e-9:
            rad = wander_m * math.sqrt(rng.random())
            ang = 2 * math.pi * rng.random()
            wx, wy = _clip(area, seat.x_m + rad * math.cos(ang), seat.y_m + rad * math.sin(ang))
        d = math.hypot(wx - x, wy - y)
        step = min(speed, d)
        if d > 0:
            x, y = x + (wx - x) * step / d, y + (wy - y) * step / d
    return out


# --- disconnection randomizer -------------------------------------------------


def draw_disconnection_runs(
    rng: np.random.Generator, st: int, et: int, freq: float, len_min: int, len_max: int
) -> list[tuple[int, int]]:
    """Poisson(freq) zeroed runs inside [st, et), clipped at et.

    The count comes from the inverse CDF of one uniform and the runs are the
    first ``count`` of a fixed sequence, so for a given generator state a
    larger ``freq`` only ever adds runs.
    """
    u = rng.random()
    count = int(poisson.ppf(u, freq)) if freq > 0 else 0
    runs = []
    for _ in range(count):
        length = int(rng.integers(len_min, len_max + 1))
        offset = int(rng.integers(st, et))
        runs.append((offset, min(offset + length, et)))
    return runs


def _apply_runs(svc: EnergyService, runs) -> EnergyService:
    if not runs:
        return svc
    probs = list(svc.availability.probabilities)
    st = svc.start_tick
    for a, b in runs:
        probs[a - st:b - st] = [0.0] * (b - a)
    av = dataclasses.replace(svc.availability, probabilities=probs)
    return dataclasses.replace(svc, availability=av)


def perturb_disconnections(
    s: Scenario, freq: float, len_min: int, len_max: int, seed: int
) -> Scenario:
    """Zero the presence probability over randomly drawn runs of each service.

    Advertised QoS and locations are untouched; overlapping runs merge.
    Each service draws from its own stream keyed by (seed, position), so
    sweeping ``freq`` with a fixed seed nests the disconnections.
    """
    if freq < 0 or len_min < 1 or len_min > len_max:
        raise ValueError("need freq >= 0 and 1 <= len_min <= len_max")
    if freq == 0:
        return s
    services = []
    for i, svc in enumerate(s.services):
        rng = np.random.default_rng([seed, i])
        runs = draw_disconnection_runs(rng, svc.start_tick, svc.end_tick, freq, len_min, len_max)
        services.append(_apply_runs(svc, runs))
    return dataclasses.replace(s, services=services)


# --- synthetic generation -----------------------------------------------------


def _arrival_ticks(rng, cfg: GeneratorConfig, n: int) -> np.ndarray:
    hours = (cfg.start_hour + np.arange(cfg.horizon_ticks) // 60) % 24
    w = np.asarray(cfg.hourly_checkins, dtype=float)[hours]
    return rng.choice(cfg.horizon_ticks, size=n, p=w / w.sum())


def _service(rng, cfg, area, idx: int, st: int, du: int, dec: float) -> EnergyService:
    seat = Location(rng.uniform(0, area.width_m), rng.uniform(0, area.height_m))
    locs = random_waypoint(rng, area, seat, du, cfg.wander_m, cfg.speed_m_per_tick)
    qos = QoS(
        start_tick=st,
        end_tick=st + du,
        dec_mah=round(dec, 3),
        intensity_ma=float(rng.choice(cfg.intensities_ma)),
        range_m=cfg.range_m,
        tsr=round(float(rng.uniform(0.8, 1.0)), 3),
        reliability=1.0,
    )
    av = AvailabilityPattern(range(st, st + du), locs, [1.0] * du)
    return EnergyService(f"e{idx}", f"o{idx}", qos, av)


def _request(rng, cfg, area, idx: int, t: int, du: int, re: float) -> EnergyRequest:
    return EnergyRequest(
        rid=f"q{idx}",
        t=t,
        l=Location(round(rng.uniform(0, area.width_m), 6), round(rng.uniform(0, area.height_m), 6)),
        re_mah=round(re, 3),
        ci_ma=float(rng.choice(cfg.ci_choices_ma)),
        du_ticks=du,
    )


def generate_scenario(cfg: GeneratorConfig) -> Scenario:
    """Seeded synthetic scenario.

    Service and request start ticks follow the hourly check-in profile over
    the horizon, durations and energies are uniform, providers walk around
    a random seat. Disconnections are drawn last with ``disconnection_freq``.
    """
    rng = np.random.default_rng(cfg.seed)
    area = ConfinedArea(cfg.area_width_m, cfg.area_height_m)

    services = []
    starts = _arrival_ticks(rng, cfg, cfg.n_services)
    for i, st in enumerate(starts):
        du = int(rng.integers(cfg.service_du_min, cfg.service_du_max + 1))
        dec = float(rng.uniform(cfg.dec_min_mah, cfg.dec_max_mah))
        services.append(_service(rng, cfg, area, i, int(st), du, dec))

    requests = []
    starts = _arrival_ticks(rng, cfg, cfg.n_requests)
    for i, t in enumerate(starts):
        du = int(rng.integers(cfg.request_du_min, cfg.request_du_max + 1))
        re = float(rng.uniform(cfg.re_min_mah, cfg.re_max_mah))
        requests.append(_request(rng, cfg, area, i, int(t), du, re))

    grid = TimeGrid(epoch=f"1970-01-01T{cfg.start_hour:02d}:00:00", resolution_min=1)
    s = Scenario(area, grid, services, requests, cfg.switch_cost_mah, cfg.seed)
    return perturb_disconnections(
        s, cfg.disconnection_freq, cfg.disconnection_len_min, cfg.disconnection_len_max,
        seed=cfg.seed + 1,
    )


# --- datasets -------------------------------------------------------------------


@dataclass(frozen=True)
class CheckinRow:
    business_id: str
    weekday: int
    hour: int
    checkins: int


@dataclass(frozen=True)
class EnergyRow:
    house_id: str
    date: str
    production: tuple[float, ...]
    consumption: tuple[float, ...]


CHECKIN_HEADER = ["business_id", "weekday", "hour", "checkins"]
ENERGY_HEADER = (
    ["house_id", "date"]
    + [f"p{i:02d}" for i in range(1, SLOTS + 1)]
    + [f"c{i:02d}" for i in range(1, SLOTS + 1)]
)


def normalize_wh_to_mah(wh: float, nominal_voltage: float = DEFAULT_VOLTAGE) -> float:
    if nominal_voltage <= 0:
        raise ValueError("nominal voltage must be positive")
    return wh / nominal_voltage * 1000.0


def _read_rows(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            return
        if [h.strip() for h in first] != header:
            raise ValueError(f"{path}:1: unexpected header")
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}"
                )
            yield reader.line_num, row


def ingest_checkins(path) -> list[CheckinRow]:
    out = []
    for line, row in _read_rows(path, CHECKIN_HEADER):
        try:
            rec = CheckinRow(row[0], int(row[1]), int(row[2]), int(row[3]))
        except ValueError as exc:
            raise ValueError(f"{path}:{line}: {exc}") from None
        if not (0 <= rec.weekday <= 6 and 0 <= rec.hour <= 23 and rec.checkins >= 0):
            raise ValueError(f"{path}:{line}: weekday/hour/checkins out of range")
        out.append(rec)
    return out


def ingest_energy(path) -> list[EnergyRow]:
    out = []
    for line, row in _read_rows(path, ENERGY_HEADER):
        try:
            vals = [float(v) for v in row[2:]]
        except ValueError as exc:
            raise ValueError(f"{path}:{line}: {exc}") from None
        if any(v < 0 or not math.isfinite(v) for v in vals):
            raise ValueError(f"{path}:{line}: negative or non-finite energy value")
        out.append(EnergyRow(row[0], row[1], tuple(vals[:SLOTS]), tuple(vals[SLOTS:])))
    return out


def write_checkins(rows: Sequence[CheckinRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CHECKIN_HEADER)
        for r in rows:
            w.writerow([r.business_id, r.weekday, r.hour, r.checkins])


def write_energy(rows: Sequence[EnergyRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ENERGY_HEADER)
        for r in rows:
            values = [repr(float(v)) for v in (*r.production, *r.consumption)]
            w.writerow([r.house_id, r.date, *values])


def slot_energy_wh(slots: Sequence[float], start_min: float, end_min: float) -> float:
    """Energy in [start_min, end_min) minutes of day, spreading each slot evenly."""
    if start_min < 0 or end_min > SLOTS * SLOT_MIN:
        raise ValueError("interval outside the recorded day")
    total = []
    for i, wh in enumerate(slots):
        a, b = i * SLOT_MIN, (i + 1) * SLOT_MIN
        overlap = min(b, end_min) - max(a, start_min)
        if overlap > 0:
            total.append(wh * overlap / SLOT_MIN)
    return math.fsum(total)


def build_scenario_from_datasets(
    checkins: Sequence[CheckinRow],
    energy: Sequence[EnergyRow],
    cfg: GeneratorConfig,
    max_retries: int = 100,
) -> Scenario:
    """Map check-in arrivals and household energy records onto a scenario.

    Start minutes are drawn in proportion to the hourly check-in totals
    (uniform within the hour). Each service takes the normalized production
    of a uniformly drawn record over its interval, each request the
    normalized consumption over its duration. Intervals running past the end
    of the recorded day are redrawn.
    """
    if not checkins or not energy:
        raise ValueError("need nonempty check-in and energy data")
    hourly = np.zeros(24)
    for row in checkins:
        hourly[row.hour] += row.checkins
    if hourly.sum() <= 0:
        raise ValueError("check-in counts sum to zero")
    p = hourly / hourly.sum()
    rng = np.random.default_rng(cfg.seed)
    area = ConfinedArea(cfg.area_width_m, cfg.area_height_m)
    day = SLOTS * SLOT_MIN

    def draw_interval(du_min, du_max):
        for _ in range(max_retries):
            hour = int(rng.choice(24, p=p))
            st = hour * 60 + int(rng.integers(0, 60))
            du = int(rng.integers(du_min, du_max + 1))
            if st + du <= day:
                return st, du
        raise ValueError("could not draw an interval inside the recorded day")

    services = []
    for i in range(cfg.n_services):
        st, du = draw_interval(cfg.service_du_min, cfg.service_du_max)
        rec = energy[int(rng.integers(len(energy)))]
        dec = normalize_wh_to_mah(slot_energy_wh(rec.production, st, st + du), cfg.nominal_voltage)
        services.append(_service(rng, cfg, area, i, st, du, dec))

    requests = []
    for i in range(cfg.n_requests):
        t, du = draw_interval(cfg.request_du_min, cfg.request_du_max)
        rec = energy[int(rng.integers(len(energy)))]
        re = normalize_wh_to_mah(slot_energy_wh(rec.consumption, t, t + du), cfg.nominal_voltage)
        requests.append(_request(rng, cfg, area, i, t, du, max(re, 1e-3)))

    s = Scenario(area, TimeGrid("1970-01-01T00:00:00", 1), services, requests,
                 cfg.switch_cost_mah, cfg.seed)
    return perturb_disconnections(
        s, cfg.disconnection_freq, cfg.disconnection_len_min, cfg.disconnection_len_max,
        seed=cfg.seed + 1,
    )
