"""Experiment sweeps and metrics tables.

An experiment runs every (seed, axis value, algorithm) cell: build or load
a scenario, compose each request, replay the plan against ground truth and
aggregate. Only the composition call is timed; it includes whatever
provision derivation the algorithm needs, while the shared composability
pre-filter is not timed.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .composer import (
    ALGORITHMS,
    HeuristicConfig,
    compose,
    evaluate_plan,
    plan_violations,
)
from .mobility import disconnection_ratio, provision_map, stability_score
from .model import Scenario, load_scenario
from .selection import chunk_timeline, filter_composable, partition_violations
from .workload import GeneratorConfig, generate_scenario, perturb_disconnections

AXES = ("none", "frequency", "ratio", "stability", "disconnection")
BUCKET_EDGES = (0.0, 0.2, 0.4, 0.6, 0.8)
ROW_FIELDS = (
    "algorithm",
    "axis",
    "served_count",
    "request_count",
    "mean_delivered_mah",
    "mean_switch_count",
    "mean_cpu_time_ms",
)


@dataclass(frozen=True)
class ExperimentSpec:
    algorithms: tuple[str, ...] = ALGORITHMS
    axis: str = "none"
    axis_values: tuple[float, ...] = ()
    seeds: tuple[int, ...] = (0,)
    repetitions: int = 1
    generator: Optional[GeneratorConfig] = None
    scenario_path: Optional[str] = None
    mu: float = 0.8
    d_max: float = 0.5
    g_min: int = 3
    selector: str = "knapsack"
    truth_mode: str = "expected"
    switch_cost_mah: Optional[float] = None
    perturb_len_min: int = 1
    perturb_len_max: int = 5

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "axis_values", tuple(self.axis_values))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if isinstance(self.generator, dict):
            object.__setattr__(self, "generator", GeneratorConfig.from_dict(self.generator))

    @property
    def heuristic(self) -> HeuristicConfig:
        return HeuristicConfig(self.mu, self.d_max, self.g_min)

    def validate(self) -> None:
        problems = []
        if not self.algorithms:
            problems.append("algorithm set is empty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            problems.append(f"unknown algorithms {bad}")
        if self.axis not in AXES:
            problems.append(f"unknown axis {self.axis!r}")
        if self.repetitions < 1:
            problems.append("repetitions must be >= 1")
        if not self.seeds:
            problems.append("need at least one seed")
        if (self.generator is None) == (self.scenario_path is None):
            problems.append("give exactly one of generator or scenario_path")
        if self.axis == "ratio" and self.generator is None:
            problems.append("the ratio axis needs a generator")
        if self.axis == "ratio" and any(v < 1 or int(v) != v for v in self.axis_values):
            problems.append("ratio values must be positive integers")
        if self.axis == "frequency" and any(v < 0 for v in self.axis_values):
            problems.append("frequencies must be >= 0")
        if self.switch_cost_mah is not None and self.switch_cost_mah < 0:
            problems.append("switch cost must be >= 0")
        try:
            self.heuristic
        except ValueError as exc:
            problems.append(str(exc))
        if problems:
            raise ValueError("invalid experiment spec: " + "; ".join(problems))

    def sweep_values(self) -> tuple:
        if self.axis_values:
            return self.axis_values
        if self.axis == "ratio":
            return tuple(range(1, 10))
        if self.axis == "frequency":
            return (0.0, 1.0, 2.0, 4.0)
        return (None,)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown experiment spec keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["generator"] = None if self.generator is None else self.generator.to_dict()
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def load_experiment_spec(path) -> ExperimentSpec:
    return ExperimentSpec.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MetricsRow:
    algorithm: str
    axis: object
    served_count: int
    request_count: int
    mean_delivered_mah: float
    mean_switch_count: float
    mean_cpu_time_ms: float


@dataclass
class RequestOutcome:
    algorithm: str
    seed: int
    axis: object
    request_id: str
    delivered_mah: float
    predicted_mah: float
    served: bool
    switch_count: int
    cpu_time_ms: float
    violations: list = field(default_factory=list)


def scenario_for(spec: ExperimentSpec, seed: int, value) -> Scenario:
    """Scenario of one sweep cell."""
    if spec.generator is not None:
        cfg = spec.generator.replace(seed=seed)
        if spec.axis == "frequency":
            cfg = cfg.replace(disconnection_freq=float(value))
        elif spec.axis == "ratio":
            cfg = cfg.replace(n_services=int(value) * cfg.n_requests)
        s = generate_scenario(cfg)
    else:
        s = load_scenario(spec.scenario_path)
        if spec.axis == "frequency":
            s = perturb_disconnections(
                s, float(value), spec.perturb_len_min, spec.perturb_len_max, seed
            )
    if spec.switch_cost_mah is not None:
        s = dataclasses.replace(s, switch_cost_mah=spec.switch_cost_mah)
    return s


def _bucket(value: float) -> float:
    idx = min(int(value / 0.2 + 1e-12), len(BUCKET_EDGES) - 1)
    return BUCKET_EDGES[idx]


def request_bucket(axis: str, series: dict, composable) -> float:
    """Bin of a request on the stability or disconnection axis.

    The request takes the mean score of its composable services; requests
    with no composable service fall in the first bin.
    """
    if not composable:
        return BUCKET_EDGES[0]
    metric = stability_score if axis == "stability" else disconnection_ratio
    scores = [metric(series[svc.eid]) for svc in composable]
    return _bucket(math.fsum(scores) / len(scores))


def run_scenario(
    spec: ExperimentSpec,
    scenario: Scenario,
    seed: int = 0,
    value=None,
    check: bool = False,
) -> list[RequestOutcome]:
    """Compose and evaluate every request with every algorithm of ``spec``."""
    cfg = spec.heuristic
    by_id = scenario.services_by_id()
    out = []
    for req in scenario.requests:
        series = provision_map(scenario.services, req)
        composable = filter_composable(scenario.services, req, series)
        axis_value = value
        if spec.axis in ("stability", "disconnection"):
            axis_value = request_bucket(spec.axis, series, composable)
        chunk_problems = []
        if check:
            for mode in ("advertised", "fine"):
                chunks = chunk_timeline(composable, req, mode, series)
                chunk_problems += [f"{mode}: {p}" for p in partition_violations(chunks, req)]
        for algo in spec.algorithms:
            elapsed = 0.0
            for _ in range(spec.repetitions):
                t0 = time.perf_counter()
                plan = compose(
                    algo, composable, req, cfg,
                    switch_cost_mah=scenario.switch_cost_mah,
                    selector=spec.selector,
                )
                elapsed += time.perf_counter() - t0
            rep = evaluate_plan(plan, scenario, req, mode=spec.truth_mode, seed=seed)
            problems = list(chunk_problems)
            if check:
                problems += plan_violations(plan, req, by_id)
                advertised = math.fsum(
                    by_id[eid].qos.dec_mah for eid in {i.service_id for i in plan.invocations}
                )
                if rep.delivered_mah > advertised + 1e-9:
                    problems.append(f"delivered {rep.delivered_mah} > advertised {advertised}")
            out.append(RequestOutcome(
                algorithm=algo,
                seed=seed,
                axis=axis_value,
                request_id=req.rid,
                delivered_mah=rep.delivered_mah,
                predicted_mah=plan.predicted_energy_mah,
                served=rep.served,
                switch_count=rep.switch_count,
                cpu_time_ms=1000.0 * elapsed / spec.repetitions,
                violations=problems,
            ))
    return out


def run_cells(spec: ExperimentSpec, check: bool = False) -> list[RequestOutcome]:
    spec.validate()
    out = []
    for seed in spec.seeds:
        for value in spec.sweep_values():
            scenario = scenario_for(spec, seed, value)
            out.extend(run_scenario(spec, scenario, seed, value, check))
    return out


def aggregate(spec: ExperimentSpec, outcomes: Sequence[RequestOutcome]) -> list[MetricsRow]:
    if spec.axis in ("stability", "disconnection"):
        values = BUCKET_EDGES
    else:
        values = spec.sweep_values()
    rows = []
    for algo in spec.algorithms:
        for value in values:
            cell = [o for o in outcomes if o.algorithm == algo and o.axis == value]
            n = len(cell)

            def mean(attr):
                return math.fsum(getattr(o, attr) for o in cell) / n if n else 0.0

            rows.append(MetricsRow(
                algorithm=algo,
                axis=value,
                served_count=sum(o.served for o in cell),
                request_count=n,
                mean_delivered_mah=mean("delivered_mah"),
                mean_switch_count=mean("switch_count"),
                mean_cpu_time_ms=mean("cpu_time_ms"),
            ))
    return rows


def run_experiment(spec: ExperimentSpec) -> list[MetricsRow]:
    """Aggregated metrics rows, one per (algorithm, axis value)."""
    return aggregate(spec, run_cells(spec))


# --- output ---------------------------------------------------------------


def row_to_dict(row: MetricsRow) -> dict:
    return {name: getattr(row, name) for name in ROW_FIELDS}


def row_from_dict(d: dict) -> MetricsRow:
    return MetricsRow(
        algorithm=d["algorithm"],
        axis=d["axis"],
        served_count=int(d["served_count"]),
        request_count=int(d["request_count"]),
        mean_delivered_mah=float(d["mean_delivered_mah"]),
        mean_switch_count=float(d["mean_switch_count"]),
        mean_cpu_time_ms=float(d["mean_cpu_time_ms"]),
    )


def report(rows: Sequence[MetricsRow], path, fmt: str = "csv") -> None:
    """Write rows as CSV or JSON with a fixed column order."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps([row_to_dict(r) for r in rows], indent=1))
        return
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ROW_FIELDS)
        for r in rows:
            w.writerow([getattr(r, name) for name in ROW_FIELDS])


def read_rows(path) -> list[MetricsRow]:
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("["):
        return [row_from_dict(d) for d in json.loads(text)]
    with path.open(newline="") as fh:
        rows = []
        for d in csv.DictReader(fh):
            axis = d["axis"]
            try:
                axis = float(axis) if axis not in ("", "None") else None
            except ValueError:
                pass
            d["axis"] = axis
            rows.append(row_from_dict(d))
        return rows
