"""Composition of intermittent, mobile crowdsourced energy services.

Providers move inside a confined area and can charge a consumer only while
in wireless range. This package turns availability patterns into per-request
provision series, scores their intermittence, and composes an ahead-of-time
plan per request with a chunked 0/1 knapsack. Four algorithms are provided:
heuristic fluid composition (gating, gap toleration and substitute
patching), brute force over connected segments, static (blind to gaps) and
lossy (drops intermittent services, then static).
"""
from .composer import (
    ALGORITHMS,
    CompositionPlan,
    DeliveryReport,
    HeuristicConfig,
    Invocation,
    MergedService,
    compose,
    compose_bruteforce,
    compose_fluid,
    compose_lossy,
    compose_static,
    evaluate_plan,
    find_substitutes,
    merge_with_substitutes,
    plan_violations,
)
from .harness import ExperimentSpec, MetricsRow, report, run_experiment
from .knapsack import ChunkItem, select_greedy, select_knapsack
from .mobility import (
    Disconnection,
    HistoryRecord,
    derive_provision,
    disconnection_ratio,
    estimate_availability,
    extract_disconnections,
    provision_map,
    stability_score,
)
from .model import (
    AvailabilityPattern,
    ConfinedArea,
    EnergyRequest,
    EnergyService,
    Location,
    ProvisionSeries,
    QoS,
    Scenario,
    TimeGrid,
    load_scenario,
    save_scenario,
    validate_scenario,
)
from .selection import Chunk, chunk_timeline, filter_composable
from .workload import (
    GeneratorConfig,
    build_scenario_from_datasets,
    generate_scenario,
    ingest_checkins,
    ingest_energy,
    normalize_wh_to_mah,
    perturb_disconnections,
)

__version__ = "0.1.0"
