"""From check-in and household energy CSVs to served requests.

Builds a scenario from the synthetic files in demos/data (regenerate them
with make_data.py), injects random disconnections at a few frequencies and
reports how many requests each algorithm serves.

Run with:  python demos/from_datasets.py
"""
from collections import Counter
from pathlib import Path

from fluidcomp import (
    GeneratorConfig,
    HeuristicConfig,
    build_scenario_from_datasets,
    compose,
    evaluate_plan,
    filter_composable,
    ingest_checkins,
    ingest_energy,
    perturb_disconnections,
    provision_map,
)

DATA = Path(__file__).parent / "data"

cfg = GeneratorConfig(n_services=150, n_requests=40, seed=3)
base = build_scenario_from_datasets(
    ingest_checkins(DATA / "checkins.csv"), ingest_energy(DATA / "energy.csv"), cfg
)
print(f"{len(base.services)} services and {len(base.requests)} requests, "
      f"starting between tick {min(s.start_tick for s in base.services)} "
      f"and {max(s.start_tick for s in base.services)}")

heuristic = HeuristicConfig(mu=0.95, d_max=0.8, g_min=3)
algos = ("fluid", "brute", "static", "lossy")
print(f"\n{'lambda':>6} " + " ".join(f"{a:>7}" for a in algos))
for lam in (0.0, 1.0, 2.0, 4.0):
    scen = perturb_disconnections(base, lam, 1, 5, seed=11)
    served = Counter()
    for req in scen.requests:
        composable = filter_composable(scen.services, req, provision_map(scen.services, req))
        for algo in algos:
            plan = compose(algo, composable, req, heuristic, switch_cost_mah=scen.switch_cost_mah)
            served[algo] += evaluate_plan(plan, scen, req).served
    print(f"{lam:6g} " + " ".join(f"{served[a]:7d}" for a in algos))
