"""Compose one request against three hand-made providers.

Provider "steady" stays in range the whole time, "blinky" drops out for
two short stretches and "late" only shows up halfway through. The consumer
can draw 2000 mA in total, so at most two 1000 mA providers fit at once.

Run with:  python demos/walkthrough.py
"""
from fluidcomp import (
    AvailabilityPattern,
    ConfinedArea,
    EnergyRequest,
    EnergyService,
    HeuristicConfig,
    Location,
    QoS,
    Scenario,
    TimeGrid,
    compose,
    disconnection_ratio,
    evaluate_plan,
    filter_composable,
    provision_map,
    stability_score,
)

AREA = ConfinedArea(10.0, 10.0)
SPOT = Location(5.0, 5.0)


def provider(eid, start, end, dec, presence):
    qos = QoS(start, end, dec, 1000.0, 5.0)
    ticks = tuple(range(start, end))
    return EnergyService(eid, f"owner-{eid}", qos, AvailabilityPattern(ticks, (SPOT,) * len(ticks), presence))


services = [
    provider("steady", 0, 20, 1500.0, [1.0] * 20),
    provider("blinky", 0, 20, 2000.0, [1.0] * 5 + [0.0] * 4 + [1.0] * 6 + [0.0, 0.0] + [1.0] * 3),
    provider("late", 10, 20, 1200.0, [1.0] * 10),
]
req = EnergyRequest("phone", 0, SPOT, re_mah=2400.0, ci_ma=2000.0, du_ticks=20)
scenario = Scenario(AREA, TimeGrid(), services, (req,), switch_cost_mah=5.0)

series = provision_map(scenario.services, req)
print("provision toward the consumer")
for eid, ps in series.items():
    bar = "".join("#" if v else "." for v in ps.pr)
    print(f"  {eid:7s} {bar:20s}  STB={stability_score(ps):.2f}  ADis={disconnection_ratio(ps):.2f}")

composable = filter_composable(scenario.services, req, series)
cfg = HeuristicConfig(mu=0.95, d_max=0.8, g_min=3)
print()
for algo in ("fluid", "brute", "static", "lossy"):
    plan = compose(algo, composable, req, cfg, switch_cost_mah=scenario.switch_cost_mah)
    rep = evaluate_plan(plan, scenario, req)
    print(f"{algo:6s} predicted {plan.predicted_energy_mah:7.1f} mAh, delivered {rep.delivered_mah:7.1f} mAh, "
          f"{rep.switch_count} switches, served={rep.served}")
    for inv in plan.invocations:
        print(f"         {inv.service_id:7s} [{inv.start_tick:2d}, {inv.end_tick:2d})")
