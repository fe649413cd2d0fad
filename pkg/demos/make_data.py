"""Write the small synthetic check-in and energy CSVs under demos/data.

The files only mimic the column layout of the public datasets the
ingestion code targets; every number here is made up.
"""
from pathlib import Path

import numpy as np

from fluidcomp.workload import SLOTS, CheckinRow, EnergyRow, write_checkins, write_energy

OUT = Path(__file__).parent / "data"


def main(seed: int = 7) -> None:
    rng = np.random.default_rng(seed)
    OUT.mkdir(exist_ok=True)
    # lunch and dinner peaks
    hours = np.arange(24)
    shape = 2 + 30 * np.exp(-((hours - 12.5) ** 2) / 3) + 20 * np.exp(-((hours - 19) ** 2) / 4)
    checkins = [
        CheckinRow(f"court-{b}", day, int(h), int(rng.poisson(shape[h] * (1.3 if day >= 5 else 1.0))))
        for b in range(2) for day in range(7) for h in hours
    ]
    write_checkins(checkins, OUT / "checkins.csv")

    slot_hours = np.arange(SLOTS) / 2
    energy = []
    for h in range(3):
        sun = np.clip(np.sin((slot_hours - 6) / 12 * np.pi), 0, None)
        produced = np.round(sun * rng.uniform(400, 900), 1)
        consumed = np.round(rng.uniform(150, 350, SLOTS), 1)
        energy.append(EnergyRow(f"house-{h}", "2013-07-01", tuple(produced.tolist()), tuple(consumed.tolist())))
    write_energy(energy, OUT / "energy.csv")


if __name__ == "__main__":
    main()
