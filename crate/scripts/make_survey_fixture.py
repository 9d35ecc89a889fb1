"""Regenerate crates/core/data/survey_sample.csv.

The interview microdata is not public. This fixture reproduces the published
per-species case and death counts, and parity x species cell counts chosen so
that empirical cell frequencies match the published predictive margins. The
remaining columns are drawn around the published sample means with a fixed
seed and carry no inferential weight.
"""

import csv
import random
from pathlib import Path

# (species, parity, animals, cases)
CELLS = [
    ("buffalo", 2, 52, 3),
    ("buffalo", 3, 26, 6),
    ("buffalo", 4, 16, 7),
    ("buffalo", 5, 11, 4),
    ("cow", 2, 53, 4),
    ("cow", 3, 23, 8),
    ("cow", 4, 29, 17),
    ("cow", 5, 2, 1),
]
DEATHS = {"buffalo": 2, "cow": 2}

MEANS = {
    "buffalo": dict(peak_prev=12.06, peak_curr=12.38, herd=6.30, green=20.76, dry=12.20,
                    conc=3.82, fodder_area=0.62, labor=2.25, price=45.0, value=74250.0, tc=2115.0),
    "cow": dict(peak_prev=16.01, peak_curr=16.67, herd=4.90, green=19.13, dry=11.44,
                conc=3.57, fodder_area=0.60, labor=2.42, price=30.0, value=53333.0, tc=2882.0),
}

COLUMNS = ("animal_id,species,parity,mf_case,died,peak_yield_prev,peak_yield_curr,herd_size,"
           "green_fodder,dry_fodder,concentrate,mineral_mix,fodder_area,labor,milk_price,"
           "animal_value,treatment_cost").split(",")


def main():
    rng = random.Random(2020)
    rows = []
    deaths_left = dict(DEATHS)
    for species, parity, n, cases in CELLS:
        m = MEANS[species]
        for i in range(n):
            case = i < cases
            died = case and deaths_left[species] > 0 and parity >= 4
            if died:
                deaths_left[species] -= 1
            raw_parity = 6 if (parity == 5 and i == n - 1) else parity
            rows.append({
                "species": species,
                "parity": raw_parity,
                "mf_case": int(case),
                "died": int(died),
                "peak_yield_prev": round(max(10.0, rng.gauss(m["peak_prev"], 2.0)), 1),
                "peak_yield_curr": round(max(10.0, rng.gauss(m["peak_curr"], 2.5)), 1),
                "herd_size": max(1, round(rng.gauss(m["herd"], 2.5))),
                "green_fodder": round(max(5.0, rng.gauss(m["green"], 5.0)), 1),
                "dry_fodder": round(max(3.0, rng.gauss(m["dry"], 4.0)), 1),
                "concentrate": round(max(0.5, rng.gauss(m["conc"], 1.2)), 2),
                "mineral_mix": round(rng.choice([0.02, 0.03, 0.03, 0.04]), 2),
                "fodder_area": round(max(0.0, rng.gauss(m["fodder_area"], 0.4)), 2),
                "labor": max(1, round(rng.gauss(m["labor"], 0.8))),
                "milk_price": m["price"],
                "animal_value": m["value"],
                "treatment_cost": m["tc"] if case and not died else 0.0,
            })
    assert all(v == 0 for v in deaths_left.values())
    rng.shuffle(rows)
    out = Path(__file__).resolve().parent.parent / "crates/core/data/survey_sample.csv"
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        for i, r in enumerate(rows, 1):
            w.writerow([f"A{i:03d}"] + [r[c] for c in COLUMNS[1:]])


if __name__ == "__main__":
    main()
