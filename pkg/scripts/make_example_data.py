"""Regenerate data/example_proteins.csv, the small checked-in example.

Twelve simulated protein abundances (log-normal) for 10 controls and two
case groups of 6 and 7 subjects; proteins P01-P05 are shifted in the case
groups. A thirteenth protein sits at the detection limit (all zeros) and
therefore has no usable t statistic.
"""
import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "data" / "example_proteins.csv"


def main():
    rng = np.random.default_rng(20240611)
    groups = {"healthy": 10, "caseA": 6, "caseB": 7}
    effects = {"caseA": [1.4, -1.1, 0.9, 0.0, 0.0], "caseB": [0.0, -1.0, 1.2, 0.8, -0.9]}
    rows = []
    for p in range(12):
        base = rng.normal(2.0, 1.0)
        for group, size in groups.items():
            shift = effects[group][p] if group in effects and p < 5 else 0.0
            for v in np.exp(base + shift + rng.normal(0.0, 0.45, size)):
                rows.append((f"P{p + 1:02d}", group, f"{v:.4f}"))
    for group, size in groups.items():
        rows.extend(("P13", group, "0.0000") for _ in range(size))
    with OUT.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_id", "group", "value"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
