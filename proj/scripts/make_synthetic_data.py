#!/usr/bin/env python3
"""Generate the two synthetic regression CSVs under data/.

Both datasets have a smooth nonlinear response over correlated Gaussian
features, so that degree-1 base fits are adequate near the feature mean but
drift away from the truth at large distance scores. The files are committed;
this script only documents their provenance and makes them reproducible.
"""

import csv
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def make_housing(rng: random.Random, n: int = 400):
    rows = []
    for _ in range(n):
        rm = rng.gauss(0.0, 1.2)
        age = 0.5 * rm + rng.gauss(0.0, 1.0)
        dis = -0.4 * rm + rng.gauss(0.0, 0.9)
        tax = 0.3 * age + rng.gauss(0.0, 1.1)
        lstat = 0.6 * age - 0.3 * dis + rng.gauss(0.0, 0.8)
        y = (
            22.0
            + 4.0 * rm
            - 1.5 * lstat
            - 0.5 * dis
            + 1.5 * rm * rm
            + 0.8 * rm * dis
            + rng.gauss(0.0, 1.0)
        )
        rows.append([rm, age, dis, tax, lstat, y])
    return ["rm", "age", "dis", "tax", "lstat", "target"], rows


def make_energy(rng: random.Random, n: int = 350):
    rows = []
    for _ in range(n):
        compactness = rng.gauss(0.0, 1.0)
        surface = -0.7 * compactness + rng.gauss(0.0, 0.7)
        glazing = rng.gauss(0.0, 1.0)
        height = 0.4 * glazing + rng.gauss(0.0, 1.0)
        y = (
            15.0
            + 6.0 * compactness
            - 3.0 * surface
            + 1.2 * compactness * surface
            + 1.8 * glazing * glazing
            + rng.gauss(0.0, 0.8)
        )
        rows.append([compactness, surface, glazing, height, y])
    return ["compactness", "surface", "glazing", "height", "target"], rows


def write(name: str, header, rows):
    OUT.mkdir(exist_ok=True)
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.10g}" for v in row])


def main():
    write("synth_housing.csv", *make_housing(random.Random(20240601)))
    write("synth_energy.csv", *make_energy(random.Random(20240602)))


if __name__ == "__main__":
    main()
