"""Monotonicity margins on random non-factor inclusions, grouped by pattern pair."""

import argparse
from collections import defaultdict

import numpy as np

from spatialssa.algebras import functional_from_density
from spatialssa.linalg import Tolerance
from spatialssa.randoms import random_density, random_inclusion, stream
from spatialssa.verify import check_spatial_monotonicity


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    margins = defaultdict(list)
    tol = Tolerance(1e-8, 0.0)
    for t in range(args.trials):
        rng = stream(args.seed, t)
        d = (4, 6)[t % 2]
        n, m, label = random_inclusion(d, rng)
        psi = functional_from_density(m, random_density(d, int(rng.integers(1, d + 1)), rng))
        phi = functional_from_density(n.commutant, random_density(d, None, rng))
        r = check_spatial_monotonicity(n, m, psi, phi, tol)
        margins[(d, label)].append((r.margin, r.passed))

    for (d, label), rows in sorted(margins.items()):
        vals = np.array([m for m, _ in rows])
        ok = all(p for _, p in rows)
        print(f"M{d}  {label:<28} n={len(rows):<4} min margin {vals.min():+.3e}  all passed={ok}")


if __name__ == "__main__":
    main()
