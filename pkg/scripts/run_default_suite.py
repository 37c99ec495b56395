"""Run every check over the default dimension grid and write a JSON report.

    python scripts/run_default_suite.py --trials 1000 --out default_suite.json
"""

import argparse
import time

from spatialssa.suite import DEFAULT_TRIALS, SuiteConfig, run_suite


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default="default_suite.json")
    args = parser.parse_args()

    start = time.perf_counter()
    status, doc = run_suite(SuiteConfig(trials=args.trials, seed=args.seed, jobs=args.jobs, output=args.out))
    for r in doc["reports"]:
        print(f"{r['check_name']:<22} {str(tuple(r['dims'])):<10} passed={r['passed']!s:<5} margin={r['margin']:+.4e}")
    print(f"{len(doc['reports'])} reports in {time.perf_counter() - start:.1f}s, written to {args.out}")
    raise SystemExit(status)


if __name__ == "__main__":
    main()
