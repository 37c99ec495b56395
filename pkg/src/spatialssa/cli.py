"""Command-line front end: ``verify``, ``demo`` and ``inspect``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .gns import closed_form_tripartite, gns, spatial_derivative
from .algebras import restrict_functional
from .linalg import Tolerance, hermiticity_residual, matrix_from_dict
from .randoms import random_density, random_pure, stream
from .suite import DEFAULT_DIMS, DEFAULT_TRIALS, ConfigError, GeneratorError, SuiteConfig, run_suite
from .verify import (
    CHECK_NAMES,
    check_operator_ssa,
    check_trace_form,
    equivalence_bridge,
    tripartite_setting,
)


def _dims(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 2,2,2, got {text!r}")
    if len(parts) != 3 or any(p < 1 for p in parts):
        raise argparse.ArgumentTypeError(f"dims must be three positive integers, got {text!r}")
    return parts  # type: ignore[return-value]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatialssa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run seeded property checks and write a JSON report")
    v.add_argument("check", choices=list(CHECK_NAMES) + ["all"])
    v.add_argument("--dims", type=_dims, action="append",
                   help="tripartite dimensions dA,dB,dC (repeatable); default grid if omitted")
    v.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--atol", type=float, default=1e-9)
    v.add_argument("--rtol", type=float, default=1e-9)
    v.add_argument("--report", required=True, help="output JSON path")
    v.add_argument("--jobs", type=int, default=1, help="worker threads per check")

    d = sub.add_parser("demo", help="walk through the (2,2,2) tripartite case")
    d.add_argument("--seed", type=int, default=0)

    i = sub.add_parser("inspect", help="summarise a serialized matrix")
    i.add_argument("--matrix", required=True)
    return parser


def cmd_verify(args) -> int:
    try:
        config = SuiteConfig(
            dims=args.dims or list(DEFAULT_DIMS),
            trials=args.trials,
            seed=args.seed,
            tolerance=Tolerance(args.atol, args.rtol),
            checks=list(CHECK_NAMES) if args.check == "all" else [args.check],
            output=args.report,
            jobs=args.jobs,
        )
        status, doc = run_suite(config)
    except (ConfigError, GeneratorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for r in doc["reports"]:
        flag = "PASS" if r["passed"] else "FAIL"
        dims = ",".join(map(str, r["dims"]))
        print(f"{flag}  {r['check_name']:<22} dims={dims:<7} trials={r['trials']:<6} "
              f"margin={r['margin']:+.3e}")
    print(f"report written to {args.report}")
    return status


def cmd_demo(args) -> int:
    dims = (2, 2, 2)
    rho = random_density(4, None, stream(args.seed, 100, 0))
    sigma = random_density(4, None, stream(args.seed, 100, 1))
    x = random_density(8, None, stream(args.seed, 100, 2))
    xi = random_pure(8, stream(args.seed, 100, 3))

    print("tripartite demo, dims (2,2,2), seed", args.seed)
    r1 = check_operator_ssa(rho, sigma, dims)
    print(f"  operator SSA   rho_A(x)sigma_BC^-1 - rho_AB(x)sigma_C^-1 : min eig {r1.margin:+.6e}"
          f"  {'PASS' if r1.passed else 'FAIL'}")
    r2 = check_trace_form(x, sigma, dims)
    print(f"  trace form     random full-rank X                        : min eig {r2.margin:+.6e}"
          f"  {'PASS' if r2.passed else 'FAIL'}")
    r3 = equivalence_bridge(xi, rho, sigma, dims)
    print(f"  rank-one chain vertical errors {r3.details['vertical_rel_err_coarse']:.2e} / "
          f"{r3.details['vertical_rel_err_fine']:.2e}, gap {r3.margin:+.6e}")

    s = tripartite_setting(dims)
    psi, phi = s.psi(rho), s.phi(sigma)
    coarse = spatial_derivative(psi, gns(s.m_prime, restrict_functional(phi, s.m_prime))).matrix
    fine = spatial_derivative(restrict_functional(psi, s.n), gns(s.n_prime, phi)).matrix
    for label, got, side in (("d psi / d phi|M'", coarse, "coarse"), ("d psi|N / d phi", fine, "fine")):
        want = closed_form_tripartite(rho, sigma, dims, side)
        rel = np.linalg.norm(got - want) / np.linalg.norm(want)
        print(f"  spatial derivative {label:<17} vs closed form: relative residual {rel:.2e}")
    return 0 if r1.passed and r2.passed and r3.passed else 1


def cmd_inspect(args) -> int:
    try:
        with open(args.matrix) as fh:
            m = matrix_from_dict(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read matrix from {args.matrix}: {exc}", file=sys.stderr)
        return 2
    print(f"shape: {m.shape[0]} x {m.shape[1]}")
    if m.shape[0] != m.shape[1]:
        return 0
    asym = hermiticity_residual(m)
    print(f"hermiticity residual: {asym:.3e}")
    if asym <= 1e-12 * (1 + np.max(np.abs(m), initial=0.0)):
        ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
        print(f"eigenvalue range: [{ev[0]:.6e}, {ev[-1]:.6e}]")
    else:
        ev = np.linalg.eigvals(m)
        print(f"eigenvalue real-part range (non-Hermitian): [{ev.real.min():.6e}, {ev.real.max():.6e}]")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"verify": cmd_verify, "demo": cmd_demo, "inspect": cmd_inspect}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
