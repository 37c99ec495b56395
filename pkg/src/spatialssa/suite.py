"""Seeded ensemble runs of the checks in :mod:`spatialssa.verify`."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .linalg import DEFAULT_TOL, NotPSDError, Tolerance, check_psd
from .randoms import random_density, random_pure, stream
from .verify import (
    CHECK_NAMES,
    VerificationReport,
    aggregate,
    check_operator_ssa,
    check_reverse_derivation,
    check_spatial_monotonicity,
    check_theta_monotonicity,
    check_trace_form,
    entropy_ssa,
    equivalence_bridge,
    falsification_power,
    tripartite_setting,
)

DEFAULT_DIMS = ((2, 2, 2), (2, 3, 2), (3, 2, 3))
DEFAULT_TRIALS = 1000


class ConfigError(ValueError):
    pass


class GeneratorError(RuntimeError):
    pass


@dataclass
class SuiteConfig:
    dims: Sequence[tuple[int, int, int]] = DEFAULT_DIMS
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    tolerance: Tolerance = DEFAULT_TOL
    checks: Sequence[str] = field(default_factory=lambda: list(CHECK_NAMES))
    output: str | None = None
    jobs: int = 1

    def validate(self):
        if int(self.trials) < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.dims:
            raise ConfigError("at least one dims triple is required")
        for d in self.dims:
            if len(d) != 3 or any(int(x) < 1 for x in d):
                raise ConfigError(f"dims must be triples of positive integers, got {d}")
        if not self.checks:
            raise ConfigError("at least one check is required")
        unknown = [c for c in self.checks if c not in CHECK_NAMES]
        if unknown:
            raise ConfigError(f"unknown check(s) {unknown}; valid names: {', '.join(CHECK_NAMES)}")
        if int(self.jobs) < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def to_dict(self) -> dict:
        return {
            "dims": [list(map(int, d)) for d in self.dims],
            "trials": int(self.trials),
            "seed": int(self.seed),
            "tolerance": {"atol": self.tolerance.atol, "rtol": self.tolerance.rtol},
            "checks": list(self.checks),
        }


def _rank_for(trial: int, d: int, rng: np.random.Generator) -> int:
    # cycle through full rank, rank one, and an intermediate rank
    mode = trial % 3
    if mode == 0 or d == 1:
        return d
    if mode == 1:
        return 1
    return int(rng.integers(1, d + 1))


def checked_density(d: int, rank: int | None, rng: np.random.Generator, where: str) -> np.ndarray:
    rho = random_density(d, rank, rng)
    try:
        check_psd(rho, DEFAULT_TOL, "generated density")
    except NotPSDError as exc:
        raise GeneratorError(f"{where}: {exc}") from exc
    if abs(np.trace(rho) - 1) > 1e-12:
        raise GeneratorError(f"{where}: generated density has trace {np.trace(rho).real!r}")
    return rho


def _trial(name: str, dims: tuple[int, int, int], seed: int, t: int, tol: Tolerance) -> VerificationReport:
    da, db, dc = dims
    key = CHECK_NAMES.index(name)
    where = f"{name} dims={dims} seed={seed} trial={t}"

    def rng(draw: int) -> np.random.Generator:
        return stream(seed, key, *dims, t, draw)

    def density(d, rank, draw):
        return checked_density(d, rank, rng(draw), where)

    def rho_ab():
        return density(da * db, None, 0)

    def sigma_bc():
        return density(db * dc, None, 1)

    if name == "operator_ssa":
        return check_operator_ssa(rho_ab(), sigma_bc(), dims, tol)
    if name == "trace_form":
        d = da * db * dc
        x = density(d, _rank_for(t, d, rng(3)), 2)
        return check_trace_form(x, sigma_bc(), dims, tol)
    if name == "equivalence_bridge":
        return equivalence_bridge(random_pure(da * db * dc, rng(2)), rho_ab(), sigma_bc(), dims, tol)
    setting = tripartite_setting(dims)
    if name == "theta_monotonicity":
        w = setting.phi(sigma_bc())
        return check_theta_monotonicity(setting.n_prime, setting.m_prime, w,
                                        random_pure(da * db * dc, rng(2)), tol)
    if name == "spatial_monotonicity":
        d = da * db
        psi = setting.psi(density(d, _rank_for(t, d, rng(3)), 0))
        return check_spatial_monotonicity(setting.n, setting.m, psi, setting.phi(sigma_bc()), tol)
    if name == "reverse_derivation":
        w = setting.phi(sigma_bc())
        d = da * db * dc
        return check_reverse_derivation(setting.n_prime, setting.m_prime, w,
                                        random_pure(d, rng(2)), random_pure(d, rng(3)), tol)
    if name == "entropy_ssa":
        d = da * db * dc
        return entropy_ssa(density(d, _rank_for(t, d, rng(3)), 2), dims, tol)
    raise ValueError(f"no per-trial generator for {name!r}")


def run_check(name: str, dims, trials: int, seed: int, tol: Tolerance = DEFAULT_TOL,
              jobs: int = 1) -> VerificationReport:
    dims = tuple(int(x) for x in dims)
    if name == "falsification_power":
        return falsification_power(dims, trials, seed, tol)
    if name in ("theta_monotonicity", "spatial_monotonicity", "reverse_derivation"):
        tripartite_setting(dims)  # build the shared algebras once, before any threads start
    work: Callable[[int], VerificationReport] = lambda t: _trial(name, dims, seed, t, tol)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(work, range(trials)))
    else:
        reports = [work(t) for t in range(trials)]
    return aggregate(reports, name, seed, dims, tol)


def run_suite(config: SuiteConfig) -> tuple[int, dict]:
    """Run every (check, dims) pair; returns ``(exit_status, report_document)``.

    The document is written to ``config.output`` when set.
    """
    config.validate()
    reports = []
    for name in config.checks:
        for dims in config.dims:
            reports.append(run_check(name, dims, int(config.trials), int(config.seed),
                                     config.tolerance, int(config.jobs)))
    passed = all(r.passed for r in reports)
    doc = {
        "config": config.to_dict(),
        "passed": passed,
        "reports": [r.to_dict() for r in reports],
    }
    if config.output is not None:
        write_report(doc, config.output)
    return (0 if passed else 1), doc


def write_report(doc: dict, path: str | Path):
    path = Path(path)
    try:
        path.write_text(json.dumps(doc, indent=2) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write report to {path}: {exc}") from exc
