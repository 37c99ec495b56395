"""Seeded random instances: Ginibre densities, Haar vectors, and conjugated subalgebras.

Every draw comes from its own counter-based stream keyed on integers
(seed, trial, draw, ...), so results do not depend on evaluation order.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from scipy.stats import unitary_group

from .algebras import (
    MatrixAlgebra,
    close_generators,
    conjugate_algebra,
    factor_algebra,
    full_algebra,
)
from .linalg import DimensionError, dag, embed


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_density(d: int, rank: int | None, rng: np.random.Generator) -> np.ndarray:
    """``G G^dag / tr(G G^dag)`` with ``G`` a ``d x rank`` Ginibre matrix."""
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise DimensionError(f"rank must be in [1, {d}], got {rank}")
    g = _ginibre(rng, d, rank)
    rho = g @ dag(g)
    rho = rho / np.trace(rho).real
    return (rho + dag(rho)) / 2


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = _ginibre(rng, d, 1).reshape(-1)
    return v / np.linalg.norm(v)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(d, random_state=rng)


def random_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    return _ginibre(rng, d, d)


Pattern = Literal["diagonal", "block", "factor", "full"]


def pattern_algebra(d: int, pattern: Pattern, k: int = 2) -> MatrixAlgebra:
    """Unconjugated pattern algebras in M_d.

    ``block``: d/k diagonal blocks, each a full M_k. ``factor``: M_k (x) 1.
    """
    if pattern == "full":
        return full_algebra(d)
    if pattern == "diagonal":
        units = np.zeros((d, d, d), dtype=complex)
        units[np.arange(d), np.arange(d), np.arange(d)] = 1
        return MatrixAlgebra(d, units)
    if d % k:
        raise DimensionError(f"pattern {pattern}({k}) is incompatible with ambient dimension {d}")
    if pattern == "block":
        mats = []
        for blk in range(d // k):
            for i in range(k):
                for j in range(k):
                    m = np.zeros((d, d), dtype=complex)
                    m[blk * k + i, blk * k + j] = 1
                    mats.append(m)
        return MatrixAlgebra(d, np.array(mats))
    if pattern == "factor":
        return factor_algebra((k, d // k), [0])
    raise ValueError(f"unknown pattern {pattern!r}")


def random_subalgebra(ambient_d: int, pattern: Pattern, rng: np.random.Generator,
                      k: int = 2) -> MatrixAlgebra:
    """Haar-random unitary conjugate of a pattern algebra."""
    alg = pattern_algebra(ambient_d, pattern, k)
    return conjugate_algebra(alg, haar_unitary(ambient_d, rng))


# (smaller, larger) pattern pairs; smaller is contained in larger before conjugation
_INCLUSIONS = {
    4: [("diagonal", "block", 2), ("block", "full", 2), ("factor", "full", 2),
        ("diagonal", "full", 2), ("factor", "factor-diag", 2)],
    6: [("diagonal", "block", 2), ("diagonal", "block", 3), ("block", "full", 2),
        ("block", "full", 3), ("factor", "full", 2), ("factor", "full", 3),
        ("factor", "factor-diag", 2), ("factor", "factor-diag", 3)],
}


def _nested(d: int, name: str, k: int) -> MatrixAlgebra:
    if name == "factor-diag":
        # M_k (x) D_{d/k}: a non-factor between M_k (x) 1 and M_d
        diag = np.diag(np.arange(1, d // k + 1)).astype(complex)
        return close_generators(
            [embed(np.eye(k * k)[i].reshape(k, k), (k, d // k), [0]) for i in range(k * k)]
            + [embed(diag, (k, d // k), [1])],
            d,
        )
    return pattern_algebra(d, name, k)  # type: ignore[arg-type]


def random_inclusion(d: int, rng: np.random.Generator) -> tuple[MatrixAlgebra, MatrixAlgebra, str]:
    """A Haar-conjugated pair ``N subset M`` inside M_d, plus a label for the pattern pair."""
    options = _INCLUSIONS.get(d)
    if options is None:
        raise DimensionError(f"no inclusion patterns registered for ambient dimension {d}")
    small, large, k = options[int(rng.integers(len(options)))]
    u = haar_unitary(d, rng)
    n = conjugate_algebra(_nested(d, small, k), u)
    m = conjugate_algebra(_nested(d, large, k), u)
    return n, m, f"{small}({k})<{large}({k})"
