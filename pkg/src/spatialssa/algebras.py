"""Finite-dimensional *-algebras of matrices, commutants, and positive functionals."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DimensionError,
    NotPSDError,
    RankDeficientError,
    Tolerance,
    as_matrix,
    check_psd,
    dag,
    embed,
    herm_power,
    matrix_from_dict,
    matrix_to_dict,
    orthonormal_span,
    partial_trace,
)

RANK_TOL = 1e-9


class AlgebraMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MatrixAlgebra:
    """A unital *-subalgebra of M_d, stored as a Hilbert-Schmidt orthonormal basis.

    ``basis`` has shape ``(n, d, d)``; ``n`` is the dimension of the algebra as
    a complex vector space.
    """

    ambient_dim: int
    basis: np.ndarray

    @classmethod
    def from_spanning(cls, mats: Sequence[np.ndarray] | np.ndarray, ambient_dim: int,
                      rtol: float = RANK_TOL) -> "MatrixAlgebra":
        d = int(ambient_dim)
        mats = np.asarray(mats, dtype=complex).reshape(-1, d * d)
        q = orthonormal_span(mats.T, rtol)
        return cls(d, q.T.reshape(-1, d, d).copy())

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def flat(self) -> np.ndarray:
        """Basis as rows of an ``(n, d*d)`` matrix (row-major vectorisation)."""
        return self.basis.reshape(self.dim, -1)

    @cached_property
    def projector(self) -> np.ndarray:
        """HS-orthogonal projector onto the span, acting on vectorised matrices."""
        return self.flat.T @ self.flat.conj()

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        x = as_matrix(x)
        return self.flat.conj() @ x.reshape(-1)

    def element(self, coeffs: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.basis, axes=1)

    def residual(self, x: np.ndarray) -> float:
        x = as_matrix(x)
        return float(np.linalg.norm(x - self.element(self.coefficients(x))))

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return self.residual(x) <= tol * max(1.0, float(np.linalg.norm(x)))

    @cached_property
    def structure_constants(self) -> np.ndarray:
        """``L[i, k, j] = tr(b_k^dag b_i b_j)``: left multiplication by ``b_i`` in coefficients."""
        prods = np.einsum("ipq,jqr->ijpr", self.basis, self.basis).reshape(self.dim, self.dim, -1)
        return np.einsum("kx,ijx->ikj", self.flat.conj(), prods)

    @cached_property
    def commutant(self) -> "MatrixAlgebra":
        return commutant(self)

    def same_as(self, other: "MatrixAlgebra", tol: float = 1e-9) -> bool:
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return float(np.linalg.norm(self.projector - other.projector)) <= tol * max(1, self.dim)

    def invariant_residuals(self) -> dict:
        """Worst residuals of the defining properties (orthonormality, unit, closure)."""
        d, n = self.ambient_dim, self.dim
        gram = self.flat.conj() @ self.flat.T
        orth = float(np.max(np.abs(gram - np.eye(n)), initial=0.0))
        unit = self.residual(np.eye(d))
        adj = max((self.residual(dag(b)) for b in self.basis), default=0.0)
        prods = np.einsum("ipq,jqr->ijpr", self.basis, self.basis).reshape(n * n, d * d)
        left = prods - (prods @ self.flat.conj().T) @ self.flat
        mult = float(np.max(np.linalg.norm(left, axis=1), initial=0.0))
        return {"orthonormality": orth, "unit": unit, "adjoint": adj, "product": mult}

    def to_dict(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "basis": [matrix_to_dict(b) for b in self.basis]}

    @classmethod
    def from_dict(cls, doc: dict) -> "MatrixAlgebra":
        d = int(doc["ambient_dim"])
        basis = [matrix_from_dict(b) for b in doc["basis"]]
        arr = np.asarray(basis, dtype=complex).reshape(len(basis), d, d)
        return cls(d, arr)


def scalars(d: int) -> MatrixAlgebra:
    return MatrixAlgebra(d, (np.eye(d, dtype=complex) / np.sqrt(d))[None])


def full_algebra(d: int) -> MatrixAlgebra:
    return MatrixAlgebra(d, np.eye(d * d, dtype=complex).reshape(d * d, d, d))


def factor_algebra(dims: Sequence[int], factors: Sequence[int]) -> MatrixAlgebra:
    """B(H_S) tensored with identities, for the factors ``S`` (0-based)."""
    dims = [int(x) for x in dims]
    if not dims or any(x < 1 for x in dims):
        raise DimensionError(f"dims must be positive, got {dims}")
    factors = sorted(set(int(i) for i in factors))
    if not factors:
        raise ValueError("factors must be a nonempty subset")
    if any(i < 0 or i >= len(dims) for i in factors):
        raise DimensionError(f"factor indices {factors} out of range for dims {dims}")
    k = int(np.prod([dims[i] for i in factors]))
    rest = int(np.prod(dims)) // k
    units = np.eye(k * k, dtype=complex).reshape(k * k, k, k)
    basis = np.array([embed(u, dims, factors) for u in units]) / np.sqrt(rest)
    return MatrixAlgebra(int(np.prod(dims)), basis)


def close_generators(gens: Sequence[np.ndarray], ambient_dim: int,
                     rtol: float = RANK_TOL) -> MatrixAlgebra:
    """Smallest unital *-algebra containing ``gens``."""
    d = int(ambient_dim)
    mats = [np.eye(d, dtype=complex)]
    for g in gens:
        g = as_matrix(g)
        if g.shape != (d, d):
            raise DimensionError(f"generator of shape {g.shape} in M_{d}")
        mats += [g, dag(g)]
    alg = MatrixAlgebra.from_spanning(mats, d, rtol)
    while True:
        b = alg.basis
        prods = np.einsum("ipq,jqr->ijpr", b, b).reshape(-1, d, d)
        bigger = MatrixAlgebra.from_spanning(
            np.concatenate([b, dag(b), prods]), d, rtol
        )
        if bigger.dim == alg.dim:
            return bigger
        alg = bigger


def commutant(a: MatrixAlgebra, rtol: float = RANK_TOL) -> MatrixAlgebra:
    """Null space of ``x -> b x - x b`` over the basis, as an algebra."""
    d = a.ambient_dim
    eye = np.eye(d, dtype=complex)
    # row-major vec: vec(b x) = (b (x) I) vec x, vec(x b) = (I (x) b^T) vec x
    blocks = [np.kron(b, eye) - np.kron(eye, b.T) for b in a.basis]
    stacked = np.concatenate(blocks) if blocks else np.zeros((1, d * d), dtype=complex)
    _, s, vh = np.linalg.svd(stacked, full_matrices=False)
    cut = rtol * max(1.0, float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > cut))
    null = vh[rank:].conj()
    return MatrixAlgebra(d, null.reshape(-1, d, d))


def is_subalgebra(b: MatrixAlgebra, a: MatrixAlgebra, tol: float = 1e-9) -> bool:
    if b.ambient_dim != a.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {b.ambient_dim} vs {a.ambient_dim}")
    return all(a.residual(x) <= tol for x in b.basis)


def conjugate_algebra(a: MatrixAlgebra, u: np.ndarray) -> MatrixAlgebra:
    u = as_matrix(u)
    return MatrixAlgebra(a.ambient_dim, np.einsum("pq,iqr,sr->ips", u, a.basis, u.conj()))


@dataclass(frozen=True, eq=False)
class PositiveFunctional:
    """``omega(a) = tr(D a)`` on ``algebra``, with ``D`` a PSD matrix on the ambient space."""

    algebra: MatrixAlgebra
    representative: np.ndarray

    @property
    def normalized(self) -> bool:
        return abs(self(np.eye(self.algebra.ambient_dim)) - 1) <= 1e-10

    def __call__(self, x: np.ndarray) -> complex:
        return complex(np.trace(self.representative @ as_matrix(x)))

    def gram(self) -> np.ndarray:
        """``G[i, j] = omega(b_i^dag b_j)``."""
        b = self.algebra.flat
        # tr(D b_i^dag b_j) = <b_i, b_j D>_HS
        bd = np.einsum("iqr,rs->iqs", self.algebra.basis, self.representative).reshape(self.algebra.dim, -1)
        g = b.conj() @ bd.T
        return (g + dag(g)) / 2

    def to_dict(self) -> dict:
        return {"algebra": self.algebra.to_dict(), "representative": matrix_to_dict(self.representative)}

    @classmethod
    def from_dict(cls, doc: dict) -> "PositiveFunctional":
        return cls(MatrixAlgebra.from_dict(doc["algebra"]), matrix_from_dict(doc["representative"]))


def functional_from_density(a: MatrixAlgebra, d: np.ndarray,
                            tol: Tolerance = DEFAULT_TOL) -> PositiveFunctional:
    d = as_matrix(d)
    if d.shape != (a.ambient_dim, a.ambient_dim):
        raise DimensionError(f"density of shape {d.shape} for ambient dimension {a.ambient_dim}")
    check_psd(d, tol, "density")
    return PositiveFunctional(a, d)


def restrict_functional(w: PositiveFunctional, b: MatrixAlgebra, tol: float = 1e-9) -> PositiveFunctional:
    if not is_subalgebra(b, w.algebra, tol):
        raise AlgebraMismatchError("cannot restrict: target is not a subalgebra of the functional's algebra")
    return PositiveFunctional(b, w.representative)


def is_faithful(w: PositiveFunctional, tol: float = 1e-10) -> bool:
    ev = np.linalg.eigvalsh(w.gram())
    return bool(ev[0] > tol * ev[-1])


def max_entangled(d: int) -> np.ndarray:
    """Unnormalised ``sum_i e_i (x) e_i``."""
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    return np.eye(d, dtype=complex).reshape(-1)


@dataclass(frozen=True)
class PurificationPair:
    sigma: np.ndarray
    omega_vec: np.ndarray
    omega_sigma: np.ndarray

    def reduced(self) -> np.ndarray:
        d = self.sigma.shape[0]
        return partial_trace(np.outer(self.omega_sigma, self.omega_sigma.conj()), (d, d), [0])


def purify(sigma: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> PurificationPair:
    sigma = as_matrix(sigma)
    d = sigma.shape[0]
    if abs(np.trace(sigma) - 1) > 1e-10:
        raise ValueError(f"sigma must have unit trace, got {np.trace(sigma).real:.6g}")
    w = np.linalg.eigvalsh((sigma + dag(sigma)) / 2)
    if w[0] < -tol.slack(w[-1]):
        raise NotPSDError(f"sigma is not PSD: min eigenvalue {w[0]:.3e}")
    if w[0] <= tol.atol * w[-1]:
        raise RankDeficientError(f"sigma must have full rank: eigenvalue {w[0]:.3e}")
    omega = max_entangled(d)
    root = herm_power(sigma, 0.5, tol)
    return PurificationPair(sigma, omega, np.kron(root, np.eye(d)) @ omega)
