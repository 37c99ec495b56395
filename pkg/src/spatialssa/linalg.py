"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; vectors are
1-d arrays. Tensor factors are indexed from 0 in the order given by ``dims``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


class RankDeficientError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerance:
    atol: float = 1e-9
    rtol: float = 1e-9

    def __post_init__(self):
        for name in ("atol", "rtol"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")

    def slack(self, scale: float) -> float:
        return self.atol + self.rtol * scale


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class HermitianEig:
    values: np.ndarray
    vectors: np.ndarray


def as_matrix(x) -> np.ndarray:
    return np.asarray(x, dtype=complex)


def dag(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def opnorm(x: np.ndarray) -> float:
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def hermiticity_residual(m: np.ndarray) -> float:
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return float(np.max(np.abs(m - dag(m)), initial=0.0))


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = as_matrix(m)
    return hermiticity_residual(m) <= tol * (1 + float(np.max(np.abs(m), initial=0.0)))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*factors: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def _check_dims(x: np.ndarray, dims: Sequence[int]) -> int:
    dims = list(dims)
    if any(int(d) < 1 for d in dims):
        raise DimensionError(f"dims must be positive, got {dims}")
    total = int(np.prod(dims))
    if x.shape != (total, total):
        raise DimensionError(
            f"dims {dims} require a {total}x{total} operator, got shape {x.shape}"
        )
    return total


def _normalize_factors(factors, n: int) -> list[int]:
    out = sorted(set(int(i) for i in factors))
    if any(i < 0 or i >= n for i in out):
        raise DimensionError(f"factor indices {sorted(factors)} out of range for {n} factors")
    return out


def permute_subsystems(x: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator: factor ``perm[k]`` becomes factor ``k``."""
    x = as_matrix(x)
    _check_dims(x, dims)
    n = len(dims)
    t = x.reshape(list(dims) * 2)
    axes = list(perm) + [n + p for p in perm]
    total = int(np.prod(dims))
    return t.transpose(axes).reshape(total, total)


def partial_trace(x: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    The kept factors stay in their original relative order.
    """
    x = as_matrix(x)
    dims = [int(d) for d in dims]
    _check_dims(x, dims)
    keep = _normalize_factors(keep, len(dims))
    drop = [i for i in range(len(dims)) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    dd = int(np.prod([dims[i] for i in drop]))
    y = permute_subsystems(x, dims, keep + drop)
    return np.trace(y.reshape(dk, dd, dk, dd), axis1=1, axis2=3)


def embed(op: np.ndarray, dims: Sequence[int], factors: Sequence[int]) -> np.ndarray:
    """Place ``op`` on ``factors`` of a tensor product, identity elsewhere."""
    op = as_matrix(op)
    dims = [int(d) for d in dims]
    factors = _normalize_factors(factors, len(dims))
    rest = [i for i in range(len(dims)) if i not in factors]
    d_f = int(np.prod([dims[i] for i in factors]))
    if op.shape != (d_f, d_f):
        raise DimensionError(f"operator on factors {factors} must be {d_f}x{d_f}, got {op.shape}")
    full = np.kron(op, np.eye(int(np.prod([dims[i] for i in rest])), dtype=complex))
    order = factors + rest
    # full lives on factors in `order`; move them back to natural order
    inverse = [order.index(i) for i in range(len(dims))]
    return permute_subsystems(full, [dims[i] for i in order], inverse)


def herm_eig(m: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> HermitianEig:
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    asym = hermiticity_residual(m)
    if asym > tol.atol + tol.rtol * float(np.max(np.abs(m), initial=0.0)):
        raise NotHermitianError(f"matrix is not Hermitian: max|M - M^dag| = {asym:.3e}")
    values, vectors = np.linalg.eigh((m + dag(m)) / 2)
    return HermitianEig(values=values, vectors=vectors)


def loewner_leq(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> tuple[bool, float]:
    """Certify ``a <= b`` in Loewner order.

    Returns ``(ok, margin)`` where ``margin`` is the smallest eigenvalue of
    ``b - a``; ``ok`` allows a slack of ``atol + rtol * ||b - a||``.
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = b - a
    values = herm_eig(diff, tol).values
    margin = float(values[0]) if values.size else 0.0
    scale = float(np.max(np.abs(values), initial=0.0))
    return margin >= -tol.slack(scale), margin


def herm_power(m: np.ndarray, p: float, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``m ** p`` for positive semidefinite ``m``.

    Negative powers require full numerical rank; there is no pseudo-inverse
    fallback.
    """
    eig = herm_eig(m, tol)
    w, u = eig.values, eig.vectors
    top = float(np.max(np.abs(w), initial=0.0))
    if w.size and w[0] < -tol.slack(top):
        raise NotPSDError(f"matrix is not PSD: eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    if p < 0:
        if w.size and w[0] <= tol.atol * top:
            raise RankDeficientError(
                f"negative power {p} of a rank-deficient matrix: eigenvalue {w[0]:.3e} "
                f"(largest {top:.3e})"
            )
        wp = w**p
    elif p == 0:
        wp = np.ones_like(w)
    else:
        wp = w**p
    return (u * wp) @ dag(u)


def min_eig(m: np.ndarray) -> float:
    m = as_matrix(m)
    return float(np.linalg.eigvalsh((m + dag(m)) / 2)[0])


def check_psd(m: np.ndarray, tol: Tolerance = DEFAULT_TOL, what: str = "matrix") -> np.ndarray:
    m = as_matrix(m)
    w = herm_eig(m, tol).values
    top = float(np.max(np.abs(w), initial=0.0))
    if w.size and w[0] < -tol.slack(top):
        raise NotPSDError(f"{what} is not PSD: min eigenvalue {w[0]:.3e}")
    return m


def orthonormal_span(vectors: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (as columns) of the column span, rank cut at ``rtol``."""
    vectors = as_matrix(vectors)
    if vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    return u[:, s > rtol * s[0]]


def projector(v: np.ndarray) -> np.ndarray:
    v = as_matrix(v).reshape(-1)
    return np.outer(v, v.conj())


# serialization


def matrix_to_dict(m: np.ndarray) -> dict:
    m = as_matrix(m)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(v) for v in m.real.ravel()],
        "im": [float(v) for v in m.imag.ravel()],
    }


def matrix_from_dict(doc: dict) -> np.ndarray:
    rows, cols = int(doc["rows"]), int(doc["cols"])
    re, im = doc["re"], doc["im"]
    if len(re) != rows * cols or len(im) != rows * cols:
        raise DimensionError(
            f"matrix document declares {rows}x{cols} but carries {len(re)}/{len(im)} entries"
        )
    return (np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)).reshape(rows, cols)
