"""GNS spaces, bounded-vector operators, spatial derivatives and the tracial standard form.

Coordinates: for an algebra with HS-orthonormal basis ``b_1..b_n`` and a
functional ``omega`` with Gram matrix ``G[i, j] = omega(b_i^dag b_j)``, the GNS
vector of ``a = sum_j c_j b_j`` is ``eta @ c`` where ``eta = G^(1/2)``. The
standard inner product on these coordinates then reproduces ``omega(a^dag b)``.
Every vector is omega-bounded once omega is faithful, so ``r_op`` only checks
faithfulness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .algebras import (
    AlgebraMismatchError,
    MatrixAlgebra,
    PositiveFunctional,
    functional_from_density,
    is_subalgebra,
    restrict_functional,
)
from .linalg import (
    DEFAULT_TOL,
    DimensionError,
    Tolerance,
    as_matrix,
    dag,
    herm_power,
    kron,
    matrix_to_dict,
    orthonormal_span,
    partial_trace,
)


class NotFaithfulError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GnsSpace:
    algebra: MatrixAlgebra
    functional: PositiveFunctional
    gram: np.ndarray
    eta: np.ndarray
    faithful: bool

    @property
    def l2_dim(self) -> int:
        return self.eta.shape[0]

    @cached_property
    def eta_inv(self) -> np.ndarray:
        # on a non-faithful space this is only a left inverse modulo the kernel
        if self.faithful:
            return np.linalg.inv(self.eta)
        return np.linalg.pinv(self.eta)

    @cached_property
    def gram_inv(self) -> np.ndarray:
        self._require_faithful()
        return self.eta_inv @ dag(self.eta_inv)

    @cached_property
    def pi(self) -> np.ndarray:
        """``pi[i]`` is pi_omega(b_i) on L^2 coordinates."""
        lmul = self.algebra.structure_constants
        return np.einsum("xk,ikj,jy->ixy", self.eta, lmul, self.eta_inv)

    def eta_of(self, x: np.ndarray) -> np.ndarray:
        return self.eta @ self.algebra.coefficients(x)

    def pi_of(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(self.algebra.coefficients(x), self.pi, axes=1)

    def _require_faithful(self):
        if not self.faithful:
            raise NotFaithfulError(
                "functional is not faithful on the algebra; R and theta are not well defined"
            )

    def invariant_residuals(self) -> dict:
        g = dag(self.eta) @ self.eta
        gram_res = float(np.max(np.abs(g - self.gram), initial=0.0))
        pi = self.pi
        unit = float(np.max(np.abs(self.pi_of(np.eye(self.algebra.ambient_dim)) - np.eye(self.l2_dim)),
                            initial=0.0))
        adj = 0.0
        mult = 0.0
        for i, b in enumerate(self.algebra.basis):
            adj = max(adj, float(np.max(np.abs(dag(pi[i]) - self.pi_of(dag(b))), initial=0.0)))
            for j, c in enumerate(self.algebra.basis):
                res = pi[i] @ pi[j] - self.pi_of(b @ c)
                mult = max(mult, float(np.max(np.abs(res), initial=0.0)))
        return {"gram": gram_res, "unit": unit, "adjoint": adj, "product": mult}

    def to_dict(self) -> dict:
        return {
            "gram": matrix_to_dict(self.gram),
            "eta": matrix_to_dict(self.eta),
            "pi": [matrix_to_dict(p) for p in self.pi],
            "faithful": self.faithful,
        }


def gns(a: MatrixAlgebra, w: PositiveFunctional, tol: float = 1e-10) -> GnsSpace:
    """GNS space of ``(a, w)``. A non-faithful ``w`` gives the quotient by its kernel."""
    if w.algebra is not a and not w.algebra.same_as(a):
        w = restrict_functional(w, a)
    w = PositiveFunctional(a, w.representative)
    g = w.gram()
    ev, u = np.linalg.eigh(g)
    top = float(ev[-1]) if ev.size else 0.0
    keep = ev > tol * top
    if bool(np.all(keep)):
        eta = (u * np.sqrt(ev)) @ dag(u)
        faithful = True
    else:
        eta = np.sqrt(ev[keep])[:, None] * dag(u[:, keep])
        faithful = False
    return GnsSpace(a, w, g, eta, faithful)


def gns_subspace_projection(g: GnsSpace, b: MatrixAlgebra) -> np.ndarray:
    """Orthogonal projection of L^2(A) onto the closure of eta(B)."""
    if not is_subalgebra(b, g.algebra):
        raise AlgebraMismatchError("projection requested for a non-subalgebra")
    q = orthonormal_span(g.eta @ _inclusion_coefficients(g.algebra, b))
    return q @ dag(q)


def _inclusion_coefficients(a: MatrixAlgebra, b: MatrixAlgebra) -> np.ndarray:
    # column j: coefficients of b_j in the basis of a
    return a.flat.conj() @ b.flat.T


def inclusion_isometry(g_a: GnsSpace, g_b: GnsSpace) -> np.ndarray:
    """``V`` with ``V eta_B(b) = eta_A(b)``; ``V V^dag`` is the subspace projection."""
    if not is_subalgebra(g_b.algebra, g_a.algebra):
        raise AlgebraMismatchError("inclusion isometry requested for a non-subalgebra")
    g_b._require_faithful()
    return g_a.eta @ _inclusion_coefficients(g_a.algebra, g_b.algebra) @ g_b.eta_inv


def _applied_basis(g: GnsSpace, xi: np.ndarray) -> np.ndarray:
    xi = as_matrix(xi).reshape(-1)
    d = g.algebra.ambient_dim
    if xi.shape[0] != d:
        raise DimensionError(f"vector of length {xi.shape[0]} in ambient dimension {d}")
    return np.einsum("jpq,q->pj", g.algebra.basis, xi)


def r_op(g: GnsSpace, xi: np.ndarray) -> np.ndarray:
    """The map ``eta(a) -> a xi`` from L^2 coordinates into the ambient space."""
    g._require_faithful()
    return _applied_basis(g, xi) @ g.eta_inv


def theta(g: GnsSpace, xi1: np.ndarray, xi2: np.ndarray) -> np.ndarray:
    """``R(xi1) R(xi2)^dag``; lies in the commutant of ``g.algebra``."""
    return r_op(g, xi1) @ dag(r_op(g, xi2))


def check_intertwining(g: GnsSpace, a: np.ndarray, aprime: np.ndarray, xi: np.ndarray) -> float:
    a, aprime = as_matrix(a), as_matrix(aprime)
    xi = as_matrix(xi).reshape(-1)
    lhs = a @ aprime @ r_op(g, xi)
    rhs = r_op(g, aprime @ xi) @ g.pi_of(a)
    return float(np.linalg.norm(lhs - rhs))


@dataclass(frozen=True, eq=False)
class SpatialDerivative:
    matrix: np.ndarray
    psi: PositiveFunctional
    phi: PositiveFunctional
    g_phi: GnsSpace

    def form(self, xi1: np.ndarray, xi2: np.ndarray) -> complex:
        """``<xi1, D xi2>``."""
        return complex(np.vdot(as_matrix(xi1).reshape(-1), self.matrix @ as_matrix(xi2).reshape(-1)))

    def defining_form(self, xi1: np.ndarray, xi2: np.ndarray) -> complex:
        """``psi(theta_phi(xi2, xi1))``, the quadratic form the matrix must reproduce."""
        return self.psi(theta(self.g_phi, xi2, xi1))


def spatial_derivative(psi: PositiveFunctional, g_phi: GnsSpace,
                       check_commutant: bool = True) -> SpatialDerivative:
    """Matrix of ``d psi / d phi`` for ``psi`` on M and ``phi`` faithful on M'.

    Entry ``(k, l)`` is ``psi(theta_phi(e_l, e_k))``; expanding theta in the
    basis of M' gives ``sum_ij Ginv[i, j] b_j^dag D_psi b_i``.
    """
    g_phi._require_faithful()
    if check_commutant and not psi.algebra.same_as(g_phi.algebra.commutant):
        raise AlgebraMismatchError("psi must live on the commutant of phi's algebra")
    b = g_phi.algebra.basis
    d = np.einsum("ij,jqk,qp,ipl->kl", g_phi.gram_inv, b.conj(), psi.representative, b,
                  optimize=True)
    d = (d + dag(d)) / 2
    return SpatialDerivative(d, psi, g_phi.functional, g_phi)


def closed_form_tripartite(rho: np.ndarray, sigma: np.ndarray, dims,
                           side: Literal["coarse", "fine"], tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``rho_AB (x) sigma_C^-1`` (coarse) or ``rho_A (x) sigma_BC^-1`` (fine)."""
    da, db, dc = (int(x) for x in dims)
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != (da * db, da * db) or sigma.shape != (db * dc, db * dc):
        raise DimensionError(
            f"dims {(da, db, dc)} need rho {da * db}x{da * db} and sigma {db * dc}x{db * dc}, "
            f"got {rho.shape} and {sigma.shape}"
        )
    if side == "coarse":
        sigma_c = partial_trace(sigma, (db, dc), [1])
        return kron(rho, herm_power(sigma_c, -1, tol))
    if side == "fine":
        rho_a = partial_trace(rho, (da, db), [0])
        return kron(rho_a, herm_power(sigma, -1, tol))
    raise ValueError(f"side must be 'coarse' or 'fine', got {side!r}")


@dataclass(frozen=True, eq=False)
class StandardForm:
    """Tracial standard form: L^2(A, tr/d) with ``J eta(a) = eta(a^dag)``.

    ``J`` is antilinear; it acts on coordinates as ``x -> conj_matrix @ conj(x)``.
    """

    algebra: MatrixAlgebra
    l2: GnsSpace
    conj_matrix: np.ndarray

    def J(self, x: np.ndarray) -> np.ndarray:
        return self.conj_matrix @ np.conj(as_matrix(x))

    def right_rep(self, a: np.ndarray) -> np.ndarray:
        """``J pi(a) J`` as a linear operator on L^2 coordinates."""
        return self.conj_matrix @ np.conj(self.l2.pi_of(a)) @ np.conj(self.conj_matrix)

    @cached_property
    def left_algebra(self) -> MatrixAlgebra:
        return MatrixAlgebra.from_spanning(self.l2.pi, self.l2.l2_dim)

    @cached_property
    def right_algebra(self) -> MatrixAlgebra:
        k = self.conj_matrix
        mats = np.einsum("xy,iyz,zw->ixw", k, np.conj(self.l2.pi), np.conj(k))
        return MatrixAlgebra.from_spanning(mats, self.l2.l2_dim)

    def invariant_residuals(self) -> dict:
        k = self.conj_matrix
        n = self.l2.l2_dim
        involution = float(np.max(np.abs(k @ np.conj(k) - np.eye(n)), initial=0.0))
        # antiunitary iff the coordinate matrix is unitary
        antiunitary = float(np.max(np.abs(dag(k) @ k - np.eye(n)), initial=0.0))
        comm = 0.0
        for p in self.l2.pi:
            right = k @ np.conj(p) @ np.conj(k)
            for q in self.l2.pi:
                comm = max(comm, float(np.linalg.norm(q @ right - right @ q)))
        return {"involution": involution, "antiunitary": antiunitary, "commutation": comm}


def standard_form(a: MatrixAlgebra) -> StandardForm:
    d = a.ambient_dim
    tau = functional_from_density(a, np.eye(d) / d)
    l2 = gns(a, tau)
    # coefficients of a^dag are swap @ conj(coefficients of a)
    swap = a.flat.conj() @ dag(a.basis).reshape(a.dim, -1).T
    k = l2.eta @ swap @ np.conj(l2.eta_inv)
    return StandardForm(a, l2, k)


def _require_full_factor(sf: StandardForm):
    d = sf.algebra.ambient_dim
    if sf.algebra.dim != d * d:
        raise AlgebraMismatchError(
            "relative modular operators are implemented for the full matrix algebra only"
        )


def relative_modular(psi_dens: np.ndarray, phi_dens: np.ndarray, sf: StandardForm,
                     tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``x -> D_psi x D_phi^-1`` in the L^2 coordinates of ``sf``."""
    _require_full_factor(sf)
    psi_dens, phi_dens = as_matrix(psi_dens), as_matrix(phi_dens)
    inv = herm_power(phi_dens, -1, tol)
    b = sf.algebra.basis
    mapped = np.einsum("pq,jqr,rs->jps", psi_dens, b, inv).reshape(sf.algebra.dim, -1)
    lmat = sf.algebra.flat.conj() @ mapped.T
    return sf.l2.eta @ lmat @ sf.l2.eta_inv


def transport_weights(sf: StandardForm, psi_dens: np.ndarray, phi_dens: np.ndarray,
                      tol: Tolerance = DEFAULT_TOL) -> tuple[PositiveFunctional, PositiveFunctional]:
    """Carry densities on M_d to the standard representation.

    Returns ``psi`` on ``pi(M)`` and ``phi`` on ``J pi(M) J`` such that
    ``psi(pi(a)) = tr(D_psi a)`` and ``phi^T(pi(a)) = phi(J pi(a)^dag J) = tr(D_phi a)``.
    Both are vector functionals of ``eta(sqrt(d) D^(1/2))``.
    """
    _require_full_factor(sf)
    d = sf.algebra.ambient_dim
    v = sf.l2.eta_of(np.sqrt(d) * herm_power(psi_dens, 0.5, tol))
    w = sf.l2.eta_of(np.sqrt(d) * herm_power(phi_dens, 0.5, tol))
    psi = PositiveFunctional(sf.left_algebra, np.outer(v, v.conj()))
    phi = PositiveFunctional(sf.right_algebra, np.outer(w, w.conj()))
    return psi, phi
