"""Checkable predicates for the operator SSA inequality and its relatives.

Tripartite operators live on H_A (x) H_B (x) H_C in that order. Each check
returns a :class:`VerificationReport` whose ``margin`` is the smallest
eigenvalue of the relevant difference operator (or a scalar gap).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from .algebras import (
    AlgebraMismatchError,
    MatrixAlgebra,
    PositiveFunctional,
    factor_algebra,
    functional_from_density,
    is_faithful,
    is_subalgebra,
    restrict_functional,
)
from .gns import (
    NotFaithfulError,
    StandardForm,
    closed_form_tripartite,
    gns,
    gns_subspace_projection,
    inclusion_isometry,
    r_op,
    relative_modular,
    spatial_derivative,
    theta,
    transport_weights,
)
from .linalg import (
    DEFAULT_TOL,
    DimensionError,
    NotPSDError,
    Tolerance,
    as_matrix,
    check_psd,
    embed,
    herm_power,
    kron,
    loewner_leq,
    matrix_to_dict,
    min_eig,
    opnorm,
    partial_trace,
)
from .randoms import random_density, stream

VIOLATION_THRESHOLD = 1e-6
PAIRING_RTOL = 1e-8
BRIDGE_RTOL = 1e-10

CHECK_NAMES = (
    "operator_ssa",
    "trace_form",
    "equivalence_bridge",
    "theta_monotonicity",
    "spatial_monotonicity",
    "reverse_derivation",
    "entropy_ssa",
    "falsification_power",
)
_FALSIFY_KEY = CHECK_NAMES.index("falsification_power")


@dataclass
class VerificationReport:
    check_name: str
    passed: bool
    margin: float
    scale: float
    trials: int = 1
    seed: int | None = None
    tolerance: Tolerance = DEFAULT_TOL
    dims: tuple[int, ...] | None = None
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "passed": bool(self.passed),
            "margin": float(self.margin),
            "scale": float(self.scale),
            "trials": int(self.trials),
            "seed": self.seed,
            "tolerance": {"atol": self.tolerance.atol, "rtol": self.tolerance.rtol},
            "dims": list(self.dims) if self.dims is not None else None,
            "witness": self.witness,
            "details": {k: _plain(v) for k, v in self.details.items()},
        }


def _plain(v: Any):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def _rel_close(x: complex, y: complex, rtol: float, scale: float | None = None) -> tuple[bool, float]:
    ref = max(abs(x), abs(y)) if scale is None else scale
    err = abs(x - y)
    if err == 0:
        return True, 0.0
    rel = err / ref if ref > 0 else float("inf")
    return rel <= rtol, rel


def _report(name, margin, scale, tol, witness, extra_ok=True, dims=None, **details):
    ok = margin >= -tol.slack(scale) and extra_ok
    return VerificationReport(
        check_name=name,
        passed=bool(ok),
        margin=float(margin),
        scale=float(scale),
        tolerance=tol,
        dims=tuple(dims) if dims is not None else None,
        witness=None if ok else {k: matrix_to_dict(v) for k, v in witness.items()},
        details=details,
    )


def _dims3(dims) -> tuple[int, int, int]:
    dims = tuple(int(x) for x in dims)
    if len(dims) != 3 or any(x < 1 for x in dims):
        raise DimensionError(f"expected three positive dimensions (dA, dB, dC), got {dims}")
    return dims  # type: ignore[return-value]


def _check_shapes(dims, **ops):
    da, db, dc = dims
    expected = {"rho_ab": da * db, "sigma_bc": db * dc, "x": da * db * dc, "rho_abc": da * db * dc}
    for name, op in ops.items():
        n = expected[name]
        if op.shape != (n, n):
            raise DimensionError(f"{name} must be {n}x{n} for dims {dims}, got {op.shape}")


def ssa_sides(rho_ab, sigma_bc, dims, tol: Tolerance = DEFAULT_TOL):
    """``(rho_AB (x) sigma_C^-1, rho_A (x) sigma_BC^-1)``."""
    dims = _dims3(dims)
    rho_ab, sigma_bc = as_matrix(rho_ab), as_matrix(sigma_bc)
    _check_shapes(dims, rho_ab=rho_ab, sigma_bc=sigma_bc)
    return (closed_form_tripartite(rho_ab, sigma_bc, dims, "coarse", tol),
            closed_form_tripartite(rho_ab, sigma_bc, dims, "fine", tol))


def check_operator_ssa(rho_ab, sigma_bc, dims, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    coarse, fine = ssa_sides(rho_ab, sigma_bc, dims, tol)
    _, margin = loewner_leq(coarse, fine, tol)
    return _report("operator_ssa", margin, opnorm(fine - coarse), tol,
                   {"rho_ab": rho_ab, "sigma_bc": sigma_bc}, dims=dims)


def reversed_ssa_margin(rho_ab, sigma_bc, dims, tol: Tolerance = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of ``rho_AB (x) sigma_C^-1 - rho_A (x) sigma_BC^-1``."""
    coarse, fine = ssa_sides(rho_ab, sigma_bc, dims, tol)
    return min_eig(coarse - fine)


def trace_form_sides(x, sigma_bc, dims, tol: Tolerance = DEFAULT_TOL):
    """``tr_C(s_C x s_C)`` on AB and ``tr_BC(s_BC x s_BC)`` on A, with ``s = sigma^-1/2``."""
    da, db, dc = dims = _dims3(dims)
    x, sigma_bc = as_matrix(x), as_matrix(sigma_bc)
    _check_shapes(dims, x=x, sigma_bc=sigma_bc)
    sigma_c = partial_trace(sigma_bc, (db, dc), [1])
    s_c = embed(herm_power(sigma_c, -0.5, tol), dims, [2])
    s_bc = embed(herm_power(sigma_bc, -0.5, tol), dims, [1, 2])
    lhs = partial_trace(s_c @ x @ s_c, dims, [0, 1])
    rhs = partial_trace(s_bc @ x @ s_bc, dims, [0])
    return lhs, rhs


def check_trace_form(x, sigma_bc, dims, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    dims = _dims3(dims)
    check_psd(as_matrix(x), tol, "X")
    lhs, rhs = trace_form_sides(x, sigma_bc, dims, tol)
    rhs_ab = kron(rhs, np.eye(dims[1]))
    _, margin = loewner_leq(lhs, rhs_ab, tol)
    return _report("trace_form", margin, opnorm(rhs_ab - lhs), tol,
                   {"x": x, "sigma_bc": sigma_bc}, dims=dims)


def bridge_values(xi, rho_ab, sigma_bc, dims, tol: Tolerance = DEFAULT_TOL) -> dict:
    """The four scalars of the rank-one chain linking the two inequality forms."""
    da, db, dc = dims = _dims3(dims)
    xi = as_matrix(xi).reshape(-1)
    rho_ab = as_matrix(rho_ab)
    if xi.shape[0] != da * db * dc:
        raise DimensionError(f"xi must have length {da * db * dc}, got {xi.shape[0]}")
    lhs, rhs = trace_form_sides(np.outer(xi, xi.conj()), sigma_bc, dims, tol)
    rho_a = partial_trace(rho_ab, (da, db), [0])
    coarse, fine = ssa_sides(rho_ab, sigma_bc, dims, tol)
    return {
        "trace_coarse": complex(np.trace(rho_ab @ lhs)),
        "trace_fine": complex(np.trace(rho_a @ rhs)),
        "form_coarse": complex(np.vdot(xi, coarse @ xi)),
        "form_fine": complex(np.vdot(xi, fine @ xi)),
    }


def equivalence_bridge(xi, rho_ab, sigma_bc, dims, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    v = bridge_values(xi, rho_ab, sigma_bc, dims, tol)
    ok_c, err_c = _rel_close(v["trace_coarse"], v["form_coarse"], BRIDGE_RTOL)
    ok_f, err_f = _rel_close(v["trace_fine"], v["form_fine"], BRIDGE_RTOL)
    margin = (v["form_fine"] - v["form_coarse"]).real
    scale = max(abs(v["form_fine"]), abs(v["form_coarse"]))
    return _report("equivalence_bridge", margin, scale, tol,
                   {"xi": as_matrix(xi).reshape(-1), "rho_ab": rho_ab, "sigma_bc": sigma_bc},
                   extra_ok=ok_c and ok_f, dims=dims,
                   vertical_rel_err_coarse=err_c, vertical_rel_err_fine=err_f)


@dataclass(frozen=True, eq=False)
class TripartiteSetting:
    """``N = B(H_A)``, ``M = B(H_AB)`` and their commutants on H_ABC."""

    dims: tuple[int, int, int]
    n: MatrixAlgebra
    m: MatrixAlgebra
    n_prime: MatrixAlgebra
    m_prime: MatrixAlgebra

    def psi(self, rho_ab) -> PositiveFunctional:
        dc = self.dims[2]
        return functional_from_density(self.m, kron(rho_ab, np.eye(dc) / dc))

    def phi(self, sigma_bc) -> PositiveFunctional:
        da = self.dims[0]
        return functional_from_density(self.n_prime, kron(np.eye(da) / da, sigma_bc))


@lru_cache(maxsize=None)
def tripartite_setting(dims: tuple[int, int, int]) -> TripartiteSetting:
    dims = _dims3(dims)
    n = factor_algebra(dims, [0])
    m = factor_algebra(dims, [0, 1])
    setting = TripartiteSetting(dims, n, m, n.commutant, m.commutant)
    # fill lazy caches up front so concurrent trials only read them
    for alg in (n, m, setting.n_prime, setting.m_prime):
        alg.projector, alg.commutant.projector
    return setting


def _require_faithful(w: PositiveFunctional, where: str):
    if not is_faithful(w):
        raise NotFaithfulError(f"{where}: functional must be faithful")


def check_theta_monotonicity(a: MatrixAlgebra, b: MatrixAlgebra, w: PositiveFunctional, xi,
                             tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """``theta^{w|B}(xi, xi) <= theta^w(xi, xi)`` from two separate GNS constructions."""
    if not is_subalgebra(b, a):
        raise AlgebraMismatchError("B must be a subalgebra of A")
    w_a = PositiveFunctional(a, w.representative)
    _require_faithful(w_a, "theta monotonicity")
    g_a = gns(a, w_a)
    g_b = gns(b, restrict_functional(w_a, b))
    xi = as_matrix(xi).reshape(-1)
    t_a, t_b = theta(g_a, xi, xi), theta(g_b, xi, xi)
    _, margin = loewner_leq(t_b, t_a, tol)
    return _report("theta_monotonicity", margin, opnorm(t_a), tol,
                   {"xi": xi, "representative": w.representative})


def projection_identity_residual(a: MatrixAlgebra, b: MatrixAlgebra, w: PositiveFunctional, xi) -> float:
    """Frobenius distance between ``R^w(xi) P`` and ``R^{w|B}(xi)``, both as maps on L^2(A)."""
    g_a = gns(a, PositiveFunctional(a, w.representative))
    g_b = gns(b, PositiveFunctional(b, w.representative))
    p = gns_subspace_projection(g_a, b)
    v = inclusion_isometry(g_a, g_b)
    xi = as_matrix(xi).reshape(-1)
    return float(np.linalg.norm(r_op(g_a, xi) @ p - r_op(g_b, xi) @ v.conj().T))


def spatial_pair(n: MatrixAlgebra, m: MatrixAlgebra, psi: PositiveFunctional,
                 phi: PositiveFunctional):
    """``(d psi / d phi|_{M'}, d psi|_N / d phi)`` for ``N subset M``, ``phi`` on ``N'``."""
    if not is_subalgebra(n, m):
        raise AlgebraMismatchError("N must be a subalgebra of M")
    n_prime, m_prime = n.commutant, m.commutant
    phi = PositiveFunctional(n_prime, phi.representative)
    _require_faithful(phi, "spatial monotonicity")
    psi = PositiveFunctional(m, psi.representative)
    coarse = spatial_derivative(psi, gns(m_prime, restrict_functional(phi, m_prime)))
    fine = spatial_derivative(restrict_functional(psi, n), gns(n_prime, phi))
    return coarse.matrix, fine.matrix


def check_spatial_monotonicity(n: MatrixAlgebra, m: MatrixAlgebra, psi: PositiveFunctional,
                               phi: PositiveFunctional, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    coarse, fine = spatial_pair(n, m, psi, phi)
    _, margin = loewner_leq(coarse, fine, tol)
    return _report("spatial_monotonicity", margin, opnorm(fine), tol,
                   {"psi": psi.representative, "phi": phi.representative})


def check_reverse_derivation(a: MatrixAlgebra, b: MatrixAlgebra, w: PositiveFunctional, xi, chi,
                             tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Recover theta monotonicity from spatial monotonicity with a vector functional.

    ``<chi, theta^{w|X}(xi, xi) chi> = <xi, d<chi, . chi>|_{X'} / d w|_X  xi>`` for
    ``X = B, A``; the operator gap between the two derivatives is the margin.
    """
    if not is_subalgebra(b, a):
        raise AlgebraMismatchError("B must be a subalgebra of A")
    w_a = PositiveFunctional(a, w.representative)
    _require_faithful(w_a, "reverse derivation")
    xi = as_matrix(xi).reshape(-1)
    chi = as_matrix(chi).reshape(-1)
    vec = np.outer(chi, chi.conj())
    chi2 = float(np.vdot(chi, chi).real)

    out = {}
    for label, alg in (("B", b), ("A", a)):
        g = gns(alg, PositiveFunctional(alg, w.representative))
        t = theta(g, xi, xi)
        sd = spatial_derivative(PositiveFunctional(alg.commutant, vec), g)
        paired = complex(np.vdot(chi, t @ chi))
        via_sd = sd.form(xi, xi)
        ok, err = _rel_close(paired, via_sd, PAIRING_RTOL, scale=opnorm(t) * chi2)
        out[label] = (paired, via_sd, ok, err, sd.matrix)

    _, margin = loewner_leq(out["B"][4], out["A"][4], tol)
    scalar_gap = (out["A"][1] - out["B"][1]).real
    scale = opnorm(out["A"][4])
    scalar_ok = scalar_gap >= -tol.slack(scale * float(np.vdot(xi, xi).real))
    return _report(
        "reverse_derivation", margin, scale, tol,
        {"xi": xi, "chi": chi, "representative": w.representative},
        extra_ok=out["A"][2] and out["B"][2] and scalar_ok,
        pairing_rel_err_a=out["A"][3], pairing_rel_err_b=out["B"][3], scalar_gap=scalar_gap,
    )


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(as_matrix(rho))
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)))


def entropy_ssa(rho_abc, dims, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """``S(AB) + S(BC) - S(B) - S(ABC)`` in nats."""
    dims = _dims3(dims)
    rho = as_matrix(rho_abc)
    _check_shapes(dims, rho_abc=rho)
    check_psd(rho, tol, "rho_ABC")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise NotPSDError(f"rho_ABC must have unit trace, got {np.trace(rho).real:.12g}")
    s = {k: von_neumann_entropy(partial_trace(rho, dims, keep))
         for k, keep in (("ab", [0, 1]), ("bc", [1, 2]), ("b", [1]), ("abc", [0, 1, 2]))}
    margin = s["ab"] + s["bc"] - s["b"] - s["abc"]
    return _report("entropy_ssa", margin, 0.0, tol, {"rho_abc": rho}, dims=dims)


def falsification_power(dims, trials: int, seed: int, tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Search for a violation of the reversed inequality; passing means one was found."""
    da, db, dc = dims = _dims3(dims)
    worst, worst_inputs = np.inf, None
    for t in range(int(trials)):
        rho = random_density(da * db, None, stream(seed, _FALSIFY_KEY, *dims, t, 0))
        sigma = random_density(db * dc, None, stream(seed, _FALSIFY_KEY, *dims, t, 1))
        margin = reversed_ssa_margin(rho, sigma, dims, tol)
        if margin < worst:
            worst, worst_inputs = margin, {"rho_ab": rho, "sigma_bc": sigma}
    found = worst < -VIOLATION_THRESHOLD
    return VerificationReport(
        check_name="falsification_power",
        passed=bool(found),
        margin=float(worst),
        scale=0.0,
        trials=int(trials),
        seed=int(seed),
        tolerance=tol,
        dims=dims,
        witness={k: matrix_to_dict(v) for k, v in worst_inputs.items()} if worst_inputs else None,
        details={"violation_threshold": VIOLATION_THRESHOLD},
    )


def standard_form_pair(psi_dens, phi_dens, sf: StandardForm, tol: Tolerance = DEFAULT_TOL):
    """``(d psi / d phi, Delta_{psi | phi^T})`` computed independently on L^2(M_d, tr/d)."""
    psi, phi = transport_weights(sf, psi_dens, phi_dens, tol)
    sd = spatial_derivative(psi, gns(sf.right_algebra, phi))
    return sd.matrix, relative_modular(psi_dens, phi_dens, sf, tol)


def aggregate(reports: Sequence[VerificationReport], name: str, seed: int,
              dims: Sequence[int] | None, tol: Tolerance) -> VerificationReport:
    """Reduce per-trial reports; independent of completion order.

    Reports the smallest margin over trials, or the worst-slack failing trial
    if any trial failed.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    failing = [i for i, r in enumerate(reports) if not r.passed]
    if failing:
        pick = min(failing, key=lambda i: (reports[i].margin + tol.slack(reports[i].scale), i))
    else:
        pick = min(range(len(reports)), key=lambda i: (reports[i].margin, i))
    r = reports[pick]
    details = dict(r.details)
    details["worst_trial"] = pick
    details["failed_trials"] = len(failing)
    return VerificationReport(
        check_name=name,
        passed=not failing,
        margin=r.margin,
        scale=r.scale,
        trials=len(reports),
        seed=int(seed),
        tolerance=tol,
        dims=tuple(dims) if dims is not None else None,
        witness=r.witness,
        details=details,
    )
