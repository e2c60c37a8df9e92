"""Reference solvers for the full system: banded Cholesky and (deflated) CG."""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, DefinitenessFailure, InvalidArgument
from .spectral import SpectralBasis

__all__ = [
    "SolveReport",
    "bandwidth",
    "to_upper_band",
    "solve_direct",
    "solve_cg",
    "solve_deflated_cg",
]


@dataclass(eq=False)
class SolveReport:
    """Outcome of one solve.

    ``residual_history`` holds ``||F - A u||_2 / ||F||_2`` per iterate (the
    recursively updated residual for the Krylov solvers) and
    ``energy_history`` the functional ``u.A.u/2 - u.F``, which CG decreases
    monotonically.
    """

    solution: np.ndarray
    iterations: int
    relative_residual: float
    wall_time_s: float
    solver_id: str
    residual_history: list = field(default_factory=list)
    energy_history: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _relres(A, u, F, fnorm):
    if fnorm == 0:
        return float(np.linalg.norm(A @ u))
    return float(np.linalg.norm(F - A @ u) / fnorm)


def _check_system(A, F):
    F = np.asarray(F, dtype=float)
    if A.shape[0] != A.shape[1] or F.shape != (A.shape[0],):
        raise InvalidArgument(f"operator {A.shape} and right-hand side {F.shape} do not agree")
    return F


def bandwidth(A) -> int:
    A = sp.coo_matrix(A)
    if A.nnz == 0:
        return 0
    return int(np.max(np.abs(A.row - A.col)))


def to_upper_band(A, u: Optional[int] = None) -> np.ndarray:
    """LAPACK upper band storage: ``ab[u + i - j, j] = A[i, j]`` for ``j >= i``."""
    A = sp.csr_matrix(A)
    u = bandwidth(A) if u is None else u
    n = A.shape[0]
    ab = np.zeros((u + 1, n))
    for k in range(u + 1):
        d = A.diagonal(k)
        if np.any(d):
            ab[u - k, k:] = d
    return ab


def solve_direct(A, F, method: str = "banded") -> SolveReport:
    """Direct solve of the SPD system.

    ``method="banded"`` factors with LAPACK banded Cholesky (bandwidth ``m``
    for the five-point matrix, ``O(N m**2)`` work and ``O(N m)`` storage).
    ``method="superlu"`` uses SuperLU with its default fill-reducing ordering.
    """
    F = _check_system(A, F)
    t0 = time.perf_counter()
    if method == "banded":
        ab = to_upper_band(A)
        t1 = time.perf_counter()
        try:
            c = scipy.linalg.cholesky_banded(ab, overwrite_ab=True, lower=False, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise DefinitenessFailure("banded Cholesky hit a nonpositive pivot") from exc
        t2 = time.perf_counter()
        u = scipy.linalg.cho_solve_banded((c, False), F, check_finite=False)
        del c
    elif method == "superlu":
        csc = sp.csc_matrix(A)
        t1 = time.perf_counter()
        lu = spla.splu(csc)
        t2 = time.perf_counter()
        u = lu.solve(F)
    else:
        raise InvalidArgument(f"unknown direct method {method!r}")
    t3 = time.perf_counter()
    fnorm = float(np.linalg.norm(F))
    rel = _relres(A, u, F, fnorm)
    return SolveReport(
        u, 0, rel, t3 - t0, f"direct-{method}", [rel], [],
        {"setup": t1 - t0, "factorize": t2 - t1, "solve": t3 - t2},
    )


def solve_cg(A, F, tol: float = 1e-10, max_iter: Optional[int] = None,
             preconditioner: Optional[Callable] = None, flexible: bool = False,
             solver_id: Optional[str] = None) -> SolveReport:
    """(Preconditioned) conjugate gradients from a zero initial guess.

    Stops when the recursive relative residual drops to ``tol``.
    ``preconditioner`` is a callable ``r -> z``.  With ``flexible=True`` the
    Polak-Ribiere form of ``beta`` is used, which tolerates preconditioners
    that are not exactly fixed linear maps (e.g. a multigrid cycle).
    Raises :class:`ConvergenceFailure` (carrying the report) if ``max_iter``
    is exhausted.
    """
    F = _check_system(A, F)
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    n = F.shape[0]
    max_iter = 10 * n if max_iter is None else max_iter
    solver_id = solver_id or ("pcg" if preconditioner is not None else "cg")
    t0 = time.perf_counter()

    u = np.zeros(n)
    fnorm = float(np.linalg.norm(F))
    if fnorm == 0:
        return SolveReport(u, 0, 0.0, time.perf_counter() - t0, solver_id, [0.0], [0.0])

    r = F.copy()
    z = preconditioner(r) if preconditioner is not None else r
    p = z.copy()
    rz = float(r @ z)
    hist, energy = [1.0], [0.0]
    it = 0
    converged = False
    while it < max_iter:
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0:
            raise DefinitenessFailure(f"p.A.p = {pAp:g} at CG iteration {it}")
        alpha = rz / pAp
        u += alpha * p
        r -= alpha * Ap
        it += 1
        hist.append(float(np.linalg.norm(r)) / fnorm)
        # u.A.u/2 - u.F = -(u.F + u.r)/2 with r = F - A u
        energy.append(-0.5 * float(u @ F + u @ r))
        if hist[-1] <= tol:
            converged = True
            break
        z_new = preconditioner(r) if preconditioner is not None else r
        rz_new = float(r @ z_new)
        if flexible:
            # r is already the new residual and z the old preconditioned one
            beta = (rz_new - float(r @ z)) / rz
        else:
            beta = rz_new / rz
        z = z_new
        rz = rz_new
        p = z + beta * p
    report = SolveReport(
        u, it, _relres(A, u, F, fnorm), time.perf_counter() - t0, solver_id, hist, energy
    )
    if not converged:
        raise ConvergenceFailure(
            f"{solver_id} did not reach tol={tol:g} in {max_iter} iterations "
            f"(residual {hist[-1]:.3e})", report
        )
    return report


def solve_deflated_cg(A, F, basis: SpectralBasis, tol: float = 1e-10,
                      max_iter: Optional[int] = None) -> SolveReport:
    """CG deflated by the columns of ``basis.B``.

    With ``E = B.T A B`` the iterate starts at ``u0 = B E^-1 B.T F`` and every
    search direction is made A-orthogonal to ``range(B)``, so ``B.T r = 0``
    holds at every iterate.  The result equals ``B E^-1 B.T F + P.T u~`` with
    ``P = I - A B E^-1 B.T`` and ``u~`` the CG iterate on the deflated system.
    ``extra["coarse_residual"]`` records ``||B.T r||_inf / ||B.T F||_inf`` per
    iterate.
    """
    F = _check_system(A, F)
    B = basis.B
    if B.shape[0] != F.shape[0]:
        raise InvalidArgument(f"basis has {B.shape[0]} rows, system has {F.shape[0]}")
    n = F.shape[0]
    max_iter = 10 * n if max_iter is None else max_iter
    t0 = time.perf_counter()

    AB = A @ B
    E = B.T @ AB
    E = 0.5 * (E + E.T)
    try:
        Ec = scipy.linalg.cho_factor(E, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DefinitenessFailure("deflation coarse matrix B.T A B is singular") from exc
    t1 = time.perf_counter()

    fnorm = float(np.linalg.norm(F))
    if fnorm == 0:
        return SolveReport(np.zeros(n), 0, 0.0, time.perf_counter() - t0, "deflated-cg", [0.0], [0.0])
    BtF = B.T @ F
    btf_norm = float(np.max(np.abs(BtF))) or 1.0

    u = B @ scipy.linalg.cho_solve(Ec, BtF, check_finite=False)
    r = F - A @ u

    def deflate(v):
        return v - B @ scipy.linalg.cho_solve(Ec, AB.T @ v, check_finite=False)

    p = deflate(r)
    rr = float(r @ r)
    hist = [float(np.sqrt(rr)) / fnorm]
    energy = [-0.5 * float(u @ F + u @ r)]
    coarse = [float(np.max(np.abs(B.T @ r))) / btf_norm]
    it = 0
    converged = hist[-1] <= tol
    while not converged and it < max_iter:
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0:
            raise DefinitenessFailure(f"p.A.p = {pAp:g} at deflated CG iteration {it}")
        alpha = rr / pAp
        u += alpha * p
        r -= alpha * Ap
        it += 1
        rr_new = float(r @ r)
        hist.append(float(np.sqrt(rr_new)) / fnorm)
        energy.append(-0.5 * float(u @ F + u @ r))
        coarse.append(float(np.max(np.abs(B.T @ r))) / btf_norm)
        if hist[-1] <= tol:
            converged = True
            break
        p = deflate(r) + (rr_new / rr) * p
        rr = rr_new
    t2 = time.perf_counter()
    report = SolveReport(
        u, it, _relres(A, u, F, fnorm), t2 - t0, "deflated-cg", hist, energy,
        {"setup": t1 - t0, "iterate": t2 - t1}, {"coarse_residual": coarse},
    )
    if not converged:
        raise ConvergenceFailure(
            f"deflated CG did not reach tol={tol:g} in {max_iter} iterations", report
        )
    return report
