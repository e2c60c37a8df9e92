"""Galerkin projection onto the sampled low-mode space and lift-back.

The reduced operator is ``A_LL = B.T @ A @ B`` (dense ``K x K``), the reduced
load is ``f_M = B.T @ F`` and the reduced solution is ``u_RD = B @ z``.
"""

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DefinitenessFailure, InvalidArgument
from .grid import Grid2D
from .spectral import SpectralBasis, build_basis, dst2_analyze, dst2_synthesize

__all__ = [
    "MAX_DENSE_K",
    "ReducedSystem",
    "ReducedSolution",
    "project_system",
    "solve_reduced",
    "lift",
    "energy_norm",
    "condition_number",
    "reduced_solve",
    "solve_full_basis",
]

MAX_DENSE_K = 1024


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    A_LL: np.ndarray
    f_M: np.ndarray
    basis: SpectralBasis
    assembly_time: float = 0.0

    @property
    def K(self) -> int:
        return self.A_LL.shape[0]


@dataclass(eq=False)
class ReducedSolution:
    z: np.ndarray
    u: np.ndarray
    system: Optional[ReducedSystem]
    timings: dict = field(default_factory=dict)


def project_system(A, F, basis: SpectralBasis) -> ReducedSystem:
    """Form ``A_LL = B.T (A B)`` and ``f_M = B.T F``.

    Costs one sparse-times-dense product (``O(N K)``) and one dense
    ``K x N`` by ``N x K`` product (``O(N K**2)``).  ``A_LL`` is symmetrized.
    """
    B = basis.B
    F = np.asarray(F, dtype=float)
    if A.shape != (B.shape[0], B.shape[0]) or F.shape != (B.shape[0],):
        raise InvalidArgument(
            f"operator {A.shape}, load {F.shape} and basis {B.shape} do not agree"
        )
    if basis.K > MAX_DENSE_K:
        raise InvalidArgument(f"K={basis.K} exceeds the dense limit {MAX_DENSE_K}")
    t0 = time.perf_counter()
    AB = A @ B
    A_LL = B.T @ AB
    A_LL = 0.5 * (A_LL + A_LL.T)
    f_M = B.T @ F
    return ReducedSystem(A_LL, f_M, basis, time.perf_counter() - t0)


def solve_reduced(rs: ReducedSystem) -> np.ndarray:
    """Dense Cholesky solve of ``A_LL z = f_M``."""
    try:
        c = scipy.linalg.cho_factor(rs.A_LL, lower=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DefinitenessFailure("reduced operator is not positive definite") from exc
    return scipy.linalg.cho_solve(c, rs.f_M, check_finite=False)


def lift(basis: SpectralBasis, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (basis.K,):
        raise InvalidArgument(f"expected {basis.K} reduced coefficients, got shape {z.shape}")
    return basis.B @ z


def energy_norm(A, v) -> float:
    """``sqrt(v @ A @ v)``; tiny negative round-off is clipped to zero."""
    v = np.asarray(v, dtype=float)
    if v.shape != (A.shape[0],):
        raise InvalidArgument(f"vector shape {v.shape} does not match operator {A.shape}")
    e = float(v @ (A @ v))
    if e < 0:
        if e < -1e-14 * float(v @ v):
            raise DefinitenessFailure(f"negative energy {e:g}")
        return 0.0
    return float(np.sqrt(e))


def condition_number(A_LL) -> float:
    """``lambda_max / lambda_min`` from a full symmetric eigendecomposition."""
    w = scipy.linalg.eigvalsh(np.asarray(A_LL), check_finite=False)
    if w[0] <= 0:
        raise DefinitenessFailure(f"smallest eigenvalue {w[0]:g} is not positive")
    return float(w[-1] / w[0])


def reduced_solve(grid: Grid2D, A, F, M: int, normalization: str = "mass",
                  basis: Optional[SpectralBasis] = None) -> ReducedSolution:
    """Run the whole reduced pipeline and time each phase.

    ``timings`` holds ``basis``, ``project``, ``solve``, ``lift`` and
    ``total`` in seconds.  Passing a prebuilt ``basis`` skips (and zeroes) the
    basis phase, for amortized use over many right-hand sides.
    """
    t0 = time.perf_counter()
    if basis is None:
        basis = build_basis(grid, M, normalization)
    t1 = time.perf_counter()
    rs = project_system(A, F, basis)
    t2 = time.perf_counter()
    z = solve_reduced(rs)
    t3 = time.perf_counter()
    u = lift(basis, z)
    t4 = time.perf_counter()
    timings = {
        "basis": t1 - t0,
        "project": t2 - t1,
        "solve": t3 - t2,
        "lift": t4 - t3,
        "total": t4 - t0,
    }
    return ReducedSolution(z, u, rs, timings)


def solve_full_basis(grid: Grid2D, A, F, solve=None) -> ReducedSolution:
    """Reduced solve with every mode retained (``M = m``, ``K = N``).

    A dense ``N x N`` reduced matrix is out of reach beyond tiny grids, but
    for a square invertible ``B`` the reduced system ``B.T A B z = B.T F`` is
    equivalent to ``A (B z) = F``.  The raw full basis is applied with the
    sine transforms: ``B z = synthesize(z)``, ``B.T v = analyze(v) / s`` and
    ``B**-T = s * synthesize`` with ``s = (2/(m+1))**2``.
    """
    if solve is None:
        from .baselines import solve_direct

        def solve(A, b):
            return solve_direct(A, b).solution

    scale = (2.0 / (grid.m + 1)) ** 2
    t0 = time.perf_counter()
    f_M = dst2_analyze(grid, F) / scale
    w = solve(A, scale * dst2_synthesize(grid, f_M))
    z = dst2_analyze(grid, w)
    u = dst2_synthesize(grid, z)
    return ReducedSolution(z, u, None, {"total": time.perf_counter() - t0})
