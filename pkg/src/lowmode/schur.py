"""Brute-force Schur-complement oracle in the full sine basis (small grids only).

``transform_full`` rotates ``A`` into the mass-orthonormal full sine basis
``Q`` (``h**2 Q.T Q = I``).  Norms of blocks are measured in the discrete
``H^1_0`` metric, i.e. after rescaling every mode ``(p, q)`` by
``1/sqrt(lambda^h_pq)`` so that the unit-coefficient operator becomes the
identity.  For a constant coefficient all coupling vanishes; the Schur
inequality ``||S - A_LL|| <= ||A_LH||**2 / alpha_H`` is basis independent.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DefinitenessFailure, FeasibilityError, InvalidArgument
from .grid import Grid2D
from .reduced import energy_norm
from .spectral import build_basis, discrete_eigenvalue

__all__ = [
    "MAX_ORACLE_M",
    "BlockedOperator",
    "SchurRow",
    "SchurDecayReport",
    "transform_full",
    "coupling_norm",
    "exact_schur",
    "reduced_vs_schur_solution",
    "direct_blocks",
    "schur_decay_report",
]

MAX_ORACLE_M = 63


@dataclass(eq=False)
class BlockedOperator:
    """``A`` in the full sine basis, ready to be split at any cutoff.

    ``At`` is ``Q.T A Q`` for the mass-orthonormal basis ``Q``; ``Ah`` is the
    same operator rescaled to the discrete ``H^1_0`` metric (``h**2 D At D``
    with ``D = diag(lambda^h)**-1/2``).  ``modes[k]`` is the ``(p, q)`` of
    row/column ``k``.
    """

    grid: Grid2D
    Q: np.ndarray
    At: np.ndarray
    Ah: np.ndarray
    modes: np.ndarray
    scale: np.ndarray

    def low_mask(self, M: int) -> np.ndarray:
        if not 1 <= M < self.grid.m:
            raise InvalidArgument(f"cutoff must satisfy 1 <= M < m={self.grid.m}, got {M}")
        return (self.modes[:, 0] <= M) & (self.modes[:, 1] <= M)

    def blocks(self, M: int, metric: str = "h1"):
        """``(A_LL, A_LH, A_HH)`` for cutoff ``M`` in the ``"h1"`` or ``"mass"`` metric."""
        T = self.Ah if metric == "h1" else self.At
        low = self.low_mask(M)
        return T[np.ix_(low, low)], T[np.ix_(low, ~low)], T[np.ix_(~low, ~low)]


def _symmetrize(X):
    return 0.5 * (X + X.T)


def transform_full(A, grid: Grid2D) -> BlockedOperator:
    if grid.m > MAX_ORACLE_M:
        raise FeasibilityError(f"dense oracle limited to m <= {MAX_ORACLE_M}, got m={grid.m}")
    if A.shape != (grid.N, grid.N):
        raise InvalidArgument(f"operator shape {A.shape} does not match grid N={grid.N}")
    basis = build_basis(grid, grid.m, "mass")
    Q = basis.B
    At = _symmetrize(Q.T @ (A @ Q))
    modes = basis.modes
    lam = discrete_eigenvalue(modes[:, 0], modes[:, 1], grid.h)
    scale = grid.h / np.sqrt(lam)
    Ah = _symmetrize(At * np.outer(scale, scale))
    return BlockedOperator(grid, Q, At, Ah, modes, scale)


def coupling_norm(blocked: BlockedOperator, M: int, metric: str = "h1") -> float:
    """Spectral norm of the low/high coupling block ``A_LH``."""
    _, A_LH, _ = blocked.blocks(M, metric)
    return float(np.linalg.norm(A_LH, 2))


def exact_schur(blocked: BlockedOperator, M: int, metric: str = "h1"):
    """Return ``(S, gap, alpha_H)`` with ``S = A_LL - A_LH A_HH^-1 A_HL``."""
    A_LL, A_LH, A_HH = blocked.blocks(M, metric)
    try:
        c = scipy.linalg.cho_factor(A_HH, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DefinitenessFailure("high-mode block is not positive definite") from exc
    S = _symmetrize(A_LL - A_LH @ scipy.linalg.cho_solve(c, A_LH.T, check_finite=False))
    gap = float(np.linalg.norm(S - A_LL, 2))
    alpha_H = float(scipy.linalg.eigvalsh(A_HH, subset_by_index=[0, 0], check_finite=False)[0])
    return S, gap, alpha_H


def reduced_vs_schur_solution(blocked: BlockedOperator, A, F, M: int):
    """Compare exact static condensation with the truncated reduced solve.

    Works in the mass-orthonormal coordinates ``u = Q c``.  The low
    coefficients of the full solve are recovered exactly from the Schur
    complement; replacing ``S`` by ``A_LL`` gives the reduced solution.
    Returns ``(u_schur, u_reduced, diff_energy)`` where both fields are lifted
    with the low columns of ``Q`` and ``diff_energy = ||u_schur - u_reduced||_A``.
    """
    Q = blocked.Q
    g = Q.T @ np.asarray(F, dtype=float)
    low = blocked.low_mask(M)
    A_LL, A_LH, A_HH = blocked.blocks(M, "mass")
    g_L, g_H = g[low], g[~low]
    c = scipy.linalg.cho_factor(A_HH, check_finite=False)
    S = _symmetrize(A_LL - A_LH @ scipy.linalg.cho_solve(c, A_LH.T, check_finite=False))
    rhs = g_L - A_LH @ scipy.linalg.cho_solve(c, g_H, check_finite=False)
    c_schur = scipy.linalg.solve(S, rhs, assume_a="pos")
    c_red = scipy.linalg.solve(A_LL, g_L, assume_a="pos")
    QL = Q[:, low]
    u_schur, u_red = QL @ c_schur, QL @ c_red
    return u_schur, u_red, energy_norm(A, u_schur - u_red)


def direct_blocks(A, grid: Grid2D, M: int):
    """``A_LL, A_LH, A_HH`` (``h1`` metric) by projecting onto low and high bases separately.

    Independent of :func:`transform_full`: the low block comes from the
    cutoff-``M`` basis and the high block from the remaining full-basis
    columns, each rescaled by its own discrete eigenvalues.
    """
    if grid.m > MAX_ORACLE_M:
        raise FeasibilityError(f"dense oracle limited to m <= {MAX_ORACLE_M}")
    low_basis = build_basis(grid, M, "mass")
    full = build_basis(grid, grid.m, "mass")
    fm = full.modes
    high = (fm[:, 0] > M) | (fm[:, 1] > M)
    QL = low_basis.B * (grid.h / np.sqrt(discrete_eigenvalue(*low_basis.modes.T, grid.h)))
    QH = full.B[:, high] * (grid.h / np.sqrt(discrete_eigenvalue(*fm[high].T, grid.h)))
    AQH = A @ QH
    A_LL = _symmetrize(QL.T @ (A @ QL))
    return A_LL, QL.T @ AQH, _symmetrize(QH.T @ AQH)


@dataclass
class SchurRow:
    M: int
    lambda_next: float
    coupling_norm: float
    alpha_H: float
    gap: float

    @property
    def bound_rhs(self) -> float:
        return self.coupling_norm ** 2 / self.alpha_H


@dataclass
class SchurDecayReport:
    grid_m: int
    rows: list = field(default_factory=list)

    @property
    def slope(self) -> float:
        """Least-squares slope of ``log coupling`` against ``log lambda_{M+1,M+1}``."""
        x = np.log([r.lambda_next for r in self.rows])
        c = np.array([r.coupling_norm for r in self.rows])
        if len(self.rows) < 2 or np.any(c <= 0):
            return float("nan")
        return float(np.polyfit(x, np.log(c), 1)[0])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["M", "lambda_next", "coupling_norm", "alpha_H", "gap", "bound_rhs"])
            for r in self.rows:
                w.writerow([r.M] + [f"{v:.10e}" for v in
                                    (r.lambda_next, r.coupling_norm, r.alpha_H, r.gap, r.bound_rhs)])


def schur_decay_report(A, grid: Grid2D, cutoffs, metric: str = "h1", blocked=None) -> SchurDecayReport:
    if blocked is None:
        blocked = transform_full(A, grid)
    report = SchurDecayReport(grid.m)
    for M in cutoffs:
        _, gap, alpha_H = exact_schur(blocked, M, metric)
        report.rows.append(SchurRow(
            int(M), float(np.pi ** 2 * 2 * (M + 1) ** 2),
            coupling_norm(blocked, M, metric), alpha_H, gap,
        ))
    return report
