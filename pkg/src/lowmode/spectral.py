"""Sampled Dirichlet-Laplacian eigenmodes ``sin(p pi x) sin(q pi y)``.

Mode ``(p, q)`` of a cutoff-``M`` basis occupies column ``(p-1)*M + (q-1)``.
The sampled modes are exact eigenvectors of the unit-coefficient five-point
matrix and are pairwise orthogonal: ``b_pq . b_rs = ((m+1)/2)**2 delta``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DefinitenessFailure, InvalidArgument, NyquistViolation
from .grid import Grid2D, discrete_h1_seminorm

__all__ = [
    "SpectralBasis",
    "TailWeight",
    "eigenvalue",
    "discrete_eigenvalue",
    "sine_matrix",
    "build_basis",
    "dst2_synthesize",
    "dst2_analyze",
    "tail_weight",
    "projection_error_h1",
]

NORMALIZATIONS = ("raw", "mass")
PROJECTIONS = ("interp", "proj")


def eigenvalue(p, q):
    """Continuum eigenvalue ``pi**2 (p**2 + q**2)``."""
    if np.any(np.asarray(p) < 1) or np.any(np.asarray(q) < 1):
        raise InvalidArgument(f"mode indices must be >= 1, got ({p}, {q})")
    return np.pi ** 2 * (np.asarray(p) ** 2 + np.asarray(q) ** 2)


def discrete_eigenvalue(p, q, h):
    """Eigenvalue of the unit-coefficient five-point matrix for mode ``(p, q)``."""
    return 4.0 / h ** 2 * (np.sin(p * np.pi * h / 2) ** 2 + np.sin(q * np.pi * h / 2) ** 2)


def sine_matrix(m: int, M: int) -> np.ndarray:
    """``S[i-1, p-1] = sin(p pi i / (m+1))`` for ``i = 1..m``, ``p = 1..M``."""
    i = np.arange(1, m + 1)[:, None]
    p = np.arange(1, M + 1)[None, :]
    # reduce the integer product mod 2(m+1) so large indices keep full accuracy
    return np.sin(np.pi * ((i * p) % (2 * (m + 1))) / (m + 1))


def _proj_factors(M: int, h: float) -> np.ndarray:
    # (1/h) * integral of sin(p pi x) against the hat function at x_i equals
    # sin(p pi x_i) * sinc(p h / 2)**2 exactly.
    t = np.arange(1, M + 1) * np.pi * h / 2
    return (np.sin(t) / t) ** 2


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Dense ``N x K`` matrix of sampled modes, ``K = M**2``."""

    grid: Grid2D
    M: int
    normalization: str
    projection: str
    B: np.ndarray

    @property
    def K(self) -> int:
        return self.M * self.M

    def column(self, p: int, q: int) -> int:
        if not (1 <= p <= self.M and 1 <= q <= self.M):
            raise InvalidArgument(f"mode ({p}, {q}) not in cutoff M={self.M}")
        return (p - 1) * self.M + (q - 1)

    def mode(self, k: int):
        p, q = divmod(k, self.M)
        return p + 1, q + 1

    @property
    def modes(self) -> np.ndarray:
        """``(K, 2)`` array of ``(p, q)`` in column order."""
        p, q = np.divmod(np.arange(self.K), self.M)
        return np.stack([p + 1, q + 1], axis=1)


def build_basis(grid: Grid2D, M: int, normalization: str = "raw", projection: str = "interp") -> SpectralBasis:
    """Assemble the sampled-mode matrix ``B``.

    Parameters
    ----------
    grid : Grid2D
    M : int
        Per-axis cutoff, ``1 <= M <= grid.m``.
    normalization : {"raw", "mass"}
        ``"raw"`` keeps the nodal samples; ``"mass"`` rescales so that
        ``h**2 * B.T @ B = I``.
    projection : {"interp", "proj"}
        ``"interp"`` is nodal interpolation of each mode.  ``"proj"`` uses the
        L2 projection onto bilinear hat functions (with the lumped mass
        ``h**2 I``) followed by a Cholesky mass-orthonormalization; it is only
        meaningful together with ``normalization="mass"``.
    """
    if int(M) != M or M < 1:
        raise InvalidArgument(f"cutoff M must be a positive integer, got {M!r}")
    M = int(M)
    if M > grid.m:
        raise NyquistViolation(f"cutoff M={M} exceeds the grid Nyquist index m={grid.m}")
    if normalization not in NORMALIZATIONS:
        raise InvalidArgument(f"unknown normalization {normalization!r}")
    if projection not in PROJECTIONS:
        raise InvalidArgument(f"unknown projection {projection!r}")

    m = grid.m
    S = sine_matrix(m, M)
    if projection == "proj":
        S = S * _proj_factors(M, grid.h)[None, :]
    # B[(j, i), (p, q)] = S[i, p] * S[j, q]
    B = np.einsum("jq,ip->jipq", S, S, optimize=False).reshape(grid.N, M * M)

    if normalization == "mass":
        if projection == "interp":
            # h**2 * ((m+1)/2)**2 = 1/4 exactly, so a factor 2 orthonormalizes
            B *= 2.0
        else:
            gram = grid.h ** 2 * (B.T @ B)
            try:
                R = scipy.linalg.cholesky(gram, lower=False)
            except np.linalg.LinAlgError as exc:
                raise DefinitenessFailure("basis Gram matrix is not positive definite") from exc
            B = scipy.linalg.solve_triangular(R, B.T, trans="T", lower=False).T
            B = np.ascontiguousarray(B)
    elif projection == "proj":
        raise InvalidArgument('projection "proj" requires normalization "mass"')
    B.setflags(write=False)
    return SpectralBasis(grid, M, normalization, projection, B)


def _coeff_array(grid, coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.size != grid.N:
        raise InvalidArgument(f"expected {grid.N} coefficients, got {c.size}")
    return c.reshape(grid.m, grid.m)


def dst2_synthesize(grid: Grid2D, coeffs) -> np.ndarray:
    """Grid function ``sum_{p,q} c[p,q] sin(p pi x) sin(q pi y)`` over all ``p, q <= m``.

    ``coeffs`` is indexed like a full (``M = m``) basis: flat position
    ``(p-1)*m + (q-1)``, or a 2-D array ``[p-1, q-1]``.
    """
    C = _coeff_array(grid, coeffs)
    S = sine_matrix(grid.m, grid.m)
    # V[j, i] = sum_pq S[i, p] C[p, q] S[j, q]
    return np.ascontiguousarray((S @ C @ S.T).T).ravel()


def dst2_analyze(grid: Grid2D, v) -> np.ndarray:
    """Inverse of :func:`dst2_synthesize`; returns flat coefficients."""
    V = grid.as_array(np.asarray(v, dtype=float))
    S = sine_matrix(grid.m, grid.m)
    scale = (2.0 / (grid.m + 1)) ** 2
    # C = scale * S.T @ V.T @ S, using S.T = S and S @ S = (m+1)/2 I
    return (scale * (S.T @ V.T @ S)).ravel()


@dataclass(frozen=True)
class TailWeight:
    """Truncated tail sum with the bound on what the truncation dropped."""

    M: int
    cutoff_bound: int
    W: float
    remainder_bound: float


def tail_weight(M: int, cutoff_bound: int = 10_000, block: int = 256) -> TailWeight:
    """Sum ``1 / lambda_{mn}**2`` over ``m > M or n > M`` with ``m, n <= cutoff_bound``.

    The dropped part (indices beyond the cutoff) is at most
    ``1 / (4 pi**3 cutoff_bound**2)``.  ``M = 0`` gives the full sum.
    """
    M = int(M)
    R = int(cutoff_bound)
    if M < 0:
        raise InvalidArgument("M must be >= 0")
    if R < 4 * max(M, 1):
        raise InvalidArgument(f"cutoff_bound must be >= 4*M, got {R} for M={M}")
    n = np.arange(1, R + 1, dtype=float)
    n2 = n * n
    total = 0.0
    # rows m <= M only see the columns n > M
    for start in range(1, M + 1, block):
        rows = np.arange(start, min(start + block, M + 1), dtype=float)
        d = rows[:, None] ** 2 + n2[None, M:]
        total += np.sum(1.0 / (d * d))
    for start in range(M + 1, R + 1, block):
        rows = np.arange(start, min(start + block, R + 1), dtype=float)
        d = rows[:, None] ** 2 + n2[None, :]
        total += np.sum(1.0 / (d * d))
    W = total / np.pi ** 4
    return TailWeight(M, R, W, 1.0 / (4 * np.pi ** 3 * R ** 2))


def projection_error_h1(grid: Grid2D, v, M: int) -> float:
    """Discrete H^1 seminorm of ``v`` minus its ``p, q <= M`` sine truncation."""
    if M > grid.m:
        raise NyquistViolation(f"cutoff M={M} exceeds m={grid.m}")
    C = dst2_analyze(grid, v).reshape(grid.m, grid.m)
    C[:M, :M] = 0.0
    return discrete_h1_seminorm(grid, dst2_synthesize(grid, C))
