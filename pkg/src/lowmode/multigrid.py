"""Geometric multigrid V-cycles on nested ``m = 2**l - 1`` grids.

Coarse operators are rediscretized from ``kappa`` on each level, transfers are
full weighting and bilinear interpolation, and the ``m = 3`` level is solved
with a dense Cholesky factorization.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import assemble_operator, edge_coefficients
from .baselines import SolveReport, solve_cg
from .errors import GridIncompatible, InvalidArgument
from .grid import Grid2D, make_grid

__all__ = [
    "MgLevel",
    "MgHierarchy",
    "build_mg_hierarchy",
    "mg_preconditioned_cg",
    "mg_iterate",
    "restrict",
    "prolong",
]

SMOOTHERS = ("rbgs", "jacobi")


@dataclass(eq=False)
class MgLevel:
    grid: Grid2D
    A: object
    west: np.ndarray
    east: np.ndarray
    south: np.ndarray
    north: np.ndarray
    diag: np.ndarray
    red: np.ndarray

    @classmethod
    def build(cls, grid, kappa, averaging):
        kx, ky = edge_coefficients(grid, kappa, averaging)
        s = 1.0 / grid.h ** 2
        west, east = kx[:, :-1] * s, kx[:, 1:] * s
        south, north = ky[:-1, :] * s, ky[1:, :] * s
        j, i = np.indices((grid.m, grid.m))
        return cls(
            grid, assemble_operator(grid, kappa, averaging),
            west, east, south, north, west + east + south + north, (i + j) % 2 == 0,
        )

    def neighbours(self, P):
        """Off-diagonal stencil sum for the padded ``(m+2, m+2)`` array ``P``."""
        return (self.west * P[1:-1, :-2] + self.east * P[1:-1, 2:]
                + self.south * P[:-2, 1:-1] + self.north * P[2:, 1:-1])

    def residual(self, P, f):
        return f - self.diag * P[1:-1, 1:-1] + self.neighbours(P)


def restrict(r):
    """Full weighting from an ``(2k+1, 2k+1)`` array to ``(k, k)``."""
    mc = (r.shape[0] - 1) // 2
    P = np.pad(r, 1)

    def s(o):
        return slice(2 + o, 2 * mc + 1 + o, 2)

    return (4 * P[s(0), s(0)]
            + 2 * (P[s(-1), s(0)] + P[s(1), s(0)] + P[s(0), s(-1)] + P[s(0), s(1)])
            + P[s(-1), s(-1)] + P[s(-1), s(1)] + P[s(1), s(-1)] + P[s(1), s(1)]) / 16.0


def prolong(e):
    """Bilinear interpolation from ``(k, k)`` to ``(2k+1, 2k+1)``."""
    mc = e.shape[0]
    Pc = np.pad(e, 1)
    Pf = np.zeros((2 * mc + 3, 2 * mc + 3))
    Pf[::2, ::2] = Pc
    Pf[1::2, ::2] = 0.5 * (Pc[:-1, :] + Pc[1:, :])
    Pf[:, 1::2] = 0.5 * (Pf[:, :-1:2] + Pf[:, 2::2])
    return Pf[1:-1, 1:-1]


@dataclass(eq=False)
class MgHierarchy:
    levels: list  # coarse to fine
    smoother: str = "rbgs"
    nu1: int = 1
    nu2: int = 1
    omega: float = 0.8

    def __post_init__(self):
        self._coarse = scipy.linalg.cho_factor(self.levels[0].A.toarray())

    @property
    def finest(self) -> MgLevel:
        return self.levels[-1]

    def _smooth(self, lvl, P, f, sweeps, reverse):
        for _ in range(sweeps):
            if self.smoother == "rbgs":
                colours = (~lvl.red, lvl.red) if reverse else (lvl.red, ~lvl.red)
                for mask in colours:
                    new = (f + lvl.neighbours(P)) / lvl.diag
                    P[1:-1, 1:-1][mask] = new[mask]
            else:
                P[1:-1, 1:-1] += self.omega * lvl.residual(P, f) / lvl.diag

    def vcycle(self, f, k=None):
        """One V(nu1, nu2) cycle for ``A_k e = f`` from a zero guess (2-D arrays)."""
        k = len(self.levels) - 1 if k is None else k
        lvl = self.levels[k]
        if k == 0:
            x = scipy.linalg.cho_solve(self._coarse, f.ravel())
            return x.reshape(f.shape)
        P = np.zeros((lvl.grid.m + 2, lvl.grid.m + 2))
        self._smooth(lvl, P, f, self.nu1, reverse=False)
        rc = restrict(lvl.residual(P, f))
        P[1:-1, 1:-1] += prolong(self.vcycle(rc, k - 1))
        self._smooth(lvl, P, f, self.nu2, reverse=True)
        return P[1:-1, 1:-1].copy()

    def precondition(self, r):
        m = self.finest.grid.m
        return self.vcycle(r.reshape(m, m)).ravel()


def build_mg_hierarchy(grid: Grid2D, kappa, smoother: str = "rbgs", nu1: int = 1, nu2: int = 1,
                       omega: float = 0.8, averaging: str = "midpoint") -> MgHierarchy:
    """Rediscretize ``kappa`` on ``m = 3, 7, ..., grid.m`` (``grid.m = 2**l - 1``, ``l >= 2``)."""
    m = grid.m
    if m < 3 or (m + 1) & m:
        raise GridIncompatible(f"multigrid needs m = 2**l - 1 with l >= 2, got m={m}")
    if smoother not in SMOOTHERS:
        raise InvalidArgument(f"unknown smoother {smoother!r}")
    sizes = []
    while m >= 3:
        sizes.append(m)
        m = (m - 1) // 2
    levels = [MgLevel.build(make_grid(mk), kappa, averaging) for mk in reversed(sizes)]
    return MgHierarchy(levels, smoother, nu1, nu2, omega)


def mg_preconditioned_cg(A, F, hierarchy: MgHierarchy, tol: float = 1e-10, max_iter: int = 1000) -> SolveReport:
    """Flexible CG with one V-cycle per preconditioner application."""
    if A.shape[0] != hierarchy.finest.grid.N:
        raise GridIncompatible("hierarchy does not match the operator size")
    rep = solve_cg(A, F, tol, max_iter, preconditioner=hierarchy.precondition,
                   flexible=True, solver_id="mg-pcg")
    rep.extra["levels"] = [lvl.grid.m for lvl in hierarchy.levels]
    return rep


def mg_iterate(A, F, hierarchy: MgHierarchy, tol: float = 1e-10, max_iter: int = 100) -> SolveReport:
    """Stationary V-cycle iteration ``u += V(F - A u)``."""
    t0 = time.perf_counter()
    F = np.asarray(F, dtype=float)
    u = np.zeros_like(F)
    fnorm = float(np.linalg.norm(F)) or 1.0
    hist = [float(np.linalg.norm(F)) / fnorm]
    it = 0
    while hist[-1] > tol and it < max_iter:
        u += hierarchy.precondition(F - A @ u)
        it += 1
        hist.append(float(np.linalg.norm(F - A @ u)) / fnorm)
    return SolveReport(u, it, hist[-1], time.perf_counter() - t0, "mg-vcycle", hist)
