"""Five-point finite-difference assembly of ``-div(kappa grad u) = f``.

The operator is returned as a ``scipy.sparse.csr_matrix`` with sorted
column indices.  Each edge coefficient is evaluated once and written to both
off-diagonal positions, so the matrix is bitwise symmetric.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import EllipticityViolation, EvaluationError, InvalidArgument
from .grid import Grid2D, sample_field

__all__ = [
    "Problem",
    "assemble_operator",
    "assemble_rhs",
    "edge_coefficients",
    "manufactured_problem",
    "apply_operator",
    "residual",
    "write_matrix_market",
    "PROBLEMS",
]

ScalarField = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _check_kappa(values, x, y):
    bad = ~np.isfinite(values)
    if bad.any():
        k = np.flatnonzero(bad.ravel())[0]
        pt = (float(np.ravel(x)[k]), float(np.ravel(y)[k]))
        raise EvaluationError(f"kappa is not finite at {pt}", point=pt)
    bad = values <= 0
    if bad.any():
        k = np.flatnonzero(bad.ravel())[0]
        pt = (float(np.ravel(x)[k]), float(np.ravel(y)[k]))
        raise EllipticityViolation(
            f"kappa = {np.ravel(values)[k]:g} <= 0 at {pt}", point=pt
        )


def _evaluate(kappa, x, y):
    values = np.broadcast_to(np.asarray(kappa(x, y), dtype=float), np.broadcast(x, y).shape)
    _check_kappa(values, *np.broadcast_arrays(x, y))
    return values


def edge_coefficients(grid: Grid2D, kappa: ScalarField, averaging: str = "midpoint"):
    """Coefficients on the x- and y-edges of the grid.

    Returns ``(kx, ky)`` with ``kx`` of shape ``(m, m+1)`` holding
    ``kappa_{i-1/2, j}`` at ``[j-1, i-1]`` for ``i = 1..m+1`` and ``ky`` of
    shape ``(m+1, m)`` holding ``kappa_{i, j-1/2}`` at ``[j-1, i-1]``.
    Edges touching the boundary are included.
    """
    m, h = grid.m, grid.h
    nodes = np.arange(1, m + 1) * h
    if averaging == "midpoint":
        half = (np.arange(m + 1) + 0.5) * h
        kx = _evaluate(kappa, half[None, :], nodes[:, None])
        ky = _evaluate(kappa, nodes[None, :], half[:, None])
    elif averaging == "harmonic":
        full = np.arange(m + 2) * h
        X, Y = np.meshgrid(full, full, indexing="xy")
        kn = _evaluate(kappa, X, Y)
        a, b = kn[1:-1, :-1], kn[1:-1, 1:]
        kx = 2.0 * a * b / (a + b)
        a, b = kn[:-1, 1:-1], kn[1:, 1:-1]
        ky = 2.0 * a * b / (a + b)
    else:
        raise InvalidArgument(f"unknown averaging rule {averaging!r}")
    return np.ascontiguousarray(kx), np.ascontiguousarray(ky)


def assemble_operator(grid: Grid2D, kappa: ScalarField, averaging: str = "midpoint") -> sp.csr_matrix:
    """Assemble the SPD five-point matrix ``A`` (units ``kappa / h**2``).

    Row ``(i, j)`` is ``h**-2 * sum_e kappa_e (u_ij - u_neighbour)`` over the
    four edges, with boundary neighbours dropped.
    """
    m, h = grid.m, grid.h
    kx, ky = edge_coefficients(grid, kappa, averaging)
    inv_h2 = 1.0 / (h * h)
    diag = (kx[:, :-1] + kx[:, 1:] + ky[:-1, :] + ky[1:, :]).ravel() * inv_h2

    idx = np.arange(grid.N).reshape(m, m)
    # east neighbours: (i, j) -- (i+1, j)
    e_rows = idx[:, :-1].ravel()
    e_vals = -kx[:, 1:-1].ravel() * inv_h2
    # north neighbours: (i, j) -- (i, j+1)
    n_rows = idx[:-1, :].ravel()
    n_vals = -ky[1:-1, :].ravel() * inv_h2

    rows = np.concatenate([idx.ravel(), e_rows, e_rows + 1, n_rows, n_rows + m])
    cols = np.concatenate([idx.ravel(), e_rows + 1, e_rows, n_rows + m, n_rows])
    vals = np.concatenate([diag, e_vals, e_vals, n_vals, n_vals])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(grid.N, grid.N))
    A.sort_indices()
    return A


def assemble_rhs(grid: Grid2D, f: ScalarField) -> np.ndarray:
    """Collocated load vector ``F_i = f(x_i)``."""
    return sample_field(grid, f)


@dataclass(frozen=True)
class Problem:
    name: str
    kappa: ScalarField
    f: ScalarField
    u_exact: Optional[ScalarField]
    kappa_bounds: tuple


def _sinsin(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def _forcing(kappa, dkdx, dkdy):
    # f = -(k_x u_x + k_y u_y) - k * lap(u) for u = sin(pi x) sin(pi y)
    pi = np.pi

    def f(x, y):
        sx, sy = np.sin(pi * x), np.sin(pi * y)
        ux = pi * np.cos(pi * x) * sy
        uy = pi * sx * np.cos(pi * y)
        return 2 * pi ** 2 * kappa(x, y) * sx * sy - dkdx(x, y) * ux - dkdy(x, y) * uy

    return f


def _oscillatory(amplitude, freq):
    w = freq * np.pi

    def kappa(x, y):
        return 1.0 + amplitude * np.sin(w * x) * np.sin(w * y)

    def dkdx(x, y):
        return amplitude * w * np.cos(w * x) * np.sin(w * y)

    def dkdy(x, y):
        return amplitude * w * np.sin(w * x) * np.cos(w * y)

    f = _forcing(kappa, dkdx, dkdy)
    return kappa, f


def _one(x, y):
    return np.ones(np.broadcast(x, y).shape)


def _zero(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def manufactured_problem(name: str) -> Problem:
    """Manufactured problems with exact solution ``sin(pi x) sin(pi y)``.

    ``example1``: ``kappa = 1 + 0.5 sin(2 pi x) sin(2 pi y)``.
    ``example2``: ``kappa = 1 + 0.9 sin(8 pi x) sin(8 pi y)``.
    ``laplace``: ``kappa = 1`` (the constant-coefficient reference case).
    """
    if name == "example1":
        kappa, f = _oscillatory(0.5, 2)
        return Problem(name, kappa, f, _sinsin, (0.5, 1.5))
    if name == "example2":
        kappa, f = _oscillatory(0.9, 8)
        return Problem(name, kappa, f, _sinsin, (0.1, 1.9))
    if name == "laplace":
        return Problem(name, _one, _forcing(_one, _zero, _zero), _sinsin, (1.0, 1.0))
    raise InvalidArgument(f"unknown problem {name!r}; expected one of {PROBLEMS}")


PROBLEMS = ("example1", "example2", "laplace")


def apply_operator(A, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (A.shape[1],):
        raise InvalidArgument(f"operator of shape {A.shape} cannot act on vector of shape {v.shape}")
    return A @ v


def residual(A, u, F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape != (A.shape[0],):
        raise InvalidArgument(f"right-hand side shape {F.shape} does not match operator {A.shape}")
    return F - apply_operator(A, u)


def write_matrix_market(A, path) -> None:
    """Dump ``A`` as a symmetric coordinate Matrix Market file (debugging aid)."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), symmetry="symmetric", precision=17)
