"""Uniform interior grids on the unit square and discrete norms.

Grid functions are plain 1-D ``numpy`` arrays of length ``N = m**2`` in
lexicographic order: node ``(i, j)`` (``1 <= i, j <= m``) sits at position
``(j - 1) * m + (i - 1)``, so ``i`` (the x index) runs fastest.  Reshaping a
grid function to ``(m, m)`` gives an array indexed ``[j - 1, i - 1]``.
Boundary values are identically zero and never stored.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, InvalidArgument

__all__ = [
    "Grid2D",
    "make_grid",
    "node_index",
    "node_of_index",
    "sample_field",
    "discrete_l2_norm",
    "discrete_h1_seminorm",
]


@dataclass(frozen=True)
class Grid2D:
    """Interior nodes ``x_i = i*h``, ``y_j = j*h`` for ``1 <= i, j <= m``."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgument(f"grid needs m >= 1 interior points per axis, got {self.m!r}")

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def N(self) -> int:
        return self.m * self.m

    @property
    def coords(self) -> np.ndarray:
        """1-D interior coordinates ``i*h``, ``i = 1..m``."""
        return np.arange(1, self.m + 1) * self.h

    def mesh(self):
        """Return ``(X, Y)`` as ``(m, m)`` arrays indexed ``[j-1, i-1]``."""
        x = self.coords
        return np.meshgrid(x, x, indexing="xy")

    def as_array(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (self.N,):
            raise InvalidArgument(f"grid function must have shape ({self.N},), got {v.shape}")
        return v.reshape(self.m, self.m)


def make_grid(m: int) -> Grid2D:
    if isinstance(m, bool) or np.ndim(m) != 0 or int(m) != m:
        raise InvalidArgument(f"m must be a positive integer, got {m!r}")
    return Grid2D(int(m))


def node_index(i: int, j: int, grid: Grid2D) -> int:
    """Linear index of node ``(i, j)``; both indices are 1-based."""
    m = grid.m
    if not (1 <= i <= m and 1 <= j <= m):
        raise InvalidArgument(f"node ({i}, {j}) outside 1..{m}")
    return (j - 1) * m + (i - 1)


def node_of_index(k: int, grid: Grid2D):
    if not 0 <= k < grid.N:
        raise InvalidArgument(f"index {k} outside 0..{grid.N - 1}")
    j, i = divmod(k, grid.m)
    return i + 1, j + 1


def sample_field(grid: Grid2D, field) -> np.ndarray:
    """Evaluate ``field(x, y)`` at every interior node.

    ``field`` must accept broadcastable arrays.  Raises
    :class:`EvaluationError` naming the first node where the value is not
    finite.
    """
    X, Y = grid.mesh()
    values = np.broadcast_to(np.asarray(field(X, Y), dtype=float), X.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        j, i = np.argwhere(bad)[0]
        x, y = (i + 1) * grid.h, (j + 1) * grid.h
        raise EvaluationError(
            f"field is not finite at node ({i + 1}, {j + 1}) = ({x:g}, {y:g})", point=(x, y)
        )
    return np.ascontiguousarray(values).ravel()


def _scaled(grid, v):
    # divide by max |v| first so squares neither underflow nor overflow
    v = grid.as_array(np.asarray(v, dtype=float))
    s = float(np.max(np.abs(v))) if v.size else 0.0
    return (v / s if s else v), s


def discrete_l2_norm(grid: Grid2D, v) -> float:
    """Area-weighted norm ``sqrt(h**2 * sum(v**2))``."""
    v, s = _scaled(grid, v)
    return float(s * np.sqrt(grid.h ** 2 * np.sum(v * v))) if s else 0.0


def discrete_h1_seminorm(grid: Grid2D, v) -> float:
    """Forward-difference H^1 seminorm with zero ghost values on the boundary.

    Sums ``(dv/h)**2 * h**2`` over all ``2*m*(m+1)`` grid edges, which is
    ``sqrt(h**2 * v @ L @ v)`` for the unit-coefficient five-point matrix ``L``.
    """
    v, s = _scaled(grid, v)
    if not s:
        return 0.0
    padded = np.pad(v, 1)
    dx = np.diff(padded[1:-1, :], axis=1)
    dy = np.diff(padded[:, 1:-1], axis=0)
    return float(s * np.sqrt(np.sum(dx * dx) + np.sum(dy * dy)))
