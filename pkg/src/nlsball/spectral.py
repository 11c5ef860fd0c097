"""Chebyshev collocation primitives.

Grids, differentiation matrices, coefficient spectra and Clenshaw-Curtis
weights on either ``x in [-1, 1]`` (1D problems) or ``s = r**2 in [0, 1]``
(2D radial problems).  Nodes are always stored in descending order, so the
right endpoint is index 0 and the left endpoint is index N.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

__all__ = [
    "Coord",
    "ChebGrid",
    "CoeffSpectrum",
    "make_grid",
    "cheb_coeffs",
    "resolution_ok",
    "integrate",
    "interpolate",
]


class Coord(str, enum.Enum):
    X = "X"
    S = "S"


@dataclass(frozen=True, eq=False)
class ChebGrid:
    """Chebyshev grid of degree ``n`` in coordinate ``coord``.

    Arrays are marked read-only so a grid can be shared freely.
    """

    n: int
    coord: Coord
    nodes: np.ndarray = field(repr=False)
    d1: np.ndarray = field(repr=False)
    d2: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def interval(self) -> tuple[float, float]:
        return (-1.0, 1.0) if self.coord is Coord.X else (0.0, 1.0)

    def evaluate(self, func) -> np.ndarray:
        """Nodal values of a vectorised callable."""
        return np.asarray(func(self.nodes), dtype=float)


@dataclass(frozen=True)
class CoeffSpectrum:
    coeffs: np.ndarray

    @property
    def tail(self) -> float:
        return float(max(abs(self.coeffs[-2]), abs(self.coeffs[-1])))


def _cheb_x(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Trefethen's cheb with the negative-sum trick for the diagonal.
    k = np.arange(n + 1)
    x = np.cos(np.pi * k / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** k
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    d -= np.diag(d.sum(axis=1))
    return x, d


def _clenshaw_curtis(n: int) -> np.ndarray:
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    inner = np.arange(1, n)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n**2 - 1)
        for j in range(1, n // 2):
            v -= 2.0 * np.cos(2 * j * theta[inner]) / (4 * j**2 - 1)
        v -= np.cos(n * theta[inner]) / (n**2 - 1)
    else:
        w[0] = w[n] = 1.0 / n**2
        for j in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * j * theta[inner]) / (4 * j**2 - 1)
    w[inner] = 2.0 * v / n
    return w


def make_grid(n: int, coord: Coord | str = Coord.X) -> ChebGrid:
    """Build the Chebyshev grid of degree ``n``.

    For ``coord="S"`` the X nodes are mapped affinely by ``s = (1 + x) / 2``;
    derivatives pick up factors 2 and 4 and weights a factor 1/2.
    """
    if int(n) != n or n < 4:
        raise ValueError(f"grid degree must be an integer >= 4, got {n!r}")
    n = int(n)
    coord = Coord(coord)
    x, d = _cheb_x(n)
    d2 = d @ d
    w = _clenshaw_curtis(n)
    if coord is Coord.S:
        x = 0.5 * (1.0 + x)
        x[-1] = 0.0
        d = 2.0 * d
        d2 = 4.0 * d2
        w = 0.5 * w
    for arr in (x, d, d2, w):
        arr.setflags(write=False)
    return ChebGrid(n=n, coord=coord, nodes=x, d1=d, d2=d2, weights=w)


def _check_length(values, grid: ChebGrid) -> np.ndarray:
    values = np.asarray(values)
    if values.shape != (grid.n + 1,):
        raise ValueError(
            f"expected {grid.n + 1} nodal values, got shape {values.shape}"
        )
    return values


def cheb_coeffs(values, grid: ChebGrid) -> CoeffSpectrum:
    """Chebyshev coefficients a_0..a_N of the interpolant through ``values``.

    Uses a type-I DCT; the coefficient index refers to the grid coordinate
    (x for X grids, 2s - 1 for S grids).
    """
    values = _check_length(values, grid).astype(float)
    n = grid.n
    a = dct(values, type=1) / n
    a[0] *= 0.5
    a[n] *= 0.5
    return CoeffSpectrum(coeffs=a)


def resolution_ok(spectrum: CoeffSpectrum, threshold: float) -> bool:
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return spectrum.tail <= threshold


def integrate(values, grid: ChebGrid):
    """Clenshaw-Curtis quadrature of nodal ``values`` over the grid interval."""
    values = _check_length(values, grid)
    return values @ grid.weights


def interpolate(values, grid: ChebGrid, points) -> np.ndarray:
    """Evaluate the polynomial interpolant of nodal ``values`` at ``points``.

    Barycentric formula with the Chebyshev-Lobatto weights.
    """
    values = _check_length(values, grid)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    n = grid.n
    lam = np.ones(n + 1)
    lam[0] = lam[-1] = 0.5
    lam *= (-1.0) ** np.arange(n + 1)
    diff = pts[:, None] - grid.nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        tmp = lam / diff
        out = (tmp @ values) / tmp.sum(axis=1)
    hit_rows, hit_cols = np.nonzero(exact)
    out[hit_rows] = values[hit_cols]
    return out.reshape(np.shape(points)) if np.ndim(points) else out[0]
