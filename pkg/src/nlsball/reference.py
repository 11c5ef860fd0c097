"""Closed-form reference objects used as oracles.

Whole-space solitons in 1D, their masses, Dirichlet eigenpairs of the
Laplacian on the unit ball, Bessel J0 and its first zero, and the rescaling
of the whole-space soliton onto the ball.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .spectral import ChebGrid, Coord, interpolate

__all__ = [
    "ProblemClass",
    "Criticality",
    "Eigenpair",
    "classify",
    "gamma",
    "soliton_1d",
    "soliton_mass_1d",
    "eigenpair_1d",
    "eigenpair_2d",
    "first_eigenvalue",
    "bessel_j0",
    "bessel_j1",
    "first_bessel_root",
    "rescale_soliton_to_ball",
]


class Criticality(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class ProblemClass:
    d: int
    alpha: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d!r}")
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be a positive real, got {self.alpha!r}")

    @property
    def s_c(self) -> float:
        return self.d / 2 - 2 / self.alpha

    @property
    def coord(self) -> Coord:
        return Coord.X if self.d == 1 else Coord.S

    @property
    def lambda1(self) -> float:
        return first_eigenvalue(self.d)

    @property
    def sphere_area(self) -> float:
        """Surface measure of the unit sphere: 2 points in 1D, 2*pi in 2D."""
        return 2.0 if self.d == 1 else 2.0 * math.pi


def classify(pc: ProblemClass) -> Criticality:
    # Exact rational comparison; floats like 4.0 or 2.0 convert exactly.
    alpha = Fraction(pc.alpha).limit_denominator(10**12)
    critical = Fraction(4, pc.d)
    if alpha == critical:
        return Criticality.CRITICAL
    return Criticality.SUBCRITICAL if alpha < critical else Criticality.SUPERCRITICAL


# Lanczos approximation, g = 7, nine coefficients (Godfrey's set); relative
# error below 2e-15 on the positive real axis.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma function for real ``x`` (not a non-positive integer)."""
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def soliton_1d(alpha: float, x):
    """Whole-line ground state ``((a+2)/2)^(1/a) sech(a x / 2)^(2/a)``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=float)
    amp = ((alpha + 2) / 2) ** (1 / alpha)
    # sech computed as 2 e^{-|z|} / (1 + e^{-2|z|}) to avoid overflow.
    z = np.abs(alpha * x / 2)
    sech = 2 * np.exp(-z) / (1 + np.exp(-2 * z))
    out = amp * sech ** (2 / alpha)
    return float(out) if out.ndim == 0 else out


def soliton_mass_1d(alpha: float) -> float:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    p = 2 / alpha
    return (
        2 * math.sqrt(math.pi) / alpha
        * ((alpha + 2) / 2) ** p
        * gamma(p) / gamma(p + 0.5)
    )


@dataclass(frozen=True)
class Eigenpair:
    """Dirichlet eigenpair of ``-Laplace`` on the unit ball.

    ``evaluate`` takes x in [-1, 1] for d = 1 and the radius r for d = 2.
    """

    lam: float
    evaluate: Callable[[np.ndarray], np.ndarray]
    norm_l2: float
    d: int


def eigenpair_1d(k: int) -> Eigenpair:
    if k < 1:
        raise ValueError("k must be >= 1")
    w = math.pi * k / 2

    def chi(x):
        return np.sin(w * (np.asarray(x, dtype=float) - 1.0))

    return Eigenpair(lam=w * w, evaluate=chi, norm_l2=1.0, d=1)


def eigenpair_2d() -> Eigenpair:
    """First radial eigenpair ``J0(k01 r)``; only m = 0, n = 1 is provided."""
    k01 = first_bessel_root()
    norm = math.sqrt(math.pi) * abs(bessel_j1(k01))

    def chi(r):
        r = np.asarray(r, dtype=float)
        return np.vectorize(bessel_j0, otypes=[float])(k01 * r)

    return Eigenpair(lam=k01 * k01, evaluate=chi, norm_l2=norm, d=2)


def first_eigenvalue(d: int) -> float:
    if d == 1:
        return (math.pi / 2) ** 2
    if d == 2:
        return first_bessel_root() ** 2
    raise ValueError(f"unsupported dimension {d!r}")


# J_m by power series below the crossover, by Miller's backward recurrence
# (normalised with J0 + 2 sum J_2k = 1) above it.
_BESSEL_CROSSOVER = 12.0


def _bessel_series(m: int, x: float) -> float:
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + m))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300):
            return total


def _bessel_miller(m: int, x: float) -> float:
    top = 2 * ((int(x) + 30) // 2 + 10)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    wanted = 0.0
    for k in range(top, 0, -1):
        j_prev = 2 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds J_{k-1}
        if k - 1 == m:
            wanted = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * j_cur
        if abs(j_cur) > 1e250:
            j_next *= 1e-250
            j_cur *= 1e-250
            norm *= 1e-250
            wanted *= 1e-250
    norm += j_cur
    return wanted / norm


def bessel_j0(x: float) -> float:
    x = abs(float(x))
    if x < _BESSEL_CROSSOVER:
        return _bessel_series(0, x)
    return _bessel_miller(0, x)


def bessel_j1(x: float) -> float:
    sign = -1.0 if x < 0 else 1.0
    x = abs(float(x))
    if x < _BESSEL_CROSSOVER:
        return sign * _bessel_series(1, x)
    return sign * _bessel_miller(1, x)


_K01 = None


def first_bessel_root() -> float:
    """Smallest positive zero of J0: bisection on [2, 3], then Newton."""
    global _K01
    if _K01 is not None:
        return _K01
    lo, hi = 2.0, 3.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if bessel_j0(mid) > 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(20):
        # J0' = -J1
        step = bessel_j0(x) / -bessel_j1(x)
        x -= step
        if abs(step) < 1e-16:
            break
    _K01 = x
    return x


def rescale_soliton_to_ball(pc: ProblemClass, b: float, grid: ChebGrid, whole_space=None):
    """Nodal values of ``b^(1/alpha) R(sqrt(b) r)`` on the ball grid.

    For d = 2 the whole-space soliton is taken from ``whole_space`` (a
    profile from :func:`nlsball.groundstate.whole_space_soliton_2d`), or
    computed and cached on demand.
    """
    if b <= 0:
        raise ValueError(f"b must be positive, got {b!r}")
    a = pc.alpha
    if pc.d == 1:
        return b ** (1 / a) * soliton_1d(a, math.sqrt(b) * grid.nodes)
    if whole_space is None:
        from .groundstate import whole_space_soliton_2d

        whole_space = whole_space_soliton_2d(a)
    big_b = whole_space.b
    ratio = b / big_b
    if ratio > 1:
        raise ValueError(
            f"whole-space profile computed at B={big_b} cannot represent b={b}"
        )
    # R(rho) = B^(-1/a) Q_B(rho / sqrt(B)); rho = sqrt(b) r, so in s-coordinates
    # the stored profile is sampled at s * b / B.
    qb = interpolate(whole_space.values, whole_space.grid, grid.nodes * ratio)
    return ratio ** (1 / a) * qb
