"""Ground states of -Lap Q + b Q - |Q|^alpha Q = 0 on the unit ball.

1D problems are discretised on x in [-1, 1] with both endpoints trimmed.
2D radial problems use s = r**2, where the equation reads

    4 s Q_ss + 4 Q_s - b Q + Q^(alpha+1) = 0,

and only the s = 1 row is trimmed; the s = 0 row is kept since the
operator is degenerate there.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NonConvergence, SignChange, UnderResolved
from .reference import (
    ProblemClass,
    bessel_j0,
    classify,
    Criticality,
    first_bessel_root,
)
from .spectral import ChebGrid, Coord, cheb_coeffs, integrate, interpolate, make_grid

__all__ = [
    "Profile",
    "IdentityReport",
    "WholeSpaceSoliton",
    "DEFAULT_N",
    "MAX_N",
    "linear_operator",
    "interior",
    "default_seed",
    "solve",
    "ground_state",
    "continue_in_b",
    "pokhozhaev_report",
    "profile_observables",
    "whole_space_soliton_2d",
]

log = logging.getLogger(__name__)

DEFAULT_N = {1: 128, 2: 160}
MAX_N = 512
DEFAULT_TOL = 1e-10
RESOLUTION_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Profile:
    pc: ProblemClass
    b: float
    grid: ChebGrid = field(repr=False)
    values: np.ndarray = field(repr=False)
    residual_norm: float = 0.0
    residual_floor: float = 0.0
    iterations: int = 0
    tail_coeff: float = 0.0
    residual_history: tuple = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def peak(self) -> float:
        return float(np.max(self.values))

    @property
    def mass(self) -> float:
        return profile_observables(self)["mass"]

    @property
    def energy(self) -> float:
        return profile_observables(self)["energy"]


@dataclass(frozen=True)
class IdentityReport:
    """Pokhozhaev residuals and the quantities entering them.

    ``boundary_term`` is the sphere-weighted squared boundary derivative:
    ``2 pi Q_r(1)^2`` in 2D and ``Q'(1)^2 + Q'(-1)^2`` in 1D.
    """

    e1: float
    e2: float
    mass: float
    energy: float
    boundary_deriv: float
    grad_sq: float
    potential: float
    boundary_term: float
    energy_boundary_form: float
    critical_energy_quarter: float | None = None
    critical_energy_sphere: float | None = None


def linear_operator(grid: ChebGrid) -> np.ndarray:
    """Full (N+1)x(N+1) radial Laplacian in the grid coordinate."""
    if grid.coord is Coord.X:
        return np.array(grid.d2)
    s = grid.nodes
    # Q_rr + Q_r / r with s = r^2
    return 4.0 * s[:, None] * grid.d2 + 4.0 * grid.d1


def interior(grid: ChebGrid) -> slice:
    """Indices of the unknowns: 1..N-1 for X grids, 1..N for S grids."""
    return slice(1, grid.n) if grid.coord is Coord.X else slice(1, grid.n + 1)


def _power(q, alpha):
    # |q|^alpha q, real-valued for any alpha > 0.
    return np.abs(q) ** alpha * q


def _grid_for(pc: ProblemClass, n: int) -> ChebGrid:
    return _cached_grid(n, pc.coord)


_GRIDS: dict = {}


def _cached_grid(n: int, coord: Coord) -> ChebGrid:
    key = (n, Coord(coord))
    if key not in _GRIDS:
        _GRIDS[key] = make_grid(n, coord)
    return _GRIDS[key]


def _grid_from_values(pc: ProblemClass, values) -> ChebGrid:
    n = len(values) - 1
    return _cached_grid(n, pc.coord)


def default_seed(pc: ProblemClass, b: float, grid: ChebGrid) -> np.ndarray:
    """First-eigenfunction initial iterate with amplitude ``(b + lambda_1)^(1/alpha)``."""
    lam1 = pc.lambda1
    if b <= -lam1:
        raise ValueError(f"b must exceed -lambda_1 = {-lam1:.15g}, got {b!r}")
    amp = (b + lam1) ** (1.0 / pc.alpha)
    if pc.d == 1:
        shape = np.sin(np.pi * (grid.nodes + 1.0) / 2.0)
        shape[0] = shape[-1] = 0.0
    else:
        k01 = first_bessel_root()
        r = np.sqrt(grid.nodes)
        shape = np.array([bessel_j0(k01 * ri) for ri in r])
        shape[0] = 0.0
    return amp * shape


def _roundoff_floor(abs_lin, q, nonlin) -> float:
    # Rounding error bound of the residual evaluation; with N^4-sized entries
    # in the second-derivative rows this can exceed the requested tolerance.
    eps = np.finfo(float).eps
    growth = math.sqrt(len(q))
    return float(growth * eps * np.max(abs_lin @ np.abs(q) + np.abs(nonlin)))


def _tail(values, grid: ChebGrid) -> float:
    return cheb_coeffs(values, grid).tail


def solve(
    pc: ProblemClass,
    b: float,
    seed,
    tol: float = DEFAULT_TOL,
    max_iter: int = 100,
    check_resolution: bool = True,
) -> Profile:
    """Newton iteration for the trimmed collocation system.

    ``seed`` holds N+1 nodal values; the grid degree is taken from its length.
    The iteration stops once the residual max-norm is below ``tol`` and one
    further correction has been applied.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    seed = np.asarray(seed, dtype=float)
    grid = _grid_from_values(pc, seed)
    if seed[0] != 0.0 or (grid.coord is Coord.X and seed[-1] != 0.0):
        raise ValueError("seed must vanish on the boundary")
    if b <= -pc.lambda1:
        raise ValueError(f"b must exceed -lambda_1 = {-pc.lambda1:.15g}, got {b!r}")

    idx = interior(grid)
    size = len(grid.nodes[idx])
    lin = linear_operator(grid)[idx, idx] - b * np.eye(size)
    abs_lin = np.abs(lin)
    alpha = pc.alpha
    q = seed[idx].copy()
    history = []
    converged_at = None
    floor = 0.0
    for it in range(1, max_iter + 1):
        nonlin = _power(q, alpha)
        res = lin @ q + nonlin
        rnorm = float(np.max(np.abs(res)))
        history.append(rnorm)
        if not np.isfinite(rnorm):
            break
        floor = _roundoff_floor(abs_lin, q, nonlin)
        if converged_at is not None:
            break
        if rnorm <= max(tol, floor):
            # One polishing step past the threshold; quadratic convergence
            # pushes the error to round-off.
            converged_at = it
        jac = lin + np.diag((alpha + 1.0) * np.abs(q) ** alpha)
        try:
            # Acceptance is decided by the residual, not by LAPACK's rcond estimate.
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                q = q - scipy.linalg.solve(jac, res, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NonConvergence(f"singular Newton Jacobian: {exc}", b=b) from exc
    else:
        nonlin = _power(q, alpha)
        history.append(float(np.max(np.abs(lin @ q + nonlin))))
        floor = _roundoff_floor(abs_lin, q, nonlin)

    final = history[-1]
    if converged_at is None or not np.isfinite(final) or final > max(tol, floor):
        raise NonConvergence(
            f"Newton did not converge in {max_iter} iterations "
            f"(last residual {history[-1]:.3e})",
            b=b,
        )
    values = np.zeros(grid.n + 1)
    values[idx] = q
    if np.any(q <= 0.0):
        raise SignChange(
            f"converged solution is not positive (min {q.min():.3e})", b=b
        )
    tail = _tail(values, grid)
    if check_resolution and tail > RESOLUTION_RTOL * np.max(np.abs(values)):
        raise UnderResolved(
            f"Chebyshev tail {tail:.2e} above {RESOLUTION_RTOL:g} * max|Q| at N={grid.n}",
            b=b,
            tail=tail,
        )
    return Profile(
        pc=pc,
        b=float(b),
        grid=grid,
        values=values,
        residual_norm=final,
        residual_floor=floor,
        iterations=len(history) - 1,
        tail_coeff=tail,
        residual_history=tuple(history),
    )


def _regrid(values, old: ChebGrid, new: ChebGrid) -> np.ndarray:
    out = interpolate(values, old, new.nodes)
    out[0] = 0.0
    if new.coord is Coord.X:
        out[-1] = 0.0
    return out


def _solve_refining(pc, b, seed, tol, max_n=MAX_N):
    """``solve`` with automatic doubling of N while under-resolved."""
    while True:
        try:
            return solve(pc, b, seed, tol)
        except UnderResolved:
            grid = _grid_from_values(pc, seed)
            if 2 * grid.n > max_n:
                raise
            finer = _cached_grid(2 * grid.n, pc.coord)
            log.debug("refining N=%d -> %d at b=%g", grid.n, finer.n, b)
            seed = _regrid(seed, grid, finer)


def continue_in_b(
    pc: ProblemClass,
    b_start: float,
    b_end: float,
    step: float,
    tol: float = DEFAULT_TOL,
    n: int | None = None,
    seed_profile: Profile | None = None,
    max_halvings: int = 6,
) -> list[Profile]:
    """Trace the ground-state branch from ``b_start`` to ``b_end``.

    Each converged profile seeds the next solve.  A failed step is retried
    with the local step halved, at most ``max_halvings`` times.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    lam1 = pc.lambda1
    for bb in (b_start, b_end):
        if bb <= -lam1:
            raise ValueError(f"b must exceed -lambda_1 = {-lam1:.15g}, got {bb!r}")
    n = n or DEFAULT_N[pc.d]
    if seed_profile is not None:
        seed = seed_profile.values
        if seed_profile.b != b_start:
            seed_profile = None
    else:
        seed = default_seed(pc, b_start, _grid_for(pc, n))
    first = seed_profile or _solve_refining(pc, b_start, seed, tol)
    profiles = [first]
    direction = 1.0 if b_end >= b_start else -1.0
    b = b_start
    current = first
    while direction * (b_end - b) > 1e-12 * max(1.0, abs(b_end)):
        local = step
        for attempt in range(max_halvings + 1):
            b_next = b + direction * local
            if direction * (b_next - b_end) > 0:
                b_next = b_end
            try:
                current_next = _solve_refining(pc, b_next, current.values, tol)
                break
            except (NonConvergence, SignChange) as exc:
                if attempt == max_halvings:
                    raise type(exc)(
                        f"continuation failed after {max_halvings} step halvings: {exc}",
                        b=b_next,
                    ) from exc
                local *= 0.5
        b = b_next
        current = current_next
        profiles.append(current)
    return profiles


def ground_state(
    pc: ProblemClass,
    b: float,
    n: int | None = None,
    tol: float = DEFAULT_TOL,
    trace_step: float | None = None,
) -> Profile:
    """Ground state at ``b``: cold start first, tracing from near -lambda_1 if that fails."""
    n = n or DEFAULT_N[pc.d]
    grid = _grid_for(pc, n)
    try:
        return _solve_refining(pc, b, default_seed(pc, b, grid), tol)
    except (NonConvergence, SignChange):
        pass
    b0 = min(b, 0.0) if b > -pc.lambda1 + 1.0 else b
    b0 = max(b0, -pc.lambda1 + 0.5)
    if b0 >= b:
        raise NonConvergence("cold start failed and no tracing route available", b=b)
    step = trace_step or max(0.25, (b - b0) / 40)
    return continue_in_b(pc, b0, b, step, tol, n=n)[-1]


def profile_observables(p: Profile) -> dict:
    """Mass, gradient norm, potential term, energy and boundary derivatives."""
    g = p.grid
    q = p.values
    a = p.pc.alpha
    dq = g.d1 @ q
    pot_density = np.abs(q) ** (a + 2)
    if g.coord is Coord.X:
        mass = integrate(q * q, g)
        grad_sq = integrate(dq * dq, g)
        potential = integrate(pot_density, g)
        boundary_deriv = dq[0]
        boundary_term = dq[0] ** 2 + dq[-1] ** 2
    else:
        s = g.nodes
        mass = math.pi * integrate(q * q, g)
        grad_sq = math.pi * integrate(4.0 * s * dq * dq, g)
        potential = math.pi * integrate(pot_density, g)
        boundary_deriv = 2.0 * dq[0]
        boundary_term = 2.0 * math.pi * boundary_deriv**2
    energy = 0.5 * grad_sq - potential / (a + 2)
    return {
        "mass": float(mass),
        "grad_sq": float(grad_sq),
        "potential": float(potential),
        "energy": float(energy),
        "boundary_deriv": float(boundary_deriv),
        "boundary_term": float(boundary_term),
    }


def pokhozhaev_report(p: Profile) -> IdentityReport:
    """Residuals of the gradient and energy forms of the Pokhozhaev identities."""
    obs = profile_observables(p)
    d, a, b = p.pc.d, p.pc.alpha, p.b
    denom = a * (2 - d) + 4
    mass, bt = obs["mass"], obs["boundary_term"]
    e1 = obs["grad_sq"] - (d * a * b * mass + (a + 2) * bt) / denom
    energy_bf = ((d * a - 4) * b * mass + a * bt) / (2 * denom)
    e2 = obs["energy"] - energy_bf
    quarter = sphere = None
    if classify(p.pc) is Criticality.CRITICAL:
        quarter = 0.25 * obs["boundary_deriv"] ** 2
        sphere = 0.25 * bt
    return IdentityReport(
        e1=float(e1),
        e2=float(e2),
        mass=mass,
        energy=obs["energy"],
        boundary_deriv=obs["boundary_deriv"],
        grad_sq=obs["grad_sq"],
        potential=obs["potential"],
        boundary_term=bt,
        energy_boundary_form=float(energy_bf),
        critical_energy_quarter=quarter,
        critical_energy_sphere=sphere,
    )


@dataclass(frozen=True)
class WholeSpaceSoliton:
    """Whole-plane ground state approximated from the ball solution at large b.

    ``R(rho) = B^(-1/alpha) Q_B(rho / sqrt(B))`` for ``rho <= sqrt(B)``.
    """

    alpha: float
    profile: Profile

    @property
    def b(self) -> float:
        return self.profile.b

    @property
    def grid(self) -> ChebGrid:
        return self.profile.grid

    @property
    def values(self) -> np.ndarray:
        return self.profile.values

    @property
    def radius(self) -> float:
        return math.sqrt(self.b)

    @property
    def mass(self) -> float:
        # Mass scales by B^(d/2 - 2/alpha) under the rescaling, d = 2.
        return self.b ** (1.0 - 2.0 / self.alpha) * self.profile.mass

    @property
    def peak(self) -> float:
        return self.b ** (-1.0 / self.alpha) * self.profile.peak

    def evaluate(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        s = np.clip((rho / self.radius) ** 2, 0.0, 1.0)
        vals = interpolate(self.values, self.grid, s)
        return self.b ** (-1.0 / self.alpha) * np.where(rho >= self.radius, 0.0, vals)


_WHOLE_SPACE_CACHE: dict = {}


def whole_space_soliton_2d(alpha: float, big_b: float = 400.0, n: int = 256) -> WholeSpaceSoliton:
    key = (float(alpha), float(big_b))
    if key not in _WHOLE_SPACE_CACHE:
        pc = ProblemClass(2, alpha)
        profile = ground_state(pc, big_b, n=n)
        _WHOLE_SPACE_CACHE[key] = WholeSpaceSoliton(alpha=float(alpha), profile=profile)
    return _WHOLE_SPACE_CACHE[key]
