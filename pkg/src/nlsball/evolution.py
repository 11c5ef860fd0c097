"""Crank-Nicolson integration of i u_t + Lap u + |u|^alpha u = 0 on the ball.

The semidiscrete system is ``u_t = i L u + i |u|^alpha u`` on the unknown
nodes of the ground-state discretisation.  Each step solves

    (1 - i h/2 L) u1 = (1 + i h/2 L) u0 + i h/2 (N(u1) + N(u0))

by a simplified Newton (fixed-point) iteration that only ever applies the
factorised constant operator ``(1 - i h/2 L)^-1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.linalg

from .groundstate import Profile, interior, linear_operator, _cached_grid
from .reference import ProblemClass
from .spectral import ChebGrid, Coord, integrate

__all__ = [
    "FieldState",
    "EvolveConfig",
    "EvolveTrace",
    "Outcome",
    "InnerDivergence",
    "cn_step",
    "evolve",
    "observables",
]

log = logging.getLogger(__name__)


class InnerDivergence(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True, eq=False)
class FieldState:
    """Complex field on the unknown nodes (boundary values implicitly zero).

    For 1D grids these are nodes 1..N-1; for 2D grids nodes 1..N, since the
    s = 0 node is not a boundary.
    """

    t: float
    values: np.ndarray = field(repr=False)
    grid: ChebGrid = field(repr=False)
    pc: ProblemClass

    @classmethod
    def from_profile(cls, profile: Profile, amplitude: float = 1.0, t: float = 0.0):
        idx = interior(profile.grid)
        vals = amplitude * profile.values[idx].astype(complex)
        return cls(t=t, values=vals, grid=profile.grid, pc=profile.pc)

    @classmethod
    def from_nodal(cls, pc: ProblemClass, full_values, t: float = 0.0):
        full_values = np.asarray(full_values)
        grid = _cached_grid(len(full_values) - 1, pc.coord)
        return cls(t=t, values=full_values[interior(grid)].astype(complex), grid=grid, pc=pc)

    def full(self) -> np.ndarray:
        out = np.zeros(self.grid.n + 1, dtype=complex)
        out[interior(self.grid)] = self.values
        return out


@dataclass(frozen=True)
class EvolveConfig:
    h: float
    t_end: float
    inner_tol: float = 1e-12
    inner_max: int = 50
    drift_target: float = 1e-6
    blowup_drift: float = 1e-3
    monitor_stride: int = 1
    max_halvings: int = 8
    blowup_linf_factor: float = 50.0
    snapshot_stride: int = 0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.blowup_drift > self.drift_target:
            raise ValueError("blowup_drift must exceed drift_target")
        if self.monitor_stride < 1:
            raise ValueError("monitor_stride must be >= 1")


@dataclass(frozen=True)
class Outcome:
    kind: str  # "Completed" | "BlowUp" | "InnerDivergence"
    t: float | None = None

    def __str__(self):
        return self.kind if self.t is None else f"{self.kind}({self.t:.6g})"


@dataclass
class EvolveTrace:
    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    linf: np.ndarray
    drift: np.ndarray
    outcome: Outcome
    h: float
    halvings: int
    snapshots: list = field(default_factory=list, repr=False)
    final_state: FieldState | None = field(default=None, repr=False)

    @property
    def mass_drift(self) -> np.ndarray:
        m0 = self.mass[0]
        return np.abs(self.mass - m0) / (abs(m0) if m0 else 1.0)

    def rows(self):
        for i in range(len(self.times)):
            yield {
                "t": float(self.times[i]),
                "mass": float(self.mass[i]),
                "energy": float(self.energy[i]),
                "linf": float(self.linf[i]),
                "drift": float(self.drift[i]),
            }


def observables(state: FieldState) -> tuple[float, float, float]:
    """Mass, energy and sup-norm of a field state."""
    g = state.grid
    a = state.pc.alpha
    u = state.full()
    du = g.d1 @ u
    abs2 = (u * np.conj(u)).real
    grad2 = (du * np.conj(du)).real
    pot = abs2 ** (0.5 * (a + 2))
    if g.coord is Coord.X:
        mass = integrate(abs2, g)
        grad_sq = integrate(grad2, g)
        potential = integrate(pot, g)
    else:
        mass = math.pi * integrate(abs2, g)
        grad_sq = math.pi * integrate(4.0 * g.nodes * grad2, g)
        potential = math.pi * integrate(pot, g)
    energy = 0.5 * grad_sq - potential / (a + 2)
    linf = float(np.sqrt(abs2.max())) if abs2.size else 0.0
    return float(mass), float(energy), linf


@lru_cache(maxsize=32)
def _operators(n: int, coord: Coord, h: float):
    grid = _cached_grid(n, coord)
    idx = interior(grid)
    lin = linear_operator(grid)[idx, idx]
    eye = np.eye(lin.shape[0])
    lhs = eye - 0.5j * h * lin
    rhs = eye + 0.5j * h * lin
    return scipy.linalg.lu_factor(lhs, check_finite=False), rhs


def _nonlinear(u, alpha):
    # |u|^alpha u from |u|^2 to keep fractional powers real.
    return (u.real**2 + u.imag**2) ** (0.5 * alpha) * u


def cn_step(state: FieldState, h: float, cfg: EvolveConfig, nonlinear: bool = True) -> FieldState:
    """Advance one Crank-Nicolson step of size ``h`` (negative ``h`` steps backwards).

    The inner iteration stops when the fixed-point increment, i.e. the CN
    residual preconditioned by the constant operator, drops below
    ``inner_tol * max(1, |u|_inf)``.
    """
    if h == 0:
        raise ValueError("h must be nonzero")
    lu, rhs_op = _operators(state.grid.n, state.grid.coord, float(h))
    u0 = state.values
    alpha = state.pc.alpha
    base = rhs_op @ u0
    if not nonlinear:
        u1 = scipy.linalg.lu_solve(lu, base, check_finite=False)
        return replace(state, t=state.t + h, values=u1)
    half = 0.5j * h
    base = base + half * _nonlinear(u0, alpha)
    scale = max(1.0, float(np.max(np.abs(u0))) if u0.size else 1.0)
    u = u0
    first = None
    for _ in range(cfg.inner_max):
        u_new = scipy.linalg.lu_solve(lu, base + half * _nonlinear(u, alpha), check_finite=False)
        inc = float(np.max(np.abs(u_new - u))) if u.size else 0.0
        u = u_new
        if not np.isfinite(inc):
            raise InnerDivergence("non-finite inner iterate", t=state.t)
        if inc <= cfg.inner_tol * scale:
            return replace(state, t=state.t + h, values=u)
        if first is None:
            first = max(inc, np.finfo(float).tiny)
        elif inc > 1e6 * first:
            raise InnerDivergence("inner iteration diverging", t=state.t)
    raise InnerDivergence(
        f"inner iteration did not converge in {cfg.inner_max} iterations", t=state.t
    )


class _Restart(Exception):
    pass


def _run(u0: FieldState, cfg: EvolveConfig, h: float, allow_restart: bool):
    span = cfg.t_end - u0.t
    n_steps = max(1, math.ceil(span / h - 1e-9))
    h = span / n_steps
    m0, e0, l0 = observables(u0)
    e_scale = abs(e0) if e0 != 0 else 1.0
    times, mass, energy, linf, drift = [u0.t], [m0], [e0], [l0], [0.0]
    snaps = [(u0.t, u0.full())] if cfg.snapshot_stride else []
    state = u0
    outcome = Outcome("Completed")
    for k in range(1, n_steps + 1):
        try:
            state = cn_step(state, h, cfg)
        except InnerDivergence as exc:
            if allow_restart:
                raise _Restart() from exc
            outcome = Outcome("InnerDivergence", exc.t)
            break
        if k == n_steps:
            # Land exactly on t_end.
            state = replace(state, t=cfg.t_end)
        if cfg.snapshot_stride and k % cfg.snapshot_stride == 0:
            snaps.append((state.t, state.full()))
        if k % cfg.monitor_stride and k != n_steps:
            continue
        m, e, linf_now = observables(state)
        dr = abs(e - e0) / e_scale
        times.append(state.t)
        mass.append(m)
        energy.append(e)
        linf.append(linf_now)
        drift.append(dr)
        if dr > cfg.blowup_drift or linf_now > cfg.blowup_linf_factor * max(l0, 1e-300) or not np.isfinite(dr):
            outcome = Outcome("BlowUp", state.t)
            break
        if dr > cfg.drift_target and allow_restart:
            raise _Restart()
    return EvolveTrace(
        times=np.array(times),
        mass=np.array(mass),
        energy=np.array(energy),
        linf=np.array(linf),
        drift=np.array(drift),
        outcome=outcome,
        h=h,
        halvings=0,
        snapshots=snaps,
        final_state=state,
    )


def evolve(u0: FieldState, cfg: EvolveConfig) -> EvolveTrace:
    """Integrate to ``cfg.t_end`` with whole-run step halving on drift violations.

    A run whose energy drift exceeds ``drift_target`` (or whose inner
    iteration fails) is restarted from scratch with ``h/2``, at most
    ``max_halvings`` times; the last allowed run is carried to the end.
    A drift above ``blowup_drift``, or a sup-norm above
    ``blowup_linf_factor`` times its initial value, stops the run as BlowUp.
    """
    if not cfg.t_end > u0.t:
        raise ValueError("t_end must exceed the initial time")
    h = cfg.h
    for halving in range(cfg.max_halvings + 1):
        try:
            trace = _run(u0, cfg, h, allow_restart=halving < cfg.max_halvings)
        except _Restart:
            log.debug("restarting with h=%g", h / 2)
            h *= 0.5
            continue
        trace.halvings = halving
        return trace
    raise AssertionError("unreachable")
