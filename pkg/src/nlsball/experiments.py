"""Scripted numerical experiments on ground states and their dynamics.

Every function returns plain records (dataclasses or lists of dicts) that the
CLI writes out as CSV; nothing here touches the file system.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import Indeterminate, InnerDivergenceError, NoInteriorMax, SolverError
from .evolution import EvolveConfig, EvolveTrace, FieldState, evolve, observables
from .groundstate import (
    DEFAULT_N,
    DEFAULT_TOL,
    Profile,
    _cached_grid,
    _regrid,
    _solve_refining,
    continue_in_b,
    ground_state,
    pokhozhaev_report,
    profile_observables,
    whole_space_soliton_2d,
)
from .reference import (
    Criticality,
    ProblemClass,
    classify,
    eigenpair_1d,
    eigenpair_2d,
    rescale_soliton_to_ball,
    soliton_mass_1d,
)
from .spectral import Coord, integrate

__all__ = [
    "SweepRecord",
    "BranchReport",
    "PerturbationVerdict",
    "GateVerdict",
    "Oscillation",
    "Slope",
    "OSCILLATION_THRESHOLD",
    "fd_step",
    "sweep",
    "energy_mass_arcs",
    "find_branch_point",
    "slope_sign",
    "perturb_and_classify",
    "critical_mass_gate",
    "concentrated_bump",
    "reference_mass",
    "convergence_large_b",
    "convergence_small_b",
    "soliton_resolution_demo",
]

log = logging.getLogger(__name__)

# Relative sup-norm range separating oscillation about one ground state from
# oscillation between two states (stable 2D quintic runs reach ~6.5%, the
# two-state runs >= 25%).
OSCILLATION_THRESHOLD = 0.10


class Oscillation(str, enum.Enum):
    STABLE = "StableOscillation"
    TWO_STATE = "TwoStateOscillation"
    BLOWUP = "BlowUp"


class Slope(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


def fd_step(b: float, rel: float = 1e-3) -> float:
    return rel * max(1.0, abs(b))


@dataclass(frozen=True)
class SweepRecord:
    b: float
    mass: float
    energy: float
    boundary_deriv: float
    e1: float
    e2: float
    dmass_db: float
    em_residual: float

    def as_row(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BranchReport:
    b_star: float
    mass_at_star: float
    refinement_width: float
    evaluations: int = 0


@dataclass(frozen=True)
class PerturbationVerdict:
    b: float
    amplitude: float
    outcome: Oscillation
    linf_min: float
    linf_max: float
    period_estimate: float | None
    blowup_time: float | None = None
    trace: EvolveTrace | None = field(default=None, repr=False, compare=False)

    @property
    def relative_range(self) -> float:
        mean = 0.5 * (self.linf_min + self.linf_max)
        return (self.linf_max - self.linf_min) / mean if mean else 0.0


@dataclass(frozen=True)
class GateVerdict:
    outcome: str
    mass_u0: float
    mass_reference: float
    blowup_time: float | None
    trace: EvolveTrace = field(repr=False, compare=False)

    @property
    def above_threshold(self) -> bool:
        return self.mass_u0 > self.mass_reference


def _stepper(pc: ProblemClass, start: Profile, b_target: float, tol: float) -> Profile:
    if b_target == start.b:
        return start
    step = abs(b_target - start.b)
    return continue_in_b(pc, start.b, b_target, step, tol, seed_profile=start)[-1]


def _diff_quotients(pc, p: Profile, delta: float, tol: float):
    lo = _solve_refining(pc, p.b - delta, p.values, tol)
    hi = _solve_refining(pc, p.b + delta, p.values, tol)
    # Both stencil points must live on the same grid.
    if lo.n < hi.n:
        lo = _solve_refining(pc, p.b - delta, _regrid(lo.values, lo.grid, hi.grid), tol)
    elif hi.n < lo.n:
        hi = _solve_refining(pc, p.b + delta, _regrid(hi.values, hi.grid, lo.grid), tol)
    o_lo, o_hi = profile_observables(lo), profile_observables(hi)
    dm = (o_hi["mass"] - o_lo["mass"]) / (2 * delta)
    de = (o_hi["energy"] - o_lo["energy"]) / (2 * delta)
    return dm, de


def sweep(
    pc: ProblemClass,
    b_grid,
    tol: float = DEFAULT_TOL,
    n: int | None = None,
    rel_delta: float = 1e-3,
    profiles_out: list | None = None,
) -> list[SweepRecord]:
    """Continuation along ``b_grid`` with identity residuals and slope data.

    ``dmass_db`` and the energy-mass residual come from centred differences
    with auxiliary solves at ``b +- rel_delta * max(1, |b|)``.
    """
    b_grid = [float(b) for b in b_grid]
    if any(b2 < b1 for b1, b2 in zip(b_grid, b_grid[1:])):
        raise ValueError("b_grid must be sorted ascending")
    if not b_grid:
        return []
    lam1 = pc.lambda1
    if b_grid[0] <= -lam1:
        raise ValueError(f"all b must exceed -lambda_1 = {-lam1:.15g}")
    records = []
    current = None
    for b in b_grid:
        try:
            current = ground_state(pc, b, n=n, tol=tol) if current is None else _stepper(pc, current, b, tol)
            delta = fd_step(b, rel_delta)
            if b - delta <= -lam1:
                delta = 0.5 * (b + lam1)
            dm, de = _diff_quotients(pc, current, delta, tol)
        except SolverError as exc:
            if exc.b is None:
                exc.b = b
            raise
        rep = pokhozhaev_report(current)
        records.append(
            SweepRecord(
                b=b,
                mass=rep.mass,
                energy=rep.energy,
                boundary_deriv=rep.boundary_deriv,
                e1=rep.e1,
                e2=rep.e2,
                dmass_db=dm,
                em_residual=abs(de + 0.5 * b * dm),
            )
        )
        if profiles_out is not None:
            profiles_out.append(current)
    return records


def energy_mass_arcs(records: list[SweepRecord]):
    """Split a sweep at its mass maximum into (lower-b arc, upper-b arc).

    Each arc is an array of (mass, energy) rows in increasing b.
    """
    if not records:
        return np.empty((0, 2)), np.empty((0, 2))
    masses = np.array([r.mass for r in records])
    k = int(np.argmax(masses))
    rows = np.array([(r.mass, r.energy) for r in records])
    return rows[: k + 1], rows[k:]


def find_branch_point(
    pc: ProblemClass,
    b_lo: float,
    b_hi: float,
    width: float = 1e-3,
    scan_points: int = 9,
    tol: float = DEFAULT_TOL,
    n: int | None = None,
) -> BranchReport:
    """Golden-section maximisation of b -> M(Q_b) on ``[b_lo, b_hi]``."""
    if classify(pc) is not Criticality.SUPERCRITICAL:
        raise ValueError("branch points exist only in the supercritical case")
    if not b_hi > b_lo:
        raise ValueError("need b_lo < b_hi")
    solved: dict[float, Profile] = {}

    def mass_at(b: float) -> float:
        if b not in solved:
            if solved:
                nearest = min(solved, key=lambda bb: abs(bb - b))
                solved[b] = _stepper(pc, solved[nearest], b, tol)
            else:
                solved[b] = ground_state(pc, b, n=n, tol=tol)
        return solved[b].mass

    scan = np.linspace(b_lo, b_hi, scan_points)
    masses = np.array([mass_at(float(b)) for b in scan])
    k = int(np.argmax(masses))
    if k == 0 or k == len(scan) - 1:
        raise NoInteriorMax(
            f"mass on [{b_lo}, {b_hi}] peaks at an endpoint (b={scan[k]})", b=float(scan[k])
        )
    a, c = float(scan[k - 1]), float(scan[k + 1])
    inv_phi = (math.sqrt(5) - 1) / 2
    x1 = c - inv_phi * (c - a)
    x2 = a + inv_phi * (c - a)
    f1, f2 = mass_at(x1), mass_at(x2)
    while c - a > width:
        if f1 > f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - inv_phi * (c - a)
            f1 = mass_at(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (c - a)
            f2 = mass_at(x2)
    b_star = 0.5 * (a + c)
    return BranchReport(
        b_star=b_star,
        mass_at_star=mass_at(b_star),
        refinement_width=c - a,
        evaluations=len(solved),
    )


def slope_sign(
    pc: ProblemClass,
    b: float,
    tol: float = DEFAULT_TOL,
    n: int | None = None,
    rel_delta: float = 1e-3,
    profile: Profile | None = None,
) -> Slope:
    """Sign of dM/db from a centred difference.

    The stencil error is estimated by comparing steps delta and 2 delta;
    a derivative smaller than ten times that estimate is Indeterminate.
    """
    p = profile or ground_state(pc, b, n=n, tol=tol)
    delta = fd_step(b, rel_delta)
    if b - 2 * delta <= -pc.lambda1:
        delta = 0.25 * (b + pc.lambda1)
    d1, _ = _diff_quotients(pc, p, delta, tol)
    d2, _ = _diff_quotients(pc, p, 2 * delta, tol)
    err = abs(d2 - d1) + 1e-12 * abs(p.mass) / delta
    if abs(d1) < 10 * err:
        raise Indeterminate(f"|dM/db|={abs(d1):.3e} below 10x stencil error {err:.3e}", b=b)
    return Slope.POSITIVE if d1 > 0 else Slope.NEGATIVE


def _local_maxima_times(times, values) -> np.ndarray:
    v = np.asarray(values)
    if len(v) < 3:
        return np.empty(0)
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])
    return np.asarray(times)[1:-1][inner]


def perturb_and_classify(
    pc: ProblemClass,
    b: float,
    amplitude: float,
    t_end: float,
    h: float = 1e-3,
    n: int | None = None,
    profile: Profile | None = None,
    threshold: float = OSCILLATION_THRESHOLD,
    **cfg_kwargs,
) -> PerturbationVerdict:
    """Evolve ``amplitude * Q_b`` and classify the sup-norm dynamics."""
    if not amplitude > 0:
        raise ValueError("amplitude must be positive")
    p = profile or ground_state(pc, b, n=n)
    cfg = EvolveConfig(h=h, t_end=t_end, **cfg_kwargs)
    trace = evolve(FieldState.from_profile(p, amplitude), cfg)
    if trace.outcome.kind == "InnerDivergence":
        raise InnerDivergenceError(
            f"time integration failed at t={trace.outcome.t:.6g}", b=b
        )
    lo, hi = float(trace.linf.min()), float(trace.linf.max())
    maxima = _local_maxima_times(trace.times, trace.linf)
    period = float(np.mean(np.diff(maxima))) if len(maxima) >= 3 else None
    if trace.outcome.kind == "BlowUp":
        outcome = Oscillation.BLOWUP
    else:
        mean = float(trace.linf.mean())
        rel = (hi - lo) / mean if mean > 0 else 0.0
        outcome = Oscillation.STABLE if rel < threshold else Oscillation.TWO_STATE
    return PerturbationVerdict(
        b=float(b),
        amplitude=float(amplitude),
        outcome=outcome,
        linf_min=lo,
        linf_max=hi,
        period_estimate=period,
        blowup_time=trace.outcome.t if outcome is Oscillation.BLOWUP else None,
        trace=trace,
    )


def reference_mass(pc: ProblemClass) -> float:
    """Mass of the whole-space ground state (closed form in 1D, computed in 2D)."""
    if pc.d == 1:
        return soliton_mass_1d(pc.alpha)
    return whole_space_soliton_2d(pc.alpha).mass


def concentrated_bump(pc: ProblemClass, mass: float, width_b: float = 25.0, n: int | None = None) -> FieldState:
    """Soliton-shaped bump of width ``1/sqrt(width_b)`` scaled to ``mass``.

    The rescaled whole-space soliton minus its boundary value, so it vanishes
    on the sphere; used as above-threshold initial data in critical cases.
    """
    n = n or DEFAULT_N[pc.d]
    grid = _cached_grid(n, pc.coord)
    shape = rescale_soliton_to_ball(pc, width_b, grid)
    shape = shape - shape[0]
    shape[0] = 0.0
    if pc.coord is Coord.X:
        shape[-1] = 0.0
    state = FieldState.from_nodal(pc, shape)
    m, _, _ = observables(state)
    return FieldState.from_nodal(pc, shape * math.sqrt(mass / m))


def critical_mass_gate(
    pc: ProblemClass,
    u0: FieldState,
    t_end: float = 1.0,
    h: float = 1e-3,
    **cfg_kwargs,
) -> GateVerdict:
    """Evolve critical-case data and report it against the reference mass."""
    if classify(pc) is not Criticality.CRITICAL:
        raise ValueError("critical_mass_gate needs a mass-critical problem")
    trace = evolve(u0, EvolveConfig(h=h, t_end=t_end, **cfg_kwargs))
    if trace.outcome.kind == "InnerDivergence":
        raise InnerDivergenceError(f"time integration failed at t={trace.outcome.t:.6g}")
    return GateVerdict(
        outcome=trace.outcome.kind,
        mass_u0=observables(u0)[0],
        mass_reference=reference_mass(pc),
        blowup_time=trace.outcome.t,
        trace=trace,
    )


def _profiles_along(pc, b_list, tol, n):
    out = []
    current = None
    for b in sorted(b_list):
        current = ground_state(pc, b, n=n, tol=tol) if current is None else _stepper(pc, current, b, tol)
        out.append(current)
    order = np.argsort(np.argsort(b_list))
    return [out[i] for i in order]


def convergence_large_b(pc: ProblemClass, b_list, tol: float = DEFAULT_TOL, n: int | None = None) -> list[dict]:
    """Relative sup-norm distance between Q_b and the rescaled whole-space soliton."""
    if any(b <= 0 for b in b_list):
        raise ValueError("all b must be positive")
    rows = []
    for b, p in zip(b_list, _profiles_along(pc, list(b_list), tol, n)):
        target = rescale_soliton_to_ball(pc, b, p.grid)
        diff = float(np.max(np.abs(p.values - target)))
        rows.append({"b": float(b), "sup_error": diff / float(np.max(np.abs(target))), "abs_error": diff})
    return rows


def _l2(values, grid) -> float:
    w = integrate(values * values, grid)
    return math.sqrt(math.pi * w) if grid.coord is Coord.S else math.sqrt(w)


def convergence_small_b(pc: ProblemClass, b_list, tol: float = DEFAULT_TOL, n: int | None = None) -> list[dict]:
    """L2 distance between normalised Q_b and the normalised first eigenfunction."""
    lam1 = pc.lambda1
    if any(not (-lam1 < b < -lam1 + 1) for b in b_list):
        raise ValueError("all b must lie in (-lambda_1, -lambda_1 + 1)")
    pair = eigenpair_1d(1) if pc.d == 1 else eigenpair_2d()
    rows = []
    for b, p in zip(b_list, _profiles_along(pc, list(b_list), tol, n)):
        coord = p.grid.nodes if pc.d == 1 else np.sqrt(p.grid.nodes)
        chi = np.asarray(pair.evaluate(coord))
        chi = chi * np.sign(chi[len(chi) // 2])
        chi[0] = 0.0
        q = p.values / _l2(p.values, p.grid)
        chi = chi / _l2(chi, p.grid)
        rows.append({"b": float(b), "l2_error": _l2(q - chi, p.grid)})
    return rows


def soliton_resolution_demo(
    pc: ProblemClass,
    b: float,
    amplitude: float,
    t_end: float,
    h: float = 1e-3,
    n: int | None = None,
    **cfg_kwargs,
) -> EvolveTrace:
    """Evolve small data ``amplitude * Q_b`` and return its trace."""
    p = ground_state(pc, b, n=n)
    trace = evolve(FieldState.from_profile(p, amplitude), EvolveConfig(h=h, t_end=t_end, **cfg_kwargs))
    if trace.outcome.kind == "InnerDivergence":
        raise InnerDivergenceError(f"time integration failed at t={trace.outcome.t:.6g}", b=b)
    return trace
