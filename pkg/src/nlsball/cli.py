"""Command-line driver: ``nlsball <command> [--flags] [--config file]``.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import ProfileFormatError, SolverError
from .evolution import EvolveConfig, FieldState, evolve
from .groundstate import continue_in_b, ground_state, pokhozhaev_report
from .io import SWEEP_COLUMNS, TRACE_COLUMNS, RunConfig, UsageError, emit_csv, parse_config, read_profile, write_profile

log = logging.getLogger("nlsball")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _b_grid(cfg: RunConfig) -> np.ndarray:
    count = int(round((cfg.b_hi - cfg.b_lo) / cfg.step))
    grid = cfg.b_lo + cfg.step * np.arange(count + 1)
    if grid[-1] < cfg.b_hi - 1e-12:
        grid = np.append(grid, cfg.b_hi)
    return grid


def _profile(cfg: RunConfig):
    if cfg.seed_profile:
        p = read_profile(cfg.seed_profile)
        if p.pc != cfg.pc:
            raise UsageError(f"seed profile is for {p.pc}, config asks for {cfg.pc}")
        if p.b == cfg.b:
            return p
        return continue_in_b(cfg.pc, p.b, cfg.b, abs(cfg.b - p.b), cfg.tol, seed_profile=p)[-1]
    return ground_state(cfg.pc, cfg.b, n=cfg.n or None, tol=cfg.tol)


def _evolve_cfg(cfg: RunConfig) -> dict:
    return dict(
        inner_tol=cfg.inner_tol,
        drift_target=cfg.drift_target,
        blowup_drift=cfg.blowup_drift,
        monitor_stride=cfg.monitor_stride,
    )


def _plot(columns_x, columns_y, rows, path, xlabel, ylabel):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    x = [r[columns_x] for r in rows]
    for col in columns_y:
        ax.plot(x, [r[col] for r in rows], label=col)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run(cfg: RunConfig) -> list[Path]:
    """Execute one command and return the files written."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pc = cfg.pc
    written = []
    cmd = cfg.command
    if cmd == "groundstate":
        p = _profile(cfg)
        prof_path = out / "groundstate.profile.txt"
        write_profile(p, prof_path)
        rep = pokhozhaev_report(p)
        row = {
            "b": p.b,
            "n": p.n,
            "mass": rep.mass,
            "energy": rep.energy,
            "boundary_deriv": rep.boundary_deriv,
            "e1": rep.e1,
            "e2": rep.e2,
            "residual_norm": p.residual_norm,
            "tail_coeff": p.tail_coeff,
        }
        written += [prof_path, emit_csv([row], tuple(row), out / "groundstate.csv", cfg)]
    elif cmd == "sweep":
        recs = ex.sweep(pc, _b_grid(cfg), tol=cfg.tol, n=cfg.n or None)
        rows = [r.as_row() for r in recs]
        written.append(emit_csv(rows, SWEEP_COLUMNS, out / "sweep.csv", cfg))
        if cfg.plot:
            _plot("b", ["mass", "energy"], rows, out / "sweep.svg", "b", "M, E")
            written.append(out / "sweep.svg")
    elif cmd in ("evolve", "resolve-demo"):
        p = _profile(cfg)
        trace = evolve(FieldState.from_profile(p, cfg.amplitude), EvolveConfig(h=cfg.h, t_end=cfg.t_end, **_evolve_cfg(cfg)))
        rows = list(trace.rows())
        written.append(emit_csv(rows, TRACE_COLUMNS, out / f"{cmd}.csv", cfg))
        print(f"outcome={trace.outcome} h={trace.h:.6g} halvings={trace.halvings}")
        if trace.outcome.kind == "InnerDivergence":
            raise SolverError(f"inner iteration diverged at t={trace.outcome.t:.6g}", b=cfg.b)
        if cfg.plot:
            _plot("t", ["linf"], rows, out / f"{cmd}.svg", "t", "sup |u|")
            written.append(out / f"{cmd}.svg")
    elif cmd == "perturb":
        v = ex.perturb_and_classify(pc, cfg.b, cfg.amplitude, cfg.t_end, h=cfg.h, n=cfg.n or None, profile=_profile(cfg), **_evolve_cfg(cfg))
        row = {
            "b": v.b,
            "amplitude": v.amplitude,
            "outcome": v.outcome.value,
            "linf_min": v.linf_min,
            "linf_max": v.linf_max,
            "period_estimate": v.period_estimate,
            "blowup_time": v.blowup_time,
        }
        written.append(emit_csv([row], tuple(row), out / "perturb.csv", cfg))
        written.append(emit_csv(list(v.trace.rows()), TRACE_COLUMNS, out / "perturb.trace.csv", cfg))
        print(f"outcome={v.outcome.value}")
    elif cmd == "branch":
        rep = ex.find_branch_point(pc, cfg.b_lo, cfg.b_hi, tol=cfg.tol, n=cfg.n or None)
        row = {"b_star": rep.b_star, "mass_at_star": rep.mass_at_star, "refinement_width": rep.refinement_width}
        written.append(emit_csv([row], tuple(row), out / "branch.csv", cfg))
    elif cmd == "converge-large":
        rows = ex.convergence_large_b(pc, list(cfg.b_list), tol=cfg.tol, n=cfg.n or None)
        written.append(emit_csv(rows, ("b", "sup_error", "abs_error"), out / "converge-large.csv", cfg))
    elif cmd == "converge-small":
        rows = ex.convergence_small_b(pc, list(cfg.b_list), tol=cfg.tol, n=cfg.n or None)
        written.append(emit_csv(rows, ("b", "l2_error"), out / "converge-small.csv", cfg))
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown command {cmd!r}")
    return written


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv, write_echo=True)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        for path in run(cfg):
            print(path)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if isinstance(exc, ProfileFormatError):
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
