"""Profile files, CSV emission and run configuration."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ProfileFormatError
from .groundstate import Profile, _cached_grid, _tail
from .reference import ProblemClass
from .spectral import Coord

__all__ = [
    "PROFILE_VERSION",
    "COMMANDS",
    "UsageError",
    "RunConfig",
    "parse_config",
    "write_profile",
    "read_profile",
    "emit_csv",
    "SWEEP_COLUMNS",
    "TRACE_COLUMNS",
]

PROFILE_VERSION = "nlsball-profile-v1"

COMMANDS = (
    "groundstate",
    "sweep",
    "evolve",
    "perturb",
    "branch",
    "converge-large",
    "converge-small",
    "resolve-demo",
)

SWEEP_COLUMNS = ("b", "mass", "energy", "boundary_deriv", "e1", "e2", "dmass_db", "em_residual")
TRACE_COLUMNS = ("t", "mass", "energy", "linf", "drift")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    if x is None:
        return ""
    return str(x)


# --- profile files ---------------------------------------------------------

_HEADER_KEYS = ("d", "alpha", "b", "N", "coord", "residual_norm")


def write_profile(p: Profile, path) -> None:
    path = Path(path)
    lines = [PROFILE_VERSION]
    header = {
        "d": p.pc.d,
        "alpha": float(p.pc.alpha),
        "b": float(p.b),
        "N": p.n,
        "coord": p.grid.coord.value,
        "residual_norm": float(p.residual_norm),
    }
    lines += [f"{k}={_fmt(header[k])}" for k in _HEADER_KEYS]
    lines += ["%.17g" % v for v in p.values]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write profile to {path}: {exc}") from exc


def read_profile(path) -> Profile:
    """Read and re-validate a profile written by :func:`write_profile`."""
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != PROFILE_VERSION:
        found = lines[0].strip() if lines else "<empty file>"
        raise ProfileFormatError(f"expected version {PROFILE_VERSION!r}, found {found!r}", line=1)
    header = {}
    for i, key in enumerate(_HEADER_KEYS, start=2):
        if i - 1 >= len(lines):
            raise ProfileFormatError(f"missing header key {key!r}", line=i)
        k, sep, v = lines[i - 1].partition("=")
        if not sep or k.strip() != key:
            raise ProfileFormatError(f"expected header key {key!r}, got {lines[i - 1]!r}", line=i)
        header[key] = v.strip()
    try:
        d = int(header["d"])
        alpha = float(header["alpha"])
        b = float(header["b"])
        n = int(header["N"])
        residual = float(header["residual_norm"])
    except ValueError as exc:
        raise ProfileFormatError(f"malformed header value: {exc}") from exc
    if d not in (1, 2):
        raise ProfileFormatError(f"unsupported dimension d={d}", line=2)
    coord = header["coord"]
    expected_coord = "X" if d == 1 else "S"
    if coord != expected_coord:
        raise ProfileFormatError(f"coord {coord!r} inconsistent with d={d}", line=6)
    if n < 4:
        raise ProfileFormatError(f"N must be >= 4, got {n}", line=5)
    body = [ln for ln in lines[len(_HEADER_KEYS) + 1 :]]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n + 1:
        raise ProfileFormatError(f"expected N+1 = {n + 1} nodal values, found {len(body)}")
    start = len(_HEADER_KEYS) + 2
    values = np.empty(n + 1)
    for j, text in enumerate(body):
        try:
            values[j] = float(text)
        except ValueError:
            raise ProfileFormatError(f"cannot parse nodal value {text!r}", line=start + j) from None
        if not math.isfinite(values[j]):
            raise ProfileFormatError(f"non-finite nodal value {text!r}", line=start + j)
    pc = ProblemClass(d, alpha)
    grid = _cached_grid(n, Coord(coord))
    if values[0] != 0.0 or (d == 1 and values[-1] != 0.0):
        raise ProfileFormatError("profile does not vanish on the boundary")
    interior = values[1:-1] if d == 1 else values[1:]
    if np.any(interior <= 0):
        raise ProfileFormatError("profile is not strictly positive in the interior")
    return Profile(
        pc=pc,
        b=b,
        grid=grid,
        values=values,
        residual_norm=residual,
        tail_coeff=_tail(values, grid),
    )


# --- CSV -------------------------------------------------------------------


def emit_csv(records, columns, path, config: "RunConfig | None" = None) -> Path:
    """Write ``records`` (dicts or dataclasses) as CSV plus a ``.meta.txt`` sidecar."""
    path = Path(path)
    rows = []
    for rec in records:
        if dataclasses.is_dataclass(rec):
            rec = dataclasses.asdict(rec)
        missing = [c for c in columns if c not in rec]
        if missing:
            raise ValueError(f"record lacks columns {missing}")
        rows.append([_fmt(rec[c]) for c in columns])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)
        meta = [f"nlsball {__version__}", f"written {_dt.datetime.now(_dt.timezone.utc).isoformat()}"]
        if config is not None:
            meta.append(config.to_text().rstrip("\n"))
        Path(str(path) + ".meta.txt").write_text("\n".join(meta) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


# --- configuration ---------------------------------------------------------


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Parameters for one CLI invocation.

    Defaults: d=1, alpha=2, b=1, step=0.5, amplitude=1, t_end=1, h=1e-3,
    n=0 (module default per dimension), tol=1e-10, inner_tol=1e-12,
    drift_target=1e-6, blowup_drift=1e-3, monitor_stride=1, out_dir="out".
    ``b_lo``/``b_hi`` and ``b_list`` have no default and are required by the
    commands that use them.
    """

    command: str = "groundstate"
    d: int = 1
    alpha: float = 2.0
    b: float = 1.0
    b_lo: float | None = None
    b_hi: float | None = None
    step: float = 0.5
    b_list: tuple = ()
    amplitude: float = 1.0
    t_end: float = 1.0
    h: float = 1e-3
    n: int = 0
    tol: float = 1e-10
    inner_tol: float = 1e-12
    drift_target: float = 1e-6
    blowup_drift: float = 1e-3
    monitor_stride: int = 1
    out_dir: str = "out"
    seed_profile: str | None = None
    plot: bool = False

    @property
    def pc(self) -> ProblemClass:
        return ProblemClass(self.d, self.alpha)

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "b_list":
                v = ",".join(_fmt(float(x)) for x in v)
            out.append(f"{f.name}={_fmt(v)}")
        return "\n".join(out) + "\n"


_REQUIRED = {
    "groundstate": ("b",),
    "sweep": ("b_lo", "b_hi"),
    "evolve": ("b",),
    "perturb": ("b", "amplitude"),
    "branch": ("b_lo", "b_hi"),
    "converge-large": ("b_list",),
    "converge-small": ("b_list",),
    "resolve-demo": ("b", "amplitude"),
}


def _convert(name: str, raw):
    f = {f.name: f for f in fields(RunConfig)}[name]
    kind = str(f.type)
    try:
        if name == "b_list":
            if isinstance(raw, (list, tuple)):
                return tuple(float(x) for x in raw)
            return tuple(float(x) for x in str(raw).split(",") if x.strip())
        if name == "plot":
            if isinstance(raw, bool):
                return raw
            if str(raw).lower() in ("true", "1", "yes"):
                return True
            if str(raw).lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
        return str(raw)
    except ValueError:
        raise UsageError(f"invalid value {raw!r} for {name!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_arg_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nlsball", description="Ground states and dynamics of NLS on the unit ball.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", dest="config_file", default=None, help="key=value config file")
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.name == "plot":
            p.add_argument(flag, dest=f.name, action="store_const", const=True, default=None)
        else:
            p.add_argument(flag, dest=f.name, default=None)
    return p


def _read_config_file(path) -> dict:
    valid = {f.name for f in fields(RunConfig)}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        if key not in valid:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def parse_config(args, file=None, write_echo: bool = False) -> RunConfig:
    """Build a RunConfig from CLI ``args``; flags override values from ``file``."""
    ns = build_arg_parser().parse_args(list(args))
    file = file or ns.config_file
    merged = _read_config_file(file) if file else {}
    if "command" in merged and merged["command"] != ns.command:
        raise UsageError(f"config file command {merged['command']!r} conflicts with {ns.command!r}")
    merged.pop("command", None)
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        v = getattr(ns, f.name)
        if v is not None:
            merged[f.name] = v
    kwargs = {k: _convert(k, v) for k, v in merged.items()}
    cfg = RunConfig(command=ns.command, **kwargs)
    _validate(cfg, given=set(merged))
    if write_echo:
        os.makedirs(cfg.out_dir, exist_ok=True)
        Path(cfg.out_dir, f"{cfg.command}.config.txt").write_text(cfg.to_text())
    return cfg


def _validate(cfg: RunConfig, given: set) -> None:
    if cfg.d not in (1, 2):
        raise UsageError(f"d must be 1 or 2, got {cfg.d}")
    if not (cfg.alpha > 0 and math.isfinite(cfg.alpha)):
        raise UsageError(f"alpha must be positive, got {cfg.alpha}")
    for name in _REQUIRED[cfg.command]:
        if name in ("b", "amplitude") and name in given:
            continue
        if name in ("b", "amplitude"):
            raise UsageError(f"missing required parameter {name!r} for {cfg.command}")
        val = getattr(cfg, name)
        if val is None or val == ():
            raise UsageError(f"missing required parameter {name!r} for {cfg.command}")
    positive = ("step", "t_end", "h", "tol", "inner_tol", "drift_target", "blowup_drift")
    for name in positive:
        if not getattr(cfg, name) > 0:
            raise UsageError(f"{name} must be positive, got {getattr(cfg, name)}")
    if cfg.blowup_drift <= cfg.drift_target:
        raise UsageError("blowup_drift must exceed drift_target")
    if cfg.monitor_stride < 1:
        raise UsageError("monitor_stride must be >= 1")
    if cfg.n and cfg.n < 4:
        raise UsageError(f"n must be >= 4, got {cfg.n}")
    if cfg.b_lo is not None and cfg.b_hi is not None and cfg.b_hi < cfg.b_lo:
        raise UsageError("b_hi must not be below b_lo")
