"""Benchmark driver: single cases, gamma sweeps, refinement sweeps.

A :class:`RunConfig` pins one case completely; records are plain rows
with a frozen column order so repeated runs emit byte-identical CSV
except for the wall-time column.  The geometry is re-placed on every
mesh through the anchored sliver search, so a refinement sweep sees a
fixed physical domain up to the O(h) cut offset.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from unfitted_bench.forms import GAMMA_METHODS, METHODS, MethodConfig, manufactured
from unfitted_bench.geometry import box_family, circle_family, place_sliver
from unfitted_bench.mesh import BackgroundMesh
from unfitted_bench.system import Discretization, assemble_system, cond1, error_norms, solve

__all__ = [
    "GAMMA_GRID",
    "N_GRID",
    "DEFAULT_SLIVER_ETA",
    "ConfigError",
    "RunConfig",
    "BenchRecord",
    "COLUMNS",
    "run_case",
    "sweep_gamma",
    "sweep_refinement",
    "emit",
    "records_to_csv",
]

GAMMA_GRID = (1e-2, 1e-1, 1.0, 10.0, 1e2, 1e4, 1e6, 1e8)
N_GRID = (8, 16, 32, 64)
DEFAULT_SLIVER_ETA = 0.3

COLUMNS = (
    "problem",
    "bc",
    "geometry",
    "method",
    "gamma",
    "order",
    "n",
    "h",
    "dofs",
    "cond1",
    "cond1_is_estimate",
    "err_l2",
    "err_h1",
    "solver_residual",
    "wall_time_ms",
)


class ConfigError(ValueError):
    """Invalid benchmark configuration."""


@dataclass(frozen=True)
class RunConfig:
    problem: str = "poisson"
    bc: str = "nitsche"
    geometry: str = "box"
    sliver_eta: float = DEFAULT_SLIVER_ETA
    method: str = "S-Ag"
    gamma: float = 1.0
    order: int = 1
    n: int = 8
    eta0: float = 1.0
    ustar: str = "full"

    def validate(self):
        if self.problem not in ("poisson", "elasticity"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.bc not in ("nitsche", "mixed"):
            raise ConfigError(f"unknown bc {self.bc!r}")
        if self.geometry not in ("box", "circle"):
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.order not in (1, 2):
            raise ConfigError("order must be 1 or 2")
        if self.n < 4:
            raise ConfigError("need n >= 4 to resolve the geometry")
        if not 0.0 < self.sliver_eta <= 0.5:
            raise ConfigError("sliver eta target must lie in (0, 0.5]")
        if not 0.0 < self.eta0 <= 1.0:
            raise ConfigError("eta0 must lie in (0, 1]")
        if self.method in GAMMA_METHODS and self.gamma <= 0.0:
            raise ConfigError("gamma must be positive")
        if self.ustar not in ("full", "exterior"):
            raise ConfigError(f"unknown ustar mode {self.ustar!r}")

    def geometry_label(self):
        if self.sliver_eta == DEFAULT_SLIVER_ETA:
            return self.geometry
        return f"{self.geometry}@{self.sliver_eta:g}"

    def method_config(self):
        return MethodConfig(self.method, gamma=self.gamma, ustar=self.ustar)


@dataclass(frozen=True)
class BenchRecord:
    problem: str
    bc: str
    geometry: str
    method: str
    gamma: float
    order: int
    n: int
    h: float
    dofs: int
    cond1: float
    cond1_is_estimate: bool
    err_l2: float
    err_h1: float
    solver_residual: float
    wall_time_ms: float

    def row(self):
        out = []
        for name in COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out


def build_discretization(config: RunConfig):
    """Mesh, placed geometry and discretization for one config."""
    config.validate()
    if config.bc == "nitsche":
        mesh = BackgroundMesh((-1.21, -1.21), (1.21, 1.21), config.n)
    else:
        mesh = BackgroundMesh((0.0, 0.0), (1.21, 1.21), config.n)
    center = (0.0, 0.0)
    family = box_family(center) if config.geometry == "box" else circle_family(center)
    placed = place_sliver(
        family, mesh, config.sliver_eta, center=center, eta0=config.eta0
    )
    disc = Discretization(
        mesh, placed.level_set, config.problem, config.bc, config.order, config.eta0
    )
    return disc, placed


def run_case(config: RunConfig) -> BenchRecord:
    """Full pipeline for one configuration."""
    t0 = time.perf_counter()
    disc, _ = build_discretization(config)
    data = manufactured(config.problem, config.order + 1, mu=disc.mu, lam=disc.lam)
    system = assemble_system(disc, data, config.method_config())
    kappa, is_estimate = cond1(system)
    result = solve(system)
    errs = error_norms(disc, data, result.vector)
    wall = (time.perf_counter() - t0) * 1e3
    h = float((disc.mesh.upper[0] - disc.mesh.lower[0]) / config.n)
    return BenchRecord(
        problem=config.problem,
        bc=config.bc,
        geometry=config.geometry_label(),
        method=config.method,
        gamma=float(config.gamma),
        order=config.order,
        n=config.n,
        h=h,
        dofs=int(system.dim),
        cond1=float(kappa),
        cond1_is_estimate=bool(is_estimate),
        err_l2=errs.l2,
        err_h1=errs.h1,
        solver_residual=result.residual,
        wall_time_ms=wall,
    )


def sweep_gamma(config: RunConfig, gammas=GAMMA_GRID):
    """One record per gamma on a fixed mesh.

    Methods that ignore gamma run once and replicate the record across
    the grid so plots share an axis.
    """
    config.validate()
    records = []
    if config.method in GAMMA_METHODS:
        for g in gammas:
            records.append(run_case(replace(config, gamma=g)))
    else:
        base = run_case(config)
        for g in gammas:
            records.append(replace(base, gamma=float(g)))
    return records


def sweep_refinement(config: RunConfig, ns=N_GRID, gammas=(1.0,)):
    """Cross product of mesh sizes and gammas, ordered by (n, gamma)."""
    config.validate()
    if list(ns) != sorted(ns):
        raise ConfigError("mesh sizes must be increasing")
    records = []
    for n in ns:
        sized = replace(config, n=int(n))
        if config.method in GAMMA_METHODS:
            for g in gammas:
                records.append(run_case(replace(sized, gamma=g)))
        else:
            base = run_case(sized)
            for g in gammas:
                records.append(replace(base, gamma=float(g)))
    return records


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def emit(records, format, path):
    """Write records to path ('-' for stdout handled by the CLI)."""
    if not records:
        raise ValueError("no records to emit")
    if format == "csv":
        text = records_to_csv(records)
    elif format == "json":
        rows = []
        for r in records:
            rows.append({name: getattr(r, name) for name in COLUMNS})
        text = json.dumps(rows, indent=2) + "\n"
    else:
        raise ConfigError(f"unknown format {format!r}")
    with open(path, "w") as f:
        f.write(text)
    return path


def fit_loglog(x, y):
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)
