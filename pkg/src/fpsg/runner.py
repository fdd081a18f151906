"""Execution of run configurations and CSV output."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .assembly import SGDiscretization
from .basis import build_basis, default_quadrature_size, mean_and_variance
from .config import RunConfig
from .diagnostics import DiagnosticRecord, diagnose
from .errors import ConfigurationError
from .grid import VelocityGrid
from .integrators import simulate, step_count
from .quasi_equilibrium import compute_fq

log = logging.getLogger(__name__)

DIAGNOSTICS_FILE = "diagnostics.csv"
SNAPSHOT_FILE = "snapshot.csv"
REFERENCE_FILE = "reference.npz"
SUMMARY_FILE = "summary.csv"


def _fmt(x) -> str:
    return "%.17g" % x


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) if not isinstance(x, str) else x for x in row) + "\n")


def build_discretization(cfg: RunConfig, M: int | None = None, N: int | None = None) -> SGDiscretization:
    M = cfg.M if M is None else M
    N = cfg.N if N is None else N
    nq = cfg.Nq if (cfg.Nq is not None and M == cfg.M) else default_quadrature_size(M, cfg.model.discontinuous)
    nq = max(nq, M + 1)
    grid = VelocityGrid(cfg.domain[0], cfg.domain[1], N)
    return SGDiscretization(cfg.model, build_basis(M, nq), grid, fq_quadrature=cfg.fq_quadrature)


def record_times(cfg: RunConfig) -> list[float]:
    n = step_count(cfg.T, cfg.dt)
    steps = sorted({round(t / cfg.dt) for t in cfg.output_times} | {n})
    return [k * cfg.dt for k in steps]


def exact_fields(cfg: RunConfig, disc: SGDiscretization, times) -> list[np.ndarray]:
    """Chaos projections of the closed-form classical solution."""
    if cfg.model.name != "classical":
        raise ConfigurationError("the closed-form solution exists only for the classical model")
    exact = cfg.model.exact_solution()
    return [disc.coeffs(exact.nodal(disc.z, disc.grid, t)) for t in times]


def solve(cfg: RunConfig, M: int | None = None, N: int | None = None, scheme: str | None = None):
    """Run (or, for ``source="exact"``, project) the configuration; returns (disc, times, fields)."""
    disc = build_discretization(cfg, M, N)
    times = record_times(cfg)
    if cfg.source == "exact":
        return disc, times, exact_fields(cfg, disc, times)
    traj = simulate(
        disc, cfg.T, cfg.dt, scheme or cfg.scheme, method=cfg.integrator, output_times=cfg.output_times
    )
    return disc, traj.times, traj.fields


@dataclass
class Reference:
    grid: VelocityGrid
    times: list
    fields: list

    def at(self, t: float) -> np.ndarray:
        for tr, f in zip(self.times, self.fields):
            if abs(tr - t) <= 1e-9 * max(1.0, t):
                return f
        raise ConfigurationError(f"reference has no field at t={t}")

    def save(self, path: Path) -> None:
        np.savez(
            path,
            times=np.array(self.times),
            fields=np.array(self.fields),
            domain=np.array([self.grid.v_min, self.grid.v_max]),
            n=self.grid.n,
        )

    @classmethod
    def load(cls, path) -> "Reference":
        with np.load(path) as data:
            grid = VelocityGrid(float(data["domain"][0]), float(data["domain"][1]), int(data["n"]))
            return cls(grid, list(data["times"]), list(data["fields"]))


def build_reference(cfg: RunConfig, times, cache_dir: Path | None = None) -> Reference | None:
    spec = cfg.reference
    if spec is None:
        return None
    if spec.kind == "path":
        return Reference.load(spec.path)
    if spec.kind == "exact":
        disc = build_discretization(cfg, M=spec.M)
        return Reference(disc.grid, list(times), exact_fields(cfg, disc, times))
    cache = None if cache_dir is None else cache_dir / REFERENCE_FILE
    if cache is not None and cache.exists():
        ref = Reference.load(cache)
        if all(any(abs(t - r) <= 1e-9 * max(1.0, t) for r in ref.times) for t in times):
            return ref
    disc, rtimes, fields = solve(cfg, M=spec.M, N=spec.N, scheme=spec.scheme)
    ref = Reference(disc.grid, rtimes, fields)
    if cache is not None:
        ref.save(cache)
    return ref


def equilibrium_for_entropy(disc: SGDiscretization, c0) -> np.ndarray | None:
    """Nodal equilibrium for the entropy column; only for solution-independent drifts."""
    if not disc.model.linear:
        return None
    return compute_fq(disc.model, disc.z, disc.grid, disc.nodal(c0), disc.fq_quadrature)


def run_one(cfg: RunConfig, out_dir: Path, exact_columns: bool = False) -> list[DiagnosticRecord]:
    """Run one configuration and write its diagnostics and final snapshot."""
    out_dir.mkdir(parents=True, exist_ok=True)
    disc, times, fields = solve(cfg)
    ref = build_reference(cfg, times, out_dir)
    eq = equilibrium_for_entropy(disc, disc.initial_coeffs())
    records = [
        diagnose(
            t,
            c,
            disc.basis,
            disc.grid,
            ref=None if ref is None else ref.at(t),
            ref_grid=None if ref is None else ref.grid,
            equilibrium_nodal=eq,
        )
        for t, c in zip(times, fields)
    ]
    write_csv(out_dir / DIAGNOSTICS_FILE, DiagnosticRecord.CSV_FIELDS, [r.row() for r in records])
    final = records[-1]
    header = ["v", "mean", "variance"]
    cols = [disc.grid.nodes, final.mean, final.variance]
    if exact_columns:
        exact = exact_fields(cfg, build_discretization(cfg, M=max(cfg.M, 50)), [times[-1]])[0]
        em, ev = mean_and_variance(exact)
        header += ["exact_mean", "exact_variance"]
        cols += [em, ev]
    write_csv(out_dir / SNAPSHOT_FILE, header, zip(*cols))
    log.info("wrote %s", out_dir)
    return records


def _label(parameter, value) -> str:
    text = json.dumps(value) if not isinstance(value, str) else value
    return f"{parameter}={text}".replace("/", "_").replace(" ", "")


def run_sweep(cfg: RunConfig, out_dir: Path, threads: int = 1, exact_columns: bool = False) -> list[tuple]:
    """Run every sweep entry in its own subdirectory and write the summary table."""
    if cfg.sweep is None:
        raise ConfigurationError("configuration has no 'sweep' entry")
    out_dir.mkdir(parents=True, exist_ok=True)
    param = cfg.sweep.parameter
    shared = cfg.reference is not None and cfg.reference.kind == "run" and param in ("M", "N", "Nq", "scheme")
    if shared:
        # the reference does not depend on the swept value: compute it once
        build_reference(cfg, record_times(cfg), out_dir)
        raw = dict(cfg.raw, reference={"path": str(out_dir / REFERENCE_FILE)})
        cfg = replace(cfg, raw=raw)
    entries = [(v, cfg.with_value(param, v)) for v in cfg.sweep.values]

    def job(entry):
        value, sub = entry
        return value, run_one(sub, out_dir / _label(param, value), exact_columns=exact_columns)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(job, entries))
    rows = [(str(v), recs[-1].eps_var, recs[-1].l2_error) for v, recs in results]
    write_csv(out_dir / SUMMARY_FILE, ["value", "eps_var", "l2_error"], rows)
    return rows
