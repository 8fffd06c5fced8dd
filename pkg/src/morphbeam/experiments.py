"""Experiment runners behind the CLI subcommands.

Each runner takes a parsed :class:`ExperimentConfig`, executes the requested
pipeline, and persists records/CSV artifacts into an output directory. All
randomness flows from the config seed, so rerunning a config reproduces every
output byte except wall-clock timings.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .array_model import ArrayGeometry, SurfaceShape, TargetSet
from .bcd import BenchmarkResult, Scheme, solve_benchmark
from .beampattern import evaluate_beampattern, target_powers
from .config import ExperimentConfig
from .covariance import CovarianceMatrix
from .results import (
    ResultRecord,
    read_covariance_csv,
    read_shape_csv,
    write_beampattern_csv,
    write_compare_csv,
    write_covariance_csv,
    write_shape_csv,
    write_sweep_power_csv,
    write_sweep_range_csv,
)
from .units import dbm_to_mw, mw_to_dbm

logger = logging.getLogger(__name__)

# canonical scheme order for multi-scheme outputs
SCHEME_ORDER = (Scheme.RAA_PA, Scheme.FIM_PA, Scheme.RAA_MIMO, Scheme.FIM_MIMO)


class SolverFailure(RuntimeError):
    """Numerical failure inside an optimization pipeline."""


class MissingInputError(FileNotFoundError):
    """A command needs artifacts a previous command did not produce."""


def _provided_starts(cfg: ExperimentConfig):
    shape = cfg.build_init_shape()
    return (shape,) if shape is not None else ()


def _solve(cfg: ExperimentConfig, scheme: Scheme, threads: int = 1,
           geom: ArrayGeometry | None = None,
           provided_starts: tuple = ()) -> BenchmarkResult:
    geom = geom if geom is not None else cfg.build_geometry()
    targets = cfg.build_targets()
    p_t = dbm_to_mw(cfg.p_t_dbm)
    starts = provided_starts if provided_starts else _provided_starts(cfg)
    try:
        return solve_benchmark(scheme, geom, targets, p_t, cfg.build_bcd(),
                               provided_starts=starts, max_workers=threads)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"linear algebra failure in scheme {scheme.value}: {exc}") from exc


def _make_record(cfg: ExperimentConfig, scheme: Scheme, res: BenchmarkResult,
                 geom: ArrayGeometry, targets: TargetSet,
                 wall: float) -> ResultRecord:
    per_dbm, _, min_dbm = target_powers(res.cov, geom, targets, res.shape)
    return ResultRecord(
        config_digest=cfg.digest(),
        scheme=scheme.value,
        seed=cfg.seed,
        objective_mw=res.objective_mw,
        objective_dbm=mw_to_dbm(res.objective_mw),
        per_target_dbm=[float(v) for v in per_dbm],
        min_target_dbm=min_dbm,
        outer_iterations=res.trace.n_outer if res.trace is not None else 0,
        termination_reason=(res.trace.termination_reason.value
                            if res.trace is not None else ""),
        wall_time_seconds=wall,
    )


def run_optimize(cfg: ExperimentConfig, out_dir: str | Path,
                 threads: int = 1) -> ResultRecord:
    """Run the configured scheme and persist record + covariance + shape."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    geom = cfg.build_geometry()
    targets = cfg.build_targets()
    tic = time.perf_counter()
    res = _solve(cfg, cfg.scheme, threads, geom=geom)
    record = _make_record(cfg, cfg.scheme, res, geom, targets,
                          time.perf_counter() - tic)
    record.save(out / "record.json")
    write_covariance_csv(out / "covariance.csv", res.cov.r)
    write_shape_csv(out / "shape.csv", res.shape.displacements)
    logger.info("optimize %s: %.6g mW (%.3f dBm) in %d outer iterations",
                record.scheme, record.objective_mw, record.objective_dbm,
                record.outer_iterations)
    return record


def run_beampattern(cfg: ExperimentConfig, out_dir: str | Path,
                    threads: int = 1) -> Path:
    """Evaluate the grid for a previously optimized covariance and shape."""
    out = Path(out_dir)
    cov_path = out / "covariance.csv"
    shape_path = out / "shape.csv"
    for path in (cov_path, shape_path):
        if not path.exists():
            raise MissingInputError(
                f"{path} not found; run the optimize command into this directory first")
    r = read_covariance_csv(cov_path)
    shape = SurfaceShape(read_shape_csv(shape_path))
    geom = cfg.build_geometry()
    axis = np.linspace(0.0, np.pi, cfg.output.grid_points)
    grid = evaluate_beampattern(r, geom, shape, axis, axis.copy())
    dest = out / "beampattern.csv"
    write_beampattern_csv(dest, grid)
    return dest


def run_sweep_power(cfg: ExperimentConfig, out_dir: str | Path,
                    p_t_dbm_list, threads: int = 1) -> list[tuple]:
    """Cumulated power of all four schemes across transmit power levels.

    Each scheme is optimized once at the configured reference power; other
    levels follow by scaling the covariance, exact because the feasible set
    and the objective are both linear in the power budget (the optimal shape
    does not depend on P_t).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    levels = sorted(float(p) for p in p_t_dbm_list)
    if not levels:
        raise ValueError("sweep-power needs at least one p_t level")
    p_ref = dbm_to_mw(cfg.p_t_dbm)

    def solve_one(scheme):
        return scheme, _solve(cfg, scheme, threads=1)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ref = dict(pool.map(solve_one, SCHEME_ORDER))
    else:
        ref = dict(solve_one(s) for s in SCHEME_ORDER)

    rows = []
    for p_dbm in levels:
        scale = dbm_to_mw(p_dbm) / p_ref
        for scheme in SCHEME_ORDER:
            cum = ref[scheme].objective_mw * scale
            rows.append((p_dbm, scheme.value, cum, mw_to_dbm(cum)))
    write_sweep_power_csv(out / "sweep_power.csv", rows)
    return rows


def run_sweep_range(cfg: ExperimentConfig, out_dir: str | Path,
                    d_max_list, sizes=None, threads: int = 1) -> list[tuple]:
    """Morphing-range sweep with warm starts, optionally over array sizes.

    Ranges are processed in increasing order; each optimum (shape and
    covariance) seeds the next range's starts, so the reported power is
    nondecreasing in d_max by construction. The morphing MIMO scheme is used
    regardless of the configured scheme since the sweep is about the shape
    degrees of freedom.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ranges = sorted(float(d) for d in d_max_list)
    if not ranges:
        raise ValueError("sweep-range needs at least one d_max value")
    if any(d < 0.0 for d in ranges):
        raise ValueError("d_max values must be nonnegative")
    base_geom = cfg.build_geometry()
    if sizes is None:
        sizes = [(base_geom.n_x, base_geom.n_z)]

    def ladder(size):
        n_x, n_z = size
        chain: list[tuple] = []
        prev: tuple[SurfaceShape, CovarianceMatrix] | None = None
        for d in ranges:
            geom = dataclasses.replace(base_geom, n_x=n_x, n_z=n_z, d_max=d)
            provided = (prev,) if prev is not None else ()
            res = _solve(cfg, Scheme.FIM_MIMO, threads=1, geom=geom,
                         provided_starts=provided)
            chain.append((d, n_x, n_z, res.objective_mw))
            prev = (res.shape, res.cov)
        return chain

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chains = list(pool.map(ladder, sizes))
    else:
        chains = [ladder(size) for size in sizes]

    rows = [row for chain in chains for row in chain]
    write_sweep_range_csv(out / "sweep_range.csv", rows)
    return rows


def run_compare(cfg: ExperimentConfig, out_dir: str | Path,
                threads: int = 1) -> list[ResultRecord]:
    """All four schemes on the configured instance, with per-scheme artifacts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    geom = cfg.build_geometry()
    targets = cfg.build_targets()

    def solve_one(scheme):
        tic = time.perf_counter()
        res = _solve(cfg, scheme, threads=1, geom=geom)
        return scheme, res, time.perf_counter() - tic

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(solve_one, SCHEME_ORDER))
    else:
        solved = [solve_one(s) for s in SCHEME_ORDER]

    records = []
    summary_rows = []
    for scheme, res, wall in solved:
        record = _make_record(cfg, scheme, res, geom, targets, wall)
        record.save(out / f"record-{scheme.value}.json")
        write_covariance_csv(out / f"covariance-{scheme.value}.csv", res.cov.r)
        write_shape_csv(out / f"shape-{scheme.value}.csv", res.shape.displacements)
        records.append(record)
        summary_rows.append((scheme.value, record.objective_mw,
                             record.objective_dbm, record.min_target_dbm))
    write_compare_csv(out / "summary.csv", summary_rows)
    return records
