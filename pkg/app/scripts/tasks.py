"""
Experiment Tasks

Version: 1.0

Description:
    The six tasks shared by the command line and the desktop front-end. Each
    task reads its block of the config, computes, writes its files into a
    ResultBundle and returns a TaskResult with a summary and the exit code.

        validate   group, fundamental domain, convergence and orbit checks
        spectrum   wavelet spectrum with tail bounds and depth refinement
        heat       Cauchy problem on a time grid
        kernel     heat kernel values with per-level convergence data
        sample     jump paths and their empirical law at the horizon
        bvp        Dirichlet / von Neumann problems on a region

Usage:
    result = run_task("spectrum", "configs/tate.json", out_dir="runs/tate")
    print(result.summary)
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from scripts.bvp import Region, UnsupportedInitialData, solve_bvp, vertex_boundary
from scripts.errors import EXIT_CONFIG, EXIT_INTERNAL, EXIT_OK, EXIT_PRECONDITION, EXIT_UNSUPPORTED, ConfigError, UltralapError
from scripts.experiment_config import ExperimentConfig, default_output_dir, read_json, resolve_threads, validate_config
from scripts.heat import SpectralDecomposition, empirical_law, heat_kernel, sample_paths, solve_cauchy, total_variation, transition_matrix
from scripts.result_bundle import ResultBundle
from scripts.spectral import ShimuraLaplacian, aggregate_multiplicities, largest_nonzero
from scripts.wavelets import wavelets_at

logger = logging.getLogger(__name__)

DEFAULT_TIMES = [0.0, 0.5, 1.0]
SPECTRUM_COLUMNS = ["component", "anchor_id", "depth", "eigenvalue", "multiplicity", "tail_bound"]


@dataclass
class TaskResult:
    task: str
    exit_code: int
    summary: Dict[str, Any] = field(default_factory=dict)
    out_dir: Optional[Path] = None
    files: List[str] = field(default_factory=list)


def initial_data(block: Dict[str, Any], lap: ShimuraLaplacian) -> np.ndarray:
    """
    Leaf vector of the initial datum described by a config block.

    Raises:
        ConfigError: If the block names an unknown anchor or leaf.
    """
    if not block:
        raise ConfigError("An 'initial' block is required for this task")
    part = lap.partition
    n = len(part)
    kind = block["type"]
    if kind == "wavelet":
        anchor = next((v for v in part.internal_vertices() if v.key == block.get("anchor")), None)
        if anchor is None:
            raise ConfigError(f"Unknown anchor '{block.get('anchor')}'")
        waves = wavelets_at(anchor)
        index = block.get("index", 1)
        if not 1 <= index <= len(waves):
            raise ConfigError(f"{anchor.key} carries wavelets 1..{len(waves)}, got {index}")
        return np.real(waves[index - 1].on_leaves(n))
    if kind == "indicator":
        u = np.zeros(n)
        leaves = block.get("leaves", [])
        if not leaves or max(leaves) >= n:
            raise ConfigError(f"Indicator leaves must be a nonempty subset of 0..{n - 1}")
        u[leaves] = 1.0
        return u
    values = np.asarray(block.get("values", []), dtype=float)
    if values.shape != (n,):
        raise ConfigError(f"'values' needs {n} entries, got {values.size}")
    return values


def _leaf_rows(lap: ShimuraLaplacian):
    for i, leaf in enumerate(lap.partition.leaves):
        yield i, leaf.key, leaf.component, leaf.orbit, str(leaf.disc.center), str(leaf.disc.radius), float(leaf.mu)


def _write_leaves(bundle: ResultBundle, lap: ShimuraLaplacian):
    bundle.write_csv("leaves.csv", ["leaf_id", "key", "component", "orbit", "center", "radius", "mu"], _leaf_rows(lap))


def _decomposition(lap: ShimuraLaplacian, bundle: ResultBundle) -> SpectralDecomposition:
    start = time.perf_counter()
    dec = SpectralDecomposition.from_spectrum(lap.spectrum(), lap.partition)
    bundle.time("spectrum", time.perf_counter() - start)
    residual = dec.reconstruction_residual()
    if residual > 1e-8:
        logger.warning("⚠️ Eigenfunctions deviate from orthonormality by %.3e", residual)
    return dec


def cmd_validate(data: Dict[str, Any], bundle: ResultBundle) -> TaskResult:
    report = validate_config(data)
    bundle.write_json("validation.json", report.to_dict())
    failures = report.failures
    if not failures:
        code = EXIT_OK
        logger.info("✅ Config is valid (%d checks)", len(report.entries))
    elif all(f["check"].startswith("convergence") for f in failures):
        code = EXIT_PRECONDITION
    else:
        code = EXIT_CONFIG
    for f in failures:
        logger.error("❌ %s: %s", f["check"], f["detail"])
    summary = {"checks": len(report.entries), "failures": len(failures)}
    return TaskResult("validate", code, summary)


def cmd_spectrum(config: ExperimentConfig, bundle: ResultBundle, threads: int = 1, seed: Optional[int] = None) -> TaskResult:
    lap = config.laplacian(threads=threads)
    _write_leaves(bundle, lap)
    start = time.perf_counter()
    entries = lap.spectrum()
    bundle.time("spectrum", time.perf_counter() - start)
    bundle.write_csv("spectrum.csv", SPECTRUM_COLUMNS, ([e.row()[c] for c in SPECTRUM_COLUMNS] for e in entries))
    aggregated = aggregate_multiplicities(entries)
    bundle.write_csv("spectrum_aggregated.csv", SPECTRUM_COLUMNS, ([e.row()[c] for c in SPECTRUM_COLUMNS] for e in aggregated))

    start = time.perf_counter()
    operator = lap.assemble()
    bundle.time("assemble", time.perf_counter() - start)
    residual = 0.0
    for e in entries:
        for f in e.functions:
            residual = max(residual, float(np.abs(operator.matrix @ f.values - e.eigenvalue * f.values).max()))

    summary: Dict[str, Any] = {
        "leaves": len(lap.partition),
        "entries": len(entries),
        "distinct_eigenvalues": len(aggregated),
        "largest_nonzero": largest_nonzero(entries),
        "smallest": min(e.eigenvalue for e in entries),
        "max_tail_bound": max(e.tail_bound for e in entries),
        "eigen_residual": residual,
        "operator_checks": operator.check(),
    }
    depth = config.numerics.depth
    if depth >= 1:
        coarse = {e.anchor_id: e.eigenvalue for e in config.laplacian(depth - 1, threads).spectrum() if e.depth >= 0}
        deltas = [abs(e.eigenvalue - coarse[e.anchor_id]) for e in entries if e.anchor_id in coarse]
        delta = max(deltas) if deltas else 0.0
        summary["refinement_delta"] = delta
        logger.info("📊 Depth %d -> %d refinement delta: %.3e", depth - 1, depth, delta)
        if delta > config.numerics.tolerances["refinement"]:
            logger.warning("⚠️ Refinement delta %.3e exceeds tolerance %.1e", delta, config.numerics.tolerances["refinement"])
    logger.info("📊 %d eigenvalues on %d leaves, largest nonzero %s", len(entries), len(lap.partition), summary["largest_nonzero"])
    bundle.write_json("summary.json", summary)
    return TaskResult("spectrum", EXIT_OK, summary)


def cmd_heat(config: ExperimentConfig, bundle: ResultBundle, threads: int = 1, seed: Optional[int] = None) -> TaskResult:
    block = config.task("heat")
    lap = config.laplacian(threads=threads)
    _write_leaves(bundle, lap)
    u0 = initial_data(block.get("initial"), lap)
    times = block.get("times", DEFAULT_TIMES)
    dec = _decomposition(lap, bundle)
    operator = lap.assemble()
    mu = lap.partition.mu
    rows, masses, semigroup = [], [], 0.0
    for t in times:
        u = solve_cauchy(u0, t, dec)
        rows.extend((t, leaf, value) for leaf, value in enumerate(u))
        masses.append(float(np.sum(u * mu)))
        semigroup = max(semigroup, float(np.abs(transition_matrix(t, operator).matrix @ u0 - u).max()))
    bundle.write_csv("heat.csv", ["time", "leaf_id", "value"], rows)
    summary = {
        "times": list(times),
        "mass": masses,
        "mass_drift": max(masses) - min(masses),
        "semigroup_residual": semigroup,
    }
    logger.info("📊 Heat flow over %d times, mass drift %.3e", len(times), summary["mass_drift"])
    bundle.write_json("summary.json", summary)
    return TaskResult("heat", EXIT_OK, summary)


def cmd_kernel(config: ExperimentConfig, bundle: ResultBundle, threads: int = 1, seed: Optional[int] = None) -> TaskResult:
    block = config.task("kernel")
    lap = config.laplacian(threads=threads)
    _write_leaves(bundle, lap)
    n = len(lap.partition)
    pairs = block.get("pairs") or [[x, x] for x in range(n)]
    if any(max(pair) >= n for pair in pairs):
        raise ConfigError(f"Kernel pairs must index leaves 0..{n - 1}")
    times = block.get("times", [1.0])
    dec = _decomposition(lap, bundle)
    rows, level_rows, unconverged = [], [], 0
    for t in times:
        for x, y in pairs:
            value = heat_kernel(t, x, y, dec)
            rows.append((t, x, y, value.value, value.converged, "" if value.threshold is None else value.threshold))
            unconverged += not value.converged
            for level, term in value.level_terms.items():
                level_rows.append((t, x, level, term))
    bundle.write_csv("kernel.csv", ["time", "x", "y", "value", "converged", "threshold"], rows)
    bundle.write_csv("kernel_levels.csv", ["time", "x", "level", "term"], level_rows)
    summary = {"values": len(rows), "unconverged": unconverged}
    if unconverged:
        logger.warning("⚠️ %d kernel values still grow with the level; see the threshold column", unconverged)
    bundle.write_json("summary.json", summary)
    return TaskResult("kernel", EXIT_OK, summary)


def cmd_sample(config: ExperimentConfig, bundle: ResultBundle, threads: int = 1, seed: Optional[int] = None) -> TaskResult:
    block = config.task("sample")
    lap = config.laplacian(threads=threads)
    _write_leaves(bundle, lap)
    n = len(lap.partition)
    start_leaf = block.get("start", 0)
    if start_leaf >= n:
        raise ConfigError(f"Start leaf {start_leaf} is not in 0..{n - 1}")
    horizon = float(block.get("horizon", 1.0))
    n_paths = block.get("paths", 1000)
    seed = block.get("seed", 0) if seed is None else seed
    operator = lap.assemble()
    started = time.perf_counter()
    paths = sample_paths(start_leaf, horizon, seed, n_paths, operator, threads)
    bundle.time("sample", time.perf_counter() - started)
    bundle.write_csv(
        "paths.csv", ["path_id", "jump_time", "leaf_id"],
        ((p.path_index, t, s) for p in paths for t, s in zip(p.times, p.states)),
    )
    empirical = empirical_law(paths, horizon, n)
    exact = transition_matrix(horizon, operator).matrix[start_leaf]
    bundle.write_csv("law.csv", ["leaf_id", "empirical", "exact"], zip(range(n), empirical, exact))
    summary = {
        "seed": seed,
        "paths": n_paths,
        "horizon": horizon,
        "mean_jumps": float(np.mean([p.jumps for p in paths])),
        "total_variation": total_variation(empirical, exact),
    }
    logger.info("📊 %d paths, total variation to P(T) %.4f", n_paths, summary["total_variation"])
    bundle.write_json("summary.json", summary)
    return TaskResult("sample", EXIT_OK, summary)


def cmd_bvp(config: ExperimentConfig, bundle: ResultBundle, threads: int = 1, seed: Optional[int] = None) -> TaskResult:
    block = config.task("bvp")
    if not block:
        raise ConfigError("The config has no 'bvp' block")
    lap = config.laplacian(threads=threads)
    _write_leaves(bundle, lap)
    region = Region.of(block["region"], len(lap.partition))
    u0 = initial_data(block["initial"], lap)
    times = block.get("times", DEFAULT_TIMES)
    operator = lap.assemble()
    result = solve_bvp(u0, region, block["condition"], times, _decomposition(lap, bundle), operator)
    report: Dict[str, Any] = {
        "condition": block["condition"],
        "region": sorted(region.leaves),
        "boundary": sorted(vertex_boundary(region, operator)),
    }
    if isinstance(result, UnsupportedInitialData):
        logger.warning("⚠️ Initial data unsupported on the region (%s)", result.reason)
        report.update(
            supported=False, reason=result.reason, leaves_outside=result.leaves_outside,
            functions_outside=result.functions_outside, violations=[], solution_csv_path=None,
        )
        bundle.write_json("bvp_report.json", report)
        return TaskResult("bvp", EXIT_UNSUPPORTED, {"supported": False, "reason": result.reason})
    path = bundle.write_csv(
        "bvp_solution.csv", ["time", "leaf_id", "value"],
        ((t, leaf, value) for t, u in zip(result.times, result.solutions) for leaf, value in enumerate(u)),
    )
    report.update(supported=True, violations=result.violations, solution_csv_path=str(path))
    bundle.write_json("bvp_report.json", report)
    code = EXIT_OK if result.ok else EXIT_INTERNAL
    return TaskResult("bvp", code, {"supported": True, "violations": len(result.violations)})


TASKS: Dict[str, Callable[..., TaskResult]] = {
    "spectrum": cmd_spectrum,
    "heat": cmd_heat,
    "kernel": cmd_kernel,
    "sample": cmd_sample,
    "bvp": cmd_bvp,
}
TASK_NAMES = ("validate",) + tuple(TASKS)


def run_task(
    task: str,
    config_path,
    out_dir=None,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> TaskResult:
    """
    Loads the config, runs one task and writes its result bundle.

    Raises:
        UltralapError: Configuration and precondition failures, after the
            manifest recording the failure has been written.
    """
    if task not in TASK_NAMES:
        raise ConfigError(f"Unknown task '{task}', expected one of {TASK_NAMES}")
    threads = resolve_threads(threads)
    data = read_json(config_path)
    out = Path(out_dir) if out_dir else default_output_dir(data) / task
    bundle = ResultBundle(out, data, task)
    logger.info("🔄 Running %s with %d thread(s) into %s", task, threads, out)
    try:
        if task == "validate":
            result = cmd_validate(data, bundle)
        else:
            result = TASKS[task](ExperimentConfig.from_dict(data), bundle, threads=threads, seed=seed)
    except UltralapError as e:
        bundle.finalize(e.exit_code, {"error": type(e).__name__, "message": str(e)})
        raise
    bundle.finalize(result.exit_code, result.summary)
    result.out_dir = out
    result.files = list(bundle.files)
    return result
