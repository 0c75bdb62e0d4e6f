"""Replication harness for the simulation experiments.

Each experiment is a grid of (dgp, rho, d, m, n) points; every grid
point averages the l2 estimation error over independent replications.
Seeds are derived from (base_seed, grid_index, replication_index), so
results are byte-identical regardless of worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import BoundConfig, minimax_lower, thm3_bound
from .estimator import estimation_error, fit
from .restrictions import (
    Banded,
    Custom,
    Grouped,
    RestrictionPattern,
    ScaledIdentity,
    build_basis,
    pattern_from_json,
    pattern_to_json,
)
from .var_core import (
    SimulationOverflowError,
    VarModel,
    make_dgp,
    simulate,
)

X_GRID_FIG1 = (0.15, 0.35, 0.55, 0.75, 0.95)

# tag used in the spawn key of the model-generating stream, distinct
# from every replication index
_MODEL_STREAM = 0x5EED


@dataclass(frozen=True)
class GridPoint:
    dgp: int
    rho: float
    d: int
    n: int
    fit_pattern: RestrictionPattern
    dgp_params: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return build_basis(self.fit_pattern).m


@dataclass
class ExperimentConfig:
    experiment: str
    grid: list  # of GridPoint
    replications: int = 1000
    base_seed: int = 0

    def __post_init__(self):
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass
class ReplicationSummary:
    experiment: str
    rows: list  # dicts keyed (dgp, rho, d, m, n, mean_error, stderr, fails)

    CSV_HEADER = ("experiment", "dgp", "rho", "d", "m", "n",
                  "mean_error", "stderr", "fails")


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _n_from_ratio(m: int, x: float) -> int:
    # only the ratio (m/n)^{1/2} is specified; recover n from it
    return max(int(round(m / (x * x))), m + 1)


def _banded_fits(d: int = 24):
    return [Banded(d=d, k0=k0) for k0 in (1, 3, 7)]  # m = 70, 156, 304


def _grouped_fits(d: int = 24):
    return [Grouped(d=d, K=K) for K in (2, 4, 12)]  # m = 72, 120, 312


def _smallest_true_pattern(d: int) -> RestrictionPattern:
    return ScaledIdentity(d=d)


def diag_plus_random_offdiag(d: int, m: int, seed: int) -> Custom:
    """Equal-diagonal pattern with m-1 free off-diagonal entries.

    The free positions are sampled uniformly without replacement from
    the off-diagonal positions; all others are restricted to zero.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    offdiag = [i * d + j for i in range(d) for j in range(d) if i != j]
    free = set(rng.choice(len(offdiag), size=m - 1, replace=False).tolist())
    free_idx = {offdiag[i] for i in free}
    zero = tuple(idx for idx in offdiag if idx not in free_idx)
    diag_class = tuple(i * d + i for i in range(d))
    return Custom(zero_set=zero, equality_classes=(diag_class,),
                  fixed_values=(), d=d)


def preset_fig1(replications: int = 1000, base_seed: int = 0) -> ExperimentConfig:
    """Error against (m/n)^{1/2} for all three DGPs at d = 24."""
    d = 24
    grid = []
    for dgp in (1, 2, 3):
        fits = _grouped_fits(d) if dgp == 2 else _banded_fits(d)
        params = {1: {"k0": 1}, 2: {"K": 2}, 3: {}}[dgp]
        for rho in (0.2, 0.8, 1.0):
            for pat in fits:
                m = build_basis(pat).m
                for x in X_GRID_FIG1:
                    grid.append(GridPoint(dgp=dgp, rho=rho, d=d,
                                          n=_n_from_ratio(m, x),
                                          fit_pattern=pat, dgp_params=params))
    return ExperimentConfig("fig1", grid, replications, base_seed)


def preset_fig2a(replications: int = 1000, base_seed: int = 0) -> ExperimentConfig:
    """DGP3 with rho fixed below one or approaching one at several rates."""
    d = 24
    grid = []
    n_grid = (100, 200, 400, 800, 1600)
    for rho in (0.2, 0.4, 0.6):
        for n in n_grid:
            grid.append(GridPoint(dgp=3, rho=rho, d=d, n=n,
                                  fit_pattern=Banded(d=d, k0=1)))
    for m in (1, 70):
        pat = _smallest_true_pattern(d) if m == 1 else Banded(d=d, k0=1)
        for n in (200, 400, 800, 1600):
            for rho in (0.99, 1.0 - (m + math.log(d)) / n, 1.0 + 1.0 / n, 1.01):
                if m == 70 and rho == 1.01:
                    continue  # numerically infeasible at this explosiveness
                grid.append(GridPoint(dgp=3, rho=rho, d=d, n=n, fit_pattern=pat))
    return ExperimentConfig("fig2a", grid, replications, base_seed)


def preset_fig2b(replications: int = 1000, base_seed: int = 0) -> ExperimentConfig:
    """DGP3 at the unit root: n-sweep at fixed m and m-sweep at fixed n."""
    d = 24
    grid = [GridPoint(dgp=3, rho=1.0, d=d, n=n, fit_pattern=Banded(d=d, k0=1))
            for n in (200, 400, 800, 1600)]
    for pat in [_smallest_true_pattern(d)] + _banded_fits(d):
        grid.append(GridPoint(dgp=3, rho=1.0, d=d, n=400, fit_pattern=pat))
    return ExperimentConfig("fig2b", grid, replications, base_seed)


def preset_fig3(replications: int = 1000, base_seed: int = 0) -> ExperimentConfig:
    """Dimension sweep: error against d for DGP3."""
    grid = []
    for n in (100, 500):
        for d in (25, 50, 100, 200, 400):
            for rho in (0.2, 0.8, 1.0):
                for m in (1, 20):
                    pat = (_smallest_true_pattern(d) if m == 1
                           else diag_plus_random_offdiag(d, m, seed=base_seed + d))
                    grid.append(GridPoint(dgp=3, rho=rho, d=d, n=n, fit_pattern=pat))
    return ExperimentConfig("fig3", grid, replications, base_seed)


PRESETS = {
    "fig1": preset_fig1,
    "fig2a": preset_fig2a,
    "fig2b": preset_fig2b,
    "fig3": preset_fig3,
}


# ---------------------------------------------------------------------------
# Harness
# ---------------------------------------------------------------------------

def _model_for(point: GridPoint, base_seed: int, grid_index: int) -> VarModel:
    if point.dgp == 3:
        return make_dgp(3, point.d, rho=point.rho)
    seed = np.random.SeedSequence(entropy=base_seed,
                                  spawn_key=(grid_index, _MODEL_STREAM))
    kwargs = dict(point.dgp_params)
    return make_dgp(point.dgp, point.d, target_rho=point.rho, seed=seed, **kwargs)


def _run_grid_point(args) -> dict:
    base_seed, grid_index, point, replications = args
    model = _model_for(point, base_seed, grid_index)
    basis = build_basis(point.fit_pattern)
    errors = []
    fails = 0
    for rep in range(replications):
        seed = np.random.SeedSequence(entropy=base_seed,
                                      spawn_key=(grid_index, rep))
        try:
            path = simulate(model, point.n, seed)
            result = fit(path, basis)
        except SimulationOverflowError:
            fails += 1
            continue
        errors.append(estimation_error(result, model)["l2"])
    errors = np.asarray(errors)
    mean = float(np.mean(errors)) if errors.size else math.nan
    se = (float(np.std(errors, ddof=1) / math.sqrt(errors.size))
          if errors.size > 1 else math.nan)
    return {
        "dgp": point.dgp, "rho": point.rho, "d": point.d,
        "m": basis.m, "n": point.n,
        "mean_error": mean, "stderr": se, "fails": fails,
    }


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ReplicationSummary:
    """Run every grid point; deterministic for a fixed base_seed.

    Each grid point is evaluated entirely within one worker with its
    replications accumulated in index order, so the summary does not
    depend on scheduling.
    """
    tasks = [(cfg.base_seed, gi, point, cfg.replications)
             for gi, point in enumerate(cfg.grid)]
    if workers <= 1:
        rows = [_run_grid_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_grid_point, tasks))
    return ReplicationSummary(experiment=cfg.experiment, rows=rows)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def check_slope_collapse(summary: ReplicationSummary,
                         groups: Optional[list] = None) -> dict:
    """Through-origin regression of error on (m/n)^{1/2}, per m line.

    For each (dgp, rho) group, reports the max/min slope ratio across
    the m lines and each line's through-origin R^2. Collapsing lines
    give a ratio near 1.
    """
    by_group: dict = {}
    for row in summary.rows:
        key = (row["dgp"], row["rho"])
        if groups is not None and key not in groups:
            continue
        by_group.setdefault(key, {}).setdefault(row["m"], []).append(row)
    out = {}
    for key, lines in by_group.items():
        slopes = {}
        r2s = {}
        for m, rows in lines.items():
            if len(rows) < 3:
                raise ValueError(
                    f"need >= 3 grid points per line, got {len(rows)} for m={m}"
                )
            x = np.array([math.sqrt(r["m"] / r["n"]) for r in rows])
            y = np.array([r["mean_error"] for r in rows])
            slope = float(x @ y / (x @ x))
            resid = y - slope * x
            r2 = 1.0 - float(resid @ resid) / float(y @ y)
            slopes[m] = slope
            r2s[m] = r2
        vals = list(slopes.values())
        out[key] = {
            "slopes": slopes,
            "slope_ratio": max(vals) / min(vals),
            "r2": r2s,
        }
    return out


def check_fast_rate(summary: ReplicationSummary, mode: str = "n") -> dict:
    """Tail stability of n*error (n-grid) or error/m (m-grid).

    Returns the rescaled sequences and the relative change between the
    last two points: small for the matching rate, large otherwise.
    """
    rows = sorted(summary.rows, key=lambda r: r[mode])
    if len(rows) < 3:
        raise ValueError("grid too short for a tail-stability check")

    def tail_change(seq):
        a, b = seq[-2], seq[-1]
        return abs(b - a) / abs(a)

    if mode == "n":
        ns = np.array([r["n"] for r in rows], dtype=float)
        errs = np.array([r["mean_error"] for r in rows])
        scaled = ns * errs
        alt = np.sqrt(ns) * errs
        return {
            "n": ns.tolist(),
            "n_times_error": scaled.tolist(),
            "sqrt_n_times_error": alt.tolist(),
            "tail_change_n_error": tail_change(scaled),
            "tail_change_sqrt_n_error": tail_change(alt),
        }
    if mode == "m":
        ms = np.array([r["m"] for r in rows], dtype=float)
        errs = np.array([r["mean_error"] for r in rows])
        scaled = errs / ms
        return {
            "m": ms.tolist(),
            "error_over_m": scaled.tolist(),
            "tail_change_error_over_m": tail_change(scaled),
        }
    raise ValueError("mode must be 'n' or 'm'")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def emit_csv(summary: ReplicationSummary, path) -> None:
    """Write the summary rows as CSV (header-only when the grid is empty)."""
    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(ReplicationSummary.CSV_HEADER)
        for row in summary.rows:
            writer.writerow([
                summary.experiment, row["dgp"], repr(row["rho"]), row["d"],
                row["m"], row["n"], repr(row["mean_error"]),
                repr(row["stderr"]), row["fails"],
            ])

    if hasattr(path, "write"):
        _write(path)
    else:
        with open(path, "w", newline="") as fh:
            _write(fh)


def emit_bound_overlay(summary: ReplicationSummary, config: BoundConfig,
                       path) -> None:
    """Summary CSV augmented with theoretical upper/lower bound columns.

    Only DGP3 rows get bound values: there A = rho*I, so the spectral
    inputs are exact and the overlay matches the published comparison.
    """
    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(ReplicationSummary.CSV_HEADER +
                        ("thm3_bound", "minimax_lower"))
        for row in summary.rows:
            upper = lower = ""
            if row["dgp"] == 3:
                model = make_dgp(3, row["d"], rho=row["rho"])
                try:
                    upper = repr(thm3_bound(model, row["m"], row["d"],
                                            row["n"], config)["value"])
                except Exception:
                    upper = ""
                try:
                    lower = repr(minimax_lower(
                        row["m"], row["n"], max(abs(row["rho"]), 1e-9),
                        min(config.delta, 0.2499))["rate"])
                except Exception:
                    lower = ""
            writer.writerow([
                summary.experiment, row["dgp"], repr(row["rho"]), row["d"],
                row["m"], row["n"], repr(row["mean_error"]),
                repr(row["stderr"]), row["fails"], upper, lower,
            ])

    if hasattr(path, "write"):
        _write(path)
    else:
        with open(path, "w", newline="") as fh:
            _write(fh)


# ---------------------------------------------------------------------------
# Config (de)serialization
# ---------------------------------------------------------------------------

def config_from_json(obj) -> ExperimentConfig:
    """Build a config from JSON: a preset name or an explicit grid."""
    import json as _json
    if isinstance(obj, str):
        obj = _json.loads(obj)
    name = obj.get("experiment", "custom")
    reps = obj.get("replications", 1000)
    seed = obj.get("base_seed", 0)
    if name in PRESETS:
        cfg = PRESETS[name](replications=reps, base_seed=seed)
        return cfg
    grid = [
        GridPoint(
            dgp=g["dgp"], rho=g["rho"], d=g["d"], n=g["n"],
            fit_pattern=pattern_from_json(g["fit_pattern"]),
            dgp_params=g.get("dgp_params", {}),
        )
        for g in obj["grid"]
    ]
    return ExperimentConfig(name, grid, reps, seed)


def config_to_json(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "replications": cfg.replications,
        "base_seed": cfg.base_seed,
        "grid": [
            {
                "dgp": g.dgp, "rho": g.rho, "d": g.d, "n": g.n,
                "fit_pattern": pattern_to_json(g.fit_pattern),
                "dgp_params": g.dgp_params,
            }
            for g in cfg.grid
        ],
    }
