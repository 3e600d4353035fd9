"""Simulation scenarios: sweep a difficulty knob, replicate, score, emit.

Four stock scenarios sweep edge density (1), node count (2), and layer count
with more or fewer layers than nodes (3, 4). Every (grid point, replicate)
task derives all of its randomness from the master seed and its own integer
path, so runs can fan out across processes and still produce byte-identical
results; wall-clock seconds are the only nondeterministic column.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .clustering import cluster_factor_pair
from .errors import EstimationError
from .initialization import spectral_init
from .linalg import sym_eig_topk
from .metrics import score_result
from .model import assemble_ground_truth
from .sampling import sample_adjacency, sample_instance, substream
from .solver import AlmaConfig, alma_fit, objective
from .tensors import Tensor3
from .twist import TwistConfig, twist_fit, twist_postprocess

METHODS = ("alma", "twist")

# stream-path stage tags
_STAGE_INSTANCE = 0
_STAGE_ADJACENCY = 1
_STAGE_INIT = 2
_STAGE_ALMA_CLUSTER = 3
_STAGE_TWIST_CLUSTER = 4
_ELBOW_TAG = 97


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: int
    n: int
    L: int
    M: int
    K: int
    p_max: float
    alpha: float
    sweep_param: str
    grid: tuple
    replicates: int = 20
    master_seed: int = 0
    methods: tuple = METHODS
    eps_stop: float = 1e-4
    max_iter: int = 100
    kmeans_restarts: int = 20
    twist_r: int = 7
    twist_iter_max: int = 50
    threads: int = 1

    def __post_init__(self):
        if self.sweep_param not in ("p_max", "n", "L"):
            raise ValueError(f"unknown sweep parameter {self.sweep_param!r}")
        if len(self.grid) < 1:
            raise ValueError("grid must be nonempty")
        if self.replicates < 1 or self.threads < 1:
            raise ValueError("replicates and threads must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


# per-scenario fixed parameters and sweep ranges
_SCENARIOS = {
    1: dict(n=100, L=40, M=3, K=3, p_max=0.6, alpha=0.9, sweep_param="p_max", lo=0.3, hi=1.0),
    2: dict(n=100, L=40, M=3, K=3, p_max=0.6, alpha=0.9, sweep_param="n", lo=30, hi=300),
    3: dict(n=40, L=40, M=3, K=3, p_max=0.5, alpha=0.8, sweep_param="L", lo=40, hi=140),
    4: dict(n=100, L=50, M=3, K=3, p_max=0.5, alpha=0.9, sweep_param="L", lo=50, hi=100),
}


def scenario_config(scenario: int, grid_points: int = 8, **overrides) -> ScenarioConfig:
    """Stock configuration for scenarios 1-4 with optional field overrides."""
    if scenario not in _SCENARIOS:
        raise ValueError(f"scenario must be one of {sorted(_SCENARIOS)}, got {scenario}")
    if grid_points < 1:
        raise ValueError("grid_points must be >= 1")
    base = _SCENARIOS[scenario]
    sweep = base["sweep_param"]
    raw = np.linspace(base["lo"], base["hi"], grid_points)
    if sweep == "p_max":
        grid = tuple(float(v) for v in raw)
    else:
        grid = tuple(float(int(round(v))) for v in raw)
    cfg = ScenarioConfig(
        scenario=scenario,
        n=base["n"],
        L=base["L"],
        M=base["M"],
        K=base["K"],
        p_max=base["p_max"],
        alpha=base["alpha"],
        sweep_param=sweep,
        grid=grid,
    )
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


@dataclass
class RunRecord:
    scenario: int
    sweep_param: str
    sweep_value: float
    replicate: int
    method: str
    r_bl: float
    r_wl: float
    iters: int
    converged: bool
    seconds: float
    seed: int

    @property
    def failed(self) -> bool:
        return not np.isfinite(self.r_bl)


def _sweep_params(cfg: ScenarioConfig, value: float):
    n, L, p_max = cfg.n, cfg.L, cfg.p_max
    if cfg.sweep_param == "p_max":
        p_max = float(value)
    elif cfg.sweep_param == "n":
        n = int(round(value))
    else:
        L = int(round(value))
    return n, L, p_max


def _seed_id(cfg: ScenarioConfig, grid_idx: int, replicate: int) -> int:
    ss = np.random.SeedSequence(
        cfg.master_seed, spawn_key=(cfg.scenario, grid_idx, replicate)
    )
    return int(ss.generate_state(1, np.uint64)[0])


def run_single(cfg: ScenarioConfig, grid_idx: int, replicate: int) -> list:
    """All method records for one (grid point, replicate) cell."""
    value = cfg.grid[grid_idx]
    n, L, p_max = _sweep_params(cfg, value)
    path = (cfg.scenario, grid_idx, replicate)
    seed_id = _seed_id(cfg, grid_idx, replicate)
    inst = sample_instance(
        n, L, cfg.M, cfg.K, p_max, cfg.alpha,
        substream(cfg.master_seed, *path, _STAGE_INSTANCE),
    )
    gt = assemble_ground_truth(inst)
    a = sample_adjacency(gt, substream(cfg.master_seed, *path, _STAGE_ADJACENCY))
    ranks = (cfg.K,) * cfg.M
    w1 = spectral_init(
        a, cfg.M, substream(cfg.master_seed, *path, _STAGE_INIT),
        restarts=cfg.kmeans_restarts,
    )
    records = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        r_bl = r_wl = float("nan")
        iters = 0
        converged = False
        try:
            if method == "alma":
                fit = alma_fit(
                    a, ranks, w1,
                    AlmaConfig(eps_stop=cfg.eps_stop, max_iter=cfg.max_iter),
                )
                res = cluster_factor_pair(
                    a, fit.w, ranks,
                    substream(cfg.master_seed, *path, _STAGE_ALMA_CLUSTER),
                    restarts=cfg.kmeans_restarts,
                )
                iters, converged = fit.iters_used, fit.converged
            else:
                tcfg = TwistConfig(M=cfg.M, r=cfg.twist_r, iter_max=cfg.twist_iter_max)
                summed = a.array.sum(axis=0)
                u0 = sym_eig_topk(summed, cfg.twist_r, by_magnitude=True).vectors
                _, w_hat = twist_fit(a, tcfg, u0, w1)
                res = twist_postprocess(
                    a, w_hat, ranks,
                    substream(cfg.master_seed, *path, _STAGE_TWIST_CLUSTER),
                    restarts=cfg.kmeans_restarts,
                )
                iters, converged = cfg.twist_iter_max, True
            score = score_result(inst, res)
            r_bl, r_wl = score.r_bl, score.r_wl
        except EstimationError:
            converged = False
        records.append(
            RunRecord(
                scenario=cfg.scenario,
                sweep_param=cfg.sweep_param,
                sweep_value=float(value),
                replicate=replicate,
                method=method,
                r_bl=r_bl,
                r_wl=r_wl,
                iters=iters,
                converged=converged,
                seconds=time.perf_counter() - t0,
                seed=seed_id,
            )
        )
    return records


def _run_cell(args):
    cfg, grid_idx, replicate = args
    return run_single(cfg, grid_idx, replicate)


def run_scenario(cfg: ScenarioConfig) -> list:
    """Every record for the scenario, sorted by (sweep value, replicate, method).

    Aborts if more than half of the runs at any grid point fail.
    """
    tasks = [
        (cfg, gi, rep)
        for gi in range(len(cfg.grid))
        for rep in range(cfg.replicates)
    ]
    if cfg.threads == 1:
        chunks = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(_run_cell, tasks))
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.sweep_value, r.replicate, r.method))
    for gi, value in enumerate(cfg.grid):
        for method in cfg.methods:
            cell = [r for r in records if r.sweep_value == float(value) and r.method == method]
            failed = sum(1 for r in cell if r.failed)
            if cell and failed * 2 > len(cell):
                raise EstimationError(
                    f"{failed}/{len(cell)} {method} runs failed at "
                    f"{cfg.sweep_param}={value}"
                )
    return records


@dataclass
class ElbowRow:
    m: int
    objective: float
    iters: int
    converged: bool


def _elbow_ranks(k_rule, m: int) -> tuple:
    if callable(k_rule):
        ranks = k_rule(m)
        if isinstance(ranks, int):
            return (ranks,) * m
        ranks = tuple(int(r) for r in ranks)
        if len(ranks) != m:
            raise ValueError(f"rank rule returned {len(ranks)} ranks for m={m}")
        return ranks
    return (int(k_rule),) * m


def elbow_scan(
    a: Tensor3,
    m_grid,
    k_rule,
    master_seed: int = 0,
    eps_stop: float = 1e-4,
    max_iter: int = 100,
    kmeans_restarts: int = 20,
) -> list:
    """Final fit objective for each candidate group count.

    ``k_rule`` is a constant community count, or a callable m -> count (or
    per-group counts). The objective decreases in m; the largest successive
    drop marks the group count to pick. A candidate m whose fit degenerates
    (rank-deficient Procrustes step, typical for m above the true group count
    on clean data) is recorded as a NaN row rather than dropped.
    """
    L = a.dims[0]
    rows = []
    for m in m_grid:
        m = int(m)
        if not 1 <= m <= L:
            raise ValueError(f"candidate m={m} out of range for L={L}")
        try:
            w1 = spectral_init(
                a, m, substream(master_seed, _ELBOW_TAG, m, _STAGE_INIT),
                restarts=kmeans_restarts,
            )
            fit = alma_fit(
                a, _elbow_ranks(k_rule, m), w1,
                AlmaConfig(eps_stop=eps_stop, max_iter=max_iter),
            )
            rows.append(ElbowRow(m, objective(a, fit.q, fit.w), fit.iters_used, fit.converged))
        except EstimationError:
            rows.append(ElbowRow(m, float("nan"), 0, False))
    return rows


CSV_COLUMNS = (
    "scenario", "sweep_param", "sweep_value", "replicate", "method",
    "R_BL", "R_WL", "iters", "converged", "seconds", "seed",
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_runs_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.scenario, r.sweep_param, _fmt(r.sweep_value), r.replicate, r.method,
                _fmt(r.r_bl), _fmt(r.r_wl), r.iters, _fmt(r.converged),
                _fmt(r.seconds), r.seed,
            ])


def aggregate(records) -> list:
    """Per (sweep value, method) means/stds over non-failed runs.

    Returns dict rows sorted by (sweep_value, method); stds use ddof=1 (one
    run gives 0.0).
    """
    keys = sorted({(r.sweep_value, r.method) for r in records})
    rows = []
    for value, method in keys:
        cell = [r for r in records if r.sweep_value == value and r.method == method]
        ok = [r for r in cell if not r.failed]
        bl = np.array([r.r_bl for r in ok])
        wl = np.array([r.r_wl for r in ok])
        rows.append({
            "sweep_value": value,
            "method": method,
            "n_runs": len(cell),
            "n_failed": len(cell) - len(ok),
            "mean_R_BL": float(bl.mean()) if len(ok) else float("nan"),
            "mean_R_WL": float(wl.mean()) if len(ok) else float("nan"),
            "std_R_BL": float(bl.std(ddof=1)) if len(ok) > 1 else 0.0,
            "std_R_WL": float(wl.std(ddof=1)) if len(ok) > 1 else 0.0,
        })
    return rows


def write_summary_csv(records, path) -> None:
    rows = aggregate(records)
    cols = ("sweep_value", "method", "n_runs", "n_failed",
            "mean_R_BL", "mean_R_WL", "std_R_BL", "std_R_WL")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])


_METHOD_COLORS = {"alma": "#1f77b4", "twist": "#d62728"}


def _svg_panel(rows, methods, metric, x0, title):
    # one panel: mean rate vs sweep value, one polyline per method
    width, height = 360, 300
    ml, mr, mt, mb = 52, 16, 34, 44
    xs = sorted({row["sweep_value"] for row in rows})
    if len(xs) == 1:
        xs = [xs[0] - 0.5, xs[0] + 0.5]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = 0.0, 1.0
    inner_w, inner_h = width - ml - mr, height - mt - mb

    def px(v):
        return x0 + ml + (v - x_lo) / (x_hi - x_lo) * inner_w

    def py(v):
        return mt + (y_hi - v) / (y_hi - y_lo) * inner_h

    parts = [
        f'<rect x="{x0 + ml}" y="{mt}" width="{inner_w}" height="{inner_h}" '
        'fill="none" stroke="#888"/>',
        f'<text x="{x0 + ml + inner_w / 2:.1f}" y="{mt - 12}" text-anchor="middle" '
        f'font-size="13">{title}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        y = py(frac)
        parts.append(
            f'<text x="{x0 + ml - 6}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-size="11">{frac:.1f}</text>'
        )
        if frac > 0.0:
            parts.append(
                f'<line x1="{x0 + ml}" y1="{y:.1f}" x2="{x0 + ml + inner_w}" '
                f'y2="{y:.1f}" stroke="#ddd"/>'
            )
    for v in (x_lo, x_hi):
        parts.append(
            f'<text x="{px(v):.1f}" y="{mt + inner_h + 16}" text-anchor="middle" '
            f'font-size="11">{v:g}</text>'
        )
    for method in methods:
        pts = [
            (row["sweep_value"], row[metric])
            for row in rows
            if row["method"] == method and np.isfinite(row[metric])
        ]
        if not pts:
            continue
        pts.sort()
        coords = " ".join(f"{px(x):.2f},{py(min(max(y, 0.0), 1.0)):.2f}" for x, y in pts)
        color = _METHOD_COLORS.get(method, "#2ca02c")
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, y in pts:
            parts.append(
                f'<circle cx="{px(x):.2f}" cy="{py(min(max(y, 0.0), 1.0)):.2f}" '
                f'r="3" fill="{color}"/>'
            )
    return parts


def write_curves_svg(records, path, sweep_param: str) -> None:
    """Two-panel chart: mean between- and within-rates vs the sweep value."""
    rows = aggregate(records)
    methods = sorted({row["method"] for row in rows})
    width, height = 760, 300
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    parts += _svg_panel(rows, methods, "mean_R_BL", 0, f"between-layer rate vs {sweep_param}")
    parts += _svg_panel(rows, methods, "mean_R_WL", 380, f"within-layer rate vs {sweep_param}")
    for i, method in enumerate(methods):
        color = _METHOD_COLORS.get(method, "#2ca02c")
        x = 60 + i * 120
        parts.append(
            f'<line x1="{x}" y1="{height - 12}" x2="{x + 24}" y2="{height - 12}" '
            f'stroke="{color}" stroke-width="3"/>'
        )
        parts.append(
            f'<text x="{x + 30}" y="{height - 8}" font-size="12">{method}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


def emit_results(records, out_dir, formats=("csv",), sweep_param: str = "") -> dict:
    """Write runs.csv / summary.csv and optionally curves.svg; returns paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if "csv" in formats:
        paths["runs"] = os.path.join(out_dir, "runs.csv")
        write_runs_csv(records, paths["runs"])
        paths["summary"] = os.path.join(out_dir, "summary.csv")
        write_summary_csv(records, paths["summary"])
    if "svg" in formats:
        if not sweep_param and records:
            sweep_param = records[0].sweep_param
        paths["curves"] = os.path.join(out_dir, "curves.svg")
        write_curves_svg(records, paths["curves"], sweep_param)
    unknown = set(formats) - {"csv", "svg"}
    if unknown:
        raise ValueError(f"unknown emit formats: {sorted(unknown)}")
    return paths
