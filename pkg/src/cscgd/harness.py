"""Experiment harness: configs, multi-seed runs, metrics, plot-data emission.

A run is fully determined by (config, seed): the trajectory CSV bytes, the
summary rows and the plot data reproduce exactly.  Seeds execute in a
process pool when requested; each owns its RNG streams (stream 0 drives the
solver, stream 1 the fresh evaluation batch) so scheduling cannot leak into
the results.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from scipy import stats

from .distributions import make_rng
from .oracles import ergodic_fstar, sample_average_baseline, wired_fstar
from .problems import constrained_quadratic_problem, get_preset, quadratic_problem
from .solver import SolverConfig, run

EPS_PLOT = 1e-12


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    a: float = 0.9167
    b: float = 0.5
    c: float = 0.75
    regime: str = "constant"
    horizon: int = 10_000
    gamma: float = 0.0
    c_ell: float | None = None  # None: instance default
    seeds: tuple = (0,)
    eval_samples: int = 100_000
    out_dir: str = "runs"
    oracle_gap: bool = False
    workers: int = 1
    log_points: int | None = None
    x0: tuple | None = None
    instance_overrides: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        d["x0"] = None if self.x0 is None else list(self.x0)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["seeds"] = tuple(d.get("seeds", (0,)))
        if d.get("x0") is not None:
            d["x0"] = tuple(d["x0"])
        if "instance_overrides" in d and d["instance_overrides"] is None:
            d["instance_overrides"] = {}
        return cls(**d)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.canonical_json())
            fh.write("\n")

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def solver_config(self, seed: int, c_ell: float) -> SolverConfig:
        x0 = None if self.x0 is None else np.asarray(self.x0, dtype=float)
        return SolverConfig(
            a=self.a, b=self.b, c=self.c, regime=self.regime,
            horizon=self.horizon, gamma=self.gamma, c_ell=c_ell,
            seed=seed, log_points=self.log_points, x0=x0,
        )


TOY_TARGETS = {
    "quadratic-toy": quadratic_problem,
    "constrained-quadratic-toy": constrained_quadratic_problem,
}


def resolve_problem(config: ExperimentConfig):
    """(problem, c_ell) for the configured preset or toy target."""
    overrides = config.instance_overrides or {}
    if config.preset in TOY_TARGETS:
        problem = TOY_TARGETS[config.preset](**overrides)
        c_ell = float(config.c_ell) if config.c_ell is not None else 1.0
        return problem, c_ell
    instance = get_preset(config.preset, overrides or None)
    if config.c_ell is not None:
        c_ell = float(config.c_ell)
    elif hasattr(instance, "default_c_ell"):
        c_ell = float(instance.default_c_ell())
    else:
        c_ell = 1.0
    return instance.build(), c_ell


def resolve_instance(config: ExperimentConfig):
    return get_preset(config.preset, config.instance_overrides or None)


# ---------------------------------------------------------------------------
# Trajectory CSV contract
# ---------------------------------------------------------------------------

def trajectory_header(num_constraints: int) -> str:
    cols = ["t", "alpha", "beta", "delta", "obj"]
    cols += [f"viol_{j + 1}" for j in range(num_constraints)]
    cols.append("step_sq")
    return ",".join(cols)


def write_trajectory_csv(path: str, trajectory: list, num_constraints: int):
    lines = [trajectory_header(num_constraints)]
    for r in trajectory:
        vals = [str(r.t), repr(r.alpha), repr(r.beta), repr(r.delta),
                repr(r.objective_estimate)]
        vals += [repr(float(v)) for v in r.constraint_estimates]
        vals.append(repr(r.step_sq_norm))
        lines.append(",".join(vals))
    payload = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)


def read_trajectory_csv(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


# ---------------------------------------------------------------------------
# Point evaluation and summaries
# ---------------------------------------------------------------------------

def evaluate_point(problem, x, n_samples: int, seed: int, n_batches: int = 10):
    """Plug-in estimates of F(x) and Q(x) from a fresh sample batch.

    Standard errors come from re-evaluating the outer functions on batch
    sub-means, which respects the non-linear plug-in structure.
    """
    rng = make_rng(seed, 1)
    x = np.asarray(x, dtype=float)
    h_is_g = problem.inner_h is problem.inner_g
    per_batch = max(2, n_samples // n_batches)
    f_vals, q_vals = [], []
    g_total = None
    h_total = None
    for _ in range(n_batches):
        g_sum = None
        h_sum = None
        for _ in range(per_batch):
            zeta = problem.sample(rng)
            gv = np.asarray(problem.inner_g(x, zeta), dtype=float)
            g_sum = gv.copy() if g_sum is None else g_sum + gv
            if problem.constrained and not h_is_g:
                hv = np.asarray(problem.inner_h(x, zeta), dtype=float)
                h_sum = hv.copy() if h_sum is None else h_sum + hv
        g_mean = g_sum / per_batch
        f_vals.append(float(problem.outer_f(g_mean)))
        g_total = g_mean if g_total is None else g_total + g_mean
        if problem.constrained:
            h_mean = g_mean if h_is_g else h_sum / per_batch
            q_vals.append(np.asarray(problem.outer_q(h_mean), dtype=float))
            h_total = h_mean if h_total is None else h_total + h_mean
    f_vals = np.array(f_vals)
    g_bar = g_total / n_batches
    out = {
        "f": float(problem.outer_f(g_bar)),
        "f_std_err": float(f_vals.std(ddof=1) / math.sqrt(n_batches)),
        "n_samples": per_batch * n_batches,
    }
    if problem.constrained:
        q_vals = np.stack(q_vals)
        out["q"] = np.asarray(problem.outer_q(h_total / n_batches), dtype=float)
        out["q_std_err"] = q_vals.std(axis=0, ddof=1) / math.sqrt(n_batches)
    else:
        out["q"] = np.zeros(0)
        out["q_std_err"] = np.zeros(0)
    return out


@dataclass
class RunSummary:
    seed: int
    x_hat: np.ndarray
    f_hat: float
    f_std_err: float
    max_violation: float
    violation_std_err: float
    gap: float | None
    wall_time: float
    config_hash: str
    trajectory_path: str


# ---------------------------------------------------------------------------
# Oracle cache
# ---------------------------------------------------------------------------

def oracle_cache_path(out_dir: str, preset: str) -> str:
    return os.path.join(out_dir, f"oracle-{preset}.json")


def compute_oracle(config: ExperimentConfig, instance=None) -> dict:
    """Deterministic or brute-force baseline value for the configured preset."""
    name = config.preset
    if name in TOY_TARGETS:
        problem = TOY_TARGETS[name](**(config.instance_overrides or {}))
        return {
            "method": "closed-form",
            "f_star": float(problem.metadata["f_star"]),
            "preset": name,
        }
    instance = instance if instance is not None else resolve_instance(config)
    if name == "paper-ex1":
        base = wired_fstar(instance)
        payload = {
            "method": "deterministic-moments",
            "f_star": base.f_star,
            "x_star": base.x_star.tolist(),
            "grad_map_norm": base.grad_map_norm,
        }
    elif name.startswith("paper-ex2"):
        res = ergodic_fstar(instance, lambda_points=7, p_points=7,
                            mc_samples=100_000, seed=99)
        payload = {
            "method": "grid-search-crn",
            "f_star": res.best_value,
            "x_star": res.best_point.tolist(),
            "f_star_std_err": res.best_std_err,
        }
    else:
        res = sample_average_baseline(instance.build(), n_samples=2000, seed=99)
        payload = {
            "method": "sample-average-local",
            "f_star": res.value,
            "x_star": res.x.tolist(),
            "grad_map_norm": res.grad_map_norm,
        }
    payload["preset"] = name
    return payload


def write_oracle_cache(config: ExperimentConfig) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    path = oracle_cache_path(config.out_dir, config.preset)
    payload = compute_oracle(config)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
    return path


def load_oracle_cache(config: ExperimentConfig) -> dict:
    path = oracle_cache_path(config.out_dir, config.preset)
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"no oracle baseline at {path}; run the 'oracle' command for "
            f"preset {config.preset!r} first, or disable the gap report"
        )
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Experiment runner
# ---------------------------------------------------------------------------

def _seed_payload(config: ExperimentConfig, seed: int, f_star: float | None):
    return {
        "config": config.to_dict(),
        "seed": seed,
        "f_star": f_star,
    }


def _run_one_seed(payload: dict):
    config = ExperimentConfig.from_dict(payload["config"])
    seed = payload["seed"]
    problem, c_ell = resolve_problem(config)
    t0 = time.perf_counter()
    x_hat, trajectory = run(problem, config.solver_config(seed, c_ell))
    wall = time.perf_counter() - t0
    path = os.path.join(config.out_dir, f"trajectory-seed{seed}.csv")
    write_trajectory_csv(path, trajectory, problem.num_constraints)
    ev = evaluate_point(problem, x_hat, config.eval_samples, seed)
    max_viol = float(np.max(ev["q"])) if ev["q"].size else 0.0
    viol_se = float(np.max(ev["q_std_err"])) if ev["q"].size else 0.0
    gap = None
    if payload["f_star"] is not None:
        gap = ev["f"] - payload["f_star"]
    summary = RunSummary(
        seed=seed,
        x_hat=x_hat,
        f_hat=ev["f"],
        f_std_err=ev["f_std_err"],
        max_violation=max_viol,
        violation_std_err=viol_se,
        gap=gap,
        wall_time=wall,
        config_hash=config.config_hash(),
        trajectory_path=path,
    )
    arrays = {
        "t": np.array([r.t for r in trajectory], dtype=float),
        "obj": np.array([r.objective_estimate for r in trajectory]),
        "viol": np.array(
            [np.max(r.constraint_estimates) if r.constraint_estimates.size else 0.0
             for r in trajectory]
        ),
        "step_sq": np.array([r.step_sq_norm for r in trajectory]),
    }
    return summary, arrays


def run_experiment(config: ExperimentConfig):
    """Execute all seeds, persist trajectories and summaries.

    Returns (list of RunSummary, dict of aggregate curves).  Requires the
    oracle cache when ``oracle_gap`` is set.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    f_star = None
    if config.oracle_gap:
        f_star = float(load_oracle_cache(config)["f_star"])
    payloads = [_seed_payload(config, s, f_star) for s in config.seeds]
    if config.workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_one_seed, payloads))
    else:
        results = [_run_one_seed(p) for p in payloads]
    summaries = [r[0] for r in results]
    curves = aggregate_curves([r[1] for r in results], f_star=f_star)
    write_summary_csv(os.path.join(config.out_dir, "summary.csv"), summaries)
    write_plot_csv(os.path.join(config.out_dir, "curves.csv"), curves)
    config.save(os.path.join(config.out_dir, "config.json"))
    return summaries, curves


def write_summary_csv(path: str, summaries: list):
    lines = ["seed,f_hat,f_std_err,max_violation,violation_std_err,gap,"
             "wall_time,config_hash,x_hat"]
    for s in summaries:
        gap = "" if s.gap is None else repr(s.gap)
        xs = ";".join(repr(float(v)) for v in s.x_hat)
        lines.append(
            f"{s.seed},{s.f_hat!r},{s.f_std_err!r},{s.max_violation!r},"
            f"{s.violation_std_err!r},{gap},{s.wall_time:.3f},{s.config_hash},{xs}"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Aggregation and plot data
# ---------------------------------------------------------------------------

def aggregate_curves(arrays_list: list, f_star: float | None = None) -> dict:
    ts = arrays_list[0]["t"]
    for arr in arrays_list[1:]:
        if arr["t"].shape != ts.shape or np.any(arr["t"] != ts):
            raise ValueError("seeds logged different iteration grids")
    obj = np.stack([a["obj"] for a in arrays_list])
    viol = np.stack([a["viol"] for a in arrays_list])
    step_sq = np.stack([a["step_sq"] for a in arrays_list])
    gap = obj - (f_star if f_star is not None else 0.0)
    n = obj.shape[0]

    def seed_std(m):
        return m.std(axis=0, ddof=1) if n > 1 else np.zeros(m.shape[1])

    return {
        "t": ts,
        "mean_gap": gap.mean(axis=0),
        "std_gap": seed_std(gap),
        "mean_violation": viol.mean(axis=0),
        "std_violation": seed_std(viol),
        "mean_step_sq": step_sq.mean(axis=0),
    }


def subsample_log(ts: np.ndarray, max_points: int = 200) -> np.ndarray:
    """Indices of a log-spaced subset of ts keeping the first and last entry."""
    if ts.size <= max_points:
        return np.arange(ts.size)
    targets = np.unique(np.round(
        np.logspace(np.log10(ts[0]), np.log10(ts[-1]), max_points)
    ))
    idx = np.unique(np.searchsorted(ts, targets).clip(0, ts.size - 1))
    if idx[0] != 0:
        idx = np.concatenate([[0], idx])
    if idx[-1] != ts.size - 1:
        idx = np.concatenate([idx, [ts.size - 1]])
    return idx


def write_plot_csv(path: str, curves: dict, max_points: int = 200):
    idx = subsample_log(curves["t"], max_points)
    lines = ["t,mean_gap,std_gap,mean_violation,std_violation"]
    for i in idx:
        lines.append(
            f"{int(curves['t'][i])},{curves['mean_gap'][i]!r},"
            f"{curves['std_gap'][i]!r},{curves['mean_violation'][i]!r},"
            f"{curves['std_violation'][i]!r}"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_plot_data(trajectory_set: list, f_star: float | None = None,
                   path: str | None = None, max_points: int = 200) -> dict:
    """Aggregate a set of per-seed trajectories into plot-ready series."""
    arrays = []
    for traj in trajectory_set:
        arrays.append({
            "t": np.array([r.t for r in traj], dtype=float),
            "obj": np.array([r.objective_estimate for r in traj]),
            "viol": np.array(
                [np.max(r.constraint_estimates) if r.constraint_estimates.size
                 else 0.0 for r in traj]
            ),
            "step_sq": np.array([r.step_sq_norm for r in traj]),
        })
    curves = aggregate_curves(arrays, f_star=f_star)
    if path is not None:
        write_plot_csv(path, curves, max_points)
    return curves


# ---------------------------------------------------------------------------
# Trend and rate statistics
# ---------------------------------------------------------------------------

def mann_kendall(series) -> dict:
    """Mann-Kendall S statistic and its normal deviate; S < 0 means downtrend."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 3:
        raise ValueError("series too short for a trend test")
    s = 0
    for i in range(n - 1):
        s += int(np.sum(np.sign(x[i + 1:] - x[i])))
    var = n * (n - 1) * (2 * n + 5) / 18.0
    if s > 0:
        z = (s - 1) / math.sqrt(var)
    elif s < 0:
        z = (s + 1) / math.sqrt(var)
    else:
        z = 0.0
    return {"s": s, "z": z}


@dataclass
class RateFit:
    slope: float
    intercept: float
    std_err: float
    ci_low: float
    ci_high: float
    clipped: bool
    horizons: np.ndarray
    means: np.ndarray


def rate_fit(ladder: dict, min_horizons: int = 4, min_seeds: int = 10) -> RateFit:
    """Least-squares slope of log(quantity) against log(horizon).

    ``ladder`` maps horizon -> per-seed terminal quantities.  Non-positive
    quantities are clipped at 1e-12 and flagged.  The confidence interval is
    the usual two-sided 95% OLS band on the slope.
    """
    if len(ladder) < min_horizons:
        raise ValueError(f"need at least {min_horizons} horizons")
    for T, vals in ladder.items():
        if len(vals) < min_seeds:
            raise ValueError(f"horizon {T} has {len(vals)} seeds, need {min_seeds}")
    horizons = np.array(sorted(ladder), dtype=float)
    means = np.array([np.mean(ladder[int(T)]) for T in horizons])
    clipped = bool(np.any(means <= EPS_PLOT))
    means_c = np.maximum(means, EPS_PLOT)
    lx = np.log(horizons)
    ly = np.log(means_c)
    n = lx.size
    vx = lx - lx.mean()
    slope = float(vx @ (ly - ly.mean()) / (vx @ vx))
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    dof = max(n - 2, 1)
    se = float(math.sqrt((resid @ resid) / dof / (vx @ vx)))
    tq = stats.t.ppf(0.975, dof)
    return RateFit(
        slope=slope, intercept=intercept, std_err=se,
        ci_low=slope - tq * se, ci_high=slope + tq * se,
        clipped=clipped, horizons=horizons, means=means,
    )
