"""Two-timescale projected quasi-gradient solver with tracked expectations.

Per iteration, one fresh sample updates the tracking vectors y (inner
objective map) and z (inner constraint map) by exponential averaging, and
the iterate moves along the quasi-gradient assembled from outer gradients
evaluated at the freshly updated trackers, plus a penalty pull toward the
feasible region, followed by projection.  The returned design point is the
average of the second half of the iterates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import make_rng
from .penalty import PenaltyParams, penalty_gradient
from .problem import CompositionalProblem
from .schedule import DIMINISHING, StepSchedule

FULL_LOG_MAX_HORIZON = 10_000
SPARSE_LOG_POINTS = 1_000


class NonFiniteGradientError(RuntimeError):
    """A map produced a non-finite value; carries the culprit's name."""

    def __init__(self, source: str, t: int):
        self.source = source
        self.t = t
        super().__init__(f"non-finite value from {source} at iteration {t}")


@dataclass
class SolverConfig:
    a: float
    b: float
    c: float
    regime: str = DIMINISHING
    horizon: int = 1000
    gamma: float = 0.0
    c_ell: float = 1.0
    seed: int = 0
    stream_id: int = 0
    x0: np.ndarray | None = None
    freeze_x: bool = False  # forces alpha = delta = 0 (pure tracking)
    log_points: int | None = None

    def schedule(self) -> StepSchedule:
        return StepSchedule(self.a, self.b, self.c, self.regime, self.horizon)

    def penalty_params(self) -> PenaltyParams:
        return PenaltyParams(self.gamma, self.c_ell)


@dataclass
class SolverState:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    t: int = 1
    tail_sum: np.ndarray = None
    tail_count: int = 0
    tail_start: int = 1  # first iteration included in the tail average

    def __post_init__(self):
        if self.tail_sum is None:
            self.tail_sum = np.zeros_like(self.x)


@dataclass
class TrajectoryRecord:
    t: int
    alpha: float
    beta: float
    delta: float
    x: np.ndarray
    objective_estimate: float
    constraint_estimates: np.ndarray
    step_sq_norm: float


def init_state(problem: CompositionalProblem, config: SolverConfig, rng) -> SolverState:
    """x1 = projected box midpoint (or configured point); y1, z1 from one extra sample."""
    if config.x0 is not None:
        x1 = problem.feasible_set.project(np.asarray(config.x0, dtype=float))
    else:
        x1 = problem.feasible_set.project(problem.feasible_set.midpoint())
    zeta0 = problem.sample(rng)
    y1 = np.array(problem.inner_g(x1, zeta0), dtype=float, copy=True)
    if problem.constrained:
        z1 = np.array(problem.inner_h(x1, zeta0), dtype=float, copy=True)
    else:
        z1 = np.zeros(0)
    tail_start = math.ceil(config.horizon / 2)
    return SolverState(x=x1, y=y1, z=z1, t=1, tail_start=tail_start)


def cscgd_step(
    problem: CompositionalProblem,
    state: SolverState,
    schedule: StepSchedule,
    penalty_params: PenaltyParams,
    rng,
    alpha_override: float | None = None,
    delta_override: float | None = None,
) -> tuple[SolverState, TrajectoryRecord]:
    """One sample, one tracking update, one projected quasi-gradient step.

    Trackers are updated before they feed the gradient assembly.  The
    overrides exist for pure-tracking runs (alpha = delta = 0).
    """
    t = state.t
    alpha, beta, delta = schedule.step_sizes(t)
    if alpha_override is not None:
        alpha = alpha_override
    if delta_override is not None:
        delta = delta_override

    if t >= state.tail_start:
        state.tail_sum += state.x
        state.tail_count += 1

    zeta = problem.sample(rng)
    x = state.x
    gval = np.asarray(problem.inner_g(x, zeta), dtype=float)
    state.y *= 1.0 - beta
    state.y += beta * gval

    constrained = problem.constrained
    if constrained:
        if problem.inner_h is problem.inner_g:
            hval = gval
        else:
            hval = np.asarray(problem.inner_h(x, zeta), dtype=float)
        state.z *= 1.0 - beta
        state.z += beta * hval

    fgrad = np.asarray(problem.outer_f_gradient(state.y), dtype=float)
    jac_g = np.asarray(problem.inner_g_jacobian(x, zeta), dtype=float)
    direction = alpha * (jac_g @ fgrad)

    qval = np.zeros(problem.num_constraints)
    if constrained:
        qval = np.asarray(problem.outer_q(state.z), dtype=float)
        lgrad = penalty_gradient(qval, penalty_params)
        if delta != 0.0 and np.any(lgrad != 0.0):
            jac_q = np.asarray(problem.outer_q_jacobian(state.z), dtype=float)
            if problem.inner_h_jacobian is problem.inner_g_jacobian:
                jac_h = jac_g
            else:
                jac_h = np.asarray(problem.inner_h_jacobian(x, zeta), dtype=float)
            direction += delta * (jac_h @ (jac_q @ lgrad))

    if not np.all(np.isfinite(direction)):
        raise NonFiniteGradientError(_locate_nonfinite(problem, state, x, zeta), t)

    x_new = problem.feasible_set.project(x - direction)
    record = TrajectoryRecord(
        t=t,
        alpha=alpha,
        beta=beta,
        delta=delta,
        x=x_new.copy(),
        objective_estimate=float(problem.outer_f(state.y)),
        constraint_estimates=qval.copy(),
        step_sq_norm=float(np.sum((x_new - x) ** 2)),
    )
    state.x = x_new
    state.t = t + 1
    return state, record


def _locate_nonfinite(problem, state, x, zeta) -> str:
    probes = [
        ("inner_g", lambda: problem.inner_g(x, zeta)),
        ("inner_g_jacobian", lambda: problem.inner_g_jacobian(x, zeta)),
        ("outer_f_gradient", lambda: problem.outer_f_gradient(state.y)),
    ]
    if problem.constrained:
        probes += [
            ("inner_h", lambda: problem.inner_h(x, zeta)),
            ("inner_h_jacobian", lambda: problem.inner_h_jacobian(x, zeta)),
            ("outer_q", lambda: problem.outer_q(state.z)),
            ("outer_q_jacobian", lambda: problem.outer_q_jacobian(state.z)),
        ]
    for name, fn in probes:
        try:
            if not np.all(np.isfinite(np.asarray(fn(), dtype=float))):
                return name
        except FloatingPointError:
            return name
    return "projection input"


def logged_iterations(horizon: int, log_points: int | None = None) -> np.ndarray:
    """Iterations at which records are materialized.

    Every iteration up to FULL_LOG_MAX_HORIZON, otherwise log-spaced points
    that always include t = 1 and t = horizon.
    """
    if log_points is None:
        log_points = SPARSE_LOG_POINTS
    if horizon <= max(FULL_LOG_MAX_HORIZON, log_points):
        return np.arange(1, horizon + 1)
    pts = np.unique(
        np.round(np.logspace(0.0, np.log10(horizon), log_points)).astype(int)
    )
    return pts[(pts >= 1) & (pts <= horizon)]


def run(
    problem: CompositionalProblem,
    config: SolverConfig,
    rng=None,
) -> tuple[np.ndarray, list[TrajectoryRecord]]:
    """Execute the full horizon and return (tail-averaged point, trajectory).

    The loop is a fused copy of :func:`cscgd_step` (verified equivalent in
    the tests) so that long horizons stay cheap: records are materialized
    only at the logged iterations.
    """
    T = int(config.horizon)
    if T < 2:
        raise ValueError("horizon must be at least 2")
    if rng is None:
        rng = make_rng(config.seed, config.stream_id)
    schedule = config.schedule()
    penalty_params = config.penalty_params()
    state = init_state(problem, config, rng)

    alphas, betas, deltas = schedule.step_arrays()
    if config.freeze_x:
        alphas = np.zeros(T)
        deltas = np.zeros(T)
    log_ts = logged_iterations(T, config.log_points)
    log_set = set(int(t) for t in log_ts)

    sample = problem.sample
    inner_g = problem.inner_g
    jac_g_fn = problem.inner_g_jacobian
    f_grad = problem.outer_f_gradient
    f_val = problem.outer_f
    project = problem.feasible_set.project
    constrained = problem.constrained
    h_is_g = problem.inner_h is problem.inner_g
    jh_is_jg = problem.inner_h_jacobian is problem.inner_g_jacobian
    inner_h = problem.inner_h
    jac_h_fn = problem.inner_h_jacobian
    q_fn = problem.outer_q
    jac_q_fn = problem.outer_q_jacobian

    x = state.x
    y = state.y
    z = state.z
    tail_start = state.tail_start
    tail_sum = state.tail_sum
    tail_count = 0
    trajectory: list[TrajectoryRecord] = []
    empty_q = np.zeros(0)

    for t in range(1, T + 1):
        alpha = alphas[t - 1]
        beta = betas[t - 1]
        delta = deltas[t - 1]

        if t >= tail_start:
            tail_sum += x
            tail_count += 1

        zeta = sample(rng)
        gval = np.asarray(inner_g(x, zeta), dtype=float)
        y *= 1.0 - beta
        y += beta * gval

        if constrained:
            hval = gval if h_is_g else np.asarray(inner_h(x, zeta), dtype=float)
            z *= 1.0 - beta
            z += beta * hval

        jac_g = np.asarray(jac_g_fn(x, zeta), dtype=float)
        direction = alpha * (jac_g @ np.asarray(f_grad(y), dtype=float))

        qval = empty_q
        if constrained:
            qval = np.asarray(q_fn(z), dtype=float)
            lgrad = penalty_gradient(qval, penalty_params)
            if delta != 0.0 and np.any(lgrad != 0.0):
                jac_q = np.asarray(jac_q_fn(z), dtype=float)
                jac_h = jac_g if jh_is_jg else np.asarray(jac_h_fn(x, zeta), dtype=float)
                direction += delta * (jac_h @ (jac_q @ lgrad))

        if not np.all(np.isfinite(direction)):
            state.x, state.y, state.z, state.t = x, y, z, t
            raise NonFiniteGradientError(_locate_nonfinite(problem, state, x, zeta), t)

        x_new = project(x - direction)
        if t in log_set:
            trajectory.append(
                TrajectoryRecord(
                    t=t,
                    alpha=float(alpha),
                    beta=float(beta),
                    delta=float(delta),
                    x=x_new.copy(),
                    objective_estimate=float(f_val(y)),
                    constraint_estimates=qval.copy(),
                    step_sq_norm=float(np.sum((x_new - x) ** 2)),
                )
            )
        x = x_new

    x_hat = tail_sum / tail_count
    state.x, state.y, state.z = x, y, z
    state.t = T + 1
    state.tail_count = tail_count
    return x_hat, trajectory


def tracking_weights(schedule: StepSchedule) -> tuple[np.ndarray, float]:
    """Per-sample weights of the final tracking vector after a full horizon.

    y_{T+1} = w0 * y_1 + sum_t w_t g(x_t, zeta_t) with w_t = beta_t *
    prod_{s>t} (1 - beta_s); useful for exact variance bands in frozen-x
    tracking checks.
    """
    _, betas, _ = schedule.step_arrays()
    decay = np.cumprod((1.0 - betas)[::-1])[::-1]  # prod over s > t, shifted
    tail = np.concatenate([decay[1:], [1.0]])
    weights = betas * tail
    w0 = float(np.prod(1.0 - betas))
    return weights, w0


@dataclass
class StepBoundReport:
    """Per-iteration comparison of observed squared steps with their bound."""

    ts: np.ndarray
    mean_step_sq: np.ndarray
    std_err: np.ndarray
    bound: np.ndarray
    flagged: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.flagged is None:
            self.flagged = (self.mean_step_sq - 3.0 * self.std_err) > self.bound

    @property
    def violation_count(self) -> int:
        return int(np.sum(self.flagged))


def _trajectory_columns(traj) -> dict:
    """Column view of a trajectory given as records or as a column dict."""
    if isinstance(traj, dict):
        return traj
    return {
        "t": np.array([r.t for r in traj]),
        "alpha": np.array([r.alpha for r in traj]),
        "delta": np.array([r.delta for r in traj]),
        "step_sq": np.array([r.step_sq_norm for r in traj]),
    }


def step_bound_diagnostic(trajectories, constants: dict) -> StepBoundReport:
    """Check E||x_{t+1} - x_t||^2 <= 2 a_t^2 C_f C_g + 2 d_t^2 J C_ell^2 C_q C_h.

    ``trajectories`` is a list of per-seed trajectories (record lists or
    column dicts) sharing the same logged iterations.  A point is flagged
    when the seed-averaged squared step exceeds the bound by more than
    three standard errors.
    """
    if not len(trajectories):
        raise ValueError("need at least one non-empty trajectory")
    cols = [_trajectory_columns(traj) for traj in trajectories]
    if not cols[0]["t"].size:
        raise ValueError("need at least one non-empty trajectory")
    n_seeds = len(cols)
    ts = np.asarray(cols[0]["t"])
    steps = np.empty((n_seeds, ts.size))
    for i, c in enumerate(cols):
        if np.asarray(c["t"]).size != ts.size:
            raise ValueError("trajectories have mismatched logging grids")
        steps[i] = c["step_sq"]
    alphas = np.asarray(cols[0]["alpha"])
    deltas = np.asarray(cols[0]["delta"])
    c_f, c_g = constants["C_f"], constants["C_g"]
    c_q, c_h = constants.get("C_q", 0.0), constants.get("C_h", 0.0)
    c_ell, j = constants.get("C_ell", 0.0), constants.get("J", 0)
    bound = 2.0 * alphas**2 * c_f * c_g + 2.0 * deltas**2 * j * c_ell**2 * c_q * c_h
    mean = steps.mean(axis=0)
    if n_seeds > 1:
        se = steps.std(axis=0, ddof=1) / np.sqrt(n_seeds)
    else:
        se = np.zeros_like(mean)
    return StepBoundReport(ts=ts, mean_step_sq=mean, std_err=se, bound=bound)


def convergence_bound_terms(constants: dict, schedule: StepSchedule) -> dict:
    """Order-of-magnitude pieces of the gap/violation bounds.

    D1 and D2 depend on initialization through the tracking residuals; with
    sample-based initialization those residuals are bounded by the inner
    variances, which is what is used here.  The result is an order estimate,
    not a certified constant.
    """
    c_f, c_g = constants["C_f"], constants["C_g"]
    c_h, c_q = constants.get("C_h", 0.0), constants.get("C_q", 0.0)
    v_g, v_h = constants.get("V_g", 0.0), constants.get("V_h", 0.0)
    l_f, l_q = constants.get("L_f", 0.0), constants.get("L_q", 0.0)
    c_ell, j = constants.get("C_ell", 1.0), constants.get("J", 0)
    d_x = constants["D_x"]
    pen = j * c_ell**2 * c_q * c_h
    d_y = v_g + 2.0 * v_g + 2.0 * c_g * (c_f * c_g + pen)
    d_z = v_h + 2.0 * v_h + 2.0 * c_h * (c_f * c_g + pen)
    d_1 = d_x + d_y + d_z
    d_2 = max(
        4.0 * (c_g + c_h) * c_f * c_g
        + 4.0 * (c_g + c_h) * pen
        + (l_f * c_g + math.sqrt(max(j, 1)) * l_q * c_h * c_ell + c_h * c_q) * d_x,
        2.0 * (c_f * c_g + pen),
        4.0 * (v_g + v_h),
    )
    T = schedule.horizon
    alphas, betas, deltas = schedule.step_arrays()
    t0 = math.ceil(T / 2)
    sl = slice(t0 - 1, T)
    tail = np.sum(
        deltas[sl] ** 2 / alphas[sl]
        + betas[sl] ** 2 / alphas[sl]
        + deltas[sl] ** 2 / (alphas[sl] * betas[sl])
    )
    omega = 2.0 * d_1 / (T * alphas[-1]) + 2.0 * d_2 * tail / T
    return {"D_1": d_1, "D_2": d_2, "omega": float(omega)}


def zero_violation_gamma(constants: dict, schedule: StepSchedule) -> float:
    """Margin choice that drives the violation bound to zero.

    Evaluates sqrt(J T^(c-a) (omega + sqrt(C_f C_g) D_x) / 2^(c-a)); at desk
    scale this usually exceeds its own validity range and must be capped by
    the caller (e.g. at half the Slater margin).
    """
    j = constants.get("J", 0)
    if j == 0:
        return 0.0
    terms = convergence_bound_terms(constants, schedule)
    T = schedule.horizon
    expo = schedule.c - schedule.a
    c_f, c_g, d_x = constants["C_f"], constants["C_g"], constants["D_x"]
    val = j * T**expo * (terms["omega"] + math.sqrt(c_f * c_g) * d_x) / 2.0**expo
    return float(math.sqrt(val))
