import math

import numpy as np
import pytest

from cscgd import (
    Box,
    CompositionalProblem,
    NonFiniteGradientError,
    SolverConfig,
    StepSchedule,
    cscgd_step,
    init_state,
    make_rng,
    run,
    step_bound_diagnostic,
    zero_violation_gamma,
)
from cscgd.solver import logged_iterations, tracking_weights
from cscgd.problems import constrained_quadratic_problem, quadratic_problem, toy_constants


def scalar_reference(horizon, a, b, c, regime, x0=1.0, lo=-1.0, hi=1.0):
    """Independent straight-line simulation of the toy recursion."""
    sched = StepSchedule(a=a, b=b, c=c, regime=regime, horizon=horizon)
    x = min(max(x0, lo), hi)
    y = x  # one extra sample initializes the tracker at g(x1) = x1
    xs, tail = [], []
    t_tail = math.ceil(horizon / 2)
    for t in range(1, horizon + 1):
        alpha, beta, _ = sched.step_sizes(t)
        if t >= t_tail:
            tail.append(x)
        y = (1.0 - beta) * y + beta * x
        x = min(max(x - alpha * y, lo), hi)
        xs.append(x)
    return np.array(xs), float(np.mean(tail))


def test_toy_run_matches_scalar_reference():
    problem = quadratic_problem()
    for regime in ("diminishing", "constant"):
        cfg = SolverConfig(a=0.75, b=0.5, c=0.75, regime=regime, horizon=400,
                           seed=0, x0=np.array([1.0]))
        x_hat, traj = run(problem, cfg)
        xs_ref, x_hat_ref = scalar_reference(400, 0.75, 0.5, 0.75, regime)
        xs = np.array([r.x[0] for r in traj])
        assert np.allclose(xs, xs_ref, atol=1e-14)
        assert x_hat[0] == pytest.approx(x_hat_ref, abs=1e-14)


def test_toy_constant_regime_monotone_to_zero():
    problem = quadratic_problem()
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, regime="constant", horizon=10_000,
                       seed=0, x0=np.array([1.0]))
    x_hat, traj = run(problem, cfg)
    xs = np.array([r.x[0] for r in traj])
    assert np.all(np.diff(xs) <= 1e-15)
    assert np.all(xs >= -1e-15)
    assert abs(x_hat[0]) < 1e-2


def test_run_equals_repeated_steps_bitwise():
    problem = constrained_quadratic_problem()
    cfg = SolverConfig(a=0.8, b=0.4, c=0.6, regime="diminishing", horizon=250,
                       gamma=0.05, c_ell=1.0, seed=11)
    x_hat, traj = run(problem, cfg)

    rng = make_rng(cfg.seed, cfg.stream_id)
    state = init_state(problem, cfg, rng)
    schedule = cfg.schedule()
    records = []
    for _ in range(cfg.horizon):
        state, rec = cscgd_step(problem, state, schedule, cfg.penalty_params(), rng)
        records.append(rec)
    assert len(records) == len(traj)
    for r1, r2 in zip(traj, records):
        assert r1.t == r2.t
        assert r1.x[0] == r2.x[0]
        assert r1.objective_estimate == r2.objective_estimate
        assert r1.step_sq_norm == r2.step_sq_norm
        assert np.array_equal(r1.constraint_estimates, r2.constraint_estimates)
    assert x_hat[0] == pytest.approx(state.tail_sum[0] / state.tail_count, abs=0.0)


def test_unconstrained_step_is_plain_tracked_gradient():
    problem = quadratic_problem()
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, horizon=10, seed=0, x0=np.array([0.7]))
    rng = make_rng(0, 0)
    state = init_state(problem, cfg, rng)
    sched = cfg.schedule()
    y0 = state.y[0]
    state, rec = cscgd_step(problem, state, sched, cfg.penalty_params(), rng)
    alpha, beta, _ = sched.step_sizes(1)
    y1 = (1 - beta) * y0 + beta * 0.7
    assert state.y[0] == pytest.approx(y1, abs=1e-15)
    assert state.x[0] == pytest.approx(0.7 - alpha * y1, abs=1e-15)


def test_zero_steps_keep_x_but_update_trackers():
    problem = constrained_quadratic_problem()
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, horizon=50, seed=3,
                       x0=np.array([0.9]), c_ell=1.0)
    rng = make_rng(3, 0)
    state = init_state(problem, cfg, rng)
    y_before = state.y.copy()
    state, _ = cscgd_step(problem, state, cfg.schedule(), cfg.penalty_params(), rng,
                          alpha_override=0.0, delta_override=0.0)
    assert state.x[0] == 0.9
    # beta_1 = 1 for the diminishing regime: tracker now equals g(x, zeta)
    assert state.y[0] == 0.9
    assert state.t == 2
    assert y_before[0] == 0.9  # init used one extra sample at x1


def test_pure_tracking_matches_monte_carlo():
    # stochastic inner map: g(x, zeta) = x * zeta with E[zeta] = 1
    from cscgd import ExponentialMean

    dist = ExponentialMean(1.0)

    problem = CompositionalProblem(
        dim_x=1, dim_g=1, dim_h=0, num_constraints=0,
        sample=dist.draw,
        inner_g=lambda x, z: x * z,
        inner_g_jacobian=lambda x, z: z.reshape(1, 1),
        outer_f=lambda y: 0.5 * float(y @ y),
        outer_f_gradient=lambda y: y,
        feasible_set=Box(lower=[0.5], upper=[0.5]),
        name="tracking-toy",
    )
    T = 4000
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, horizon=T, seed=21, freeze_x=True)
    rng = make_rng(21, 0)
    state = init_state(problem, cfg, rng)
    sched = cfg.schedule()
    for _ in range(T):
        state, _ = cscgd_step(problem, state, sched, cfg.penalty_params(), rng,
                              alpha_override=0.0, delta_override=0.0)
    weights, w0 = tracking_weights(sched)
    assert w0 == 0.0  # beta_1 = 1 wipes the initialization
    # Var(y_T) = sum w_t^2 Var(0.5 zeta); 10^6-sample independent estimate
    mc = dist.draw(make_rng(99, 0), 1_000_000)[:, 0] * 0.5
    band = 3.0 * math.sqrt(np.sum(weights**2) * mc.var(ddof=1)
                           + mc.var(ddof=1) / mc.size)
    assert abs(state.y[0] - mc.mean()) <= band


def test_horizon_two_tail_average():
    problem = quadratic_problem()
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, horizon=2, seed=0, x0=np.array([1.0]))
    x_hat, traj = run(problem, cfg)
    # tail covers t in {1, 2}: x1 = 1 and x2 = x1 - alpha_1 * y_2 = 0
    assert x_hat[0] == pytest.approx(0.5, abs=1e-15)


def test_every_iterate_stays_feasible():
    problem = constrained_quadratic_problem()
    cfg = SolverConfig(a=0.9167, b=0.5, c=0.75, regime="constant", horizon=500,
                       gamma=0.2, c_ell=1.0, seed=5)
    _, traj = run(problem, cfg)
    for r in traj:
        assert problem.feasible_set.contains(r.x, slack=1e-12)


def test_non_finite_gradient_names_culprit():
    bad_after = 25

    calls = {"n": 0}

    def bad_grad(y):
        calls["n"] += 1
        if calls["n"] > bad_after:
            return np.array([np.nan])
        return y

    problem = CompositionalProblem(
        dim_x=1, dim_g=1, dim_h=0, num_constraints=0,
        sample=lambda rng: np.zeros(1),
        inner_g=lambda x, z: x,
        inner_g_jacobian=lambda x, z: np.ones((1, 1)),
        outer_f=lambda y: 0.5 * float(y @ y),
        outer_f_gradient=bad_grad,
        feasible_set=Box(lower=[-1.0], upper=[1.0]),
    )
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, horizon=100, seed=0)
    with pytest.raises(NonFiniteGradientError) as exc:
        run(problem, cfg)
    assert exc.value.source == "outer_f_gradient"
    assert exc.value.t > 1


def test_logged_iterations_policy():
    full = logged_iterations(10_000)
    assert full.size == 10_000 and full[0] == 1 and full[-1] == 10_000
    sparse = logged_iterations(1_000_000)
    assert sparse.size <= 1000
    assert sparse[0] == 1 and sparse[-1] == 1_000_000
    assert np.all(np.diff(sparse) > 0)


def test_horizon_must_be_at_least_two():
    with pytest.raises(ValueError):
        run(quadratic_problem(), SolverConfig(a=0.75, b=0.5, c=0.75, horizon=1))


def test_step_bound_holds_with_exact_constants():
    problem = quadratic_problem()
    constants = toy_constants(problem)
    trajectories = []
    for seed in range(20):
        cfg = SolverConfig(a=0.75, b=0.5, c=0.75, regime="constant",
                           horizon=300, seed=seed, x0=np.array([1.0]))
        _, traj = run(problem, cfg)
        trajectories.append(traj)
    report = step_bound_diagnostic(trajectories, constants)
    assert report.violation_count == 0


def test_step_bound_zero_steps_trivially_hold():
    problem = quadratic_problem()
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, horizon=100, seed=0, freeze_x=True)
    _, traj = run(problem, cfg)
    report = step_bound_diagnostic([traj], toy_constants(problem))
    assert report.violation_count == 0
    assert np.all(report.mean_step_sq == 0.0)


def test_step_bound_flags_when_constants_shrunk():
    # quartering the bound puts it below the realized early steps; halving
    # alone only reaches the boundary of attainable steps on this toy
    problem = quadratic_problem()
    constants = toy_constants(problem)
    shrunk = dict(constants)
    shrunk["C_f"] = constants["C_f"] / 4.0
    trajectories = []
    for seed in range(10):
        cfg = SolverConfig(a=0.75, b=0.5, c=0.75, regime="constant",
                           horizon=200, seed=seed, x0=np.array([1.0]))
        _, traj = run(problem, cfg)
        trajectories.append(traj)
    report = step_bound_diagnostic(trajectories, shrunk)
    assert report.violation_count > 0


def test_zero_violation_margin_positive_for_constrained_problem():
    problem = constrained_quadratic_problem()
    constants = dict(toy_constants(problem))
    constants["C_ell"] = 1.0
    sched = StepSchedule(a=0.9167, b=0.5, c=0.75, regime="constant", horizon=10_000)
    gamma = zero_violation_gamma(constants, sched)
    assert gamma > 0.0
    assert zero_violation_gamma({**constants, "J": 0}, sched) == 0.0


def test_records_carry_exact_schedule_values():
    problem = constrained_quadratic_problem()
    cfg = SolverConfig(a=0.8, b=0.45, c=0.6, regime="diminishing", horizon=64,
                       c_ell=1.0, seed=2)
    _, traj = run(problem, cfg)
    sched = cfg.schedule()
    for r in traj:
        alpha, beta, delta = sched.step_sizes(r.t)
        assert (r.alpha, r.beta, r.delta) == (alpha, beta, delta)
        assert r.alpha > 0 and r.beta > 0 and r.delta > 0


def test_full_logging_flag_for_long_horizons():
    problem = quadratic_problem()
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, regime="constant", horizon=20_000,
                       seed=0, log_points=20_000)
    _, traj = run(problem, cfg)
    assert len(traj) == 20_000


def test_init_state_projects_configured_point():
    problem = quadratic_problem()
    cfg = SolverConfig(a=0.75, b=0.5, c=0.75, horizon=10, x0=np.array([7.0]))
    state = init_state(problem, cfg, make_rng(0, 0))
    assert state.x[0] == 1.0  # clamped to the box
    assert state.y[0] == 1.0  # one extra sample at x1: g = x1
    assert state.tail_start == 5
