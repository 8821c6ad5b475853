"""Deterministic toy problems with known optima, used for rate studies.

The unconstrained quadratic has F(x) = ||x||^2 / 2 with minimum 0 at the
origin; the constrained variant adds a single linear expectation constraint
x >= threshold whose exact surrogate optimum is known for every margin.
Both use an identity inner map and a constant sample, so every run is
reproducible arithmetic with no Monte-Carlo noise.
"""

from __future__ import annotations

import numpy as np

from ..problem import CompositionalProblem
from ..sets import Box


def quadratic_problem(lower: float = -1.0, upper: float = 1.0) -> CompositionalProblem:
    zeta0 = np.zeros(1)
    one = np.ones((1, 1))

    def identity(x, zeta):
        return x

    def identity_jac(x, zeta):
        return one

    return CompositionalProblem(
        dim_x=1,
        dim_g=1,
        dim_h=0,
        num_constraints=0,
        sample=lambda rng: zeta0,
        inner_g=identity,
        inner_g_jacobian=identity_jac,
        outer_f=lambda y: 0.5 * float(y @ y),
        outer_f_gradient=lambda y: np.asarray(y, dtype=float),
        feasible_set=Box(lower=[lower], upper=[upper]),
        name="quadratic-toy",
        metadata={"f_star": 0.0 if lower <= 0.0 <= upper else 0.5 * min(lower**2, upper**2)},
    )


def constrained_quadratic_problem(
    threshold: float = 0.3, lower: float = 0.05, upper: float = 1.0
) -> CompositionalProblem:
    """Minimize x^2/2 subject to threshold - x <= 0 on [lower, upper]."""
    if not lower < threshold < upper:
        raise ValueError("threshold must be interior to the box")
    zeta0 = np.zeros(1)
    one = np.ones((1, 1))

    def identity(x, zeta):
        return x

    def identity_jac(x, zeta):
        return one

    return CompositionalProblem(
        dim_x=1,
        dim_g=1,
        dim_h=1,
        num_constraints=1,
        sample=lambda rng: zeta0,
        inner_g=identity,
        inner_g_jacobian=identity_jac,
        inner_h=identity,
        inner_h_jacobian=identity_jac,
        outer_f=lambda y: 0.5 * float(y @ y),
        outer_f_gradient=lambda y: np.asarray(y, dtype=float),
        outer_q=lambda z: np.asarray([threshold - float(z[0])]),
        outer_q_jacobian=lambda z: np.array([[-1.0]]),
        feasible_set=Box(lower=[lower], upper=[upper]),
        name="constrained-quadratic-toy",
        metadata={
            "f_star": 0.5 * threshold**2,
            "x_star": threshold,
            "threshold": threshold,
        },
    )


def toy_constants(problem: CompositionalProblem) -> dict:
    """Exact assumption constants for the toy problems on their boxes."""
    box = problem.feasible_set
    hi = float(np.max(np.abs(np.concatenate([box.lower, box.upper]))))
    constants = {
        "C_f": hi**2,  # ||grad f(y)||^2 = y^2 on the reachable interval
        "L_f": 1.0,
        "C_g": 1.0,
        "V_g": 0.0,
        "C_h": 1.0 if problem.constrained else 0.0,
        "V_h": 0.0,
        "C_q": 1.0 if problem.constrained else 0.0,
        "L_q": 0.0,
        "J": problem.num_constraints,
        "D_x": box.squared_diameter(),
    }
    return constants
