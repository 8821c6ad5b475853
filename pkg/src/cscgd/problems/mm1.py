"""Single M/M/1 queue: service-rate design with a closed-form optimum.

The utility rewards utilization and charges the mean waiting delay,
U(mu) = r lam/mu - h (lam/mu)/(mu - lam); its maximizer has the closed form
mu* = lam + u + sqrt(u (u + lam)) with u = h/r.  Doubles as an end-to-end
check of the solver on a deterministic problem.
"""

from __future__ import annotations

import math

import numpy as np

from ..distributions import ConstantVec
from ..problem import CompositionalProblem
from ..sets import Box


def mm1_utility(mu: float, lam: float, r: float, h: float) -> float:
    if not (mu > lam > 0.0):
        raise ValueError("unstable queue: need mu > lam > 0")
    if r <= 0.0 or h <= 0.0:
        raise ValueError("r and h must be positive")
    return r * lam / mu - h * (lam / mu) / (mu - lam)


def mm1_utility_derivative(mu: float, lam: float, r: float, h: float) -> float:
    if not (mu > lam > 0.0):
        raise ValueError("unstable queue: need mu > lam > 0")
    return -r * lam / mu**2 + h * lam * (2.0 * mu - lam) / (mu * (mu - lam)) ** 2


def mm1_optimal_mu(lam: float, r: float, h: float) -> float:
    if lam <= 0.0 or r <= 0.0 or h <= 0.0:
        raise ValueError("lam, r, h must be positive")
    u = h / r
    return lam + u + math.sqrt(u * (u + lam))


def mm1_problem(
    lam: float, r: float, h: float, box: tuple | None = None, gain: float | None = None
) -> CompositionalProblem:
    """Deterministic compositional wrapping: identity inner map, f = -gain * U.

    The utility is flat for large mu, so without rescaling the unit-free
    step sizes crawl; ``gain`` conditions the objective without moving its
    maximizer.  The default normalizes the slope near the upper box edge.
    """
    if box is None:
        width = mm1_optimal_mu(lam, r, h) - lam
        box = (lam + 0.4 * width, lam + 2.5 * width)
    if box[0] <= lam:
        raise ValueError("box must exclude the unstable region mu <= lam")
    if gain is None:
        probe = box[1] - 0.05 * (box[1] - box[0])
        gain = 1.0 / max(abs(mm1_utility_derivative(probe, lam, r, h)), 1e-12)
    dist = ConstantVec([0.0])
    one = np.ones((1, 1))

    def inner_g(x, zeta):
        return x

    def inner_g_jacobian(x, zeta):
        return one

    def outer_f(y):
        return -gain * mm1_utility(float(y[0]), lam, r, h)

    def outer_f_gradient(y):
        return np.array([-gain * mm1_utility_derivative(float(y[0]), lam, r, h)])

    return CompositionalProblem(
        dim_x=1,
        dim_g=1,
        dim_h=0,
        num_constraints=0,
        sample=dist.draw,
        inner_g=inner_g,
        inner_g_jacobian=inner_g_jacobian,
        outer_f=outer_f,
        outer_f_gradient=outer_f_gradient,
        feasible_set=Box(lower=[box[0]], upper=[box[1]]),
        name="mm1",
        metadata={"lam": lam, "r": r, "h": h},
    )
