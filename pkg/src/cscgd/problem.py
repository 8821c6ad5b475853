"""Generic problem bundle: minimize f(E[g(x, zeta)]) s.t. q(E[h(x, zeta)]) <= 0.

All maps are supplied as plain callables with closed-form Jacobians; the
solver never differentiates anything numerically.  Unconstrained problems
use num_constraints = 0 together with dim_h = 0, in which case the
constraint path of the solver is inert.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class CompositionalProblem:
    dim_x: int
    dim_g: int
    dim_h: int
    num_constraints: int
    sample: Callable  # rng -> one realization of zeta
    inner_g: Callable  # (x, zeta) -> vector[dim_g]
    inner_g_jacobian: Callable  # (x, zeta) -> matrix[dim_x, dim_g]
    outer_f: Callable  # (y) -> float
    outer_f_gradient: Callable  # (y) -> vector[dim_g]
    feasible_set: object
    inner_h: Callable | None = None  # (x, zeta) -> vector[dim_h]
    inner_h_jacobian: Callable | None = None
    outer_q: Callable | None = None  # (z) -> vector[num_constraints]
    outer_q_jacobian: Callable | None = None  # (z) -> matrix[dim_h, num_constraints]
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for n, v in (("dim_x", self.dim_x), ("dim_g", self.dim_g)):
            if v <= 0:
                raise ValueError(f"{n} must be positive")
        if self.dim_h < 0 or self.num_constraints < 0:
            raise ValueError("dims must be nonnegative")
        if self.constrained:
            missing = [
                n for n, v in (
                    ("inner_h", self.inner_h),
                    ("inner_h_jacobian", self.inner_h_jacobian),
                    ("outer_q", self.outer_q),
                    ("outer_q_jacobian", self.outer_q_jacobian),
                )
                if v is None
            ]
            if missing:
                raise ValueError(f"constrained problem lacks {missing}")
        if self.feasible_set.dim != self.dim_x:
            raise ValueError("feasible set dimension != dim_x")

    @property
    def constrained(self) -> bool:
        return self.num_constraints > 0

    def check_shapes(self, rng, n_draws: int = 10, x: np.ndarray | None = None):
        """Draw a few samples and verify every map's output shape.

        Raises ValueError on the first mismatch; cheap sanity net for
        hand-written Jacobians.
        """
        if x is None:
            x = self.feasible_set.midpoint()
        n, m, d, J = self.dim_x, self.dim_g, self.dim_h, self.num_constraints
        for _ in range(n_draws):
            zeta = self.sample(rng)
            _expect("inner_g", self.inner_g(x, zeta), (m,))
            _expect("inner_g_jacobian", self.inner_g_jacobian(x, zeta), (n, m))
            if self.constrained:
                _expect("inner_h", self.inner_h(x, zeta), (d,))
                _expect("inner_h_jacobian", self.inner_h_jacobian(x, zeta), (n, d))
        y = np.asarray(self.inner_g(x, self.sample(rng)), dtype=float)
        _expect("outer_f_gradient", self.outer_f_gradient(y), (m,))
        float(self.outer_f(y))
        if self.constrained:
            z = np.asarray(self.inner_h(x, self.sample(rng)), dtype=float)
            _expect("outer_q", self.outer_q(z), (J,))
            _expect("outer_q_jacobian", self.outer_q_jacobian(z), (d, J))


def _expect(name: str, value, shape: tuple):
    arr = np.asarray(value)
    if arr.shape != shape:
        raise ValueError(f"{name} returned shape {arr.shape}, expected {shape}")
