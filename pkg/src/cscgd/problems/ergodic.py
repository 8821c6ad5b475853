"""Parallel M/G/1 queues over fading wireless channels (ergodic-capacity view).

Joint design of arrival rates and per-queue transmit powers.  Service rates
follow the ergodic capacity b_i = B_i log(1 + zeta_i p_i) under chi-squared
fading with support bounded away from zero.  The delay penalty applies the
PK formula to the tracked reciprocal-rate moments, with the ratio replaced
by its tangent-line continuation once the tracked utilization crosses the
knee.  The quality-of-service constraint keeps the expected worst-user rate
above a floor: q(z) = r_min + z with z tracking -min_i b_i.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..distributions import TruncatedChiSquared
from ..problem import CompositionalProblem
from ..sets import BoxWithSumCap, ProductSet
from .safeguards import safe_inv, safe_inv_deriv


@dataclass(frozen=True)
class Mg1ErgodicInstance:
    bandwidths: np.ndarray  # per-channel capacity scale B_i
    p_min: float
    p_max: float  # total power budget (also per-queue upper bound)
    lambda_min: float
    lambda_max: float
    lambda_cap: float
    r_min: float  # worst-user expected-rate floor
    fading_lower: float  # chi-squared support truncation G
    antennas: int  # K; fading has 2K degrees of freedom
    psi_weights: np.ndarray
    phi_weights: np.ndarray
    varsigma_eps: float = 0.95  # knee of the utilization safeguard
    name: str = "mg1-ergodic"

    def __post_init__(self):
        for f in ("bandwidths", "psi_weights", "phi_weights"):
            object.__setattr__(self, f, np.asarray(getattr(self, f), dtype=float))
        n = self.bandwidths.size
        if self.psi_weights.size != n or self.phi_weights.size != n:
            raise ValueError("weights must match the number of queues")
        if self.fading_lower <= 0:
            raise ValueError("fading support must be bounded away from zero")
        if not (0.0 < self.varsigma_eps < 1.0):
            raise ValueError("varsigma_eps must lie in (0, 1)")
        if self.p_min <= 0 or self.p_min * n > self.p_max:
            raise ValueError("power box is empty")

    @property
    def n_queues(self) -> int:
        return self.bandwidths.size

    def channel_distribution(self) -> TruncatedChiSquared:
        n = self.n_queues
        return TruncatedChiSquared(
            dof=np.full(n, 2.0 * self.antennas), lower=np.full(n, self.fading_lower)
        )

    def feasible_set(self) -> ProductSet:
        n = self.n_queues
        lam_set = BoxWithSumCap(
            lower=np.full(n, self.lambda_min),
            upper=np.full(n, self.lambda_max),
            cap=self.lambda_cap,
        )
        p_set = BoxWithSumCap(
            lower=np.full(n, self.p_min),
            upper=np.full(n, self.p_max),
            cap=self.p_max,
        )
        return ProductSet(blocks=(lam_set, p_set))

    def with_overrides(self, **kwargs) -> "Mg1ErgodicInstance":
        return replace(self, **kwargs)

    def rates(self, p: np.ndarray, zeta: np.ndarray) -> np.ndarray:
        return self.bandwidths * np.log1p(zeta * p)

    def build(self) -> CompositionalProblem:
        n = self.n_queues
        bw = self.bandwidths
        psi, phi = self.psi_weights, self.phi_weights
        eps = self.varsigma_eps
        r_min = self.r_min
        dist = self.channel_distribution()
        idx = np.arange(n)

        def sample(rng):
            return dist.draw(rng)

        def inner_g(x, zeta):
            lam, p = x[:n], x[n:]
            b = bw * np.log1p(zeta * p)
            return np.concatenate([lam, lam / b, lam / b**2])

        def inner_g_jacobian(x, zeta):
            lam, p = x[:n], x[n:]
            b = bw * np.log1p(zeta * p)
            bp = bw * zeta / (1.0 + zeta * p)
            jac = np.zeros((2 * n, 3 * n))
            jac[idx, idx] = 1.0
            jac[idx, n + idx] = 1.0 / b
            jac[idx, 2 * n + idx] = 1.0 / b**2
            jac[n + idx, n + idx] = -lam * bp / b**2
            jac[n + idx, 2 * n + idx] = -2.0 * lam * bp / b**3
            return jac

        def inner_h(x, zeta):
            p = x[n:]
            b = bw * np.log1p(zeta * p)
            return np.array([-np.min(b)])

        def inner_h_jacobian(x, zeta):
            p = x[n:]
            b = bw * np.log1p(zeta * p)
            i = int(np.argmin(b))  # first minimizer breaks ties
            jac = np.zeros((2 * n, 1))
            jac[n + i, 0] = -bw[i] * zeta[i] / (1.0 + zeta[i] * p[i])
            return jac

        def outer_f(y):
            lam_t, rho, m2 = y[:n], y[n:2 * n], y[2 * n:]
            delay = (m2 / 2.0) * safe_inv(1.0 - rho, eps)
            return float(np.sum(phi * delay - psi * np.log(lam_t)))

        def outer_f_gradient(y):
            lam_t, rho, m2 = y[:n], y[n:2 * n], y[2 * n:]
            d = 1.0 - rho
            grad = np.empty(3 * n)
            grad[:n] = -psi / lam_t
            grad[n:2 * n] = -phi * (m2 / 2.0) * safe_inv_deriv(d, eps)
            grad[2 * n:] = phi * safe_inv(d, eps) / 2.0
            return grad

        def outer_q(z):
            return np.array([r_min + z[0]])

        def outer_q_jacobian(z):
            return np.array([[1.0]])

        return CompositionalProblem(
            dim_x=2 * n,
            dim_g=3 * n,
            dim_h=1,
            num_constraints=1,
            sample=sample,
            inner_g=inner_g,
            inner_g_jacobian=inner_g_jacobian,
            inner_h=inner_h,
            inner_h_jacobian=inner_h_jacobian,
            outer_f=outer_f,
            outer_f_gradient=outer_f_gradient,
            outer_q=outer_q,
            outer_q_jacobian=outer_q_jacobian,
            feasible_set=self.feasible_set(),
            name=self.name,
            metadata={"instance": self},
        )

    def default_c_ell(self) -> float:
        # Worst constraint value over the box: powers floored, so the
        # expected worst-user rate is at least b(p_min, G).
        floor_rate = float(np.min(self.bandwidths) * np.log1p(self.p_min * self.fading_lower))
        return max(2.0 * (self.r_min - floor_rate), 1.0)
