"""Fixed-rate transmission with outages and retransmissions.

Packets are sent at fixed rates R_i; whenever the fading realization cannot
support the rate, the slot is lost and the packet is retried.  The hard
outage indicator is replaced by a sigmoid in the channel rate so the inner
map stays differentiable; the tracked outage probability feeds the
retransmission-aware waiting-time formula.  No expectation constraint:
the penalty path of the solver stays inert.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..distributions import TruncatedExponential
from ..problem import CompositionalProblem
from ..sets import BoxWithSumCap, ProductSet
from .safeguards import EPS_DEN, safe_inv, safe_inv_deriv, sigmoid, sigmoid_deriv


@dataclass(frozen=True)
class OutageInstance:
    bandwidths: np.ndarray
    rates: np.ndarray  # fixed transmission rates R_i
    p_min: float
    p_max: float
    lambda_min: float
    lambda_max: float
    lambda_cap: float
    sharpness: float  # sigmoid steepness eta >= 1
    fading_lower: float  # exponential channel support truncated below at G
    psi_weights: np.ndarray
    phi_weights: np.ndarray
    eps_den: float = EPS_DEN
    name: str = "outage"

    def __post_init__(self):
        for f in ("bandwidths", "rates", "psi_weights", "phi_weights"):
            object.__setattr__(self, f, np.asarray(getattr(self, f), dtype=float))
        n = self.bandwidths.size
        for f in ("rates", "psi_weights", "phi_weights"):
            if getattr(self, f).size != n:
                raise ValueError(f"{f} must have {n} entries")
        if self.sharpness < 1.0:
            raise ValueError("sharpness must be at least 1")
        if self.lambda_max >= np.min(self.rates):
            raise ValueError("lambda_max must stay below every fixed rate")

    @property
    def n_queues(self) -> int:
        return self.bandwidths.size

    def channel_distribution(self) -> TruncatedExponential:
        n = self.n_queues
        return TruncatedExponential(
            mean=np.ones(n), upper=np.full(n, np.inf),
            lower=np.full(n, self.fading_lower),
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

    def with_overrides(self, **kwargs) -> "OutageInstance":
        return replace(self, **kwargs)

    def outage_level(self, p: np.ndarray, zeta: np.ndarray) -> np.ndarray:
        """Smoothed outage indicator: ~1 when the rate exceeds the capacity."""
        b = self.bandwidths * np.log1p(zeta * p)
        return sigmoid(self.sharpness * (self.rates - b))

    def max_outage(self) -> np.ndarray:
        """Largest reachable smoothed outage, attained at (p_min, G)."""
        return self.outage_level(
            np.full(self.n_queues, self.p_min),
            np.full(self.n_queues, self.fading_lower),
        )

    def waiting_times(self, y: np.ndarray) -> np.ndarray:
        n = self.n_queues
        u, v = y[:n], y[n:]
        a = self.rates * (1.0 - u)
        knee = self.eps_den * self.rates
        return (v * (1.0 + u) / 2.0) * safe_inv(a, knee) * safe_inv(a - v, knee)

    def build(self) -> CompositionalProblem:
        n = self.n_queues
        bw, r = self.bandwidths, self.rates
        psi, phi = self.psi_weights, self.phi_weights
        eta = self.sharpness
        knee = self.eps_den * r
        dist = self.channel_distribution()
        idx = np.arange(n)

        def sample(rng):
            return dist.draw(rng)

        def inner_g(x, zeta):
            lam, p = x[:n], x[n:]
            b = bw * np.log1p(zeta * p)
            return np.concatenate([sigmoid(eta * (r - b)), lam])

        def inner_g_jacobian(x, zeta):
            p = x[n:]
            b = bw * np.log1p(zeta * p)
            bp = bw * zeta / (1.0 + zeta * p)
            jac = np.zeros((2 * n, 2 * n))
            jac[n + idx, idx] = -eta * sigmoid_deriv(eta * (r - b)) * bp
            jac[idx, n + idx] = 1.0
            return jac

        def outer_f(y):
            u, v = y[:n], y[n:]
            a = r * (1.0 - u)
            w = (v * (1.0 + u) / 2.0) * safe_inv(a, knee) * safe_inv(a - v, knee)
            return float(np.sum(phi * w - psi * np.log(a)))

        def outer_f_gradient(y):
            u, v = y[:n], y[n:]
            a = r * (1.0 - u)
            inv1, dinv1 = safe_inv(a, knee), safe_inv_deriv(a, knee)
            inv2, dinv2 = safe_inv(a - v, knee), safe_inv_deriv(a - v, knee)
            base = v * (1.0 + u) / 2.0
            dw_du = (v / 2.0) * inv1 * inv2 \
                - r * base * (dinv1 * inv2 + inv1 * dinv2)
            dw_dv = ((1.0 + u) / 2.0) * inv1 * inv2 - base * inv1 * dinv2
            grad = np.empty(2 * n)
            grad[:n] = phi * dw_du + psi * r / a
            grad[n:] = phi * dw_dv
            return grad

        return CompositionalProblem(
            dim_x=2 * n,
            dim_g=2 * n,
            dim_h=0,
            num_constraints=0,
            sample=sample,
            inner_g=inner_g,
            inner_g_jacobian=inner_g_jacobian,
            outer_f=outer_f,
            outer_f_gradient=outer_f_gradient,
            feasible_set=self.feasible_set(),
            name=self.name,
            metadata={"instance": self},
        )
