"""Projectable convex feasible sets.

Three set variants cover everything the queuing designs need: plain boxes,
boxes intersected with a total-budget halfspace (arrival-rate and power
budgets), and products of such sets over disjoint coordinate blocks.  A
fourth variant adds general linear inequalities (service-tier ladders) via
Dykstra's alternating projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MEMBERSHIP_SLACK = 1e-12


class FeasibleSetError(ValueError):
    """Raised when a feasible set is mis-configured (empty or inconsistent)."""


def _as_vector(x, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise FeasibleSetError(f"{name} must be a one-dimensional vector")
    return v


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lower <= x <= upper}."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_vector(self.lower, "lower"))
        object.__setattr__(self, "upper", _as_vector(self.upper, "upper"))
        if self.lower.shape != self.upper.shape:
            raise FeasibleSetError("lower/upper dimension mismatch")
        if np.any(self.lower > self.upper):
            raise FeasibleSetError("empty box: lower > upper")

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise FeasibleSetError(f"point has dim {v.shape}, set has dim {self.dim}")
        if not np.all(np.isfinite(v)):
            raise FeasibleSetError("cannot project non-finite point")
        return np.clip(v, self.lower, self.upper)

    def contains(self, v: np.ndarray, slack: float = MEMBERSHIP_SLACK) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(
            np.all(v >= self.lower - slack) and np.all(v <= self.upper + slack)
        )

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def squared_diameter(self) -> float:
        return float(np.sum((self.upper - self.lower) ** 2))


@dataclass(frozen=True)
class BoxWithSumCap:
    """Box intersected with the budget halfspace {x : sum(x) <= cap}.

    Projection is exact: clip(v - nu, lower, upper) with the multiplier
    nu >= 0 found by bisection until the cap binds (or nu = 0 when the
    plain box projection already satisfies the budget).
    """

    lower: np.ndarray
    upper: np.ndarray
    cap: float
    tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_vector(self.lower, "lower"))
        object.__setattr__(self, "upper", _as_vector(self.upper, "upper"))
        object.__setattr__(self, "cap", float(self.cap))
        if self.lower.shape != self.upper.shape:
            raise FeasibleSetError("lower/upper dimension mismatch")
        if np.any(self.lower > self.upper):
            raise FeasibleSetError("empty box: lower > upper")
        if np.sum(self.lower) > self.cap:
            raise FeasibleSetError("empty set: sum(lower) exceeds cap")

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise FeasibleSetError(f"point has dim {v.shape}, set has dim {self.dim}")
        if not np.all(np.isfinite(v)):
            raise FeasibleSetError("cannot project non-finite point")
        u = np.clip(v, self.lower, self.upper)
        if u.sum() <= self.cap + self.tol:
            return u
        # Bisection on the halfspace multiplier; sum(clip(v - nu)) is
        # nonincreasing in nu, so the root is bracketed by [0, max(v - lower)].
        lo, hi = 0.0, float(np.max(v - self.lower))
        for _ in range(self.max_iter):
            nu = 0.5 * (lo + hi)
            s = np.clip(v - nu, self.lower, self.upper).sum()
            if s > self.cap:
                lo = nu
            else:
                hi = nu
            if hi - lo <= self.tol * max(1.0, hi):
                break
        u = np.clip(v - hi, self.lower, self.upper)
        return u

    def contains(self, v: np.ndarray, slack: float = MEMBERSHIP_SLACK) -> bool:
        v = np.asarray(v, dtype=float)
        scale = max(1.0, abs(self.cap))
        return bool(
            np.all(v >= self.lower - slack)
            and np.all(v <= self.upper + slack)
            and v.sum() <= self.cap + slack * scale
        )

    def midpoint(self) -> np.ndarray:
        return self.project(0.5 * (self.lower + self.upper))

    def squared_diameter(self) -> float:
        # Upper bound via the enclosing box; exact value is not needed.
        return float(np.sum((self.upper - self.lower) ** 2))


@dataclass(frozen=True)
class BoxWithLinearInequalities:
    """Box intersected with halfspaces {x : A x <= b}.

    Projection uses Dykstra's alternating projections over the box and each
    halfspace, which converges to the exact Euclidean projection for
    intersections of convex sets.  Used by the tiered-provisioning design
    whose price-ladder constraints are pairwise differences.
    """

    lower: np.ndarray
    upper: np.ndarray
    a_mat: np.ndarray
    b_vec: np.ndarray
    tol: float = 1e-12
    max_sweeps: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_vector(self.lower, "lower"))
        object.__setattr__(self, "upper", _as_vector(self.upper, "upper"))
        object.__setattr__(self, "a_mat", np.atleast_2d(np.asarray(self.a_mat, dtype=float)))
        object.__setattr__(self, "b_vec", _as_vector(self.b_vec, "b_vec"))
        if np.any(self.lower > self.upper):
            raise FeasibleSetError("empty box: lower > upper")
        if self.a_mat.shape != (self.b_vec.size, self.lower.size):
            raise FeasibleSetError("constraint matrix shape mismatch")

    @property
    def dim(self) -> int:
        return self.lower.size

    def _halfspace_project(self, v: np.ndarray, i: int) -> np.ndarray:
        a = self.a_mat[i]
        resid = a @ v - self.b_vec[i]
        if resid <= 0.0:
            return v
        return v - (resid / (a @ a)) * a

    def project(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise FeasibleSetError(f"point has dim {v.shape}, set has dim {self.dim}")
        if not np.all(np.isfinite(v)):
            raise FeasibleSetError("cannot project non-finite point")
        n_sets = 1 + self.b_vec.size
        x = v.copy()
        increments = [np.zeros(self.dim) for _ in range(n_sets)]
        scale = max(1.0, float(np.linalg.norm(v)))
        for _ in range(self.max_sweeps):
            # Convergence is judged on the increment drift, not on x itself:
            # iterates can repeat for a few sweeps while the increments are
            # still being redistributed between the sets.
            drift = 0.0
            for i in range(n_sets):
                y = x + increments[i]
                if i == 0:
                    x = np.clip(y, self.lower, self.upper)
                else:
                    x = self._halfspace_project(y, i - 1)
                new_inc = y - x
                drift += float(np.sum((new_inc - increments[i]) ** 2))
                increments[i] = new_inc
            if drift <= (self.tol * scale) ** 2:
                break
        return x

    def contains(self, v: np.ndarray, slack: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(
            np.all(v >= self.lower - slack)
            and np.all(v <= self.upper + slack)
            and np.all(self.a_mat @ v <= self.b_vec + slack)
        )

    def midpoint(self) -> np.ndarray:
        return self.project(0.5 * (self.lower + self.upper))

    def squared_diameter(self) -> float:
        return float(np.sum((self.upper - self.lower) ** 2))


@dataclass(frozen=True)
class ProductSet:
    """Cartesian product of feasible sets over consecutive coordinate blocks."""

    blocks: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise FeasibleSetError("product of zero sets")

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def _split(self, v: np.ndarray):
        out, k = [], 0
        for b in self.blocks:
            out.append(v[k:k + b.dim])
            k += b.dim
        return out

    def project(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise FeasibleSetError(f"point has dim {v.shape}, set has dim {self.dim}")
        return np.concatenate(
            [b.project(part) for b, part in zip(self.blocks, self._split(v))]
        )

    def contains(self, v: np.ndarray, slack: float = MEMBERSHIP_SLACK) -> bool:
        v = np.asarray(v, dtype=float)
        return all(
            b.contains(part, slack) for b, part in zip(self.blocks, self._split(v))
        )

    def midpoint(self) -> np.ndarray:
        return np.concatenate([b.midpoint() for b in self.blocks])

    def squared_diameter(self) -> float:
        return float(sum(b.squared_diameter() for b in self.blocks))


def project(feasible_set, v: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``feasible_set``."""
    return feasible_set.project(v)
