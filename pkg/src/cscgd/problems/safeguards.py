"""Shared guards that keep outer-function gradients bounded.

Ratio-type outer maps (queuing delays, blocking ratios, QoS quotients) blow
up when a tracked denominator approaches zero.  Below the knee the
reciprocal is continued by its tangent line, so value and first derivative
stay continuous and bounded; on the safe side both match the exact formula
bit for bit.
"""

from __future__ import annotations

import numpy as np
from scipy import special

EPS_DEN = 1e-9


def safe_inv(d, knee):
    """1/d for d >= knee, tangent-line continuation (2*knee - d)/knee^2 below."""
    d = np.asarray(d, dtype=float)
    safe = d >= knee
    if safe.all():
        return 1.0 / d
    knee = np.broadcast_to(np.asarray(knee, dtype=float), d.shape)
    guarded = np.where(safe, d, knee)  # avoid spurious division warnings
    return np.where(safe, 1.0 / guarded, (2.0 * knee - d) / knee**2)


def safe_inv_deriv(d, knee):
    """Derivative of :func:`safe_inv` with respect to d."""
    d = np.asarray(d, dtype=float)
    safe = d >= knee
    if safe.all():
        return -1.0 / d**2
    knee = np.broadcast_to(np.asarray(knee, dtype=float), d.shape)
    guarded = np.where(safe, d, knee)
    return np.where(safe, -1.0 / guarded**2, -1.0 / knee**2)


def sigmoid(s):
    return special.expit(s)


def sigmoid_deriv(s):
    v = special.expit(s)
    return v * (1.0 - v)
