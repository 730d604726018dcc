"""Closed-form reference solutions for the verification cases."""

from __future__ import annotations

import math

import numpy as np

#: interface position of the single-membrane steady problem
SHARP_X0 = 0.5
#: membrane positions of the two-interface steady problem
TWO_INTERFACE_X = (7.0 / 18.0, 11.0 / 18.0)


def _check_unit_interval(x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("position must lie in [0, 1]")
    return x


def exact_sharp_limit_1d(x):
    """``c = x + 1`` left of ``x0 = 1/2``, ``x + 3`` from ``x0`` on (unit flux, jump 2)."""
    xa = _check_unit_interval(x)
    out = np.where(xa < SHARP_X0, xa + 1.0, xa + 3.0)
    return out if np.ndim(x) else float(out)


def exact_two_interface(x):
    """Steady profile through two membranes with ``K = 1/5`` and ``c(0)=2``, ``c(1)=1``."""
    xa = _check_unit_interval(x)
    x1, x2 = TWO_INTERFACE_X
    out = np.where(xa < x1, -xa / 11.0 + 2.0,
                   np.where(xa < x2, -xa / 11.0 + 17.0 / 11.0, -(xa - 1.0) / 11.0 + 1.0))
    return out if np.ndim(x) else float(out)


def gaussian_seed(x, y, t0: float = 1e-4, D: float = 1.0, center=(0.5, 0.5)):
    """2D heat kernel ``exp(-|x - x0|^2 / 4 D t0) / (4 pi D t0)``."""
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    if not D > 0:
        raise ValueError("D must be positive")
    r2 = (np.asarray(x, dtype=float) - center[0]) ** 2 + (np.asarray(y, dtype=float) - center[1]) ** 2
    out = np.exp(-r2 / (4.0 * D * t0)) / (4.0 * math.pi * D * t0)
    return out if np.ndim(out) else float(out)
