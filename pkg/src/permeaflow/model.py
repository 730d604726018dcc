"""Dimensionless model: parameters, flux laws, effective diffusivity, potential."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

#: surface-tension constant of the tanh profile, int (d/dxi tanh(xi/sqrt2))^2 dxi
SIGMA = 2.0 * math.sqrt(2.0) / 3.0
#: profile integral int (1 - tanh^2(xi/sqrt2))^2 dxi; calibrates the membrane term
A_CONST = 4.0 * math.sqrt(2.0) / 3.0

#: floor applied to c inside the solver loop before evaluating q or ln c
C_FLOOR = 1e-12


class FluxLaw(enum.Enum):
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class AsymptoticConstants:
    sigma: float = SIGMA
    A: float = A_CONST


@dataclass(frozen=True)
class PhysicalParams:
    Re: float = 1.0
    Ca: float = 1.0
    Pe: float = 1.0
    epsilon: float = 0.08
    mobility: float = 0.02
    K: float = 1.0 / A_CONST
    D_plus: float = 1.0
    D_minus: float = 1.0
    s: float = 2.0
    q_law: FluxLaw = FluxLaw.LINEAR

    def __post_init__(self):
        for name in ("Re", "Ca", "Pe", "epsilon", "mobility", "D_plus", "D_minus"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")
        for name in ("K", "s"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and val >= 0 and not math.isnan(val)):
                raise ValueError(f"{name} must be nonnegative, got {val!r}")
        if not isinstance(self.q_law, FluxLaw):
            object.__setattr__(self, "q_law", FluxLaw(self.q_law))

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["q_law"] = self.q_law.value
        return d


def q_of_c(c, law: FluxLaw):
    """``dQ/dc`` for the interfacial flux law.  Raises on ``c <= 0`` for the log law."""
    if law is FluxLaw.LINEAR:
        return np.ones_like(c) if isinstance(c, np.ndarray) else 1.0
    c_arr = np.asarray(c, dtype=float)
    if np.any(c_arr <= 0):
        raise ValueError("logarithmic flux law needs c > 0")
    out = 1.0 / c_arr
    return out if isinstance(c, np.ndarray) else float(out)


def q_of_c_floored(c: np.ndarray, law: FluxLaw) -> np.ndarray:
    """Solver-loop variant of :func:`q_of_c` with ``c`` floored at ``C_FLOOR``."""
    if law is FluxLaw.LINEAR:
        return np.ones_like(c)
    return 1.0 / np.maximum(c, C_FLOOR)


def effective_diffusivity(phi, q, p: PhysicalParams, A: float = A_CONST):
    """Restricted-diffusion coefficient.

    ``1/D = (1 - phi^2)^2 / (A K q eps) + (1 - phi) / (2 D-) + (1 + phi) / (2 D+)``

    ``phi`` is clamped to [-1, 1] first.  ``K = 0`` gives ``D = 0`` wherever
    ``|phi| < 1`` (impermeable membrane).
    """
    phi_c = np.clip(phi, -1.0, 1.0)
    bulk = (1.0 - phi_c) / (2.0 * p.D_minus) + (1.0 + phi_c) / (2.0 * p.D_plus)
    well = (1.0 - phi_c**2) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        if p.K == 0.0:
            inv = np.where(well > 0.0, np.inf, bulk)
        else:
            inv = well / (A * p.K * np.asarray(q, dtype=float) * p.epsilon) + bulk
        out = np.where(np.isinf(inv), 0.0, 1.0 / inv)
    return out if np.ndim(out) else float(out)


def tanh_profile(signed_distance, epsilon: float):
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return np.tanh(np.asarray(signed_distance) / (math.sqrt(2.0) * epsilon)) if np.ndim(signed_distance) \
        else math.tanh(signed_distance / (math.sqrt(2.0) * epsilon))


def double_well(phi):
    return 0.25 * (1.0 - phi**2) ** 2


def double_well_prime(phi):
    return phi**3 - phi
