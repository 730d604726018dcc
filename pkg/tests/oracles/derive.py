"""Independent derivation of the frozen reference values in ``frozen.json``.

Nothing here imports permeaflow.  Quadratures use scipy.integrate.quad on
the continuum profiles; discrete eigenvalues come from dense numpy
eigen-decompositions of hand-assembled matrices, not from closed forms, so
they cross-check the formulas the tests assert against.

    python tests/oracles/derive.py          # print
    python tests/oracles/derive.py --write  # refreeze
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import quad

FROZEN = Path(__file__).with_name("frozen.json")


def profile_constants():
    # phi = tanh(xi / sqrt 2): sigma = int phi'^2, A = int (1 - phi^2)^2
    dphi = lambda s: (1.0 - math.tanh(s / math.sqrt(2.0)) ** 2) / math.sqrt(2.0)
    sigma = quad(lambda s: dphi(s) ** 2, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12)[0]
    A = quad(lambda s: (1.0 - math.tanh(s / math.sqrt(2.0)) ** 2) ** 2, -np.inf, np.inf,
             epsabs=1e-13, epsrel=1e-12)[0]
    return sigma, A


def mixing_energy_1d(eps: float) -> float:
    """Continuum eps/2 phi'^2 + G(phi)/eps on (0, 1) for phi = tanh((x - 1/2)/(sqrt2 eps))."""
    r2 = math.sqrt(2.0)

    def dens(x):
        t = math.tanh((x - 0.5) / (r2 * eps))
        dp = (1.0 - t * t) / (r2 * eps)
        return 0.5 * eps * dp * dp + 0.25 * (1.0 - t * t) ** 2 / eps

    return quad(dens, 0.0, 1.0, points=[0.5], epsabs=1e-14, limit=400)[0]


def d_eff_hand(eps: float, K: float, A: float, q: float = 1.0, phi: float = 0.0, dp=1.0, dm=1.0) -> float:
    inv = (1 - phi**2) ** 2 / (A * K * q * eps) + (1 - phi) / (2 * dm) + (1 + phi) / (2 * dp)
    return 1.0 / inv


def periodic_laplacian_eigen(n: int) -> float:
    """Eigenvalue of -L (periodic 3-point, h = 1/n) for the cos(2 pi x) mode, by dense eigensolve."""
    h = 1.0 / n
    L = (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1))
    L[0, -1] = L[-1, 0] = 1.0
    L /= h * h
    x = (np.arange(n) + 0.5) * h
    mode = np.cos(2 * np.pi * x)
    lam = -(mode @ (L @ mode)) / (mode @ mode)  # Rayleigh quotient, exact for an eigenvector
    evals = np.sort(-np.linalg.eigvalsh(L))
    # the mode's eigenvalue is the second distinct one (first nonzero)
    assert abs(evals[1] - lam) < 1e-8 * lam
    return float(lam)


def derive() -> dict:
    sigma, A = profile_constants()
    out = {
        "sigma": sigma,
        "A": A,
        "d_eff_phi0_eps008_K1overA": d_eff_hand(0.08, 1.0 / A, A),
        "e_mix_1d_eps001": mixing_energy_1d(0.01),
        "circle_e_mix_r025": 2.0 * math.pi * 0.25 * sigma,
        "couette_d_visc": quad(lambda y: 2.0**2, 0.0, 1.0)[0],
        "gaussian_peak_t0_1e-4": 1.0 / (4.0 * math.pi * 1e-4),
    }
    for n in (32, 64):
        out[f"lap_eig_cos_n{n}"] = periodic_laplacian_eigen(n)
    dt = 1e-3
    out["damping_n32_dt1e-3"] = 1.0 / (1.0 + dt * out["lap_eig_cos_n32"])
    return out


if __name__ == "__main__":
    vals = derive()
    print(json.dumps(vals, indent=2))
    if "--write" in sys.argv:
        FROZEN.write_text(json.dumps(vals, indent=2, sort_keys=True) + "\n", encoding="utf-8")
