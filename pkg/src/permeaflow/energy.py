"""Energy and dissipation diagnostics, conservation drift and identity checks.

Quadrature matches the scheme: cell midpoints for bulk densities, face
weights for gradient norms, so the modified energy reported here is the
quantity the time stepper controls.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from . import operators as ops
from .grid import BoundarySpec, FaceVectorField, Grid, GridSpec, make_grid
from .model import C_FLOOR, PhysicalParams, double_well
from .scheme import State, face_diffusivity, log_bc
from .sparse_ops import join_faces


@dataclass(frozen=True)
class EnergyReport:
    e_kin: float
    e_mix: float
    e_ent: float
    e_pressure: float
    e_total: float
    e_mod: float
    d_visc: float = 0.0
    d_mu: float = 0.0
    d_c: float = 0.0
    floored: bool = False

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def dissipation(self) -> float:
        return self.d_visc + self.d_mu + self.d_c


def _face_norm2(grid: Grid, g: FaceVectorField) -> float:
    w = ops.face_weights(grid)
    return float(np.sum(w.u * g.u**2) + np.sum(w.v * g.v**2))


def entropy(grid: Grid, c: np.ndarray) -> tuple[float, bool]:
    floored = bool(np.any(c < C_FLOOR))
    cf = np.maximum(c, C_FLOOR)
    return float(np.sum(cf * np.log(cf))) * grid.cell_area, floored


def total_energy(grid: Grid, state: State, params: PhysicalParams, dt: float, bc: BoundarySpec,
                 with_dissipation: bool = True) -> EnergyReport:
    """Kinetic, mixing, entropy and pressure-gradient energies of ``state``."""
    p = params
    e_kin = 0.5 * p.Re * _face_norm2(grid, state.vel)
    grad_phi = ops.gradient(grid, state.phi, bc.phi)
    e_mix = (0.5 * p.epsilon * _face_norm2(grid, grad_phi)
             + float(np.sum(double_well(state.phi))) * grid.cell_area / p.epsilon) / p.Ca
    e_ent, floored = entropy(grid, state.c)
    e_pressure = dt**2 / (2.0 * p.Re) * _face_norm2(grid, ops.gradient(grid, state.p, bc.p))
    e_total = e_kin + e_mix + e_ent
    d = dissipation_rate(grid, state, params, bc) if with_dissipation else (0.0, 0.0, 0.0)
    return EnergyReport(e_kin, e_mix, e_ent, e_pressure, e_total, e_total + e_pressure, *d, floored=floored)


def dissipation_rate(grid: Grid, state: State, params: PhysicalParams, bc: BoundarySpec,
                     c_lag: np.ndarray | None = None) -> tuple[float, float, float]:
    """``(||grad u||^2, M/Ca ||grad mu||^2, (1/Pe) sum D c |grad ln c|^2)``.

    ``c_lag`` is the concentration used in ``q(c)``; defaults to ``state.c``.
    """
    p = params
    d_visc = ops.velocity_gradient_norm2(grid, state.vel, bc.vel)
    d_mu = p.mobility / p.Ca * _face_norm2(grid, ops.gradient(grid, state.mu, bc.mu))
    c = np.maximum(state.c, C_FLOOR)
    Df = face_diffusivity(grid, state.phi, state.c if c_lag is None else c_lag, params, bc)
    cf = ops.face_average(grid, c, bc.c)
    gl = ops.gradient(grid, np.log(c), log_bc(bc.c))
    w = ops.face_weights(grid)
    integrand = Df * join_faces(cf.u, cf.v) * join_faces(gl.u, gl.v) ** 2
    d_c = float(np.sum(join_faces(w.u, w.v) * integrand)) / p.Pe
    return d_visc, d_mu, d_c


def volume(grid: Grid, f: np.ndarray) -> float:
    return float(np.sum(f)) * grid.cell_area


def conservation_report(grid: Grid, history: Iterable[State]) -> tuple[float, float]:
    """Largest drift of the phi volume and the c mass from the first snapshot."""
    it = iter(history)
    try:
        first = next(it)
    except StopIteration:
        return 0.0, 0.0
    v0, m0 = volume(grid, first.phi), volume(grid, first.c)
    dv = dm = 0.0
    for s in it:
        dv = max(dv, abs(volume(grid, s.phi) - v0))
        dm = max(dm, abs(volume(grid, s.c) - m0))
    return dv, dm


class ConservationTracker:
    """Streaming form of :func:`conservation_report`."""

    def __init__(self, grid: Grid, state: State):
        self.grid = grid
        self.v0 = volume(grid, state.phi)
        self.m0 = volume(grid, state.c)
        self.dv = 0.0
        self.dm = 0.0

    def update(self, state: State) -> None:
        self.dv = max(self.dv, abs(volume(self.grid, state.phi) - self.v0))
        self.dm = max(self.dm, abs(volume(self.grid, state.c) - self.m0))

    def relative(self) -> tuple[float, float]:
        return self.dv / max(abs(self.v0), 1e-300), self.dm / max(abs(self.m0), 1e-300)


# ---------------------------------------------------------------------------
# identity checks on manufactured periodic fields


def _wide_dx(f, h):
    return (np.roll(f, -1, 0) - np.roll(f, 1, 0)) / (2.0 * h)


def _wide_dy(f, h):
    return (np.roll(f, -1, 1) - np.roll(f, 1, 1)) / (2.0 * h)


def tensor_divergence_residual(grid: Grid, phi: np.ndarray) -> float:
    """L-inf of ``div(grad phi ⊗ grad phi) - lap(phi) grad phi - grad|grad phi|^2 / 2`` on faces.

    Both sides use cell-centred gradients ``a, b`` with face-compatible
    differences and means, so the 1D residual vanishes to rounding.
    """
    hx, hy = grid.hx, grid.hy
    a = _wide_dx(phi, hx)
    b = _wide_dy(phi, hy) if grid.ny > 1 else np.zeros_like(phi)
    s = a**2 + b**2
    res = 0.0
    # x-component on x-faces between cells i-1 and i
    ab = a * b
    dy_ab = _wide_dy(ab, hy) if grid.ny > 1 else np.zeros_like(phi)
    dy_b = _wide_dy(b, hy) if grid.ny > 1 else np.zeros_like(phi)

    def xdiff(f):
        return (f - np.roll(f, 1, 0)) / hx

    def xmean(f):
        return 0.5 * (f + np.roll(f, 1, 0))

    lhs_x = xdiff(a**2) + xmean(dy_ab)
    rhs_x = (xdiff(a) + xmean(dy_b)) * xmean(a) + 0.5 * xdiff(s)
    res = float(np.max(np.abs(lhs_x - rhs_x)))
    if grid.ny > 1:
        dx_ab = _wide_dx(ab, hx)
        dx_a = _wide_dx(a, hx)

        def ydiff(f):
            return (f - np.roll(f, 1, 1)) / hy

        def ymean(f):
            return 0.5 * (f + np.roll(f, 1, 1))

        lhs_y = ydiff(b**2) + ymean(dx_ab)
        rhs_y = (ydiff(b) + ymean(dx_a)) * ymean(b) + 0.5 * ydiff(s)
        res = max(res, float(np.max(np.abs(lhs_y - rhs_y))))
    return res


def strain_identity_residual(grid: Grid, vel: FaceVectorField) -> float:
    """L-inf over cells of ``|D|^2 - D : grad u`` for a periodic face velocity.

    ``D`` is the symmetric part of the compact MAC gradient (corner shear
    averaged to cells); ``grad u`` is the wide centred gradient of the
    cell-averaged velocity.
    """
    hx, hy = grid.hx, grid.hy
    u, v = vel.u[:-1], vel.v[:, :-1]  # periodic: drop duplicated faces
    ux = (np.roll(u, -1, 0) - u) / hx
    vy = (np.roll(v, -1, 1) - v) / hy
    # corner (i-1/2, j-1/2) derivatives
    uy_c = (u - np.roll(u, 1, 1)) / hy
    vx_c = (v - np.roll(v, 1, 0)) / hx

    def corner_to_cell(f):
        g = f + np.roll(f, -1, 0)
        return 0.25 * (g + np.roll(g, -1, 1))

    uy = corner_to_cell(uy_c)
    vx = corner_to_cell(vx_c)
    d11, d22, d12 = ux, vy, 0.5 * (uy + vx)
    ubar, vbar = ops.cell_average(vel)
    g11, g12 = _wide_dx(ubar, hx), _wide_dy(ubar, hy)
    g21, g22 = _wide_dx(vbar, hx), _wide_dy(vbar, hy)
    lhs = d11**2 + d22**2 + 2.0 * d12**2
    rhs = d11 * g11 + d12 * g12 + d12 * g21 + d22 * g22
    return float(np.max(np.abs(lhs - rhs)))


def observed_orders(hs: Sequence[float], errors: Sequence[float]) -> list[float]:
    out = []
    for (h0, e0), (h1, e1) in zip(zip(hs, errors), zip(hs[1:], errors[1:])):
        out.append(math.log(e0 / e1) / math.log(h0 / h1))
    return out


def _manufactured(n: int):
    grid = make_grid(GridSpec(n, n))
    X, Y = grid.cell_centers()
    phi = np.cos(2 * np.pi * X) * np.cos(2 * np.pi * Y)
    Xu, Yu = grid.u_points()
    Xv, Yv = grid.v_points()
    vel = FaceVectorField(np.sin(2 * np.pi * Xu) * np.cos(2 * np.pi * Yu) + 0.5 * np.cos(4 * np.pi * Yu),
                          np.cos(2 * np.pi * Xv) * np.sin(4 * np.pi * Yv))
    return grid, phi, vel


def verify_identities(h_sequence: Sequence[float]) -> dict:
    """Residuals and observed orders of the two vector-calculus identities.

    Returns ``{"tensor_divergence": (residuals, orders), "strain": (residuals, orders)}``
    evaluated on periodic manufactured fields on the unit square.
    """
    res_c, res_b = [], []
    for h in h_sequence:
        n = int(round(1.0 / h))
        grid, phi, vel = _manufactured(n)
        res_c.append(tensor_divergence_residual(grid, phi))
        res_b.append(strain_identity_residual(grid, vel))
    hs = list(h_sequence)
    return {
        "tensor_divergence": (res_c, observed_orders(hs, res_c)),
        "strain": (res_b, observed_orders(hs, res_b)),
    }
