"""Second-order discrete differential operators on the staggered grid.

Scalar operators delegate to the stencil kernels (compiled or numpy).  The
operators are pure: inputs are never modified.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import kernels
from .grid import (
    Dirichlet,
    FaceVectorField,
    Grid,
    Neumann,
    Periodic,
    ScalarBC,
    VelocityBC,
)


@lru_cache(maxsize=256)
def encode_bc(bc: ScalarBC) -> tuple[np.ndarray, np.ndarray]:
    kinds = np.zeros(4, dtype=np.int_)
    values = np.zeros(4)
    for k, cond in enumerate((bc.left, bc.right, bc.bottom, bc.top)):
        if isinstance(cond, Periodic):
            kinds[k] = kernels.PERIODIC
        elif isinstance(cond, Dirichlet):
            kinds[k] = kernels.DIRICHLET
            values[k] = cond.value
        else:
            kinds[k] = kernels.NEUMANN
    kinds.setflags(write=False)
    values.setflags(write=False)
    return kinds, values


def gradient(grid: Grid, f: np.ndarray, bc: ScalarBC) -> FaceVectorField:
    kinds, values = encode_bc(bc)
    gx, gy = kernels.gradient(f, grid.hx, grid.hy, kinds, values)
    return FaceVectorField(gx, gy)


def divergence(grid: Grid, g: FaceVectorField) -> np.ndarray:
    return kernels.divergence(g.u, g.v, grid.hx, grid.hy)


def laplacian(grid: Grid, f: np.ndarray, bc: ScalarBC) -> np.ndarray:
    kinds, values = encode_bc(bc)
    return kernels.laplacian(f, grid.hx, grid.hy, kinds, values)


def face_average(grid: Grid, f: np.ndarray, bc: ScalarBC) -> FaceVectorField:
    """Arithmetic mean of neighbouring cell values on every face."""
    kinds, values = encode_bc(bc)
    ax, ay = kernels.face_average(f, kinds, values)
    return FaceVectorField(ax, ay)


def advect_conservative(grid: Grid, vel: FaceVectorField, f: np.ndarray, bc: ScalarBC) -> np.ndarray:
    """Divergence of the face fluxes ``vel * mean(f)``."""
    kinds, values = encode_bc(bc)
    return kernels.advect(vel.u, vel.v, f, grid.hx, grid.hy, kinds, values)


def cell_average(vel: FaceVectorField) -> tuple[np.ndarray, np.ndarray]:
    return 0.5 * (vel.u[1:] + vel.u[:-1]), 0.5 * (vel.v[:, 1:] + vel.v[:, :-1])


def inner_cells(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a * b)) * grid.cell_area


def face_weights(grid: Grid) -> FaceVectorField:
    from .grid import face_weights as _fw

    wx, wy = _fw(grid)
    return FaceVectorField(wx, wy)


def inner_faces(grid: Grid, a: FaceVectorField, b: FaceVectorField) -> float:
    w = face_weights(grid)
    return float(np.sum(w.u * a.u * b.u) + np.sum(w.v * a.v * b.v))


# ---------------------------------------------------------------------------
# velocity operators


def _pad_axis(a: np.ndarray, axis: int, lo, hi) -> np.ndarray:
    """One ghost layer along ``axis`` from scalar-style conditions."""
    a = np.moveaxis(a, axis, 0)
    out = np.empty((a.shape[0] + 2,) + a.shape[1:])
    out[1:-1] = a
    for ghost, edge, wrap, cond in ((0, 0, -1, lo), (-1, -1, 0, hi)):
        if isinstance(cond, Periodic):
            out[ghost] = a[wrap]
        elif isinstance(cond, Dirichlet):
            out[ghost] = 2.0 * cond.value - a[edge]
        else:
            out[ghost] = a[edge]
    return np.moveaxis(out, 0, axis)


def _node_second_difference(a: np.ndarray, axis: int, periodic: bool, h: float) -> np.ndarray:
    """Second difference of a node-centred array along ``axis``; wall nodes get 0."""
    a = np.moveaxis(a, axis, 0)
    out = np.zeros_like(a)
    out[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / h**2
    if periodic:
        out[0] = (a[1] - 2.0 * a[0] + a[-2]) / h**2
        out[-1] = out[0]
    return np.moveaxis(out, 0, axis)


def _node_difference(flux_cells: np.ndarray, axis: int, periodic: bool, h: float) -> np.ndarray:
    """Difference of a cell-centred array onto nodes along ``axis``; wall nodes get 0."""
    f = np.moveaxis(flux_cells, axis, 0)
    out = np.zeros((f.shape[0] + 1,) + f.shape[1:])
    out[1:-1] = (f[1:] - f[:-1]) / h
    if periodic:
        out[0] = (f[0] - f[-1]) / h
        out[-1] = out[0]
    return np.moveaxis(out, 0, axis)


def vector_laplacian(grid: Grid, vel: FaceVectorField, bc: VelocityBC) -> FaceVectorField:
    """Component-wise 5-point Laplacian; tangential wall data enter through ghosts."""
    px = isinstance(bc.left, Periodic)
    py = isinstance(bc.bottom, Periodic)
    u, v = vel.u, vel.v
    lu = _node_second_difference(u, 0, px, grid.hx)
    up = _pad_axis(u, 1, bc.tangential("bottom"), bc.tangential("top"))
    lu += (up[:, 2:] - 2.0 * u + up[:, :-2]) / grid.hy**2
    if not px:
        lu[0] = lu[-1] = 0.0
    lv = _node_second_difference(v, 1, py, grid.hy)
    vp = _pad_axis(v, 0, bc.tangential("left"), bc.tangential("right"))
    lv += (vp[2:] - 2.0 * v + vp[:-2]) / grid.hx**2
    if not py:
        lv[:, 0] = lv[:, -1] = 0.0
    return FaceVectorField(lu, lv)


def momentum_advection(grid: Grid, adv: FaceVectorField, vel: FaceVectorField, bc: VelocityBC) -> FaceVectorField:
    """Conservative central advection ``div(adv ⊗ vel)`` on the MAC control volumes.

    Skew-symmetric in ``vel`` whenever ``adv`` is discretely divergence free
    and carries zero normal velocity on walls.
    """
    px = isinstance(bc.left, Periodic)
    py = isinstance(bc.bottom, Periodic)
    # u-momentum: x-fluxes at cell centres, y-fluxes at corners
    fx = 0.5 * (adv.u[1:] + adv.u[:-1]) * 0.5 * (vel.u[1:] + vel.u[:-1])
    cu = _node_difference(fx, 0, px, grid.hx)
    vx = _pad_axis(adv.v, 0, bc.tangential("left"), bc.tangential("right"))
    fy_adv = 0.5 * (vx[1:] + vx[:-1])  # (nx+1, ny+1)
    up = _pad_axis(vel.u, 1, bc.tangential("bottom"), bc.tangential("top"))
    fy = fy_adv * 0.5 * (up[:, 1:] + up[:, :-1])
    cu += (fy[:, 1:] - fy[:, :-1]) / grid.hy
    if not px:
        cu[0] = cu[-1] = 0.0
    # v-momentum: y-fluxes at cell centres, x-fluxes at corners
    gy = 0.5 * (adv.v[:, 1:] + adv.v[:, :-1]) * 0.5 * (vel.v[:, 1:] + vel.v[:, :-1])
    cv = _node_difference(gy, 1, py, grid.hy)
    uy = _pad_axis(adv.u, 1, bc.tangential("bottom"), bc.tangential("top"))
    gx_adv = 0.5 * (uy[:, 1:] + uy[:, :-1])  # (nx+1, ny+1)
    vp = _pad_axis(vel.v, 0, bc.tangential("left"), bc.tangential("right"))
    gx = gx_adv * 0.5 * (vp[1:] + vp[:-1])
    cv += (gx[1:] - gx[:-1]) / grid.hx
    if not py:
        cv[:, 0] = cv[:, -1] = 0.0
    return FaceVectorField(cu, cv)


def velocity_gradient_norm2(grid: Grid, vel: FaceVectorField, bc: VelocityBC) -> float:
    """Discrete ``||grad u||^2``: cell-centred normal derivatives plus corner shear terms."""
    hx, hy = grid.hx, grid.hy
    a = grid.cell_area
    dudx = (vel.u[1:] - vel.u[:-1]) / hx
    dvdy = (vel.v[:, 1:] - vel.v[:, :-1]) / hy
    total = float(np.sum(dudx**2) + np.sum(dvdy**2)) * a
    up = _pad_axis(vel.u, 1, bc.tangential("bottom"), bc.tangential("top"))
    dudy = (up[:, 1:] - up[:, :-1]) / hy  # corners (nx+1, ny+1)
    vp = _pad_axis(vel.v, 0, bc.tangential("left"), bc.tangential("right"))
    dvdx = (vp[1:] - vp[:-1]) / hx
    wx = np.ones(grid.nx + 1)
    wx[0] = wx[-1] = 0.5
    wy = np.ones(grid.ny + 1)
    wy[0] = wy[-1] = 0.5
    w = a * wx[:, None] * wy[None, :]
    total += float(np.sum(w * dudy**2) + np.sum(w * dvdx**2))
    return total


def strain_rate_norm2(grid: Grid, vel: FaceVectorField, bc: VelocityBC) -> tuple[float, float]:
    """Return ``(|D|^2, D:grad u)`` integrated, with ``D`` the symmetric gradient.

    Both are assembled from the same cell and corner derivative samples.
    """
    hx, hy = grid.hx, grid.hy
    a = grid.cell_area
    dudx = (vel.u[1:] - vel.u[:-1]) / hx
    dvdy = (vel.v[:, 1:] - vel.v[:, :-1]) / hy
    up = _pad_axis(vel.u, 1, bc.tangential("bottom"), bc.tangential("top"))
    vp = _pad_axis(vel.v, 0, bc.tangential("left"), bc.tangential("right"))
    dudy = (up[:, 1:] - up[:, :-1]) / hy
    dvdx = (vp[1:] - vp[:-1]) / hx
    wx = np.ones(grid.nx + 1)
    wx[0] = wx[-1] = 0.5
    wy = np.ones(grid.ny + 1)
    wy[0] = wy[-1] = 0.5
    w = a * wx[:, None] * wy[None, :]
    shear = 0.5 * (dudy + dvdx)
    d_norm = float(np.sum(dudx**2 + dvdy**2)) * a + float(np.sum(w * 2.0 * shear**2))
    d_grad = float(np.sum(dudx**2 + dvdy**2)) * a + float(np.sum(w * shear * (dudy + dvdx)))
    return d_norm, d_grad


def neumann_x_periodic_y() -> ScalarBC:
    return ScalarBC(Neumann(), Neumann(), Periodic(), Periodic())
