"""Post-processing used by the case runners: bulk masks, fluxes, plateaus, merges."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .. import operators as ops
from ..grid import BoundarySpec, Grid, Periodic
from ..model import C_FLOOR, PhysicalParams
from ..scheme import State, face_diffusivity, log_bc
from ..sparse_ops import split_faces

#: half-width of the excluded interface band, in units of epsilon
BULK_BAND = 5.0
#: relative L2 change of c per unit time below which a run counts as steady
STEADY_RATE = 1e-8


def bulk_mask(x: np.ndarray, interfaces, epsilon: float, band: float = BULK_BAND) -> np.ndarray:
    mask = np.ones(np.shape(x), dtype=bool)
    for x0 in interfaces:
        mask &= np.abs(np.asarray(x) - x0) > band * epsilon
    return mask


def diffusive_flux(grid: Grid, state: State, params: PhysicalParams, bc: BoundarySpec):
    """``-(1/Pe) D_eff c grad(ln c)`` on faces, as ``(fx, fy)`` arrays."""
    c = np.maximum(state.c, C_FLOOR)
    Df = face_diffusivity(grid, state.phi, state.c, params, bc)
    cf = ops.face_average(grid, c, bc.c)
    gl = ops.gradient(grid, np.log(c), log_bc(bc.c))
    Du, Dv = split_faces(grid, Df)
    return -Du * cf.u * gl.u / params.Pe, -Dv * cf.v * gl.v / params.Pe


class SteadyMonitor:
    """Tracks the relative L2 change of ``c`` per unit time."""

    def __init__(self, threshold: float = STEADY_RATE):
        self.threshold = threshold
        self.rate = math.inf

    def update(self, c_old: np.ndarray, c_new: np.ndarray, dt: float) -> float:
        scale = float(np.linalg.norm(c_new))
        diff = float(np.linalg.norm(c_new - c_old))
        self.rate = diff / (scale * dt) if scale > 0 else (0.0 if diff == 0 else math.inf)
        return self.rate

    @property
    def steady(self) -> bool:
        return self.rate <= self.threshold


# ---------------------------------------------------------------------------
# one-dimensional membrane diagnostics


@dataclass(frozen=True)
class MembraneLaw:
    position: float
    jump: float
    flux: float
    ratio: float  # |flux| / (K |jump|)


def bulk_fits(x: np.ndarray, c: np.ndarray, interfaces, epsilon: float):
    """Least-squares lines through each bulk region (between consecutive interfaces)."""
    edges = [-math.inf, *interfaces, math.inf]
    mask = bulk_mask(x, interfaces, epsilon)
    fits = []
    for lo, hi in zip(edges, edges[1:]):
        sel = mask & (x > lo) & (x < hi)
        if np.count_nonzero(sel) < 2:
            raise ValueError("bulk region too small for a linear fit")
        fits.append(np.polyfit(x[sel], c[sel], 1))
    return fits


def membrane_laws(grid: Grid, state: State, params: PhysicalParams, bc: BoundarySpec, interfaces):
    """Flux law check across each interface of a 1D steady state.

    The jump is taken between the bulk line fits extrapolated to the
    interface; the flux is the mean face flux over the adjacent bulk regions.
    """
    x = grid.xc
    c = state.c[:, 0]
    fits = bulk_fits(x, c, interfaces, params.epsilon)
    fx, _ = diffusive_flux(grid, state, params, bc)
    fx = fx[:, 0]
    xf = grid.xf
    fmask = bulk_mask(xf, interfaces, params.epsilon)
    out = []
    for k, x0 in enumerate(interfaces):
        jump = float(np.polyval(fits[k + 1], x0) - np.polyval(fits[k], x0))
        near = fmask & (xf > (interfaces[k - 1] if k else -math.inf)) & \
            (xf < (interfaces[k + 1] if k + 1 < len(interfaces) else math.inf))
        flux = float(np.mean(fx[near]))
        ratio = abs(flux) / (params.K * abs(jump)) if jump else math.inf
        out.append(MembraneLaw(float(x0), jump, flux, ratio))
    return out


def bulk_flux_spread(grid: Grid, state: State, params: PhysicalParams, bc: BoundarySpec, interfaces):
    """Largest relative deviation of the face flux from its mean, per bulk region."""
    fx, _ = diffusive_flux(grid, state, params, bc)
    fx = fx[:, 0]
    xf = grid.xf
    mask = bulk_mask(xf, interfaces, params.epsilon)
    edges = [-math.inf, *interfaces, math.inf]
    spreads = []
    for lo, hi in zip(edges, edges[1:]):
        f = fx[mask & (xf > lo) & (xf < hi)]
        m = float(np.mean(f))
        spreads.append(float(np.max(np.abs(f - m))) / abs(m) if m else math.inf)
    return spreads


# ---------------------------------------------------------------------------
# two-dimensional droplet diagnostics


def interface_flux(grid: Grid, state: State, params: PhysicalParams, bc: BoundarySpec) -> tuple[float, float]:
    """Mean and max of the cross-interface flux ``|j . n|``.

    The mean is weighted by ``|grad phi|``, which concentrates on the
    diffuse interface; ``n = grad phi / |grad phi|``.
    """
    fx, fy = diffusive_flux(grid, state, params, bc)
    jx, jy = 0.5 * (fx[1:] + fx[:-1]), 0.5 * (fy[:, 1:] + fy[:, :-1])
    g = ops.gradient(grid, state.phi, bc.phi)
    gx, gy = 0.5 * (g.u[1:] + g.u[:-1]), 0.5 * (g.v[:, 1:] + g.v[:, :-1])
    gn = np.hypot(gx, gy)
    jn = np.abs(jx * gx + jy * gy)
    total = float(np.sum(gn))
    mean = float(np.sum(jn)) / total if total > 0 else 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(gn > 0, jn / gn, 0.0)
    band = np.abs(state.phi) < 0.5
    peak = float(np.max(unit[band])) if np.any(band) else 0.0
    return mean, peak


def interior_stats(phi: np.ndarray, c: np.ndarray, mask: np.ndarray | None = None, level: float = 0.9):
    """Mean, standard deviation and range of ``c`` where ``phi > level``."""
    sel = phi > level
    if mask is not None:
        sel &= mask
    if not np.any(sel):
        return math.nan, math.nan, math.nan
    v = c[sel]
    return float(np.mean(v)), float(np.std(v)), float(np.max(v) - np.min(v))


def label_droplets(grid: Grid, phi: np.ndarray, bc: BoundarySpec) -> tuple[np.ndarray, int]:
    """Connected components of ``phi > 0`` (4-connectivity), glued across periodic sides."""
    labels, n = ndimage.label(phi > 0)
    if n == 0:
        return labels, 0
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def glue(a_edge, b_edge):
        for a, b in zip(a_edge, b_edge):
            if a and b:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    if isinstance(bc.phi.left, Periodic):
        glue(labels[0, :], labels[-1, :])
    if isinstance(bc.phi.bottom, Periodic):
        glue(labels[:, 0], labels[:, -1])
    roots = np.array([find(k) for k in range(n + 1)])
    _, compact = np.unique(roots, return_inverse=True)
    merged = compact[labels]
    return merged, int(compact.max())


def linear_profile_deviation(grid: Grid, c: np.ndarray, c_bottom: float, c_top: float) -> float:
    """Relative L2 distance of ``c`` from the interface-free profile linear in ``y``."""
    _, Y = grid.cell_centers()
    ref = c_bottom + (c_top - c_bottom) * (Y - grid.y_min) / (grid.y_max - grid.y_min)
    return float(np.linalg.norm(c - ref) / np.linalg.norm(ref))
