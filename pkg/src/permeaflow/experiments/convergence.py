"""Cauchy-error convergence harness.

Solutions on grids ``h`` and ``h/2`` are compared on the coarse grid: cell
variables through the mean of the four (two in 1D) fine cells covering each
coarse cell, face variables through the two fine faces that make up each
coarse face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..grid import ConfigurationError, FaceVectorField, Grid, face_weights


@dataclass(frozen=True)
class RateRow:
    coarse: int
    fine: int
    l2: float
    linf: float
    rate_l2: float | None = None
    rate_linf: float | None = None


@dataclass
class RateTable:
    """Per-variable rows of (grid pair, L2 error, Linf error, observed rates)."""

    rows: dict[str, list[RateRow]] = field(default_factory=dict)

    def rates(self, var: str, norm: str = "l2") -> list[float]:
        key = "rate_l2" if norm == "l2" else "rate_linf"
        return [getattr(r, key) for r in self.rows[var] if getattr(r, key) is not None]

    def format(self) -> str:
        lines = [f"{'variable':<9}{'grid':>12}{'L2 error':>12}{'rate':>7}{'Linf error':>12}{'rate':>7}"]
        for var, rows in self.rows.items():
            for r in rows:
                rl2 = "--" if r.rate_l2 is None else f"{r.rate_l2:.2f}"
                rli = "--" if r.rate_linf is None else f"{r.rate_linf:.2f}"
                lines.append(f"{var:<9}{f'{r.coarse}x{r.coarse}':>12}{r.l2:>12.3e}{rl2:>7}{r.linf:>12.3e}{rli:>7}")
        return "\n".join(lines)


def _pair_mean(a: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    return np.moveaxis(0.5 * (a[0::2] + a[1::2]), 0, axis)


def restrict_cells(fine: np.ndarray, one_d: bool = False) -> np.ndarray:
    """Average fine cells onto the 2x coarser grid (x only when ``one_d``)."""
    out = _pair_mean(fine, 0)
    return out if one_d else _pair_mean(out, 1)


def restrict_faces(fine: FaceVectorField, one_d: bool = False) -> FaceVectorField:
    """Coarse faces from the fine faces lying on them."""
    u = fine.u[0::2]
    v = fine.v if one_d else fine.v[:, 0::2]
    if not one_d:
        u = _pair_mean(u, 1)
        v = _pair_mean(v, 0)
    else:
        v = _pair_mean(v, 0)
    return FaceVectorField(u, v)


def _coarse_grid(shape: tuple[int, int], grid: Grid | None) -> Grid:
    if grid is not None:
        return grid
    from ..grid import GridSpec, make_grid

    return make_grid(GridSpec(*shape))


def cauchy_error(coarse, fine, grid: Grid | None = None) -> tuple[float, float]:
    """Area-weighted L2 and Linf norms of ``coarse - R(fine)`` on the coarse grid.

    ``coarse`` and ``fine`` are both cell arrays or both face fields; ``grid``
    is the coarse grid (unit square when omitted).  Raises
    :class:`~permeaflow.grid.ConfigurationError` unless ``fine`` is the exact
    2x refinement of ``coarse``.
    """
    if isinstance(coarse, FaceVectorField) != isinstance(fine, FaceVectorField):
        raise ConfigurationError("cannot compare a cell field with a face field")
    if isinstance(coarse, FaceVectorField):
        nx, ny = coarse.v.shape[0], coarse.u.shape[1]
        one_d = ny == 1 and fine.u.shape[1] == 1
        want_u = (2 * nx + 1, ny if one_d else 2 * ny)
        if fine.u.shape != want_u or fine.v.shape != (2 * nx, want_u[1] + 1) or coarse.u.shape != (nx + 1, ny):
            raise ConfigurationError(
                f"face grids are not a 2x refinement: {coarse.u.shape}/{coarse.v.shape} vs {fine.u.shape}/{fine.v.shape}"
            )
        g = _coarse_grid((nx, ny), grid)
        r = restrict_faces(fine, one_d)
        du, dv = coarse.u - r.u, coarse.v - r.v
        wu, wv = face_weights(g)
        l2 = math.sqrt(float(np.sum(wu * du**2) + np.sum(wv * dv**2)))
        linf = float(max(np.max(np.abs(du), initial=0.0), np.max(np.abs(dv), initial=0.0)))
        return l2, linf
    coarse = np.asarray(coarse, dtype=float)
    fine = np.asarray(fine, dtype=float)
    if coarse.ndim != 2 or fine.ndim != 2:
        raise ConfigurationError("cell fields must be two-dimensional arrays")
    nx, ny = coarse.shape
    one_d = ny == 1 and fine.shape[1] == 1
    if fine.shape != (2 * nx, ny if one_d else 2 * ny):
        raise ConfigurationError(f"cell grids are not a 2x refinement: {coarse.shape} vs {fine.shape}")
    g = _coarse_grid((nx, ny), grid)
    d = coarse - restrict_cells(fine, one_d)
    return math.sqrt(float(np.sum(d**2)) * g.cell_area), float(np.max(np.abs(d), initial=0.0))


def convergence_rates(errors: Sequence[tuple[float, float]]) -> list[tuple[float, float, float | None]]:
    """``[(h, error, rate)]`` with ``rate = log2(e_h / e_{h/2})``; the first rate is ``None``."""
    out = []
    for k, (h, e) in enumerate(errors):
        if not e > 0:
            raise ConfigurationError(f"errors must be positive, got {e} at h={h}")
        rate = None
        if k:
            h0, e0 = errors[k - 1]
            if not math.isclose(h0, 2.0 * h, rel_tol=1e-9):
                raise ConfigurationError(f"grid spacing must halve between entries: {h0} -> {h}")
            rate = math.log2(e0 / e)
        out.append((h, e, rate))
    return out


def rate_table(solutions: Sequence[tuple[Grid, dict]], variables: Sequence[str]) -> RateTable:
    """Build a :class:`RateTable` from solutions on successively halved grids.

    ``solutions`` holds ``(grid, {name: field})`` pairs, coarsest first.
    """
    table = RateTable()
    for var in variables:
        pairs = []
        for (g0, s0), (g1, s1) in zip(solutions, solutions[1:]):
            l2, linf = cauchy_error(s0[var], s1[var], g0)
            pairs.append((g0, l2, linf))
        l2_rates = convergence_rates([(g.hx, e) for g, e, _ in pairs])
        li_rates = convergence_rates([(g.hx, e) for g, _, e in pairs])
        table.rows[var] = [RateRow(g.nx, 2 * g.nx, l2, li, a[2], b[2])
                           for (g, l2, li), a, b in zip(pairs, l2_rates, li_rates)]
    return table
