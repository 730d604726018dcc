"""Sparse-matrix forms of the grid operators, used by the implicit solves.

Fields are flattened in C order (``i * ny + j``).  An operator with boundary
data is returned as ``(matrix, offset)`` so that ``op(f) = matrix @ f + offset``.
Every matrix here reproduces the corresponding stencil in ``operators``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .grid import Dirichlet, Grid, Periodic, ScalarBC, VelocityBC


def _csr(rows, cols, vals, shape):
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)


def grad1d(n: int, h: float, lo, hi):
    """Cells -> faces difference ``(n+1) x n`` and its boundary offset."""
    rows, cols, vals = [], [], []
    b = np.zeros(n + 1)
    for k in range(1, n):
        rows += [k, k]
        cols += [k, k - 1]
        vals += [1.0 / h, -1.0 / h]
    for k, cond, inner in ((0, lo, 0), (n, hi, n - 1)):
        if isinstance(cond, Periodic):
            rows += [k, k]
            cols += [0, n - 1]
            vals += [1.0 / h, -1.0 / h]
        elif isinstance(cond, Dirichlet):
            sign = 1.0 if k == 0 else -1.0
            rows.append(k)
            cols.append(inner)
            vals.append(sign * 2.0 / h)
            b[k] = -sign * 2.0 * cond.value / h
    return _csr(rows, cols, vals, (n + 1, n)), b


def avg1d(n: int, lo, hi):
    """Cells -> faces arithmetic mean ``(n+1) x n`` and its boundary offset."""
    rows, cols, vals = [], [], []
    b = np.zeros(n + 1)
    for k in range(1, n):
        rows += [k, k]
        cols += [k, k - 1]
        vals += [0.5, 0.5]
    for k, cond, inner in ((0, lo, 0), (n, hi, n - 1)):
        if isinstance(cond, Periodic):
            rows += [k, k]
            cols += [0, n - 1]
            vals += [0.5, 0.5]
        elif isinstance(cond, Dirichlet):
            b[k] = cond.value
        else:
            rows.append(k)
            cols.append(inner)
            vals.append(1.0)
    return _csr(rows, cols, vals, (n + 1, n)), b


def div1d(n: int, h: float):
    """Faces -> cells difference ``n x (n+1)``."""
    k = np.arange(n)
    return _csr(np.r_[k, k], np.r_[k + 1, k], np.r_[np.full(n, 1.0 / h), np.full(n, -1.0 / h)], (n, n + 1))


def mean1d_nodes(n: int):
    """Faces -> cells arithmetic mean ``n x (n+1)``."""
    k = np.arange(n)
    return _csr(np.r_[k, k], np.r_[k, k + 1], np.full(2 * n, 0.5), (n, n + 1))


def node_layout(n: int, periodic: bool):
    """Prolongation ``(n+1) x m`` from unknown nodes to all nodes, and the row selector."""
    if periodic:
        m = n
        P = _csr(np.r_[np.arange(n), n], np.r_[np.arange(n), 0], np.ones(n + 1), (n + 1, m))
        R = _csr(np.arange(m), np.arange(m), np.ones(m), (m, n + 1))
    else:
        m = n - 1
        P = _csr(np.arange(1, n), np.arange(m), np.ones(m), (n + 1, m))
        R = _csr(np.arange(m), np.arange(1, n), np.ones(m), (m, n + 1))
    return P, R


def _eye(n):
    return sp.identity(n, format="csr")


def _kx(a, ny):
    return sp.kron(a, _eye(ny), format="csr")


def _ky(nx, a):
    return sp.kron(_eye(nx), a, format="csr")


@dataclass
class ScalarOps:
    """Gradient / divergence / Laplacian / face-mean matrices for one scalar BC."""

    grid: Grid
    bc: ScalarBC

    @cached_property
    def _pieces(self):
        g = self.grid
        gx, bx = grad1d(g.nx, g.hx, *self.bc.x)
        gy, by = grad1d(g.ny, g.hy, *self.bc.y)
        ax, cx = avg1d(g.nx, *self.bc.x)
        ay, cy = avg1d(g.ny, *self.bc.y)
        return gx, bx, gy, by, ax, cx, ay, cy

    @cached_property
    def grad(self):
        g = self.grid
        gx, bx, gy, by, *_ = self._pieces
        G = sp.vstack([_kx(gx, g.ny), _ky(g.nx, gy)], format="csr")
        off = np.r_[np.kron(bx, np.ones(g.ny)), np.kron(np.ones(g.nx), by)]
        return G, off

    @cached_property
    def avg(self):
        g = self.grid
        *_, ax, cx, ay, cy = self._pieces
        A = sp.vstack([_kx(ax, g.ny), _ky(g.nx, ay)], format="csr")
        off = np.r_[np.kron(cx, np.ones(g.ny)), np.kron(np.ones(g.nx), cy)]
        return A, off

    @cached_property
    def lap(self):
        D = divergence_matrix(self.grid)
        G, off = self.grad
        return (D @ G).tocsr(), D @ off


def divergence_matrix(grid: Grid):
    return sp.hstack([_kx(div1d(grid.nx, grid.hx), grid.ny), _ky(grid.nx, div1d(grid.ny, grid.hy))], format="csr")


def split_faces(grid: Grid, flat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nu = (grid.nx + 1) * grid.ny
    return flat[:nu].reshape(grid.nx + 1, grid.ny), flat[nu:].reshape(grid.nx, grid.ny + 1)


def join_faces(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.r_[u.ravel(), v.ravel()]


class DiagSandwich:
    """Fast repeated assembly of ``K + sum_k L_k diag(w_k) R_k diag(s_k)``.

    The factors ``L_k``, ``R_k`` and the constant ``K`` are fixed; only the
    weights ``w_k`` (and optional column scalings ``s_k``) change between
    assemblies.  The sparsity pattern and the map from each product term to
    its slot in the CSR data are computed once, so an assembly is a gather
    and one ``bincount``.
    """

    def __init__(self, terms, const=None):
        shape = (terms[0][0].shape[0], terms[0][1].shape[1])
        rows, cols, coef, self._terms = [], [], [], []
        start = 0
        for L, R in terms:
            Lc, Rr = sp.csc_matrix(L), sp.csr_matrix(R)
            Lc.sum_duplicates()
            Rr.sum_duplicates()
            lj = np.repeat(np.arange(Lc.shape[1]), np.diff(Lc.indptr))
            counts = np.diff(Rr.indptr)[lj]
            li = np.repeat(np.arange(lj.size), counts)
            first = np.repeat(Rr.indptr[lj], counts)
            ri = first + np.arange(li.size) - np.repeat(np.cumsum(counts) - counts, counts)
            rows.append(Lc.indices[li])
            cols.append(Rr.indices[ri])
            coef.append(Lc.data[li] * Rr.data[ri])
            self._terms.append((slice(start, start + li.size), lj[li], Rr.indices[ri]))
            start += li.size
        self._const = None
        if const is not None:
            K = sp.coo_matrix(const)
            rows.append(K.row)
            cols.append(K.col)
            coef.append(K.data.astype(float))
            self._const = slice(start, start + K.nnz)
        rows, cols = np.concatenate(rows).astype(np.int64), np.concatenate(cols).astype(np.int64)
        self._coef = np.concatenate(coef)
        keys, self._slot = np.unique(rows * shape[1] + cols, return_inverse=True)
        self._slot = self._slot.ravel()
        self._indices = (keys % shape[1]).astype(np.int32)
        self._indptr = np.r_[0, np.cumsum(np.bincount(keys // shape[1], minlength=shape[0]))].astype(np.int32)
        self.shape = shape

    def assemble(self, weights, col_scale=None) -> sp.csr_matrix:
        vals = np.empty_like(self._coef)
        for k, (sl, j, c) in enumerate(self._terms):
            v = self._coef[sl] * np.asarray(weights[k])[j]
            if col_scale is not None and col_scale[k] is not None:
                v *= col_scale[k][c]
            vals[sl] = v
        if self._const is not None:
            vals[self._const] = self._coef[self._const]
        data = np.bincount(self._slot, weights=vals, minlength=self._indices.size)
        return sp.csr_matrix((data, self._indices, self._indptr), shape=self.shape)


@dataclass
class VelocityOps:
    """Velocity unknown layout and the momentum operators on it.

    Unknowns exclude wall-normal boundary faces and keep one face of each
    periodic pair.  ``P`` prolongs unknowns to all faces, ``R`` restricts rows.
    """

    grid: Grid
    bc: VelocityBC

    @cached_property
    def periodic(self) -> tuple[bool, bool]:
        return isinstance(self.bc.left, Periodic), isinstance(self.bc.bottom, Periodic)

    @cached_property
    def layout(self):
        g = self.grid
        px, py = self.periodic
        P1x, R1x = node_layout(g.nx, px)
        P1y, R1y = node_layout(g.ny, py)
        Pu, Ru = _kx(P1x, g.ny), _kx(R1x, g.ny)
        Pv, Rv = _ky(g.nx, P1y), _ky(g.nx, R1y)
        P = sp.block_diag([Pu, Pv], format="csr")
        R = sp.block_diag([Ru, Rv], format="csr")
        return P, R, Pu.shape[1], Pv.shape[1]

    @property
    def P(self):
        return self.layout[0]

    @property
    def R(self):
        return self.layout[1]

    @property
    def n_unknowns(self) -> int:
        return self.layout[2] + self.layout[3]

    def to_unknowns(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.R @ join_faces(u, v)

    def to_faces(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return split_faces(self.grid, self.P @ x)

    @cached_property
    def _tangential(self):
        g = self.grid
        bu = self.bc.tangential_bc("u")
        bv = self.bc.tangential_bc("v")
        return (avg1d(g.ny, *bu.y), grad1d(g.ny, g.hy, *bu.y), avg1d(g.nx, *bv.x), grad1d(g.nx, g.hx, *bv.x))

    @cached_property
    def laplacian(self):
        """Full-face-row vector Laplacian on unknowns: ``(matrix, offset)`` with rows on all faces."""
        g = self.grid
        px, py = self.periodic
        (_, _), (gyu, byu), (_, _), (gxv, bxv) = self._tangential
        from .grid import Neumann

        nodal_x = grad1d(g.nx, g.hx, *(2 * (Periodic(),) if px else (Neumann(), Neumann())))[0] @ div1d(g.nx, g.hx)
        nodal_y = grad1d(g.ny, g.hy, *(2 * (Periodic(),) if py else (Neumann(), Neumann())))[0] @ div1d(g.ny, g.hy)
        Lu = _kx(nodal_x, g.ny) + _ky(g.nx + 1, div1d(g.ny, g.hy) @ gyu)
        Lv = _ky(g.nx, nodal_y) + _kx(div1d(g.nx, g.hx) @ gxv, g.ny + 1)
        off = np.r_[np.kron(np.ones(g.nx + 1), div1d(g.ny, g.hy) @ byu),
                    np.kron(div1d(g.nx, g.hx) @ bxv, np.ones(g.ny + 1))]
        L = sp.block_diag([Lu, Lv], format="csr") @ self.P
        return L.tocsr(), off

    @cached_property
    def advection_factors(self):
        """Fixed left/right factors of the advection operator and its offset pieces."""
        g = self.grid
        px, py = self.periodic
        (ayu, cyu), _, (axv, cxv), _ = self._tangential
        from .grid import Neumann

        nb_x = (Periodic(), Periodic()) if px else (Neumann(), Neumann())
        nb_y = (Periodic(), Periodic()) if py else (Neumann(), Neumann())
        nfu = (g.nx + 1) * g.ny
        Pu, Pv = self.P[:nfu], self.P[nfu:]
        Dyu = _ky(g.nx + 1, div1d(g.ny, g.hy))
        Dxv = _kx(div1d(g.nx, g.hx), g.ny + 1)
        pairs = [
            (_kx(grad1d(g.nx, g.hx, *nb_x)[0], g.ny), _kx(mean1d_nodes(g.nx), g.ny) @ Pu),
            (Dyu, _ky(g.nx + 1, ayu) @ Pu),
            (_ky(g.nx, grad1d(g.ny, g.hy, *nb_y)[0]), _ky(g.nx, mean1d_nodes(g.ny)) @ Pv),
            (Dxv, _kx(axv, g.ny + 1) @ Pv),
        ]
        off_u = (Dyu, np.kron(np.ones(g.nx + 1), cyu))
        off_v = (Dxv, np.kron(cxv, np.ones(g.ny + 1)))
        return pairs, off_u, off_v, (axv, cxv, ayu, cyu)

    def advection_weights(self, adv_u: np.ndarray, adv_v: np.ndarray):
        """Face/corner transport velocities for the four advection terms."""
        axv, cxv, ayu, cyu = self.advection_factors[3]
        fx = (0.5 * (adv_u[1:] + adv_u[:-1])).ravel()
        fy = (axv @ adv_v + cxv[:, None]).ravel()  # corners (nx+1, ny+1)
        gy = (0.5 * (adv_v[:, 1:] + adv_v[:, :-1])).ravel()
        gx = (adv_u @ ayu.T + cyu[None, :]).ravel()
        return fx, fy, gy, gx

    def advection_offset(self, weights) -> np.ndarray:
        _, (Dyu, bu), (Dxv, bv), _ = self.advection_factors
        return np.r_[Dyu @ (weights[1] * bu), Dxv @ (weights[3] * bv)]

    def advection(self, adv_u: np.ndarray, adv_v: np.ndarray):
        """Matrix of ``div(adv ⊗ vel)`` acting on velocity unknowns, rows on all faces."""
        pairs = self.advection_factors[0]
        w = self.advection_weights(adv_u, adv_v)
        Cu = pairs[0][0] @ sp.diags(w[0]) @ pairs[0][1] + pairs[1][0] @ sp.diags(w[1]) @ pairs[1][1]
        Cv = pairs[2][0] @ sp.diags(w[2]) @ pairs[2][1] + pairs[3][0] @ sp.diags(w[3]) @ pairs[3][1]
        return sp.vstack([Cu, Cv], format="csr"), self.advection_offset(w)

    def wall_mask(self) -> np.ndarray:
        """Boolean over all faces: True on wall-normal boundary faces."""
        g = self.grid
        px, py = self.periodic
        mu = np.zeros((g.nx + 1, g.ny), dtype=bool)
        mv = np.zeros((g.nx, g.ny + 1), dtype=bool)
        if not px:
            mu[0] = mu[-1] = True
        if not py:
            mv[:, 0] = mv[:, -1] = True
        return join_faces(mu, mv)
