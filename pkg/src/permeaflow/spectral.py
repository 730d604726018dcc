"""Direct solvers for the constant-coefficient systems in the eigenbasis of the Laplacian.

On a cell-centred grid the 5-point Laplacian with periodic sides is
diagonalized by the DFT and with homogeneous Neumann (ghost-cell) sides by
the orthonormal DCT-II, exactly.  Whenever both axes are of one of these two
kinds, the Cahn-Hilliard block and the pressure Poisson problem reduce to
independent 2x2 and scalar equations per mode; anything else (Dirichlet
sides) returns ``None`` and the caller factors the sparse matrix instead.
"""

from __future__ import annotations

import numpy as np
from scipy import fft

from .grid import Grid, Neumann, Periodic, ScalarBC
from .linalg import ConsistencyError


def _axis_kind(lo, hi) -> str | None:
    if isinstance(lo, Periodic) and isinstance(hi, Periodic):
        return "periodic"
    if isinstance(lo, Neumann) and isinstance(hi, Neumann):
        return "neumann"
    return None


class LaplacianBasis:
    """Forward/inverse transform and eigenvalues of the cell Laplacian for one BC."""

    def __init__(self, grid: Grid, bc: ScalarBC):
        self.shape = grid.shape
        self.kinds = (_axis_kind(*bc.x), _axis_kind(*bc.y))
        if None in self.kinds:
            raise ValueError("only periodic or Neumann sides are diagonalized")
        # DCT axes first, so the complex transforms act last
        order = sorted(range(2), key=lambda a: self.kinds[a] == "periodic")
        self._plan = []
        first_periodic = True
        for axis in order:
            if self.kinds[axis] == "neumann":
                self._plan.append((axis, "dct"))
            elif first_periodic:
                self._plan.append((axis, "rfft"))
                first_periodic = False
            else:
                self._plan.append((axis, "fft"))
        lam = []
        for axis, (n, h) in enumerate(((grid.nx, grid.hx), (grid.ny, grid.hy))):
            kind = dict(self._plan)[axis]
            k = np.arange(n // 2 + 1 if kind == "rfft" else n)
            denom = n if self.kinds[axis] == "periodic" else 2 * n
            lam.append(-(4.0 / h**2) * np.sin(np.pi * k / denom) ** 2)
        self.eigenvalues = lam[0][:, None] + lam[1][None, :]

    def forward(self, f: np.ndarray) -> np.ndarray:
        out = f
        for axis, kind in self._plan:
            if kind == "dct":
                out = fft.dct(out, type=2, axis=axis, norm="ortho")
            elif kind == "rfft":
                out = fft.rfft(out, axis=axis)
            else:
                out = fft.fft(out, axis=axis)
        return out

    def inverse(self, F: np.ndarray) -> np.ndarray:
        out = F
        for axis, kind in reversed(self._plan):
            if kind == "dct":
                out = fft.idct(out, type=2, axis=axis, norm="ortho")
            elif kind == "rfft":
                out = fft.irfft(out, n=self.shape[axis], axis=axis)
            else:
                out = fft.ifft(out, axis=axis)
        return np.real(out) if np.iscomplexobj(out) else out


def basis_for(grid: Grid, *bcs: ScalarBC) -> LaplacianBasis | None:
    """Shared eigenbasis of the given BCs' Laplacians, or ``None`` when there is none."""
    kinds = {(_axis_kind(*bc.x), _axis_kind(*bc.y)) for bc in bcs}
    if len(kinds) != 1 or None in next(iter(kinds)):
        return None
    return LaplacianBasis(grid, bcs[0])


class SpectralCahnHilliard:
    """Solves ``[[I/dt, -M L], [eps L - (s/eps) I, I]] [phi; mu] = [r1; r2]``."""

    def __init__(self, basis: LaplacianBasis, dt: float, mobility: float, epsilon: float, s: float):
        self.basis = basis
        lam = basis.eigenvalues
        self._a = epsilon * lam - s / epsilon
        self._m_lam = mobility * lam
        # determinant 1/dt + M eps lam^2 - M s lam / eps > 0 since lam <= 0
        self._inv_det = 1.0 / (1.0 / dt + self._m_lam * self._a)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        n = rhs.size // 2
        shape = self.basis.shape
        r1 = self.basis.forward(rhs[:n].reshape(shape))
        r2 = self.basis.forward(rhs[n:].reshape(shape))
        phi = (r1 + self._m_lam * r2) * self._inv_det
        mu = r2 - self._a * phi
        return np.r_[self.basis.inverse(phi).ravel(), self.basis.inverse(mu).ravel()]


class SpectralPoisson:
    """Mean-zero solution of ``L psi = rhs`` (same contract as the bordered LU solve)."""

    def __init__(self, basis: LaplacianBasis, tol: float = 1e-10):
        self.basis = basis
        self.tol = tol
        lam = basis.eigenvalues.copy()
        self._null = lam == 0.0
        lam[self._null] = 1.0
        self._inv = 1.0 / lam
        self._inv[self._null] = 0.0
        self.n = lam.size

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        scale = float(np.max(np.abs(rhs), initial=0.0))
        if scale == 0.0:
            return np.zeros(self.n)
        net = float(np.sum(rhs))
        if abs(net) > max(self.tol, 1e-12) * scale * self.n:
            raise ConsistencyError(f"Poisson right-hand side has nonzero net source {net:.3e}")
        psi = self.basis.inverse(self.basis.forward(rhs.reshape(self.basis.shape)) * self._inv).ravel()
        return psi - psi.mean()
