"""Sparse linear solves with an explicit relative-residual contract."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

METHODS = ("direct", "cg", "bicgstab", "gmres")
SOLVER_CHOICES = ("auto",) + METHODS


class NonConvergenceError(RuntimeError):
    def __init__(self, what: str, residual: float, iterations: int | None = None):
        self.residual = residual
        self.iterations = iterations
        msg = f"{what} did not converge (residual {residual:.3e}"
        msg += f" after {iterations} iterations)" if iterations is not None else ")"
        super().__init__(msg)


class ConsistencyError(RuntimeError):
    """A singular system was handed an incompatible right-hand side."""


@dataclass
class LinearSystem:
    matrix: sp.spmatrix
    rhs: np.ndarray
    layout: str = "cells"
    symmetric: bool = False
    guess: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n, m = self.matrix.shape
        if n != m or self.rhs.shape != (n,):
            raise ValueError(f"inconsistent system: matrix {self.matrix.shape}, rhs {self.rhs.shape}")


def relative_residual(A, x, b) -> float:
    bn = float(np.linalg.norm(b))
    r = float(np.linalg.norm(b - A @ x))
    return r / bn if bn > 0 else r


def dominance_margin(A) -> float:
    """Smallest row margin ``(|a_ii| - sum_j!=i |a_ij|) / |a_ii|``; negative when not dominant."""
    A = sp.csr_matrix(A)
    d = np.abs(A.diagonal())
    off = np.asarray(abs(A).sum(axis=1)).ravel() - d
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(d > 0, (d - off) / d, -np.inf)
    return float(m.min(initial=np.inf))


def solve_linear(system: LinearSystem, lin_tol: float = 1e-10, lin_max_iters: int = 1000,
                 method: str = "direct") -> np.ndarray:
    """Solve ``system`` to relative residual ``lin_tol``.

    Krylov methods are Jacobi preconditioned; ``direct`` is sparse LU.
    """
    A = system.matrix
    b = system.rhs
    if not np.any(b):
        return np.zeros_like(b)
    if method == "direct":
        x = spla.splu(sp.csc_matrix(A)).solve(b)
        it = None
    else:
        if method not in METHODS:
            raise ValueError(f"unknown linear solver {method!r}")
        A = sp.csr_matrix(A)
        dinv = 1.0 / A.diagonal()
        M = spla.LinearOperator(A.shape, lambda r: dinv * r)
        counter = [0]

        def cb(*_):
            counter[0] += 1

        solver = {"cg": spla.cg, "bicgstab": spla.bicgstab, "gmres": spla.gmres}[method]
        kw = {"restart": 50, "callback_type": "legacy"} if method == "gmres" else {}
        x, info = solver(A, b, x0=system.guess, rtol=lin_tol, atol=0.0, maxiter=lin_max_iters, M=M,
                         callback=cb, **kw)
        it = counter[0]
    res = relative_residual(A, x, b)
    # direct solves are accepted up to rounding amplification
    limit = lin_tol if method != "direct" else max(lin_tol, 1e-8)
    if not np.all(np.isfinite(x)) or res > 10.0 * limit:
        raise NonConvergenceError(f"{method} solve", res, it)
    return x


class Solver:
    """Repeated solves with one matrix: LU, or Jacobi-BiCGStab when well conditioned.

    ``method="auto"`` takes BiCGStab when the diagonal-dominance margin is at
    least ``krylov_margin`` and LU otherwise.
    """

    def __init__(self, A, method: str = "auto", lin_tol: float = 1e-10, lin_max_iters: int = 1000,
                 krylov_margin: float = 0.02):
        self.A = sp.csr_matrix(A)
        if method == "auto":
            method = "bicgstab" if dominance_margin(self.A) >= krylov_margin else "direct"
        self.method = method
        self.lin_tol = lin_tol
        self.lin_max_iters = lin_max_iters
        self._lu = spla.splu(sp.csc_matrix(self.A)) if method == "direct" else None

    def solve(self, b: np.ndarray, guess: np.ndarray | None = None) -> np.ndarray:
        if self._lu is not None:
            return self._lu.solve(b)
        try:
            return solve_linear(LinearSystem(self.A, b, guess=guess), self.lin_tol, self.lin_max_iters,
                                self.method)
        except NonConvergenceError:
            log.debug("Krylov solve stalled; switching to LU")
            self.method = "direct"
            self._lu = spla.splu(sp.csc_matrix(self.A))
            return self._lu.solve(b)


class Factorized:
    """LU factorization reused across right-hand sides."""

    def __init__(self, A):
        self.A = sp.csc_matrix(A)
        self._lu = spla.splu(self.A)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._lu.solve(b)


class MeanZeroPoisson:
    """Pure-Neumann or periodic Poisson solve with the mean-zero gauge.

    The constant null space is removed by bordering: ``[[L, 1], [1^T, 0]]``.
    """

    def __init__(self, L, tol: float = 1e-10):
        n = L.shape[0]
        one = np.ones((n, 1))
        self.n = n
        self.tol = tol
        self.L = sp.csr_matrix(L)
        bordered = sp.bmat([[L, sp.csr_matrix(one)], [sp.csr_matrix(one.T), None]], format="csc")
        self._lu = spla.splu(bordered)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        scale = float(np.max(np.abs(rhs), initial=0.0))
        if scale == 0.0:
            return np.zeros(self.n)
        net = float(np.sum(rhs))
        if abs(net) > max(self.tol, 1e-12) * scale * self.n:
            raise ConsistencyError(f"Poisson right-hand side has nonzero net source {net:.3e}")
        x = self._lu.solve(np.r_[rhs - net / self.n, 0.0])
        psi = x[:-1]
        return psi - psi.mean()
