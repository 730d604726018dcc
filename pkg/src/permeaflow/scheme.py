"""Decoupled, linear, energy-stable time stepping.

One step of :func:`advance` runs

1. the stabilized Cahn-Hilliard system coupled to the tentative momentum
   equation, solved by block Gauss iteration (CH block first);
2. the pressure-correction projection;
3. the implicit concentration update with the restricted diffusivity.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .grid import (
    BoundarySpec,
    Dirichlet,
    FaceVectorField,
    Grid,
    ScalarBC,
    check_faces,
    check_scalar,
    enforce_velocity_bc,
)
from .linalg import SOLVER_CHOICES, Factorized, MeanZeroPoisson, NonConvergenceError, Solver
from .model import (
    C_FLOOR,
    FluxLaw,
    PhysicalParams,
    double_well_prime,
    effective_diffusivity,
    q_of_c_floored,
)
from .spectral import SpectralCahnHilliard, SpectralPoisson, basis_for
from .sparse_ops import DiagSandwich, ScalarOps, VelocityOps, divergence_matrix, join_faces, split_faces

log = logging.getLogger(__name__)


class Step3Mode(enum.Enum):
    ENTROPY = "entropy"
    LINEARIZED = "linearized"


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-4
    gauss_tol: float = 1e-8
    gauss_max_iters: int = 100
    lin_tol: float = 1e-10
    lin_max_iters: int = 1000
    linear_solver: str = "auto"
    newton_tol: float = 1e-10
    newton_max_iters: int = 50
    step3_mode: Step3Mode = Step3Mode.ENTROPY

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        for name in ("gauss_tol", "lin_tol", "newton_tol"):
            val = getattr(self, name)
            if not 0 < val < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {val}")
        for name in ("gauss_max_iters", "lin_max_iters", "newton_max_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.linear_solver not in SOLVER_CHOICES:
            raise ValueError(f"linear_solver must be one of {SOLVER_CHOICES}, got {self.linear_solver!r}")
        if not isinstance(self.step3_mode, Step3Mode):
            object.__setattr__(self, "step3_mode", Step3Mode(self.step3_mode))

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


@dataclass
class State:
    phi: np.ndarray
    mu: np.ndarray
    c: np.ndarray
    vel: FaceVectorField
    p: np.ndarray
    t: float = 0.0
    n: int = 0

    def copy(self) -> "State":
        return State(self.phi.copy(), self.mu.copy(), self.c.copy(), self.vel.copy(), self.p.copy(), self.t, self.n)


@dataclass
class StepStats:
    gauss_iters: int = 0
    gauss_increment: float = 0.0
    newton_iters: int = 0
    div_tilde: float = 0.0
    div_next: float = 0.0
    negative_c: int = 0


# ---------------------------------------------------------------------------
# cached operator bundle


@dataclass(eq=False)
class Discretization:
    """Matrices and factorizations shared by all steps of one run."""

    grid: Grid
    params: PhysicalParams
    cfg: SolverConfig
    bc: BoundarySpec

    @cached_property
    def phi_ops(self) -> ScalarOps:
        return ScalarOps(self.grid, self.bc.phi)

    @cached_property
    def mu_ops(self) -> ScalarOps:
        return ScalarOps(self.grid, self.bc.mu)

    @cached_property
    def c_ops(self) -> ScalarOps:
        return ScalarOps(self.grid, self.bc.c)

    @cached_property
    def lnc_ops(self) -> ScalarOps:
        return ScalarOps(self.grid, log_bc(self.bc.c))

    @cached_property
    def p_ops(self) -> ScalarOps:
        return ScalarOps(self.grid, self.bc.p)

    @cached_property
    def vel_ops(self) -> VelocityOps:
        return VelocityOps(self.grid, self.bc.vel)

    @cached_property
    def div(self):
        return divergence_matrix(self.grid)

    @cached_property
    def ch_solver(self):
        p, dt = self.params, self.cfg.dt
        basis = basis_for(self.grid, self.bc.phi, self.bc.mu)
        if basis is not None:
            return SpectralCahnHilliard(basis, dt, p.mobility, p.epsilon, p.s)
        n = self.grid.nx * self.grid.ny
        eye = sp.identity(n, format="csr")
        Lphi = self.phi_ops.lap[0]
        Lmu = self.mu_ops.lap[0]
        A = sp.bmat([[eye / dt, -p.mobility * Lmu],
                     [p.epsilon * Lphi - (p.s / p.epsilon) * eye, eye]], format="csc")
        return Factorized(A)

    @cached_property
    def poisson(self):
        return poisson_solver(self.grid, self.bc.p, self.cfg.lin_tol)

    @cached_property
    def _momentum_pattern(self) -> DiagSandwich:
        p, dt = self.params, self.cfg.dt
        V = self.vel_ops
        nfu = (self.grid.nx + 1) * self.grid.ny
        Ru, Rv = V.R[:, :nfu], V.R[:, nfu:]
        pairs = V.advection_factors[0]
        terms = [(R @ left, right) for R, (left, right) in zip((Ru, Ru, Rv, Rv), pairs)]
        const = (p.Re / dt) * sp.identity(V.n_unknowns, format="csr") - V.R @ V.laplacian[0]
        return DiagSandwich(terms, const)

    def momentum_matrix(self, vel: FaceVectorField):
        """Helmholtz + lagged advection operator on velocity unknowns and its offset."""
        Re = self.params.Re
        V = self.vel_ops
        w = V.advection_weights(vel.u, vel.v)
        A = self._momentum_pattern.assemble([Re * wk for wk in w])
        return A, V.R @ (V.laplacian[1] - Re * V.advection_offset(w))

    @cached_property
    def concentration_pattern(self) -> DiagSandwich:
        """``I/dt + D diag(a) Avg + D diag(b) Grad_lnc diag(s)``: the entropy-flux Jacobian."""
        n = self.grid.nx * self.grid.ny
        D = self.div
        return DiagSandwich([(D, self.c_ops.avg[0]), (D, self.lnc_ops.grad[0])],
                            sp.identity(n, format="csr") / self.cfg.dt)

    @cached_property
    def linear_concentration_pattern(self) -> DiagSandwich:
        """``I/dt + D diag(a) Avg + D diag(b) Grad``: the linearized-flux matrix."""
        n = self.grid.nx * self.grid.ny
        D = self.div
        return DiagSandwich([(D, self.c_ops.avg[0]), (D, self.c_ops.grad[0])],
                            sp.identity(n, format="csr") / self.cfg.dt)


@lru_cache(maxsize=8)
def discretization(grid: Grid, params: PhysicalParams, cfg: SolverConfig, bc: BoundarySpec) -> Discretization:
    return Discretization(grid, params, cfg, bc)


def log_bc(bc: ScalarBC) -> ScalarBC:
    """Boundary condition satisfied by ``ln c`` when ``c`` satisfies ``bc``."""

    def conv(cond):
        if isinstance(cond, Dirichlet):
            if cond.value <= 0:
                raise ValueError("Dirichlet concentration must be positive for the entropy flux")
            return Dirichlet(float(np.log(cond.value)))
        return cond

    return ScalarBC(*(conv(getattr(bc, s)) for s in ("left", "right", "bottom", "top")))


# ---------------------------------------------------------------------------
# initial data


def chemical_potential(grid: Grid, phi: np.ndarray, params: PhysicalParams, bc: BoundarySpec) -> np.ndarray:
    """``mu = -eps lap(phi) + G'(phi) / eps`` (no stabilization term)."""
    return -params.epsilon * ops.laplacian(grid, phi, bc.phi) + double_well_prime(phi) / params.epsilon


def project_velocity(grid: Grid, vel: FaceVectorField, bc: BoundarySpec, Re: float = 1.0, dt: float = 1.0):
    """Discrete Helmholtz projection of ``vel`` onto divergence-free face fields."""
    vel = enforce_velocity_bc(grid, vel, bc.vel)
    rhs = ops.divergence(grid, vel).ravel()
    if not np.any(rhs):
        return vel, np.zeros(grid.shape)
    psi = poisson_solver(grid, bc.p).solve(rhs)
    g = ops.gradient(grid, psi.reshape(grid.shape), bc.p)
    return enforce_velocity_bc(grid, vel - g, bc.vel), psi.reshape(grid.shape)


def initial_state(grid: Grid, phi0: np.ndarray, c0: np.ndarray, vel0: FaceVectorField | None,
                  params: PhysicalParams, bc: BoundarySpec, project: bool = True) -> State:
    phi0 = check_scalar(grid, phi0, "phi")
    c0 = check_scalar(grid, c0, "c")
    vel = FaceVectorField.zeros(grid) if vel0 is None else check_faces(grid, vel0)
    if project:
        vel, _ = project_velocity(grid, vel, bc)
    else:
        vel = enforce_velocity_bc(grid, vel, bc.vel)
    mu0 = chemical_potential(grid, phi0, params, bc)
    return State(phi0.copy(), mu0, c0.copy(), vel, np.zeros(grid.shape), 0.0, 0)


# ---------------------------------------------------------------------------
# step 1


# fields smaller than this are compared absolutely (rounding noise on a zero field)
INCREMENT_FLOOR = 1e-6


def _rel_increment(new: np.ndarray, old: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(new), initial=0.0)), INCREMENT_FLOOR)
    return float(np.max(np.abs(new - old), initial=0.0)) / scale


def step1_phase_velocity(grid: Grid, state: State, params: PhysicalParams, cfg: SolverConfig,
                         bc: BoundarySpec, stats: StepStats | None = None):
    """Coupled CH + tentative momentum by block Gauss iteration.

    Returns ``(phi_next, mu_next, u_tilde)``; raises
    :class:`~permeaflow.linalg.NonConvergenceError` with the last increment
    when ``gauss_tol`` is not reached.
    """
    disc = discretization(grid, params, cfg, bc)
    p, dt = params, cfg.dt
    n_cells = grid.nx * grid.ny
    V = disc.vel_ops

    phi_n = state.phi.ravel()
    phi_face = ops.face_average(grid, state.phi, bc.phi)
    phi_face_flat = join_faces(phi_face.u, phi_face.v)

    # CH right-hand side pieces independent of the velocity iterate
    _, off_lphi = disc.phi_ops.lap
    _, off_lmu = disc.mu_ops.lap
    rhs1_base = phi_n / dt + p.mobility * off_lmu
    rhs2 = (-p.epsilon * off_lphi - (p.s / p.epsilon) * phi_n
            + double_well_prime(phi_n) / p.epsilon)

    # momentum operator lagged on u^n
    A_mom, off_mom = disc.momentum_matrix(state.vel)
    mom = Solver(A_mom, cfg.linear_solver, cfg.lin_tol, cfg.lin_max_iters)
    Gp, off_gp = disc.p_ops.grad
    Gmu, off_gmu = disc.mu_ops.grad
    un_full = join_faces(state.vel.u, state.vel.v)
    mom_rhs_base = V.R @ ((p.Re / dt) * un_full - (Gp @ state.p.ravel() + off_gp)) + off_mom

    u_it = V.R @ un_full
    mu_it = state.mu.ravel()
    phi_it = phi_n
    increment = np.inf
    for it in range(1, cfg.gauss_max_iters + 1):
        # CH block with the current velocity iterate
        conv = disc.div @ (phi_face_flat * (V.P @ u_it))
        sol = disc.ch_solver.solve(np.r_[rhs1_base - conv, rhs2])
        phi_new, mu_new = sol[:n_cells], sol[n_cells:]
        # momentum block with the new chemical potential
        force = phi_face_flat * (Gmu @ mu_new + off_gmu) / p.Ca
        rhs = mom_rhs_base - V.R @ force
        u_new = mom.solve(rhs, guess=u_it)
        increment = max(_rel_increment(phi_new, phi_it), _rel_increment(mu_new, mu_it),
                        _rel_increment(u_new, u_it))
        phi_it, mu_it, u_it = phi_new, mu_new, u_new
        if increment <= cfg.gauss_tol:
            break
    else:
        raise NonConvergenceError("block Gauss iteration", increment, cfg.gauss_max_iters)
    log.debug("step1: %d block Gauss iterations, increment %.2e", it, increment)
    if stats is not None:
        stats.gauss_iters = it
        stats.gauss_increment = increment
    u, v = V.to_faces(u_it)
    return phi_it.reshape(grid.shape), mu_it.reshape(grid.shape), FaceVectorField(u.copy(), v.copy())


# ---------------------------------------------------------------------------
# step 2


def step2_projection(grid: Grid, u_tilde: FaceVectorField, p_old: np.ndarray, Re: float, dt: float,
                     bc: BoundarySpec, lin_tol: float = 1e-10, stats: StepStats | None = None):
    """Pressure-correction projection; returns ``(u_next, p_next)`` with mean-zero pressure."""
    rhs = ops.divergence(grid, u_tilde)
    div_tilde = float(np.max(np.abs(rhs), initial=0.0))
    poisson = _poisson_for(grid, bc, lin_tol)
    if div_tilde == 0.0:
        psi = np.zeros(grid.shape)
    else:
        psi = (Re / dt) * poisson.solve(rhs.ravel()).reshape(grid.shape)
    g = ops.gradient(grid, psi, bc.p)
    u_next = enforce_velocity_bc(grid, u_tilde - (dt / Re) * g, bc.vel)
    p_next = p_old + psi
    p_next = p_next - p_next.mean()
    if stats is not None:
        stats.div_tilde = div_tilde
        stats.div_next = float(np.max(np.abs(ops.divergence(grid, u_next)), initial=0.0))
    return u_next, p_next


@lru_cache(maxsize=8)
def _poisson_for(grid: Grid, bc: BoundarySpec, lin_tol: float):
    return poisson_solver(grid, bc.p, lin_tol)


def poisson_solver(grid: Grid, bc: ScalarBC, lin_tol: float = 1e-10):
    """Mean-zero Poisson solver: spectral when the BC allows it, bordered LU otherwise."""
    basis = basis_for(grid, bc)
    if basis is not None:
        return SpectralPoisson(basis, lin_tol)
    return MeanZeroPoisson(ScalarOps(grid, bc).lap[0], tol=lin_tol)


# ---------------------------------------------------------------------------
# step 3


def face_diffusivity(grid: Grid, phi: np.ndarray, c_old: np.ndarray, params: PhysicalParams,
                     bc: BoundarySpec) -> np.ndarray:
    """``D_eff`` on all faces (flattened u-faces then v-faces)."""
    phi_f = ops.face_average(grid, phi, bc.phi)
    q_cells = q_of_c_floored(c_old, params.q_law)
    if params.q_law is FluxLaw.LINEAR:
        q_flat = 1.0
    else:
        q_bc = _q_bc(bc.c, params.q_law)
        qf = ops.face_average(grid, q_cells, q_bc)
        q_flat = join_faces(qf.u, qf.v)
    return effective_diffusivity(join_faces(phi_f.u, phi_f.v), q_flat, params)


def _q_bc(bc: ScalarBC, law: FluxLaw) -> ScalarBC:
    def conv(cond):
        if isinstance(cond, Dirichlet):
            return Dirichlet(float(q_of_c_floored(np.array([cond.value]), law)[0]))
        return cond

    return ScalarBC(*(conv(getattr(bc, s)) for s in ("left", "right", "bottom", "top")))


def step3_concentration(grid: Grid, state: State, phi_next: np.ndarray, u_next: FaceVectorField,
                        params: PhysicalParams, cfg: SolverConfig, bc: BoundarySpec,
                        stats: StepStats | None = None) -> np.ndarray:
    """Implicit Euler update of ``c`` with the restricted diffusivity."""
    disc = discretization(grid, params, cfg, bc)
    dt, Pe = cfg.dt, params.Pe
    c_old = state.c.ravel()
    Df = face_diffusivity(grid, phi_next, state.c, params, bc)
    Uf = join_faces(u_next.u, u_next.v)
    D = disc.div
    A, off_a = disc.c_ops.avg
    off_g = disc.c_ops.grad[1]
    adv_off = D @ (Uf * off_a)

    if cfg.step3_mode is Step3Mode.LINEARIZED:
        M = disc.linear_concentration_pattern.assemble([Uf, -Df / Pe])
        rhs = c_old / dt - adv_off + (1.0 / Pe) * (D @ (Df * off_g))
        c_new = Solver(M, cfg.linear_solver, cfg.lin_tol, cfg.lin_max_iters).solve(rhs, guess=c_old)
        neg = int(np.sum(c_new < 0))
        if neg:
            log.warning("step3: %d cells with negative concentration", neg)
        if stats is not None:
            stats.negative_c = neg
        return c_new.reshape(grid.shape)

    if np.any(c_old <= 0):
        raise ValueError("entropy-flux concentration update needs c > 0")
    Gl, off_gl = disc.lnc_ops.grad

    def residual(c):
        cf = A @ c + off_a
        g = Gl @ np.log(c) + off_gl
        flux = -Df * cf * g
        return (c - c_old) / dt + D @ (Uf * cf + flux / Pe), cf, g

    c = c_old.copy()
    F, cf, g = residual(c)
    delta_norm = np.inf
    solves = 0
    for it in range(1, cfg.newton_max_iters + 1):
        # J is dominated by I/dt, so |J^-1 F| <~ dt |F|.  Below this floor the
        # correction is smaller than newton_tol and F is mostly rounding noise.
        if dt * float(np.max(np.abs(F))) <= 0.1 * cfg.newton_tol * float(np.max(c)):
            break
        solves += 1
        J = disc.concentration_pattern.assemble([Uf - Df * g / Pe, -Df * cf / Pe], [None, 1.0 / c])
        delta = Solver(J, cfg.linear_solver, cfg.lin_tol, cfg.lin_max_iters).solve(-F)
        lam = 1.0
        while np.any(c + lam * delta <= 0.0):
            lam *= 0.5
            if lam < 1e-8:
                raise NonConvergenceError("Newton (positivity)", float(np.max(np.abs(F))), it)
        c = c + lam * delta
        F, cf, g = residual(c)
        delta_norm = lam * float(np.max(np.abs(delta))) / float(np.max(np.abs(c)))
        if delta_norm <= cfg.newton_tol:
            break
    else:
        raise NonConvergenceError("Newton iteration", delta_norm, cfg.newton_max_iters)
    if stats is not None:
        stats.newton_iters = solves
    return c.reshape(grid.shape)


# ---------------------------------------------------------------------------
# full step


def advance(grid: Grid, state: State, params: PhysicalParams, cfg: SolverConfig, bc: BoundarySpec,
            frozen_interface: bool = False, stats: StepStats | None = None) -> State:
    """Advance one time step: Step 1, Step 2, Step 3 in that order.

    With ``frozen_interface`` only Step 3 runs; ``phi``, ``mu``, velocity and
    pressure are carried over unchanged.
    """
    if frozen_interface:
        c_next = step3_concentration(grid, state, state.phi, state.vel, params, cfg, bc, stats)
        return State(state.phi, state.mu, c_next, state.vel, state.p, state.t + cfg.dt, state.n + 1)
    phi_next, mu_next, u_tilde = step1_phase_velocity(grid, state, params, cfg, bc, stats)
    u_next, p_next = step2_projection(grid, u_tilde, state.p, params.Re, cfg.dt, bc, cfg.lin_tol, stats)
    c_next = step3_concentration(grid, state, phi_next, u_next, params, cfg, bc, stats)
    return State(phi_next, mu_next, c_next, u_next, p_next, state.t + cfg.dt, state.n + 1)


__all__ = [
    "C_FLOOR",
    "SolverConfig",
    "State",
    "StepStats",
    "Step3Mode",
    "advance",
    "chemical_potential",
    "initial_state",
    "project_velocity",
    "step1_phase_velocity",
    "step2_projection",
    "step3_concentration",
]
