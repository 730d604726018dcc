"""Staggered (MAC) rectangular grid, boundary conditions and field containers.

Scalars live at cell centres as arrays of shape ``(nx, ny)`` indexed ``[i, j]``
with ``i`` along x.  Velocities live on faces: ``u`` on the vertical faces
``(nx + 1, ny)`` and ``v`` on the horizontal faces ``(nx, ny + 1)``.
A grid with ``ny == 1`` is the one-dimensional mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np


class ConfigurationError(ValueError):
    """Raised for illegal grids, boundary specs or case descriptions."""


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int = 1
    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def is_1d(self) -> bool:
        return self.ny == 1

    @property
    def xc(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.hx

    @property
    def yc(self) -> np.ndarray:
        return self.y_min + (np.arange(self.ny) + 0.5) * self.hy

    @property
    def xf(self) -> np.ndarray:
        return self.x_min + np.arange(self.nx + 1) * self.hx

    @property
    def yf(self) -> np.ndarray:
        return self.y_min + np.arange(self.ny + 1) * self.hy

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xc, self.yc, indexing="ij")

    def u_points(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xf, self.yc, indexing="ij")

    def v_points(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xc, self.yf, indexing="ij")

    def refine(self, factor: int = 2) -> "Grid":
        return replace(self, nx=self.nx * factor, ny=self.ny if self.is_1d else self.ny * factor)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


def make_grid(spec: GridSpec) -> Grid:
    nx, ny = spec.nx, spec.ny
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ConfigurationError(f"cell counts must be positive integers, got nx={nx}, ny={ny}")
    if not (spec.x_max > spec.x_min and spec.y_max > spec.y_min):
        raise ConfigurationError(
            f"domain extents must be ordered, got x=({spec.x_min}, {spec.x_max}), "
            f"y=({spec.y_min}, {spec.y_max})"
        )
    return Grid(int(nx), int(ny), float(spec.x_min), float(spec.x_max), float(spec.y_min), float(spec.y_max))


def unit_square(n: int) -> Grid:
    return make_grid(GridSpec(n, n))


# ---------------------------------------------------------------------------
# boundary conditions


@dataclass(frozen=True)
class Neumann:
    """Homogeneous Neumann: zero normal derivative."""


@dataclass(frozen=True)
class Dirichlet:
    value: float = 0.0


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class NoSlip:
    pass


@dataclass(frozen=True)
class MovingWall:
    """Wall translating tangentially; ``velocity`` is the tangential component."""

    velocity: float = 0.0


ScalarCondition = Union[Neumann, Dirichlet, Periodic]
VelocityCondition = Union[NoSlip, MovingWall, Periodic]

SIDES = ("left", "right", "bottom", "top")


def _check_periodic_pairs(bc) -> None:
    if isinstance(bc.left, Periodic) != isinstance(bc.right, Periodic):
        raise ConfigurationError("periodic condition must be set on both left and right")
    if isinstance(bc.bottom, Periodic) != isinstance(bc.top, Periodic):
        raise ConfigurationError("periodic condition must be set on both bottom and top")


@dataclass(frozen=True)
class ScalarBC:
    left: ScalarCondition = Neumann()
    right: ScalarCondition = Neumann()
    bottom: ScalarCondition = Neumann()
    top: ScalarCondition = Neumann()

    def __post_init__(self):
        for side in SIDES:
            cond = getattr(self, side)
            if not isinstance(cond, (Neumann, Dirichlet, Periodic)):
                raise ConfigurationError(f"{type(cond).__name__} is not a scalar boundary condition ({side})")
        _check_periodic_pairs(self)

    @property
    def x(self) -> tuple:
        return (self.left, self.right)

    @property
    def y(self) -> tuple:
        return (self.bottom, self.top)

    @property
    def closed(self) -> bool:
        """True when no side lets mass in or out (Neumann or periodic everywhere)."""
        return all(isinstance(getattr(self, s), (Neumann, Periodic)) for s in SIDES)

    @classmethod
    def periodic(cls) -> "ScalarBC":
        return cls(Periodic(), Periodic(), Periodic(), Periodic())

    @classmethod
    def neumann(cls) -> "ScalarBC":
        return cls()

    @classmethod
    def periodic_x(cls, bottom: ScalarCondition = Neumann(), top: ScalarCondition = Neumann()) -> "ScalarBC":
        return cls(Periodic(), Periodic(), bottom, top)


@dataclass(frozen=True)
class VelocityBC:
    left: VelocityCondition = NoSlip()
    right: VelocityCondition = NoSlip()
    bottom: VelocityCondition = NoSlip()
    top: VelocityCondition = NoSlip()

    def __post_init__(self):
        for side in SIDES:
            cond = getattr(self, side)
            if not isinstance(cond, (NoSlip, MovingWall, Periodic)):
                raise ConfigurationError(f"{type(cond).__name__} is not a velocity boundary condition ({side})")
        _check_periodic_pairs(self)

    @property
    def x(self) -> tuple:
        return (self.left, self.right)

    @property
    def y(self) -> tuple:
        return (self.bottom, self.top)

    def tangential(self, side: str) -> ScalarCondition:
        """Tangential velocity condition expressed as a scalar condition."""
        cond = getattr(self, side)
        if isinstance(cond, Periodic):
            return Periodic()
        if isinstance(cond, MovingWall):
            return Dirichlet(cond.velocity)
        return Dirichlet(0.0)

    def tangential_bc(self, component: str) -> ScalarBC:
        """BC along the tangential direction of ``component`` ("u" or "v").

        The normal direction is left as Neumann placeholders; normal faces on
        walls are fixed to zero by the face layout, not by ghosts.
        """
        if component == "u":
            return ScalarBC(Neumann(), Neumann(), self.tangential("bottom"), self.tangential("top"))
        return ScalarBC(self.tangential("left"), self.tangential("right"), Neumann(), Neumann())

    def pressure_bc(self) -> ScalarBC:
        return ScalarBC(*(Periodic() if isinstance(getattr(self, s), Periodic) else Neumann() for s in SIDES))

    @classmethod
    def periodic(cls) -> "VelocityBC":
        return cls(Periodic(), Periodic(), Periodic(), Periodic())

    @classmethod
    def shear(cls, bottom: float = -1.0, top: float = 1.0) -> "VelocityBC":
        return cls(Periodic(), Periodic(), MovingWall(bottom), MovingWall(top))


@dataclass(frozen=True)
class BoundarySpec:
    phi: ScalarBC = field(default_factory=ScalarBC)
    mu: ScalarBC = field(default_factory=ScalarBC)
    c: ScalarBC = field(default_factory=ScalarBC)
    p: ScalarBC = field(default_factory=ScalarBC)
    vel: VelocityBC = field(default_factory=VelocityBC)

    def __post_init__(self):
        for side in SIDES:
            if isinstance(getattr(self.p, side), Dirichlet):
                raise ConfigurationError(f"pressure admits Neumann or periodic only ({side})")
            # periodicity of all variables must agree with the velocity layout
            vel_periodic = isinstance(getattr(self.vel, side), Periodic)
            for name in ("phi", "mu", "c", "p"):
                if isinstance(getattr(getattr(self, name), side), Periodic) != vel_periodic:
                    raise ConfigurationError(
                        f"periodicity of {name} on {side} side disagrees with the velocity condition"
                    )

    @classmethod
    def periodic(cls) -> "BoundarySpec":
        s = ScalarBC.periodic()
        return cls(s, s, s, s, VelocityBC.periodic())

    @classmethod
    def closed(cls) -> "BoundarySpec":
        return cls()

    @classmethod
    def shear(cls, c_bottom: ScalarCondition = Neumann(), c_top: ScalarCondition = Neumann(),
              u_bottom: float = -1.0, u_top: float = 1.0) -> "BoundarySpec":
        s = ScalarBC.periodic_x()
        return cls(s, s, ScalarBC.periodic_x(c_bottom, c_top), s, VelocityBC.shear(u_bottom, u_top))

    @classmethod
    def one_d(cls, c_left: ScalarCondition = Neumann(), c_right: ScalarCondition = Neumann()) -> "BoundarySpec":
        return cls(c=ScalarBC(c_left, c_right, Neumann(), Neumann()))


# ---------------------------------------------------------------------------
# fields


@dataclass
class FaceVectorField:
    """Face-centred vector field: ``u`` on x-faces, ``v`` on y-faces."""

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid) -> "FaceVectorField":
        return cls(np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))

    def copy(self) -> "FaceVectorField":
        return FaceVectorField(self.u.copy(), self.v.copy())

    def __add__(self, other: "FaceVectorField") -> "FaceVectorField":
        return FaceVectorField(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "FaceVectorField") -> "FaceVectorField":
        return FaceVectorField(self.u - other.u, self.v - other.v)

    def __mul__(self, a: float) -> "FaceVectorField":
        return FaceVectorField(self.u * a, self.v * a)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.u), initial=0.0)), float(np.max(np.abs(self.v), initial=0.0)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))


def check_scalar(grid: Grid, f: np.ndarray, name: str = "field") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise ConfigurationError(f"{name} has shape {f.shape}, expected {grid.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError(f"{name} contains non-finite values")
    return f


def check_faces(grid: Grid, g: FaceVectorField, name: str = "velocity") -> FaceVectorField:
    if g.u.shape != (grid.nx + 1, grid.ny) or g.v.shape != (grid.nx, grid.ny + 1):
        raise ConfigurationError(f"{name} has face shapes {g.u.shape}/{g.v.shape} incompatible with grid {grid.shape}")
    if not g.is_finite():
        raise ValueError(f"{name} contains non-finite values")
    return g


def enforce_velocity_bc(grid: Grid, vel: FaceVectorField, bc: VelocityBC) -> FaceVectorField:
    """Zero wall-normal velocity on walls and sync duplicated periodic faces."""
    u, v = vel.u.copy(), vel.v.copy()
    if isinstance(bc.left, Periodic):
        u[-1] = u[0]
    else:
        u[0] = 0.0
        u[-1] = 0.0
    if isinstance(bc.bottom, Periodic):
        v[:, -1] = v[:, 0]
    else:
        v[:, 0] = 0.0
        v[:, -1] = 0.0
    return FaceVectorField(u, v)


def face_weights(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature weights for face-centred quantities.

    Interior faces carry a full cell area, boundary faces half of it, so a
    duplicated periodic face pair counts once in total.
    """
    wx = np.full(grid.nx + 1, 1.0)
    wx[0] = wx[-1] = 0.5
    wy = np.full(grid.ny + 1, 1.0)
    wy[0] = wy[-1] = 0.5
    a = grid.cell_area
    return a * wx[:, None] * np.ones((1, grid.ny)), a * np.ones((grid.nx, 1)) * wy[None, :]
