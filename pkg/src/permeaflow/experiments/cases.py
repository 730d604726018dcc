"""Catalog of verification and permeability-study cases.

A :class:`CaseSpec` bundles everything needed to run one case: grid, physical
parameters, boundary conditions, time step and horizon, plus a few
kind-specific options (interface positions, boundary concentrations, ...).
:func:`build_case` returns the shipped defaults for a kind with overrides.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

from ..grid import (
    BoundarySpec,
    ConfigurationError,
    Dirichlet,
    FaceVectorField,
    Grid,
    GridSpec,
    Neumann,
    make_grid,
)
from ..model import A_CONST, C_FLOOR, SIGMA, PhysicalParams, tanh_profile
from .exact import SHARP_X0, TWO_INTERFACE_X, gaussian_seed


class CaseKind(enum.Enum):
    SHARP_LIMIT_1D = "SharpLimit1D"
    TWO_INTERFACE_1D = "TwoInterface1D"
    GAUSSIAN_2D = "Gaussian2D"
    CONVERGENCE_2D = "Convergence2D"
    ENERGY_STABILITY = "EnergyStability"
    SHEAR_DROP = "ShearDrop"
    TWO_DROPLETS = "TwoDroplets"

    @property
    def frozen(self) -> bool:
        """Kinds that hold the interface and velocity fixed and solve for ``c`` only."""
        return self in _FROZEN_KINDS

    @property
    def one_dimensional(self) -> bool:
        return self in (CaseKind.SHARP_LIMIT_1D, CaseKind.TWO_INTERFACE_1D)


_FROZEN_KINDS = frozenset({CaseKind.SHARP_LIMIT_1D, CaseKind.TWO_INTERFACE_1D, CaseKind.GAUSSIAN_2D})

#: permeability contrast of the shear-drop study
DELTA = 0.02
SHEAR_K = {"low": DELTA / (2 * SIGMA), "medium": 1 / (2 * SIGMA), "high": 1 / (2 * SIGMA * DELTA)}


@dataclass(frozen=True)
class CaseSpec:
    kind: CaseKind
    grid: GridSpec
    params: PhysicalParams
    bc: BoundarySpec
    dt: float
    t_end: float
    output_every: int = 0
    frozen_interface: bool = False
    options: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not isinstance(self.kind, CaseKind):
            object.__setattr__(self, "kind", CaseKind(self.kind))
        if self.kind.frozen and not self.frozen_interface:
            raise ConfigurationError(f"{self.kind.value} runs with a frozen interface; frozen_interface must be set")
        if not self.kind.frozen and self.frozen_interface:
            raise ConfigurationError(f"frozen_interface is not allowed for {self.kind.value}")
        if self.kind.one_dimensional and self.grid.ny != 1:
            raise ConfigurationError(f"{self.kind.value} is one-dimensional; ny must be 1, got {self.grid.ny}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if int(self.output_every) != self.output_every or self.output_every < 0:
            raise ConfigurationError(f"output_every must be a nonnegative integer, got {self.output_every}")
        make_grid(self.grid)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    def with_(self, **changes) -> "CaseSpec":
        return replace(self, **changes)

    def option(self, key: str):
        if key in self.options:
            return self.options[key]
        return _DEFAULT_OPTIONS[self.kind][key]


def grid_for_epsilon(epsilon: float, base_cells: int = 256, base_epsilon: float = 0.04) -> int:
    """1D cell count along the sharp-limit path, ``h ~ eps^(3/2)``.

    The interface is resolved increasingly well as it thins, so the
    discretization part of the bulk error falls like ``eps``.
    """
    return int(round(base_cells * (base_epsilon / epsilon) ** 1.5))


_DEFAULT_OPTIONS: dict[CaseKind, dict[str, Any]] = {
    CaseKind.SHARP_LIMIT_1D: {"x0": SHARP_X0, "c_left": 1.0, "c_right": 4.0},
    CaseKind.TWO_INTERFACE_1D: {"x1": TWO_INTERFACE_X[0], "x2": TWO_INTERFACE_X[1], "c_left": 2.0, "c_right": 1.0},
    CaseKind.GAUSSIAN_2D: {"radius": 11.0 / 18.0, "center": (0.5, 0.5), "t0": 1e-4},
    CaseKind.CONVERGENCE_2D: {},
    CaseKind.ENERGY_STABILITY: {},
    CaseKind.SHEAR_DROP: {"radius": 0.25, "center": (0.5, 0.5), "c_bc": "dirichlet",
                          "c_bottom": 0.2, "c_top": 0.8, "u_bottom": -1.0, "u_top": 1.0},
    CaseKind.TWO_DROPLETS: {"radius": 0.2, "centers": ((0.5, 0.7), (1.5, 0.3)), "c_bc": "dirichlet",
                            "c_bottom": 0.2, "c_top": 0.8, "u_bottom": -1.0, "u_top": 1.0},
}

_CONVERGENCE_PARAMS = PhysicalParams(Re=1.0, Ca=1.0, Pe=1.0, epsilon=0.08, mobility=0.1, K=1.0 / A_CONST)
_SHEAR_PARAMS = PhysicalParams(Re=100.0, Ca=1.0, Pe=1.0, epsilon=0.02, mobility=0.02, K=SHEAR_K["medium"])


def _shear_bc(opts: Mapping[str, Any]) -> BoundarySpec:
    mode = opts["c_bc"]
    if mode == "dirichlet":
        cb, ct = Dirichlet(float(opts["c_bottom"])), Dirichlet(float(opts["c_top"]))
    elif mode == "neumann":
        cb = ct = Neumann()
    else:
        raise ConfigurationError(f"c_bc must be 'dirichlet' or 'neumann', got {mode!r}")
    return BoundarySpec.shear(cb, ct, float(opts["u_bottom"]), float(opts["u_top"]))


def build_case(kind: CaseKind | str, **overrides) -> CaseSpec:
    """Shipped defaults for ``kind``; keyword overrides replace any field.

    Besides the :class:`CaseSpec` fields, overrides accept the kind's
    options (``c_bc``, ``radius``, ...), physical parameter names
    (``epsilon``, ``K``, ...) and ``n`` / ``h`` for the cell count.
    """
    kind = CaseKind(kind)
    opts = dict(_DEFAULT_OPTIONS[kind])
    param_changes = {}
    spec_changes = {}
    n = overrides.pop("n", None)
    h = overrides.pop("h", None)
    for key, val in overrides.items():
        if key in opts:
            opts[key] = val
        elif key in PhysicalParams.__dataclass_fields__:
            param_changes[key] = val
        elif key in CaseSpec.__dataclass_fields__:
            spec_changes[key] = val
        else:
            raise ConfigurationError(f"unknown option {key!r} for {kind.value}")
    if h is not None:
        n = int(round(1.0 / h))
        if not math.isclose(n * h, 1.0, rel_tol=1e-9):
            raise ConfigurationError(f"h = {h} does not divide the unit length")

    if kind is CaseKind.SHARP_LIMIT_1D:
        params = PhysicalParams(epsilon=0.04, K=0.5).with_(**param_changes)
        grid = GridSpec(n or grid_for_epsilon(params.epsilon), 1)
        bc = BoundarySpec.one_d(Dirichlet(float(opts["c_left"])), Dirichlet(float(opts["c_right"])))
        base = dict(dt=0.05, t_end=10.0, frozen_interface=True)
    elif kind is CaseKind.TWO_INTERFACE_1D:
        params = PhysicalParams(epsilon=0.01, K=0.2).with_(**param_changes)
        grid = GridSpec(n or 512, 1)
        bc = BoundarySpec.one_d(Dirichlet(float(opts["c_left"])), Dirichlet(float(opts["c_right"])))
        base = dict(dt=0.05, t_end=10.0, frozen_interface=True)
    elif kind is CaseKind.GAUSSIAN_2D:
        params = PhysicalParams(epsilon=0.01, K=10.0).with_(**param_changes)
        grid = GridSpec(n or 128, n or 128)
        bc = BoundarySpec.closed()
        base = dict(dt=1e-4, t_end=1e-2, frozen_interface=True)
    elif kind in (CaseKind.CONVERGENCE_2D, CaseKind.ENERGY_STABILITY):
        params = _CONVERGENCE_PARAMS.with_(**param_changes)
        if kind is CaseKind.CONVERGENCE_2D:
            grid = GridSpec(n or 64, n or 64)
            base = dict(dt=1e-4, t_end=0.1)
        else:
            grid = GridSpec(n or 128, n or 128)
            base = dict(dt=0.1 / 2**8, t_end=0.2)
        bc = BoundarySpec.periodic()
    elif kind is CaseKind.SHEAR_DROP:
        params = _SHEAR_PARAMS.with_(**param_changes)
        grid = GridSpec(n or 128, n or 128)
        bc = _shear_bc(opts)
        base = dict(dt=1e-2, t_end=3.0)
    else:
        params = _SHEAR_PARAMS.with_(**param_changes)
        m = n or 128
        grid = GridSpec(2 * m, m, 0.0, 2.0, 0.0, 1.0)
        bc = _shear_bc(opts)
        # the lagged double-well slows interface transport by ~1/(1 + 250 dt);
        # dt = 2.5e-4 keeps the drops within ~6% of the carrier flow
        base = dict(dt=2.5e-4, t_end=2.0, output_every=400)
    base.update(spec_changes)
    if "grid" not in base:
        base["grid"] = grid
    return CaseSpec(kind=kind, params=params, bc=bc, options=opts, **base)


# ---------------------------------------------------------------------------
# initial fields


def _circle(X, Y, center, radius, eps):
    return tanh_profile(radius - np.hypot(X - center[0], Y - center[1]), eps)


def _couette(grid: Grid, spec: CaseSpec) -> FaceVectorField:
    ub, ut = float(spec.option("u_bottom")), float(spec.option("u_top"))
    _, Yu = grid.u_points()
    s = (Yu - grid.y_min) / (grid.y_max - grid.y_min)
    return FaceVectorField(ub + (ut - ub) * s, np.zeros((grid.nx, grid.ny + 1)))


def _linear_in_y(grid: Grid, spec: CaseSpec) -> np.ndarray:
    _, Y = grid.cell_centers()
    cb, ct = float(spec.option("c_bottom")), float(spec.option("c_top"))
    return cb + (ct - cb) * (Y - grid.y_min) / (grid.y_max - grid.y_min)


def initial_fields(spec: CaseSpec, grid: Grid | None = None):
    """``(phi0, c0, vel0)`` of the case on its grid (``vel0`` may be ``None``)."""
    grid = grid or make_grid(spec.grid)
    eps = spec.params.epsilon
    X, Y = grid.cell_centers()
    kind = spec.kind
    if kind is CaseKind.SHARP_LIMIT_1D:
        x0 = float(spec.option("x0"))
        cl, cr = float(spec.option("c_left")), float(spec.option("c_right"))
        return tanh_profile(X - x0, eps), cl + (cr - cl) * X, None
    if kind is CaseKind.TWO_INTERFACE_1D:
        x1, x2 = float(spec.option("x1")), float(spec.option("x2"))
        cl, cr = float(spec.option("c_left")), float(spec.option("c_right"))
        return tanh_profile(np.minimum(X - x1, x2 - X), eps), cl + (cr - cl) * X, None
    if kind is CaseKind.GAUSSIAN_2D:
        center = tuple(spec.option("center"))
        phi = _circle(X, Y, center, float(spec.option("radius")), eps)
        # the kernel underflows to 0 far from the centre; ln c needs c > 0
        c = np.maximum(gaussian_seed(X, Y, float(spec.option("t0")), 1.0, center), C_FLOOR)
        return phi, c, None
    if kind in (CaseKind.CONVERGENCE_2D, CaseKind.ENERGY_STABILITY):
        cc = np.cos(2 * np.pi * X) * np.cos(2 * np.pi * Y)
        Xu, Yu = grid.u_points()
        Xv, Yv = grid.v_points()
        vel = FaceVectorField(-0.25 * np.sin(np.pi * Xu) ** 2 * np.cos(2 * np.pi * Yu),
                              0.25 * np.sin(np.pi * Yv) ** 2 * np.cos(2 * np.pi * Xv))
        return 0.2 + 0.5 * cc, 0.6 + 0.2 * cc, vel
    if kind is CaseKind.SHEAR_DROP:
        phi = _circle(X, Y, tuple(spec.option("center")), float(spec.option("radius")), eps)
        return phi, _linear_in_y(grid, spec), _couette(grid, spec)
    r = float(spec.option("radius"))
    (c1, c2) = spec.option("centers")
    phi = _circle(X, Y, c1, r, eps) + _circle(X, Y, c2, r, eps) + 1.0
    return phi, _linear_in_y(grid, spec), _couette(grid, spec)


def start_time(spec: CaseSpec) -> float:
    """Physical time of the initial data (the Gaussian seed starts at ``t0``)."""
    return float(spec.option("t0")) if spec.kind is CaseKind.GAUSSIAN_2D else 0.0


def list_cases() -> list[str]:
    return [k.value for k in CaseKind]
