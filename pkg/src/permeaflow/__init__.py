"""Phase-field model and energy-stable solver for mass transfer across permeable moving interfaces."""

from .grid import (
    BoundarySpec,
    ConfigurationError,
    Dirichlet,
    FaceVectorField,
    Grid,
    GridSpec,
    MovingWall,
    Neumann,
    NoSlip,
    Periodic,
    ScalarBC,
    VelocityBC,
    make_grid,
)
from .kernels import BACKEND
from .linalg import ConsistencyError, NonConvergenceError
from .model import A_CONST, SIGMA, FluxLaw, PhysicalParams
from .scheme import SolverConfig, State, Step3Mode, StepStats, advance, initial_state

__version__ = "0.1.0"

__all__ = [
    "A_CONST",
    "BACKEND",
    "SIGMA",
    "BoundarySpec",
    "ConfigurationError",
    "ConsistencyError",
    "Dirichlet",
    "FaceVectorField",
    "FluxLaw",
    "Grid",
    "GridSpec",
    "MovingWall",
    "Neumann",
    "NoSlip",
    "NonConvergenceError",
    "Periodic",
    "PhysicalParams",
    "ScalarBC",
    "SolverConfig",
    "State",
    "Step3Mode",
    "StepStats",
    "VelocityBC",
    "__version__",
    "advance",
    "initial_state",
    "make_grid",
]
