"""Verification and permeability-study cases, exact solutions and convergence harness."""

from .cases import DELTA, SHEAR_K, CaseKind, CaseSpec, build_case, grid_for_epsilon, initial_fields, list_cases
from .convergence import RateRow, RateTable, cauchy_error, convergence_rates, rate_table
from .exact import exact_sharp_limit_1d, exact_two_interface, gaussian_seed
from .runner import RunResult, energy_dts, run_case, run_convergence, run_energy_battery, run_limits

__all__ = [
    "DELTA",
    "SHEAR_K",
    "CaseKind",
    "CaseSpec",
    "RateRow",
    "RateTable",
    "RunResult",
    "build_case",
    "cauchy_error",
    "convergence_rates",
    "energy_dts",
    "exact_sharp_limit_1d",
    "exact_two_interface",
    "gaussian_seed",
    "grid_for_epsilon",
    "initial_fields",
    "list_cases",
    "rate_table",
    "run_case",
    "run_convergence",
    "run_energy_battery",
    "run_limits",
]
