"""Acceptance criteria 1-9.

Each test prints one ``CRITERION n PASS|FAIL`` line (visible without ``-s``)
and asserts the same condition.  The expensive runs are module fixtures so
the projection check (7) reuses every run made by the others.

    pytest tests/test_acceptance.py -v
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from oracles.picard import oracle_step
from permeaflow.energy import verify_identities
from permeaflow.experiments import (
    SHEAR_K,
    build_case,
    energy_dts,
    run_case,
    run_convergence,
    run_energy_battery,
    run_limits,
)
from permeaflow.experiments.cases import initial_fields
from permeaflow.grid import make_grid
from permeaflow.scheme import SolverConfig, advance, initial_state

pytestmark = pytest.mark.slow

LIN_TOL = 1e-10

# published L2 errors (grid pairs 16/32, 32/64, 64/128)
TABLE_1 = {
    "phi": (4.01e-2, 8.90e-3, 2.22e-3),
    "c": (1.01e-2, 4.91e-3, 6.80e-4),
    "u": (1.15e-4, 3.23e-5, 8.06e-6),
    "v": (1.15e-4, 3.23e-5, 8.06e-6),
    "p": (1.57e-3, 1.24e-4, 3.00e-5),
}


def _report(capsys, n: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\nCRITERION {n} {'PASS' if ok else 'FAIL'}: {detail}")


# -- shared runs -------------------------------------------------------------


@pytest.fixture(scope="module")
def cfg():
    return SolverConfig(lin_tol=LIN_TOL)


@pytest.fixture(scope="module")
def convergence(cfg):
    return run_convergence((16, 32, 64, 128), cfg)


@pytest.fixture(scope="module")
def energy_battery(cfg):
    return run_energy_battery(energy_dts(range(9)), cfg=cfg)


@pytest.fixture(scope="module")
def shear_runs(cfg):
    return {name: run_case(build_case("ShearDrop", K=SHEAR_K[name]), cfg) for name in ("low", "medium", "high")}


@pytest.fixture(scope="module")
def droplets(cfg):
    return run_case(build_case("TwoDroplets"), cfg)


# -- criteria ----------------------------------------------------------------


def test_criterion_1_two_interface_steady_state(capsys, cfg):
    res = run_case(build_case("TwoInterface1D", K=0.2, D_plus=1.0, D_minus=1.0, epsilon=0.01, n=512), cfg)
    rep = res.report
    ratios = [m["ratio"] for m in rep["flux_law"]]
    ok = rep["bulk_linf_error"] <= 0.02 and all(abs(r - 1.0) <= 0.05 for r in ratios)
    _report(capsys, 1, ok, f"bulk Linf error {rep['bulk_linf_error']:.3e} (<= 0.02), "
                           f"|flux|/(K|[[c]]|) = {', '.join(f'{r:.4f}' for r in ratios)} (within 5%)")
    assert ok


def test_criterion_2_sharp_interface_limit(capsys, cfg):
    errs = [r.report["bulk_linf_error"] for r in run_limits((0.04, 0.02, 0.01), cfg=cfg)]
    ok = errs[0] > errs[1] > errs[2] and errs[2] <= 0.5 * errs[0]
    _report(capsys, 2, ok, "bulk Linf errors " + ", ".join(f"{e:.3e}" for e in errs)
            + f" for eps = 0.04, 0.02, 0.01; last/first = {errs[2] / errs[0]:.3f} (<= 0.5)")
    assert ok


def test_criterion_3_convergence_rates(capsys, convergence):
    table, _ = convergence
    rates = {v: table.rates(v) for v in TABLE_1}
    rates_ok = all(1.7 <= r <= 2.3 for rs in rates.values() for r in rs)
    factors = {}
    for var, ref in TABLE_1.items():
        ours = [row.l2 for row in table.rows[var]]
        factors[var] = max(max(a / b, b / a) for a, b in zip(ours, ref))
    # magnitudes depend on unstated discretization details: reported, not asserted
    off = [v for v, f in factors.items() if f > 10.0]
    detail = "; ".join(f"{v} rates {', '.join(f'{r:.2f}' for r in rs)} (x{factors[v]:.1f} of Table 1)"
                       for v, rs in rates.items())
    _report(capsys, 3, rates_ok, f"{detail}; rates in [1.7, 2.3]: {rates_ok}; "
                                 f"magnitudes beyond 10x of Table 1: {', '.join(off) or 'none'}")
    assert rates_ok


def test_phi_error_near_published_row(convergence):
    table, _ = convergence
    assert 1 / 3 <= table.rows["phi"][-1].l2 / 2.22e-3 <= 3


def test_criterion_4_energy_stability(capsys, energy_battery):
    incs = [r.report["max_energy_increase"] for r in energy_battery]
    ok = all(i <= 1e-10 for i in incs)
    worst = int(np.argmax(incs))
    _report(capsys, 4, ok, f"h = 1/128, dt = 0.1*2^-k, k = 0..8: largest per-step change of E_mod "
                           f"{max(incs):.3e} at k = {worst} (<= 1e-10)")
    assert ok


def test_criterion_5_conservation(capsys, energy_battery):
    rep = energy_battery[-1].report
    ok = rep["volume_drift"] <= 1e-8 and rep["mass_drift"] <= 1e-8
    _report(capsys, 5, ok, f"dt = {rep['dt']:.6g}, {rep['steps']} steps: relative volume drift "
                           f"{rep['volume_drift']:.2e}, mass drift {rep['mass_drift']:.2e} (<= 1e-8)")
    assert ok


def test_criterion_6_appendix_identities(capsys):
    res = verify_identities([1 / 32, 1 / 64, 1 / 128])
    orders = {k: v[1] for k, v in res.items()}
    ok = all(o >= 1.9 for os_ in orders.values() for o in os_)
    _report(capsys, 6, ok, "; ".join(f"{k} orders {', '.join(f'{o:.3f}' for o in v)}" for k, v in orders.items())
            + " (>= 1.9)")
    assert ok


def test_criterion_7_projection(capsys, convergence, energy_battery, shear_runs, droplets):
    runs = list(convergence[1]) + list(energy_battery) + list(shear_runs.values()) + [droplets]
    worst = max(r.report["max_div"] for r in runs)
    ok = worst <= 1e-8
    _report(capsys, 7, ok, f"max ||div u^(n+1)||_inf = {worst:.2e} over {len(runs)} runs "
                           f"(Convergence2D, EnergyStability, ShearDrop, TwoDroplets), lin_tol = {LIN_TOL:g}")
    assert ok


def test_criterion_8_permeability(capsys, shear_runs, droplets):
    flux = [shear_runs[k].report["interface_flux_mean"] for k in ("low", "medium", "high")]
    dev = shear_runs["high"].report["linear_profile_deviation"]
    d = droplets.report
    monotone = flux[0] < flux[1] < flux[2]
    merge_ok = d["merge_time"] is not None and 1.0 <= d["merge_time"] <= 1.5
    plateau_ok = droplets.checks["single_plateau"] and droplets.checks["single_droplet"]
    ok = monotone and dev <= 0.10 and merge_ok and plateau_ok
    _report(capsys, 8, ok,
            "interface flux " + " < ".join(f"{f:.3e}" for f in flux) + f" (increasing: {monotone}); "
            f"high-K deviation from linear profile {dev:.3f} (<= 0.10); "
            f"merge at t = {d['merge_time']} (in [1.0, 1.5]); "
            f"post-merge interior std {d['interior_std']:.2e} vs pre-merge gap {d['pre_merge_gap']:.2e} "
            f"(single plateau: {plateau_ok})")
    assert ok


def test_low_permeability_restricts_flux(shear_runs):
    assert shear_runs["low"].report["interface_flux_mean"] < 0.1 * shear_runs["high"].report["interface_flux_mean"]


def test_criterion_9_oracle_equivalence(capsys, cfg):
    spec = build_case("Convergence2D", n=32)
    grid = make_grid(spec.grid)
    s0 = initial_state(grid, *initial_fields(spec, grid), spec.params, spec.bc)
    s1 = advance(grid, s0, spec.params, cfg.with_(dt=1e-4), spec.bc)
    phi, mu, vel, p, c = oracle_step(grid, s0, spec.params, 1e-4, spec.bc)
    diffs = {
        "phi": np.max(np.abs(s1.phi - phi)),
        "mu": np.max(np.abs(s1.mu - mu)),
        "u": np.max(np.abs(s1.vel.u - vel.u)),
        "v": np.max(np.abs(s1.vel.v - vel.v)),
        "p": np.max(np.abs(s1.p - p)),
        "c": np.max(np.abs(s1.c - c)),
    }
    ok = all(d <= 1e-8 for d in diffs.values()) and all(math.isfinite(d) for d in diffs.values())
    _report(capsys, 9, ok, "32^2, dt = 1e-4, max |scheme - oracle|: "
            + ", ".join(f"{k} {v:.1e}" for k, v in diffs.items()) + " (<= 1e-8)")
    assert ok
