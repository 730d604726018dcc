import math

import numpy as np
import pytest

from permeaflow.experiments import (
    CaseKind,
    build_case,
    cauchy_error,
    convergence_rates,
    exact_sharp_limit_1d,
    exact_two_interface,
    gaussian_seed,
    list_cases,
    rate_table,
    run_case,
)
from permeaflow.experiments.cases import SHEAR_K, grid_for_epsilon, initial_fields, start_time
from permeaflow.experiments.convergence import restrict_cells, restrict_faces
from permeaflow.experiments.reports import (
    SteadyMonitor,
    bulk_mask,
    interior_stats,
    label_droplets,
    linear_profile_deviation,
)
from permeaflow.grid import BoundarySpec, ConfigurationError, FaceVectorField, GridSpec, make_grid, unit_square
from permeaflow.model import SIGMA


# -- exact solutions ---------------------------------------------------------


@pytest.mark.parametrize("x, c", [(0.0, 1.0), (1.0, 4.0), (0.5, 3.5), (0.25, 1.25)])
def test_sharp_limit_values(x, c):
    assert exact_sharp_limit_1d(x) == pytest.approx(c)


@pytest.mark.parametrize("x, c", [(0.0, 2.0), (0.5, 1.5), (1.0, 1.0)])
def test_two_interface_values(x, c):
    assert exact_two_interface(x) == pytest.approx(c)


def test_two_interface_flux_law():
    x1, x2 = 7 / 18, 11 / 18
    flux = 1.0 / 11.0
    for x0 in (x1, x2):
        jump = exact_two_interface(x0 - 1e-12) - exact_two_interface(x0)
        assert flux == pytest.approx(0.2 * abs(jump), rel=1e-9)


def test_exact_solutions_reject_outside_domain():
    with pytest.raises(ValueError):
        exact_sharp_limit_1d(1.5)
    with pytest.raises(ValueError):
        exact_two_interface(np.array([-0.1, 0.2]))


def test_gaussian_seed(frozen):
    assert gaussian_seed(0.5, 0.5) == pytest.approx(frozen["gaussian_peak_t0_1e-4"], rel=1e-12)
    assert gaussian_seed(0.7, 0.5) <= 1e-40
    g = unit_square(128)
    X, Y = g.cell_centers()
    assert float(np.sum(gaussian_seed(X, Y))) * g.cell_area == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        gaussian_seed(0.5, 0.5, t0=0.0)


# -- Cauchy errors and rates -------------------------------------------------


def test_cauchy_error_trivial_cases():
    assert cauchy_error(np.full((4, 4), 3.0), np.full((8, 8), 3.0)) == (0.0, 0.0)
    fine = np.random.default_rng(0).normal(size=(16, 16))
    assert cauchy_error(restrict_cells(fine), fine) == (0.0, 0.0)
    fv = FaceVectorField(np.random.default_rng(1).normal(size=(17, 16)), np.random.default_rng(2).normal(size=(16, 17)))
    assert cauchy_error(restrict_faces(fv), fv) == (0.0, 0.0)


def test_cauchy_error_value():
    coarse = np.zeros((4, 4))
    fine = np.ones((8, 8))
    l2, linf = cauchy_error(coarse, fine)
    assert l2 == pytest.approx(1.0) and linf == 1.0


def test_cauchy_error_one_dimensional():
    assert cauchy_error(np.zeros((4, 1)), np.ones((8, 1)), make_grid(GridSpec(4))) == pytest.approx((1.0, 1.0))


@pytest.mark.parametrize("coarse, fine", [(np.zeros((4, 4)), np.zeros((6, 6))),
                                          (np.zeros((4, 4)), np.zeros((8, 4))),
                                          (np.zeros((4, 4)), FaceVectorField(np.zeros((9, 8)), np.zeros((8, 9))))])
def test_cauchy_error_incompatible(coarse, fine):
    with pytest.raises(ConfigurationError):
        cauchy_error(coarse, fine)


def test_convergence_rates_examples():
    assert convergence_rates([(0.1, 4e-2), (0.05, 1e-2)])[1][2] == pytest.approx(2.0)
    assert convergence_rates([(1 / 16, 1.15e-4), (1 / 32, 3.23e-5)])[1][2] == pytest.approx(1.83, abs=0.01)
    hs = [2.0**-k for k in range(3, 8)]
    rates = [r for _, _, r in convergence_rates([(h, h * h) for h in hs])]
    assert rates[0] is None and rates[1:] == pytest.approx([2.0] * 4)


def test_convergence_rates_errors():
    with pytest.raises(ConfigurationError):
        convergence_rates([(0.1, 1e-2), (0.03, 1e-3)])
    with pytest.raises(ConfigurationError):
        convergence_rates([(0.1, 0.0)])


def test_rate_table_on_manufactured_fields():
    sols = []
    for n in (8, 16, 32, 64):
        g = unit_square(n)
        X, Y = g.cell_centers()
        # midpoint sampling differs from cell averages at O(h^2)
        sols.append((g, {"f": np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)}))
    table = rate_table(sols, ["f"])
    assert all(1.9 < r < 2.1 for r in table.rates("f"))
    assert "f" in table.format()


# -- case catalogue ----------------------------------------------------------


def test_list_cases():
    assert set(list_cases()) == {k.value for k in CaseKind}


def test_frozen_flags():
    for kind in CaseKind:
        assert build_case(kind).frozen_interface == kind.frozen
    with pytest.raises(ConfigurationError):
        build_case("ShearDrop", frozen_interface=True)
    with pytest.raises(ConfigurationError):
        build_case("TwoInterface1D", frozen_interface=False)


def test_case_defaults():
    two = build_case("TwoInterface1D")
    assert two.params.K == 0.2 and two.params.epsilon == 0.01
    assert two.params.D_plus == two.params.D_minus == 1.0
    assert two.grid.nx == 512 and two.grid.ny == 1
    conv = build_case("Convergence2D", h=1 / 64, dt=1e-4)
    assert (conv.grid.nx, conv.grid.ny) == (64, 64) and conv.dt == 1e-4
    shear = build_case("ShearDrop", K=SHEAR_K["high"])
    assert shear.params.K == pytest.approx(1 / (2 * SIGMA * 0.02))
    assert shear.params.Re == 100 and shear.params.mobility == 0.02
    assert build_case("SharpLimit1D").params.K == 0.5
    assert build_case("TwoDroplets").grid.nx == 2 * build_case("TwoDroplets").grid.ny


def test_shear_k_ordering():
    assert SHEAR_K["low"] < SHEAR_K["medium"] < SHEAR_K["high"]
    assert SHEAR_K["medium"] == pytest.approx(1 / (2 * SIGMA))


def test_grid_for_epsilon():
    assert grid_for_epsilon(0.04) == 256
    assert grid_for_epsilon(0.01) == 2048


def test_shear_initial_concentration():
    spec = build_case("ShearDrop", n=16)
    g = make_grid(spec.grid)
    phi, c, vel = initial_fields(spec, g)
    _, Y = g.cell_centers()
    np.testing.assert_allclose(c, 0.6 * Y + 0.2, rtol=1e-14)
    assert phi[8, 8] > 0.9 and phi[0, 0] < -0.9
    _, Yu = g.u_points()
    np.testing.assert_allclose(vel.u, 2 * Yu - 1, atol=1e-14)


def test_gaussian_start_time():
    spec = build_case("Gaussian2D", n=32)
    assert start_time(spec) == pytest.approx(spec.option("t0"))
    _, c, _ = initial_fields(spec, make_grid(spec.grid))
    assert np.all(c > 0)


def test_with_and_steps():
    spec = build_case("Convergence2D", n=16, t_end=1e-3, dt=1e-4)
    assert spec.n_steps == 10
    assert spec.with_(dt=5e-4).n_steps == 2


# -- reports -----------------------------------------------------------------


def test_bulk_mask():
    x = np.array([0.1, 0.45, 0.5, 0.8])
    np.testing.assert_array_equal(bulk_mask(x, [0.5], 0.02), [True, False, False, True])


def test_steady_monitor():
    m = SteadyMonitor(1e-8)
    assert not m.steady
    m.update(np.ones(4), np.ones(4), 0.1)
    assert m.steady
    m.update(np.ones(4), 1.1 * np.ones(4), 0.1)
    assert not m.steady


def test_interior_stats():
    phi = np.array([[1.0, 1.0, -1.0]])
    c = np.array([[2.0, 4.0, 9.0]])
    assert interior_stats(phi, c) == pytest.approx((3.0, 1.0, 2.0))
    assert all(math.isnan(v) for v in interior_stats(-phi - 2, c))


def test_label_droplets_glues_periodic_sides():
    g = unit_square(8)
    phi = -np.ones(g.shape)
    phi[0, 3:5] = 1
    phi[-1, 3:5] = 1
    phi[4, 4] = 1
    _, n_per = label_droplets(g, phi, BoundarySpec.periodic())
    _, n_closed = label_droplets(g, phi, BoundarySpec.closed())
    assert n_per == 2 and n_closed == 3
    assert label_droplets(g, -np.ones(g.shape), BoundarySpec.closed())[1] == 0


def test_linear_profile_deviation():
    g = unit_square(8)
    _, Y = g.cell_centers()
    assert linear_profile_deviation(g, 0.6 * Y + 0.2, 0.2, 0.8) == pytest.approx(0.0, abs=1e-15)
    assert linear_profile_deviation(g, np.full(g.shape, 0.5), 0.2, 0.8) > 0.1


# -- short runs ----------------------------------------------------------------


def test_two_interface_run_meets_exact_solution(tmp_path):
    res = run_case(build_case("TwoInterface1D"), out_dir=tmp_path)
    rep = res.report
    assert rep["bulk_linf_error"] <= 0.02
    assert res.checks["flux_law"] and res.checks["bulk_flux_constant"]
    assert (tmp_path / "energy.csv").exists() and (tmp_path / "report.json").exists()


def test_sharp_limit_run_single_epsilon():
    res = run_case(build_case("SharpLimit1D", epsilon=0.04))
    assert res.report["bulk_linf_error"] < 1e-3


def test_convergence_case_short_run_conserves():
    res = run_case(build_case("Convergence2D", n=16, t_end=2e-3, dt=1e-4))
    assert res.report["volume_drift"] <= 1e-8 and res.report["mass_drift"] <= 1e-8
    assert res.report["max_div"] <= 1e-8
    assert res.passed
