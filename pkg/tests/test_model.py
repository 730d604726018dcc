import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permeaflow.model import (
    A_CONST,
    SIGMA,
    FluxLaw,
    PhysicalParams,
    double_well,
    double_well_prime,
    effective_diffusivity,
    q_of_c,
    q_of_c_floored,
    tanh_profile,
)


def test_profile_constants_match_quadrature(frozen):
    assert SIGMA == pytest.approx(frozen["sigma"], rel=1e-10)
    assert A_CONST == pytest.approx(frozen["A"], rel=1e-10)


def test_d_eff_centre_of_membrane(frozen):
    p = PhysicalParams(epsilon=0.08, K=1.0 / A_CONST)
    assert effective_diffusivity(0.0, 1.0, p) == pytest.approx(frozen["d_eff_phi0_eps008_K1overA"], rel=1e-12)
    assert effective_diffusivity(0.0, 1.0, p) == pytest.approx(2.0 / 27.0, rel=1e-12)


def test_d_eff_pure_phases():
    p = PhysicalParams(D_plus=3.0, D_minus=0.5)
    assert effective_diffusivity(1.0, 1.0, p) == pytest.approx(3.0)
    assert effective_diffusivity(-1.0, 1.0, p) == pytest.approx(0.5)
    # clamped outside [-1, 1]
    assert effective_diffusivity(1.2, 1.0, p) == pytest.approx(3.0)


def test_impermeable_membrane():
    p = PhysicalParams(K=0.0)
    d = effective_diffusivity(np.array([-1.0, -0.5, 0.0, 0.7, 1.0]), 1.0, p)
    np.testing.assert_array_equal(d[1:4], 0.0)
    assert d[0] == 1.0 and d[-1] == 1.0


@settings(max_examples=60, deadline=None)
@given(phi=st.floats(-1.0, 1.0), K=st.floats(1e-3, 1e3), eps=st.floats(1e-3, 0.2),
       dp=st.floats(0.1, 10.0), dm=st.floats(0.1, 10.0))
def test_d_eff_bounded_by_phase_mixture(phi, K, eps, dp, dm):
    p = PhysicalParams(epsilon=eps, K=K, D_plus=dp, D_minus=dm)
    d = effective_diffusivity(phi, 1.0, p)
    harmonic = 1.0 / ((1 - phi) / (2 * dm) + (1 + phi) / (2 * dp))
    assert 0.0 <= d <= harmonic * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(phi=st.floats(-0.99, 0.99), K=st.floats(1e-3, 1e3))
def test_d_eff_increasing_in_permeability(phi, K):
    p = PhysicalParams(epsilon=0.02, K=K)
    assert effective_diffusivity(phi, 1.0, p.with_(K=2 * K)) > effective_diffusivity(phi, 1.0, p)


def test_flux_laws():
    assert q_of_c(3.0, FluxLaw.LINEAR) == 1.0
    assert q_of_c(4.0, FluxLaw.LOGARITHMIC) == 0.25
    np.testing.assert_allclose(q_of_c(np.array([2.0, 0.5]), FluxLaw.LOGARITHMIC), [0.5, 2.0])
    with pytest.raises(ValueError):
        q_of_c(np.array([1.0, 0.0]), FluxLaw.LOGARITHMIC)
    assert np.all(np.isfinite(q_of_c_floored(np.array([0.0, -1.0]), FluxLaw.LOGARITHMIC)))


@pytest.mark.parametrize("bad", [{"Re": 0.0}, {"Ca": -1.0}, {"epsilon": math.inf}, {"K": -1.0},
                                 {"mobility": math.nan}, {"q_law": "quadratic"}])
def test_parameter_validation(bad):
    with pytest.raises(ValueError):
        PhysicalParams(**bad)


def test_params_roundtrip():
    p = PhysicalParams(q_law="logarithmic")
    assert p.q_law is FluxLaw.LOGARITHMIC
    assert PhysicalParams(**{**p.as_dict(), "q_law": FluxLaw(p.as_dict()["q_law"])}) == p


def test_double_well():
    assert double_well(1.0) == 0.0 and double_well(0.0) == 0.25
    assert double_well_prime(1.0) == 0.0 and double_well_prime(-1.0) == 0.0
    x, h = np.linspace(-2, 2, 9), 1e-6
    fd = (double_well(x + h) - double_well(x - h)) / (2 * h)
    np.testing.assert_allclose(double_well_prime(x), fd, atol=1e-8)


def test_tanh_profile():
    assert tanh_profile(0.0, 0.1) == 0.0
    assert tanh_profile(1.0, 0.01) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        tanh_profile(0.0, 0.0)
