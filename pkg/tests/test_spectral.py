import numpy as np
import pytest
import scipy.sparse as sp

from permeaflow.grid import Dirichlet, GridSpec, Neumann, Periodic, ScalarBC, make_grid
from permeaflow.linalg import ConsistencyError, Factorized, MeanZeroPoisson
from permeaflow.sparse_ops import DiagSandwich, ScalarOps
from permeaflow.spectral import LaplacianBasis, SpectralCahnHilliard, SpectralPoisson, basis_for

BCS = {
    "periodic": ScalarBC.periodic(),
    "neumann": ScalarBC.neumann(),
    "channel": ScalarBC(Periodic(), Periodic(), Neumann(), Neumann()),
}


def _grid():
    # unequal sizes and an odd count catch axis mix-ups
    return make_grid(GridSpec(12, 9))


@pytest.mark.parametrize("name", list(BCS))
def test_basis_diagonalizes_assembled_laplacian(name):
    g = _grid()
    bc = BCS[name]
    L = ScalarOps(g, bc).lap[0]
    basis = LaplacianBasis(g, bc)
    f = np.random.default_rng(0).normal(size=g.shape)
    lhs = basis.forward((L @ f.ravel()).reshape(g.shape))
    np.testing.assert_allclose(lhs, basis.eigenvalues * basis.forward(f), atol=1e-9 * np.max(np.abs(lhs)))


@pytest.mark.parametrize("name", list(BCS))
def test_transform_round_trip(name):
    g = _grid()
    basis = LaplacianBasis(g, BCS[name])
    f = np.random.default_rng(0).normal(size=g.shape)
    np.testing.assert_allclose(basis.inverse(basis.forward(f)), f, atol=1e-13)


def test_no_basis_for_dirichlet_or_mixed_bcs():
    g = _grid()
    wall = ScalarBC(Periodic(), Periodic(), Dirichlet(0.0), Dirichlet(1.0))
    assert basis_for(g, wall) is None
    assert basis_for(g, BCS["periodic"], BCS["neumann"]) is None
    assert basis_for(g, BCS["channel"], BCS["channel"]) is not None
    with pytest.raises(ValueError):
        LaplacianBasis(g, wall)


@pytest.mark.parametrize("name", list(BCS))
def test_cahn_hilliard_matches_sparse_lu(name):
    g = _grid()
    bc = BCS[name]
    dt, M, eps, s = 1e-2, 0.7, 0.05, 2.0
    n = g.nx * g.ny
    L = ScalarOps(g, bc).lap[0]
    eye = sp.identity(n, format="csr")
    A = sp.bmat([[eye / dt, -M * L], [eps * L - (s / eps) * eye, eye]], format="csc")
    rhs = np.random.default_rng(1).normal(size=2 * n)
    ref = Factorized(A).solve(rhs)
    got = SpectralCahnHilliard(LaplacianBasis(g, bc), dt, M, eps, s).solve(rhs)
    np.testing.assert_allclose(got, ref, atol=1e-10 * np.max(np.abs(ref)))


@pytest.mark.parametrize("name", list(BCS))
def test_poisson_matches_bordered_lu(name):
    g = _grid()
    bc = BCS[name]
    b = np.random.default_rng(2).normal(size=g.nx * g.ny)
    b -= b.mean()
    ref = MeanZeroPoisson(ScalarOps(g, bc).lap[0]).solve(b)
    got = SpectralPoisson(LaplacianBasis(g, bc)).solve(b)
    np.testing.assert_allclose(got, ref, atol=1e-11 * np.max(np.abs(ref)))
    assert abs(got.mean()) < 1e-13


def test_spectral_poisson_rejects_net_source():
    g = _grid()
    solver = SpectralPoisson(LaplacianBasis(g, BCS["neumann"]))
    with pytest.raises(ConsistencyError):
        solver.solve(np.ones(g.nx * g.ny))
    np.testing.assert_array_equal(solver.solve(np.zeros(g.nx * g.ny)), 0.0)


def _rand_sparse(rng, m, n, density=0.3):
    return sp.random(m, n, density=density, format="csr", random_state=rng)


def test_diag_sandwich_matches_explicit_products():
    rng = np.random.default_rng(3)
    L1, R1 = _rand_sparse(rng, 7, 5), _rand_sparse(rng, 5, 6)
    L2, R2 = _rand_sparse(rng, 7, 4), _rand_sparse(rng, 4, 6)
    K = _rand_sparse(rng, 7, 6)
    pat = DiagSandwich([(L1, R1), (L2, R2)], const=K)
    for _ in range(2):
        w1, w2 = rng.normal(size=5), rng.normal(size=4)
        sc = rng.uniform(0.5, 2.0, size=6)
        got = pat.assemble([w1, w2], [None, sc]).toarray()
        want = (K + L1 @ sp.diags(w1) @ R1 + L2 @ sp.diags(w2) @ R2 @ sp.diags(sc)).toarray()
        np.testing.assert_allclose(got, want, atol=1e-13)


def test_diag_sandwich_without_constant_is_csr():
    rng = np.random.default_rng(4)
    L, R = _rand_sparse(rng, 6, 6), _rand_sparse(rng, 6, 6)
    A = DiagSandwich([(L, R)]).assemble([np.ones(6)])
    assert sp.isspmatrix_csr(A) and A.has_canonical_format
    np.testing.assert_allclose(A.toarray(), (L @ R).toarray(), atol=1e-14)
