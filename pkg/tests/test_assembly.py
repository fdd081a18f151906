import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpsg.assembly import SGDiscretization, mass
from fpsg.basis import build_basis
from fpsg.errors import ConfigurationError
from fpsg.grid import VelocityGrid
from fpsg.integrators import simulate
from fpsg.models import BoundedConfidence, ClassicalFP, Opinion, Swarming, ZFunction

CASES = {
    "classical": (ClassicalFP(K=ZFunction.of([1.0, 0.5]), sigma=ZFunction.of([1.0, 0.5])), (-6.0, 6.0)),
    "opinion": (Opinion(), (-1.0, 1.0)),
    "bc_sharp": (BoundedConfidence(), (-1.0, 1.0)),
    "bc_sigmoid": (BoundedConfidence(kernel="sigmoid", beta=10.0), (-1.0, 1.0)),
    "swarming": (Swarming(), (-2.0, 2.0)),
}


def make(name, M=4, n=41):
    model, dom = CASES[name]
    return SGDiscretization(model, build_basis(M), VelocityGrid(*dom, n))


@pytest.fixture(params=sorted(CASES))
def disc(request):
    return make(request.param)


class TestOperator:
    def test_matrix_path_matches_pseudo_spectral(self, disc):
        c = disc.initial_coeffs()
        np.testing.assert_allclose(disc.rhs_matrix(c), disc.rhs_cdsg(c), atol=1e-12 * np.abs(disc.rhs_cdsg(c)).max())

    def test_coupling_matrices_symmetric(self, disc):
        assert disc.sg_matrices(disc.initial_coeffs()).asymmetry() < 1e-14

    @pytest.mark.parametrize("scheme", ["cdsg", "mmsg"])
    def test_every_mode_conserves_mass(self, disc, scheme):
        r = disc.rhs(disc.initial_coeffs(), scheme)
        scale = np.abs(r).max()
        np.testing.assert_allclose(disc.grid.trapezoid(r), 0.0, atol=1e-13 * scale)

    def test_unknown_scheme(self, disc):
        with pytest.raises(ConfigurationError):
            disc.rhs(disc.initial_coeffs(), "upwind")

    def test_nodal_round_trip(self, disc, rng):
        c = rng.standard_normal(disc.shape)
        np.testing.assert_allclose(disc.coeffs(disc.nodal(c)), c, atol=1e-13)

    def test_shape_validation(self, disc):
        with pytest.raises(ValueError):
            disc.nodal(np.zeros((2, 3)))


class TestLinearity:
    @settings(max_examples=25, deadline=None)
    @given(a=st.floats(0.1, 3), b=st.floats(0.1, 3), seed=st.integers(0, 2**16))
    def test_linear_models_give_linear_operators(self, a, b, seed):
        # the micro-macro source needs positive mass, so combine positive densities
        disc = make("opinion")
        rng = np.random.default_rng(seed)
        x, y = (disc.coeffs(rng.random((disc.basis.n_nodes, disc.grid.n))) for _ in range(2))
        for scheme in ("cdsg", "mmsg"):
            lhs = disc.rhs(a * x + b * y, scheme)
            rhs = a * disc.rhs(x, scheme) + b * disc.rhs(y, scheme)
            assert np.abs(lhs - rhs).max() < 1e-10 * (1 + np.abs(rhs).max())

    def test_frozen_blocks_reproduce_operator(self, disc):
        c = disc.initial_coeffs()
        b = disc.drift_nodal(disc.nodal(c))
        lower, diag, upper = disc.galerkin_blocks(b)
        out = np.einsum("jhk,kj->hj", diag, c)
        out[:, 1:] += np.einsum("jhk,kj->hj", lower[1:], c[:, :-1])
        out[:, :-1] += np.einsum("jhk,kj->hj", upper[:-1], c[:, 1:])
        np.testing.assert_allclose(out, disc.apply_frozen(b, c), atol=1e-11 * np.abs(out).max())


class TestWellBalanced:
    @pytest.mark.parametrize("name", sorted(CASES))
    def test_mmsg_vanishes_at_projected_equilibrium(self, name):
        disc = make(name)
        eq = disc.equilibrium_coeffs(tol=1e-12)
        scale = np.abs(disc.rhs_cdsg(disc.initial_coeffs())).max()
        assert np.abs(disc.rhs_mmsg(eq)).max() < 1e-11 * scale
        assert mass(disc.grid, eq) == pytest.approx(mass(disc.grid, disc.initial_coeffs()), rel=1e-12)


class TestStatistics:
    def test_mean_matches_collocation(self):
        # independent oracle: deterministic solves at Gauss nodes, averaged
        grid = VelocityGrid(-1, 1, 41)
        sg = SGDiscretization(Opinion(), build_basis(8), grid)
        mean_sg = simulate(sg, 1.0, 0.05, "cdsg").final[0]
        z, w = np.polynomial.legendre.leggauss(12)
        mean_col = np.zeros(grid.n)
        for zq, wq in zip(z, w):
            model = Opinion(gamma=ZFunction.of(0.75 + 0.25 * zq))
            det = SGDiscretization(model, build_basis(0, 1), grid)
            mean_col += 0.5 * wq * simulate(det, 1.0, 0.05, "cdsg").final[0]
        np.testing.assert_allclose(mean_sg, mean_col, atol=1e-9)
