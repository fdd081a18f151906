import numpy as np
import pytest

from fpsg.basis import build_basis, mean_and_variance
from fpsg.errors import DegenerateStateError, SingularDiffusionError
from fpsg.grid import VelocityGrid, apply_fp_operator
from fpsg.models import BoundedConfidence, ClassicalFP, Opinion, Swarming, ZFunction, analytic_steady_state
from fpsg.quasi_equilibrium import compute_fq, project_fq, quasi_equilibrium_field

MODELS = {
    "classical": (ClassicalFP(), (-6.0, 6.0)),
    "opinion": (Opinion(), (-1.0, 1.0)),
    "opinion_beta": (Opinion(diffusion_kind="beta", u=0.2), (-1.0, 1.0)),
    "bc_sharp": (BoundedConfidence(), (-1.0, 1.0)),
    "bc_sigmoid": (BoundedConfidence(kernel="sigmoid", beta=10.0), (-1.0, 1.0)),
    "swarming": (Swarming(), (-2.0, 2.0)),
}


def _state(model, grid, z):
    return model.initial(z, grid)


class TestMass:
    @pytest.mark.parametrize("name", sorted(MODELS))
    def test_matches_mass_of_density(self, name):
        model, dom = MODELS[name]
        grid = VelocityGrid(*dom, 81)
        z = np.array([-0.9, 0.0, 0.6])
        f = 0.7 * _state(model, grid, z)
        fq = compute_fq(model, z, grid, f)
        np.testing.assert_allclose(grid.trapezoid(fq), grid.trapezoid(f), rtol=1e-12)
        assert np.all(fq >= 0)

    def test_zero_mass_rejected(self):
        grid = VelocityGrid(-1, 1, 21)
        with pytest.raises(DegenerateStateError):
            compute_fq(Opinion(), 0.0, grid, np.zeros(21))

    def test_interior_zero_diffusion_rejected(self):
        class Vanishing(BoundedConfidence):
            def diffusion(self, z, grid):
                d = super().diffusion(z, grid)
                d[:, grid.n // 3] = 0.0
                return d

        grid = VelocityGrid(-1, 1, 41)
        m = Vanishing()
        with pytest.raises(SingularDiffusionError):
            compute_fq(m, 0.0, grid, m.initial(0.0, grid)[0])


class TestFluxAnnihilation:
    @pytest.mark.parametrize("name", sorted(MODELS))
    def test_discrete_flux_is_second_order_small(self, name):
        model, dom = MODELS[name]
        res = []
        for n in (81, 161, 321):
            grid = VelocityGrid(*dom, n)
            z = np.array([-0.5, 0.5])
            f = _state(model, grid, z)
            fq = compute_fq(model, z, grid, f)
            b = model.drift(z, grid, f)
            d = model.diffusion(z, grid)
            r = np.abs(apply_fp_operator(grid, b, d, fq)) / fq.max()
            # the sharp window gives the drift kinks where it meets the domain
            # ends; the pointwise residual is O(1) there, so use the L1 norm
            res.append(grid.trapezoid(r).max() if model.discontinuous else r.max())
        rates = np.log2(np.array(res[:-1]) / np.array(res[1:]))
        assert rates.min() > (1.4 if model.discontinuous else 1.8), (res, rates)

    def test_closed_form_matches_analytic_steady_state(self):
        grid = VelocityGrid(-1, 1, 41)
        model = Opinion()
        fq = compute_fq(model, 0.3, grid, analytic_steady_state(model, 0.3, grid))
        np.testing.assert_allclose(fq, analytic_steady_state(model, 0.3, grid), rtol=1e-12, atol=1e-300)


class TestQuadratureVariants:
    def test_spline_and_trapezoid_agree_to_grid_accuracy(self):
        model = BoundedConfidence(kernel="sigmoid", beta=10.0)
        diffs = []
        for n in (81, 161):
            grid = VelocityGrid(-1, 1, n)
            f = model.initial(0.0, grid)
            a = compute_fq(model, 0.0, grid, f, quadrature="spline")
            b = compute_fq(model, 0.0, grid, f, quadrature="trapezoid")
            diffs.append(np.abs(a - b).max())
        assert diffs[1] < diffs[0] / 3.5

    def test_unknown_quadrature(self):
        grid = VelocityGrid(-1, 1, 21)
        with pytest.raises(ValueError):
            compute_fq(BoundedConfidence(), 0.0, grid, BoundedConfidence().initial(0.0, grid)[0], quadrature="simpson")


class TestProjection:
    def test_z_independent_profile_only_populates_mode_zero(self):
        basis = build_basis(4)
        grid = VelocityGrid(-1, 1, 41)
        model = Opinion(gamma=ZFunction.of(0.8))
        field = quasi_equilibrium_field(model, basis, grid, model.initial(basis.nodes, grid))
        c = field.project(basis)
        assert np.abs(c[1:]).max() < 1e-13
        np.testing.assert_allclose(c[0], field.values[0], rtol=1e-13)

    def test_uncertain_swarming_equilibrium_has_variance(self):
        basis = build_basis(5)
        grid = VelocityGrid(-2, 2, 81)
        model = Swarming()
        field = quasi_equilibrium_field(model, basis, grid, model.initial(basis.nodes, grid))
        _, var = mean_and_variance(field.project(basis))
        assert var.max() > 1e-4

    def test_shape_check(self):
        with pytest.raises(ValueError):
            project_fq(np.ones(5), build_basis(2))
