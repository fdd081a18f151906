import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpsg.errors import ConfigurationError
from fpsg.grid import VelocityGrid, apply_fp_operator, assemble_fp_matrix, fp_coefficients, trapezoid


class TestVelocityGrid:
    def test_nodes_and_spacing(self):
        g = VelocityGrid(-2.0, 2.0, 81)
        assert g.dv == pytest.approx(0.05)
        assert g.nodes[0] == -2.0 and g.nodes[-1] == 2.0

    @pytest.mark.parametrize("args", [(-1, 1, 2), (1, 1, 10), (0, 1, 4.5)])
    def test_invalid(self, args):
        with pytest.raises(ConfigurationError):
            VelocityGrid(*args)

    def test_trapezoid_matches_numpy(self, rng):
        g = VelocityGrid(-1, 1, 33)
        f = rng.random((3, 33))
        np.testing.assert_allclose(trapezoid(g, f), np.trapezoid(f, g.nodes, axis=-1) if hasattr(np, "trapezoid") else np.trapz(f, g.nodes, axis=-1))

    @pytest.mark.parametrize("n_fine, expected", [(81, 2), (161, 4), (41, 1), (60, None)])
    def test_refines(self, n_fine, expected):
        assert VelocityGrid(-1, 1, n_fine).refines(VelocityGrid(-1, 1, 41)) == expected

    def test_refines_needs_same_domain(self):
        assert VelocityGrid(-2, 2, 81).refines(VelocityGrid(-1, 1, 41)) is None


class TestOperator:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=3, max_value=60), st.integers(min_value=0, max_value=2**31 - 1))
    def test_conserves_trapezoidal_mass(self, n, seed):
        rng = np.random.default_rng(seed)
        g = VelocityGrid(-1.5, 2.0, n)
        b, d, f = rng.standard_normal(n), rng.random(n), rng.random(n)
        assert abs(g.trapezoid(apply_fp_operator(g, b, d, f))) < 1e-12 * (1 + np.abs(f).max() / g.dv**2)

    def test_matrix_reproduces_operator(self, rng):
        g = VelocityGrid(-1, 1, 25)
        b, d, f = rng.standard_normal(25), rng.random(25), rng.standard_normal(25)
        np.testing.assert_allclose(assemble_fp_matrix(g, b, d) @ f, apply_fp_operator(g, b, d, f), atol=1e-12)

    def test_batched_rows(self, rng):
        g = VelocityGrid(-1, 1, 17)
        b, d, f = rng.standard_normal((4, 17)), rng.random((4, 17)), rng.random((4, 17))
        out = apply_fp_operator(g, b, d, f)
        for r in range(4):
            np.testing.assert_allclose(out[r], apply_fp_operator(g, b[r], d[r], f[r]), atol=1e-13)

    def test_second_order_consistency_in_the_interior(self):
        # oracle: analytic d/dv[b f + d/dv(d f)] for b = v, d = 1 + v^2/4, f = exp(-v^2)
        def exact(v):
            f = np.exp(-(v**2))
            fp = -2 * v * f
            fpp = (4 * v**2 - 2) * f
            d, dp, dpp = 1 + v**2 / 4, v / 2, 0.5
            bf_p = f + v * fp
            return bf_p + dpp * f + 2 * dp * fp + d * fpp

        errs = []
        for n in (41, 81, 161):
            g = VelocityGrid(-4, 4, n)
            v = g.nodes
            out = apply_fp_operator(g, v, 1 + v**2 / 4, np.exp(-(v**2)))
            errs.append(np.abs(out - exact(v))[1:-1].max())
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all((rates > 1.9) & (rates < 2.1))

    def test_discrete_equilibrium_has_zero_flux(self):
        # the recurrence that zeroes every half-node flux gives a null vector
        g = VelocityGrid(-3, 3, 61)
        v = g.nodes
        b, d = v, np.full(61, 0.7)
        f = np.empty(61)
        f[0] = 1e-3
        for j in range(60):
            a = 0.25 * (b[j] + b[j + 1])
            f[j + 1] = f[j] * (d[j] / g.dv - a) / (a + d[j + 1] / g.dv)
        assert np.abs(apply_fp_operator(g, b, d, f)).max() < 1e-12 * f.max()

    def test_negative_diffusion_rejected(self):
        g = VelocityGrid(-1, 1, 5)
        with pytest.raises(ValueError):
            apply_fp_operator(g, np.zeros(5), -np.ones(5), np.ones(5))
        with pytest.raises(ValueError):
            fp_coefficients(g, np.zeros(5), -np.ones(5))
