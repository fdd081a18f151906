import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fpsg import _core_py, kernels

core = pytest.importorskip("fpsg._core")
BACKENDS = [pytest.param(core, id="cython"), pytest.param(_core_py, id="python")]


def _random_blocks(rng, n, m):
    eye = np.eye(m)
    lower = 0.2 * rng.standard_normal((n, m, m))
    upper = 0.2 * rng.standard_normal((n, m, m))
    diag = 3 * eye + 0.2 * rng.standard_normal((n, m, m))
    return lower, diag, upper


def _dense(lower, diag, upper):
    n, m, _ = diag.shape
    a = np.zeros((n * m, n * m))
    for j in range(n):
        a[j * m : (j + 1) * m, j * m : (j + 1) * m] = diag[j]
        if j > 0:
            a[j * m : (j + 1) * m, (j - 1) * m : j * m] = lower[j]
        if j < n - 1:
            a[j * m : (j + 1) * m, (j + 1) * m : (j + 2) * m] = upper[j]
    return a


class TestParity:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(3, 50), st.integers(1, 5), st.integers(0, 2**31 - 1))
    def test_fp_apply_and_tridiag(self, n, rows, seed):
        rng = np.random.default_rng(seed)
        b, d, f = rng.standard_normal((rows, n)), rng.random((rows, n)), rng.standard_normal((rows, n))
        np.testing.assert_allclose(core.fp_apply(b, d, f, 0.1), _core_py.fp_apply(b, d, f, 0.1), rtol=1e-13, atol=1e-12)
        for x, y in zip(core.fp_tridiag(b, d, 0.1), _core_py.fp_tridiag(b, d, 0.1)):
            np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 30), st.integers(1, 7), st.integers(0, 2**31 - 1))
    def test_block_solvers_match_dense_solve(self, n, m, seed):
        rng = np.random.default_rng(seed)
        lower, diag, upper = _random_blocks(rng, n, m)
        rhs = rng.standard_normal((n, m))
        expected = np.linalg.solve(_dense(lower, diag, upper), rhs.ravel()).reshape(n, m)
        for impl in (core, _core_py):
            out = impl.block_tridiag_solve(impl.block_tridiag_factor(lower, diag, upper), rhs)
            np.testing.assert_allclose(out, expected, rtol=1e-10, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(3, 60), st.lists(st.floats(0.0, 2.2), min_size=1, max_size=4), st.integers(0, 2**31 - 1))
    def test_sharp_drift(self, n, deltas, seed):
        rng = np.random.default_rng(seed)
        v = np.linspace(-1, 1, n)
        f = rng.random((len(deltas), n))
        np.testing.assert_allclose(
            core.bc_drift_sharp(f, v, deltas), _core_py.bc_drift_sharp(f, v, deltas), rtol=1e-12, atol=1e-13
        )

    def test_inputs_not_modified(self, rng):
        lower, diag, upper = _random_blocks(rng, 5, 1)
        copies = [x.copy() for x in (lower, diag, upper)]
        core.block_tridiag_factor(lower, diag, upper)
        for x, y in zip((lower, diag, upper), copies):
            np.testing.assert_array_equal(x, y)


class TestSharpDrift:
    @pytest.mark.parametrize("impl", BACKENDS)
    def test_second_order_against_adaptive_quadrature(self, impl):
        delta = 1.2345
        errs = []
        for n in (41, 81, 161):
            v = np.linspace(-1, 1, n)
            exact = np.array(
                [quad(lambda w: (x - w) * np.exp(-w * w), max(-1, x - delta), min(1, x + delta))[0] for x in v]
            )
            errs.append(np.abs(impl.bc_drift_sharp(np.exp(-(v**2))[None], v, [delta])[0] - exact).max())
        assert np.all(np.log2(np.array(errs[:-1]) / errs[1:]) > 1.8)

    @pytest.mark.parametrize("impl", BACKENDS)
    def test_full_support_is_linear_drift(self, impl):
        v = np.linspace(-1, 1, 21)
        f = np.exp(-4 * (v - 0.1) ** 2)
        tw = np.full(21, v[1] - v[0])
        tw[[0, -1]] /= 2
        mass, mom = tw @ f, tw @ (v * f)
        np.testing.assert_allclose(impl.bc_drift_sharp(f[None], v, [2.0])[0], v * mass - mom, atol=1e-14)

    @pytest.mark.parametrize("impl", BACKENDS)
    def test_zero_threshold_gives_zero(self, impl):
        v = np.linspace(-1, 1, 11)
        assert np.abs(impl.bc_drift_sharp(np.ones((1, 11)), v, [0.0])).max() < 1e-15


class TestBackendSelection:
    def test_backend_name(self):
        assert kernels.BACKEND in ("cython", "python")

    def test_environment_forces_fallback(self):
        env = dict(os.environ, FPSG_PURE_PYTHON="1")
        out = subprocess.run(
            [sys.executable, "-c", "import fpsg.kernels as k; print(k.BACKEND)"],
            capture_output=True, text=True, env=env, check=True,
        )
        assert out.stdout.strip() == "python"

    def test_singular_block_raises(self):
        z = np.zeros((3, 2, 2))
        for impl in (core, _core_py):
            with pytest.raises(np.linalg.LinAlgError):
                impl.block_tridiag_factor(z, z, z)
