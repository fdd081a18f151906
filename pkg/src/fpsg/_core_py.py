"""Pure numpy implementations of the hot kernels.

Used when the compiled ``fpsg._core`` extension is unavailable or when
``FPSG_PURE_PYTHON=1`` is set. Signatures match the extension exactly.
"""
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve


def _cell_weights(n, dv):
    w = np.full(n, 1.0 / dv)
    w[0] = w[-1] = 2.0 / dv
    return w


def fp_apply(b, d, f, dv):
    """Conservative drift-diffusion operator applied row by row.

    ``b``, ``d`` and ``f`` are (R, N) arrays. Returns the (R, N) array of
    ``d/dv [b f + d/dv (d f)]`` with zero flux through both end points.
    """
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    flux = 0.25 * (b[..., 1:] + b[..., :-1]) * (f[..., 1:] + f[..., :-1])
    df = d * f
    flux += (df[..., 1:] - df[..., :-1]) / dv
    out = np.zeros(np.broadcast(b, d, f).shape)
    out[..., :-1] += flux
    out[..., 1:] -= flux
    out *= _cell_weights(n, dv)
    return out


def fp_tridiag(b, d, dv):
    """Tridiagonal coefficients (lower, diag, upper) of :func:`fp_apply`."""
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    shape = np.broadcast(b, d).shape
    b = np.broadcast_to(b, shape)
    d = np.broadcast_to(d, shape)
    n = shape[-1]
    a = 0.25 * (b[..., 1:] + b[..., :-1])
    left = a - d[..., :-1] / dv      # flux_{j+1/2} coefficient on f_j
    right = a + d[..., 1:] / dv      # flux_{j+1/2} coefficient on f_{j+1}
    w = _cell_weights(n, dv)
    lo = np.zeros(shape)
    di = np.zeros(shape)
    up = np.zeros(shape)
    up[..., :-1] = right
    di[..., :-1] += left
    di[..., 1:] -= right
    lo[..., 1:] = -left
    return lo * w, di * w, up * w


def block_tridiag_factor(lower, diag, upper):
    """Block LU (Thomas) factorization of a block tridiagonal matrix.

    Each argument has shape (N, m, m); ``lower[0]`` and ``upper[-1]`` are
    ignored.
    """
    n, m, _ = diag.shape
    lus = []
    xs = np.zeros((n, m, m))
    prev_x = None
    for j in range(n):
        dj = diag[j] if prev_x is None else diag[j] - lower[j] @ prev_x
        with warnings.catch_warnings():
            # singular pivots are reported below as an exception
            warnings.simplefilter("ignore", LinAlgWarning)
            lu = lu_factor(dj, check_finite=False)
        if np.any(np.diag(lu[0]) == 0.0):
            raise np.linalg.LinAlgError(f"singular pivot block at row {j}")
        lus.append(lu)
        if j < n - 1:
            xs[j] = lu_solve(lu, upper[j], check_finite=False)
            prev_x = xs[j]
    return ("py", np.array(lower, dtype=float), lus, xs)


def block_tridiag_solve(factor, rhs):
    """Solve with a factorization from :func:`block_tridiag_factor`.

    ``rhs`` has shape (N, m); returns the solution with the same shape.
    """
    _, lower, lus, xs = factor
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    y = np.empty_like(rhs)
    y[0] = lu_solve(lus[0], rhs[0], check_finite=False)
    for j in range(1, n):
        y[j] = lu_solve(lus[j], rhs[j] - lower[j] @ y[j - 1], check_finite=False)
    for j in range(n - 2, -1, -1):
        y[j] -= xs[j] @ y[j + 1]
    return y


def _reach(delta, dv):
    """Whole cells ``r`` and fractional cell ``theta`` covered by a threshold."""
    lim = delta * (1.0 + 1e-12)
    r = int(lim // dv)
    while (r + 1) * dv <= lim:
        r += 1
    while r > 0 and r * dv > lim:
        r -= 1
    return r, max(0.0, min(1.0, delta / dv - r))


def sharp_weights(n, dv, delta):
    """Quadrature weights of the indicator-kernel integral for each node.

    Row ``j`` integrates the piecewise-linear interpolant of the integrand
    over ``[v_j - delta, v_j + delta]`` clipped to the grid: trapezoid weights
    on whole cells, exact interpolant integrals on the two partial cells.
    """
    r, theta = _reach(delta, dv)
    j = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    lo = np.maximum(j - r, 0)
    hi = np.minimum(j + r, n - 1)
    w = np.where((k >= lo) & (k <= hi), dv, 0.0)
    w -= np.where(k == lo, 0.5 * dv, 0.0)
    w -= np.where(k == hi, 0.5 * dv, 0.0)
    if theta > 0.0:
        near = dv * theta * (1.0 - 0.5 * theta)
        far = 0.5 * dv * theta * theta
        rows = np.arange(n)
        left = rows[rows - r >= 1]
        w[left, left - r] += near
        w[left, left - r - 1] += far
        right = rows[rows + r <= n - 2]
        w[right, right + r] += near
        w[right, right + r + 1] += far
    return w


def bc_drift_sharp(f, v, delta):
    """Bounded-confidence drift with the indicator kernel.

    ``out[q, j]`` approximates the integral of ``(v_j - w) f[q](w)`` over
    ``|v_j - w| <= delta[q]`` using :func:`sharp_weights`.
    """
    f = np.asarray(f, dtype=float)
    v = np.asarray(v, dtype=float)
    n = v.size
    dv = (v[-1] - v[0]) / (n - 1)
    diff = v[:, None] - v[None, :]
    out = np.empty(f.shape)
    for q, dq in enumerate(np.asarray(delta, dtype=float)):
        out[q] = (sharp_weights(n, dv, dq) * diff) @ f[q]
    return out
