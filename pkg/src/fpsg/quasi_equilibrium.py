"""Flux-annihilating quasi-equilibria and their chaos projections.

For a frozen drift ``B[f]`` the density annihilating the flux
``B f^q + d/dv (D f^q)`` satisfies

    log f^q(v) = - int_{v_c}^{v} (B + dD/dv) / D ds + const.

Models with a closed-form antiderivative provide it through
``log_equilibrium``. Otherwise ``-log D`` is taken exactly and ``B / D`` is
accumulated from the midpoint node, by default through the antiderivative of
its cubic-spline interpolant. In both cases the result is normalized to
the trapezoidal mass of the density it was built from, node by node in z.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .basis import GpcBasis
from .errors import DegenerateStateError, NotAvailableError, SingularDiffusionError
from .grid import VelocityGrid


@dataclass(frozen=True)
class QuasiEquilibriumField:
    """Nodal quasi-equilibrium at the z-quadrature nodes.

    Attributes
    ----------
    values : ndarray, shape (Nq, N)
        f^q(z_q, v_j), non-negative.
    constants : ndarray, shape (Nq,)
        Normalization constants multiplying ``exp(log f^q - max log f^q)``.
    mass : ndarray, shape (Nq,)
        Per-node mass targets, taken from the density the field was built from.
    """

    values: np.ndarray
    constants: np.ndarray
    mass: np.ndarray

    def project(self, basis: GpcBasis) -> np.ndarray:
        return project_fq(self.values, basis)


QUADRATURES = ("spline", "trapezoid")


def _cumulative(values, nodes, quadrature):
    if quadrature == "trapezoid":
        return cumulative_trapezoid(values, nodes, axis=1, initial=0.0)
    return CubicSpline(nodes, values, axis=1).antiderivative()(nodes)


def _log_profile(model, z, grid: VelocityGrid, f, quadrature: str) -> np.ndarray:
    try:
        return model.log_equilibrium(z, grid, f)
    except NotAvailableError:
        pass
    if quadrature not in QUADRATURES:
        raise ValueError(f"quadrature must be one of {QUADRATURES}, got {quadrature!r}")
    b = model.drift(z, grid, f)
    d = model.diffusion(z, grid)
    positive = d > 0
    if not positive[:, 1:-1].all():
        raise SingularDiffusionError(f"{model.name}: diffusion vanishes at an interior node")
    lo = 0 if positive[:, 0].all() else 1
    hi = grid.n if positive[:, -1].all() else grid.n - 1
    # (dD/dv) / D integrates to log D exactly; only B / D is accumulated
    acc = _cumulative(b[:, lo:hi] / d[:, lo:hi], grid.nodes[lo:hi], quadrature)
    mid = grid.n // 2 - lo
    out = np.full(b.shape, -np.inf)
    out[:, lo:hi] = -np.log(d[:, lo:hi]) - (acc - acc[:, mid : mid + 1])
    return out


def _compute(model, z, grid: VelocityGrid, f, quadrature: str = "spline") -> QuasiEquilibriumField:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    f = np.atleast_2d(np.asarray(f, dtype=float))
    mass = grid.trapezoid(f)
    if np.any(~(mass > 0)):
        raise DegenerateStateError("quasi-equilibrium needs a density with positive mass at every z")
    logf = _log_profile(model, z, grid, f, quadrature)
    with np.errstate(invalid="ignore"):
        shape = np.exp(logf - logf.max(axis=1, keepdims=True))
    constants = mass / grid.trapezoid(shape)
    return QuasiEquilibriumField(values=shape * constants[:, None], constants=constants, mass=mass)


def compute_fq(model, z, grid: VelocityGrid, f, quadrature: str = "spline") -> np.ndarray:
    """Quasi-equilibrium of ``f`` for the drift frozen at ``f``.

    Parameters
    ----------
    model : FokkerPlanckModel
    z : float or array_like, shape (Nz,)
    grid : VelocityGrid
    f : array_like, shape (N,) or (Nz, N)
        Density at the same ``z`` values.
    quadrature : {"spline", "trapezoid"}
        Cumulative rule for models without a closed-form profile:
        antiderivative of the not-a-knot cubic interpolant (fourth order) or
        the trapezoidal rule (second order).

    Returns
    -------
    ndarray
        Same shape as ``f``; zero where the diffusion vanishes at an end node.
    """
    out = _compute(model, z, grid, f, quadrature).values
    return out[0] if np.ndim(f) == 1 else out


def quasi_equilibrium_field(
    model, basis: GpcBasis, grid: VelocityGrid, f_nodal, quadrature: str = "spline"
) -> QuasiEquilibriumField:
    """Quasi-equilibrium at every quadrature node of ``basis``; ``f_nodal`` is (Nq, N)."""
    return _compute(model, basis.nodes, grid, f_nodal, quadrature)


def project_fq(fq_nodal, basis: GpcBasis) -> np.ndarray:
    """Chaos coefficients (M+1, N) of a nodal quasi-equilibrium (Nq, N)."""
    fq_nodal = np.asarray(fq_nodal, dtype=float)
    if fq_nodal.ndim != 2:
        raise ValueError(f"expected an (Nq, N) array, got shape {fq_nodal.shape}")
    return basis.project(fq_nodal)
