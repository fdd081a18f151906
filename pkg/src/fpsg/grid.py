"""Uniform velocity grid and the conservative central Fokker-Planck operator.

Nodes include both end points. Fluxes live on half nodes and vanish at the
two ends; the end nodes own half cells, so the conserved discrete mass is the
trapezoidal sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import diags_array

from . import kernels
from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    v_min: float
    v_max: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ConfigurationError(f"need at least 3 velocity nodes, got {self.n!r}")
        if not self.v_max > self.v_min:
            raise ConfigurationError(f"empty velocity domain [{self.v_min}, {self.v_max}]")
        nodes = np.linspace(self.v_min, self.v_max, int(self.n))
        w = np.full(nodes.size, self.dv)
        w[0] = w[-1] = 0.5 * self.dv
        nodes.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    @property
    def dv(self) -> float:
        return (self.v_max - self.v_min) / (self.n - 1)

    def trapezoid(self, values, axis=-1):
        """Trapezoidal integral over velocity along ``axis``."""
        values = np.asarray(values, dtype=float)
        if values.shape[axis] != self.n:
            raise ValueError(f"expected {self.n} velocity values, got {values.shape[axis]}")
        return np.tensordot(np.moveaxis(values, axis, -1), self.weights, axes=(-1, 0))

    def moment(self, values, power: int, axis=-1):
        values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
        return self.trapezoid(values * self.nodes**power)

    def refines(self, coarse: "VelocityGrid") -> int | None:
        """Index stride mapping ``coarse`` nodes onto this grid, or None."""
        if not (np.isclose(self.v_min, coarse.v_min) and np.isclose(self.v_max, coarse.v_max)):
            return None
        if (self.n - 1) % (coarse.n - 1):
            return None
        return (self.n - 1) // (coarse.n - 1)


def trapezoid(grid: VelocityGrid, values) -> float:
    return grid.trapezoid(values)


def _check_diffusion(d):
    if np.any(np.asarray(d) < 0):
        raise ValueError("diffusion coefficient must be non-negative")


def apply_fp_operator(grid: VelocityGrid, b, d, f) -> np.ndarray:
    """d/dv [b f + d/dv(d f)] with half-node fluxes and zero end fluxes.

    ``b``, ``d``, ``f`` hold nodal values; leading axes are batched.
    """
    _check_diffusion(d)
    return kernels.fp_apply(b, d, f, grid.dv)


def fp_coefficients(grid: VelocityGrid, b, d):
    """Batched tridiagonal stencil (lower, diag, upper) of :func:`apply_fp_operator`."""
    _check_diffusion(d)
    return kernels.fp_tridiag(b, d, grid.dv)


def assemble_fp_matrix(grid: VelocityGrid, b, d):
    """Sparse tridiagonal matrix L with ``L @ f == apply_fp_operator(grid, b, d, f)``."""
    lo, di, up = fp_coefficients(grid, np.asarray(b, dtype=float), np.asarray(d, dtype=float))
    return diags_array([lo[1:], di, up[:-1]], offsets=[-1, 0, 1], format="csr")
