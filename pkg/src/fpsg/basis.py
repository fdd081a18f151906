"""Orthonormal Legendre chaos for a uniform random input on [-1, 1]."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander

from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class GpcBasis:
    """Legendre basis Phi_0..Phi_M orthonormal under p(z) = 1/2 on [-1, 1].

    Attributes
    ----------
    order : int
        Highest polynomial degree M.
    nodes : ndarray, shape (Nq,)
        Gauss-Legendre nodes.
    weights : ndarray, shape (Nq,)
        Quadrature weights including the density, summing to one.
    table : ndarray, shape (M+1, Nq)
        ``table[k, q] = Phi_k(nodes[q])``.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    table: np.ndarray

    @property
    def size(self) -> int:
        return self.order + 1

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    def evaluate(self, z) -> np.ndarray:
        """Basis values at arbitrary points, shape (M+1, len(z)).

        Points outside [-1, 1] are extrapolated without complaint; the
        expansion has no meaning there.
        """
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return _normalized_legendre(z, self.order)

    def project(self, values: np.ndarray) -> np.ndarray:
        """Coefficients of nodal data; ``values`` has shape (Nq, ...)."""
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.n_nodes:
            raise ValueError(
                f"expected {self.n_nodes} nodal values along axis 0, got {values.shape[0]}"
            )
        return np.tensordot(self.table * self.weights, values, axes=(1, 0))

    def reconstruct(self, coeffs: np.ndarray, z=None) -> np.ndarray:
        """Evaluate sum_k coeffs[k] Phi_k(z); at the quadrature nodes when ``z`` is None."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != self.size:
            raise ValueError(f"expected {self.size} coefficients along axis 0, got {coeffs.shape[0]}")
        if z is None:
            return np.tensordot(self.table, coeffs, axes=(0, 0))
        scalar = np.ndim(z) == 0
        out = np.tensordot(self.evaluate(z), coeffs, axes=(0, 0))
        return out[0] if scalar else out

    def triple_products(self, values: np.ndarray) -> np.ndarray:
        """Galerkin matrices sum_q w_q a(z_q, .) Phi_h(z_q) Phi_k(z_q).

        ``values`` has shape (Nq, ...); the result has shape (M+1, M+1, ...).
        """
        values = np.asarray(values, dtype=float)
        gram = np.einsum("hq,kq,q->hkq", self.table, self.table, self.weights)
        return np.tensordot(gram, values, axes=(2, 0))


def _normalized_legendre(z: np.ndarray, order: int) -> np.ndarray:
    scale = np.sqrt(2.0 * np.arange(order + 1) + 1.0)
    return (legvander(z, order) * scale).T


def default_quadrature_size(order: int, discontinuous: bool = False) -> int:
    """Number of Gauss nodes used when none is requested."""
    return max(2 * order + 2, 64 if discontinuous else 32)


def build_basis(order: int, n_nodes: int | None = None) -> GpcBasis:
    """Orthonormal Legendre basis of degree ``order`` with ``n_nodes`` Gauss points."""
    if n_nodes is None:
        n_nodes = default_quadrature_size(order)
    if int(order) != order or order < 0:
        raise ConfigurationError(f"order must be a non-negative integer, got {order!r}")
    if int(n_nodes) != n_nodes or n_nodes < order + 1:
        raise ConfigurationError(f"need at least order+1={order + 1} quadrature nodes, got {n_nodes!r}")
    order, n_nodes = int(order), int(n_nodes)
    x, w = leggauss(n_nodes)
    w = w / w.sum()
    table = _normalized_legendre(x, order)
    for arr in (x, w, table):
        arr.setflags(write=False)
    return GpcBasis(order=order, nodes=x, weights=w, table=table)


def project(basis: GpcBasis, values_at_nodes) -> np.ndarray:
    return basis.project(values_at_nodes)


def reconstruct(basis: GpcBasis, coeffs, z) -> np.ndarray:
    return basis.reconstruct(coeffs, z)


def mean_and_variance(coeffs) -> tuple[np.ndarray, np.ndarray]:
    """Mean (mode 0) and variance (sum of squared higher modes) of an expansion.

    Works on a single coefficient vector or on (M+1, ...) arrays.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    return coeffs[0], np.sum(coeffs[1:] ** 2, axis=0)
