"""Stochastic-Galerkin right-hand sides for the chaos coefficients.

The state is a coefficient field ``c`` of shape (M+1, N): row ``k`` holds the
k-th chaos mode at every velocity node. Right-hand sides are evaluated
pseudo-spectrally: reconstruct at the z-quadrature nodes, apply the nodal
Fokker-Planck operator, project back. The same operator is also available in
materialized form (mode-coupling matrices per velocity node) for implicit
solves and cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .basis import GpcBasis
from .errors import ConfigurationError, StepFailure
from .grid import VelocityGrid
from .quasi_equilibrium import compute_fq

SCHEMES = ("cdsg", "mmsg")


@dataclass(frozen=True)
class SGMatrices:
    """Mode-coupling matrices at each velocity node.

    ``B[h, k, j]`` and ``D[h, k, j]`` are the quadrature values of
    E[b Phi_h Phi_k] and E[d Phi_h Phi_k] at node ``v_j``.
    """

    B: np.ndarray
    D: np.ndarray

    def asymmetry(self) -> float:
        return float(
            max(
                np.abs(self.B - self.B.transpose(1, 0, 2)).max(),
                np.abs(self.D - self.D.transpose(1, 0, 2)).max(),
            )
        )


class SGDiscretization:
    """Chaos-coefficient discretization of one model on one grid.

    Parameters
    ----------
    model : FokkerPlanckModel
    basis : GpcBasis
    grid : VelocityGrid
    fq_quadrature : {"spline", "trapezoid"}
        Cumulative rule for quasi-equilibria without a closed form.
    """

    def __init__(self, model, basis: GpcBasis, grid: VelocityGrid, fq_quadrature: str = "spline"):
        model.check(basis.nodes)
        self.fq_quadrature = fq_quadrature
        self.model = model
        self.basis = basis
        self.grid = grid
        self.z = basis.nodes
        self.d = np.ascontiguousarray(model.diffusion(self.z, grid))
        if np.any(self.d < 0):
            raise ConfigurationError(f"{model.name}: negative diffusion at a quadrature node")
        self._b_static = np.ascontiguousarray(model.drift(self.z, grid)) if model.linear else None
        m = basis.size
        gram = np.einsum("hq,kq,q->hkq", basis.table, basis.table, basis.weights)
        self._gram = gram.reshape(m * m, basis.n_nodes)

    # ------------------------------------------------------------ views

    @property
    def shape(self) -> tuple[int, int]:
        return (self.basis.size, self.grid.n)

    def nodal(self, c) -> np.ndarray:
        """Values at the z-quadrature nodes, shape (Nq, N)."""
        c = np.asarray(c, dtype=float)
        if c.shape != self.shape:
            raise ValueError(f"expected coefficients of shape {self.shape}, got {c.shape}")
        return self.basis.reconstruct(c)

    def coeffs(self, nodal) -> np.ndarray:
        nodal = np.asarray(nodal, dtype=float)
        if nodal.shape != (self.basis.n_nodes, self.grid.n):
            raise ValueError(f"expected nodal values of shape {(self.basis.n_nodes, self.grid.n)}")
        return self.basis.project(nodal)

    def initial_coeffs(self) -> np.ndarray:
        return self.coeffs(self.model.initial(self.z, self.grid))

    # ------------------------------------------------------------ operators

    def drift_nodal(self, f_nodal) -> np.ndarray:
        if self._b_static is not None:
            return self._b_static
        return np.ascontiguousarray(self.model.drift(self.z, self.grid, f_nodal))

    def apply_frozen(self, b_nodal, c) -> np.ndarray:
        """Galerkin operator with a given nodal drift applied to ``c``."""
        return self.coeffs(kernels.fp_apply(b_nodal, self.d, self.nodal(c), self.grid.dv))

    def rhs_cdsg(self, c, t: float = 0.0) -> np.ndarray:
        f = self.nodal(c)
        return self.coeffs(kernels.fp_apply(self.drift_nodal(f), self.d, f, self.grid.dv))

    def fq_coeffs(self, c) -> np.ndarray:
        """Projected quasi-equilibrium of the current field."""
        return self.coeffs(compute_fq(self.model, self.z, self.grid, self.nodal(c), self.fq_quadrature))

    def mmsg_source(self, c) -> np.ndarray:
        """Operator at the projected quasi-equilibrium, drift taken from f^q itself."""
        cq = self.fq_coeffs(c)
        return self.rhs_cdsg(cq)

    def rhs_mmsg(self, c, t: float = 0.0) -> np.ndarray:
        return self.rhs_cdsg(c) - self.mmsg_source(c)

    def rhs(self, c, scheme: str, t: float = 0.0) -> np.ndarray:
        if scheme == "cdsg":
            return self.rhs_cdsg(c, t)
        if scheme == "mmsg":
            return self.rhs_mmsg(c, t)
        raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {scheme!r}")

    def source(self, c, scheme: str) -> np.ndarray:
        """Term subtracted from the CDsG operator: zero for CDsG."""
        if scheme == "mmsg":
            return self.mmsg_source(c)
        return np.zeros(self.shape)

    # ------------------------------------------------------------ matrices

    def sg_matrices(self, c=None) -> SGMatrices:
        """Materialized drift and diffusion coupling matrices.

        For nonlocal drifts ``c`` supplies the field the drift is evaluated from.
        """
        if self._b_static is None and c is None:
            raise ValueError(f"{self.model.name}: nonlocal drift needs the field c")
        b = self.drift_nodal(None if c is None else self.nodal(c))
        return SGMatrices(B=self.basis.triple_products(b), D=self.basis.triple_products(self.d))

    def rhs_matrix(self, c, matrices: SGMatrices | None = None) -> np.ndarray:
        """CDsG right-hand side evaluated through the coupling matrices."""
        c = np.asarray(c, dtype=float)
        mats = self.sg_matrices(c) if matrices is None else matrices
        B, D = mats.B, mats.D
        bc = np.einsum("hkj,kj->hj", B, c)
        b_right = np.einsum("hkj,kj->hj", B[:, :, :-1], c[:, 1:])
        b_left = np.einsum("hkj,kj->hj", B[:, :, 1:], c[:, :-1])
        dc = np.einsum("hkj,kj->hj", D, c)
        flux = 0.25 * (bc[:, :-1] + b_right + b_left + bc[:, 1:])
        flux += (dc[:, 1:] - dc[:, :-1]) / self.grid.dv
        out = np.zeros_like(c)
        out[:, :-1] += flux
        out[:, 1:] -= flux
        w = np.full(self.grid.n, 1.0 / self.grid.dv)
        w[0] = w[-1] = 2.0 / self.grid.dv
        return out * w

    def galerkin_blocks(self, b_nodal):
        """Block-tridiagonal Galerkin operator for a frozen drift.

        Returns (lower, diag, upper), each of shape (N, M+1, M+1); row ``j``
        couples the modes at ``v_j`` with those at ``v_{j-1}``, ``v_j``,
        ``v_{j+1}``.
        """
        lo, di, up = kernels.fp_tridiag(b_nodal, self.d, self.grid.dv)
        m, n = self.basis.size, self.grid.n

        def blocks(stencil):
            return (self._gram @ stencil).reshape(m, m, n).transpose(2, 0, 1)

        return blocks(lo), blocks(di), blocks(up)

    def factor_implicit(self, b_nodal, tau: float):
        """Factorization of ``I - tau A`` with ``A`` the frozen-drift Galerkin operator."""
        lower, diag, upper = self.galerkin_blocks(b_nodal)
        eye = np.eye(self.basis.size)
        try:
            return kernels.block_tridiag_factor(-tau * lower, eye - tau * diag, -tau * upper)
        except np.linalg.LinAlgError as exc:
            raise StepFailure(f"implicit operator is singular (tau={tau:g}): {exc}") from exc

    def solve(self, factor, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        out = kernels.block_tridiag_solve(factor, np.ascontiguousarray(rhs.T)).T
        if not np.all(np.isfinite(out)):
            raise StepFailure("implicit solve produced non-finite values")
        return out

    # ------------------------------------------------------------ equilibria

    def equilibrium_coeffs(self, c0=None, tol: float = 1e-14, max_iter: int = 500) -> np.ndarray:
        """Projected quasi-equilibrium that reproduces itself.

        Iterates ``c <- P(f^q(c))`` from ``c0`` (the initial datum by default)
        until the update falls below ``tol`` in max norm. For linear models a
        single pass suffices.
        """
        c = self.initial_coeffs() if c0 is None else np.asarray(c0, dtype=float)
        c = self.fq_coeffs(c)
        for _ in range(max_iter):
            nxt = self.fq_coeffs(c)
            delta = np.abs(nxt - c).max()
            c = nxt
            if delta <= tol * max(1.0, np.abs(c).max()):
                return c
        raise StepFailure(f"quasi-equilibrium fixed point did not converge in {max_iter} iterations")


def mass(grid: VelocityGrid, c) -> float:
    """Expected mass: trapezoid of mode 0."""
    return float(grid.trapezoid(np.asarray(c)[0]))
