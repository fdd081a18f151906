"""Error metrics and statistics of coefficient fields."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import GpcBasis, mean_and_variance
from .errors import ConfigurationError, UndefinedMetricError
from .grid import VelocityGrid


def restrict(ref, ref_grid: VelocityGrid, grid: VelocityGrid) -> np.ndarray:
    """Reference coefficients sampled at the nodes of the coarser ``grid``."""
    stride = ref_grid.refines(grid)
    if stride is None:
        raise ConfigurationError(
            f"reference grid with {ref_grid.n} nodes does not refine a grid with {grid.n} nodes"
        )
    return np.asarray(ref, dtype=float)[:, ::stride]


def mean_field(c) -> np.ndarray:
    return mean_and_variance(c)[0]


def variance_field(c) -> np.ndarray:
    return mean_and_variance(c)[1]


def eps_var(c, grid: VelocityGrid, ref, ref_grid: VelocityGrid | None = None) -> float:
    """Relative L1 error of the variance field against a reference expansion.

    The reference variance uses every mode of the reference, so truncation of
    ``c`` counts as error. A reference variance below round-off relative to
    the squared mean (a deterministic state) leaves the metric undefined.
    """
    ref_c = restrict(ref, ref_grid or grid, grid)
    var_ref = variance_field(ref_c)
    denom = grid.trapezoid(np.abs(var_ref))
    if not denom > 1e-13 * grid.trapezoid(ref_c[0] ** 2):
        raise UndefinedMetricError("reference variance vanishes; relative variance error undefined")
    return float(grid.trapezoid(np.abs(variance_field(c) - var_ref)) / denom)


def l2_error(c, grid: VelocityGrid, ref, ref_grid: VelocityGrid | None = None, include_truncation: bool = False) -> float:
    """L2 error over (z, v) via Parseval.

    Only the modes both expansions carry are compared unless
    ``include_truncation`` is set, in which case the surplus reference modes
    count in full.
    """
    c = np.asarray(c, dtype=float)
    ref_c = restrict(ref, ref_grid or grid, grid)
    m = min(c.shape[0], ref_c.shape[0])
    sq = np.sum((c[:m] - ref_c[:m]) ** 2, axis=0)
    if include_truncation:
        sq = sq + np.sum(c[m:] ** 2, axis=0) + np.sum(ref_c[m:] ** 2, axis=0)
    return float(np.sqrt(grid.trapezoid(sq)))


def relative_entropy_profile(c, equilibrium_nodal, basis: GpcBasis, grid: VelocityGrid) -> np.ndarray:
    """Relative Shannon entropy int f log(f / f_eq) dv at each z-quadrature node.

    Nodes where the equilibrium vanishes (degenerate diffusion at the domain
    ends) are left out of the integral. Non-positive values of ``f`` are
    clipped to 1e-300 with a warning giving their count.
    """
    f = basis.reconstruct(np.asarray(c, dtype=float))
    eq = np.asarray(equilibrium_nodal, dtype=float)
    if eq.shape != f.shape:
        raise ValueError(f"equilibrium shape {eq.shape} differs from field shape {f.shape}")
    if np.any(eq < 0) or not np.all(eq.max(axis=1) > 0):
        raise ArithmeticError("equilibrium must be non-negative and not identically zero")
    support = eq > 0
    bad = np.count_nonzero((f <= 0) & support)
    if bad:
        warnings.warn(f"clipped {bad} non-positive density values in the entropy", RuntimeWarning, stacklevel=2)
    fc = np.maximum(f, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(support, fc * (np.log(fc) - np.log(np.where(support, eq, 1.0))), 0.0)
    return grid.trapezoid(integrand)


def variance_of_l1_norm(c, basis: GpcBasis, grid: VelocityGrid) -> float:
    """Variance over z of the velocity L1 norm, by quadrature on nodal samples."""
    norms = grid.trapezoid(np.abs(basis.reconstruct(np.asarray(c, dtype=float))))
    mean = np.dot(basis.weights, norms)
    return float(np.dot(basis.weights, (norms - mean) ** 2))


@dataclass(frozen=True)
class DiagnosticRecord:
    """Diagnostics of one coefficient field at time ``t``.

    Quantities needing a reference or an equilibrium are NaN when none was given.
    """

    t: float
    mass: float
    mean_first_moment: float
    eps_var: float
    l2_error: float
    var_l1norm: float
    entropy_max: float
    mean: np.ndarray
    variance: np.ndarray

    CSV_FIELDS = ("t", "mass", "mean_first_moment", "eps_var", "l2_error", "var_l1norm", "entropy_max")

    def row(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in self.CSV_FIELDS)


def diagnose(
    t: float,
    c,
    basis: GpcBasis,
    grid: VelocityGrid,
    ref=None,
    ref_grid: VelocityGrid | None = None,
    equilibrium_nodal=None,
) -> DiagnosticRecord:
    """Collect the standard diagnostics of ``c``."""
    c = np.asarray(c, dtype=float)
    mean, var = mean_and_variance(c)
    ev = l2 = np.nan
    if ref is not None:
        l2 = l2_error(c, grid, ref, ref_grid)
        try:
            ev = eps_var(c, grid, ref, ref_grid)
        except UndefinedMetricError:
            ev = np.nan
    ent = np.nan
    if equilibrium_nodal is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ent = float(np.max(relative_entropy_profile(c, equilibrium_nodal, basis, grid)))
    return DiagnosticRecord(
        t=float(t),
        mass=float(grid.trapezoid(mean)),
        mean_first_moment=float(grid.moment(mean, 1)),
        eps_var=float(ev),
        l2_error=float(l2),
        var_l1norm=variance_of_l1_norm(c, basis, grid),
        entropy_max=ent,
        mean=mean,
        variance=var,
    )
