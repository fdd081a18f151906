"""Stochastic-Galerkin and micro-macro stochastic-Galerkin solvers for 1D
Fokker-Planck equations with random inputs."""
from .assembly import SGDiscretization, SGMatrices
from .basis import GpcBasis, build_basis, mean_and_variance
from .diagnostics import eps_var, l2_error, relative_entropy_profile, variance_of_l1_norm
from .grid import VelocityGrid, apply_fp_operator
from .integrators import Trajectory, simulate, step_dirk2, step_imex2
from .kernels import BACKEND
from .models import (
    BoundedConfidence,
    ClassicalFP,
    ExactClassicalSolution,
    InitialData,
    Opinion,
    Swarming,
    ZFunction,
)
from .quasi_equilibrium import compute_fq, project_fq

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundedConfidence",
    "ClassicalFP",
    "ExactClassicalSolution",
    "GpcBasis",
    "InitialData",
    "Opinion",
    "SGDiscretization",
    "SGMatrices",
    "Swarming",
    "Trajectory",
    "VelocityGrid",
    "ZFunction",
    "apply_fp_operator",
    "build_basis",
    "compute_fq",
    "eps_var",
    "l2_error",
    "mean_and_variance",
    "project_fq",
    "relative_entropy_profile",
    "simulate",
    "step_dirk2",
    "step_imex2",
    "variance_of_l1_norm",
]
