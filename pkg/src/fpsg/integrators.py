"""Second-order time integrators for the coefficient system.

``dirk2`` is a two-stage, stiffly accurate SDIRK method (gamma = 1 - sqrt(2)/2)
for models whose drift does not depend on the solution. ``imex2`` is a
two-stage semi-implicit Runge-Kutta method built on the ARS(2,2,2) tableau:
the drift coefficients and the micro-macro source are taken explicitly from
the explicit stage values, and the resulting linear drift-diffusion operator
is solved implicitly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .assembly import SCHEMES, SGDiscretization
from .errors import ConfigurationError

GAMMA = 1.0 - math.sqrt(2.0) / 2.0
DELTA = 1.0 - 1.0 / (2.0 * GAMMA)
INTEGRATORS = ("dirk2", "imex2")


def dirk2_step(rhs: Callable, solve: Callable, y, dt: float):
    """One SDIRK2 step for a linear (or affine with zero-mass increments) system.

    ``solve(r)`` must return ``(I - gamma dt L)^{-1} r`` for the system's
    linear part ``L``; ``rhs(y)`` evaluates the full right-hand side.
    """
    k1 = solve(rhs(y))
    y2 = y + dt * (1.0 - GAMMA) * k1
    k2 = solve(rhs(y2))
    return y2 + dt * GAMMA * k2


def step_dirk2(disc: SGDiscretization, c, dt: float, scheme: str = "cdsg", factor=None):
    """DIRK2 step of the coefficient field for a model with solution-independent drift.

    For the micro-macro scheme the subtracted equilibrium term is linear in
    the field and annihilates every zero-mass increment, so the stage solves
    use the plain Galerkin operator.
    """
    if not disc.model.linear:
        raise ConfigurationError(f"dirk2 needs a solution-independent drift; use imex2 for {disc.model.name}")
    if factor is None:
        factor = disc.factor_implicit(disc.drift_nodal(None), GAMMA * dt)
    return dirk2_step(lambda y: disc.rhs(y, scheme), lambda r: disc.solve(factor, r), c, dt)


def step_imex2(disc: SGDiscretization, c, dt: float, scheme: str = "cdsg", t: float = 0.0):
    """Semi-implicit second-order step with explicitly frozen drift and source."""
    c = np.asarray(c, dtype=float)
    tau = GAMMA * dt

    def stage(e, base):
        b = disc.drift_nodal(disc.nodal(e))
        s = disc.source(e, scheme)
        i = disc.solve(disc.factor_implicit(b, tau), base - tau * s)
        return i, disc.apply_frozen(b, i) - s

    k1 = disc.rhs(c, scheme, t)
    _, k2 = stage(c + dt * GAMMA * k1, c)
    e3 = c + dt * (DELTA * k1 + (1.0 - DELTA) * k2)
    y, _ = stage(e3, c + dt * (1.0 - GAMMA) * k2)
    return y


class Stepper:
    """Repeated steps with a fixed time step, caching what can be cached."""

    def __init__(self, disc: SGDiscretization, scheme: str, dt: float, method: str | None = None):
        if scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
        if not dt > 0:
            raise ConfigurationError(f"time step must be positive, got {dt!r}")
        method = method or ("dirk2" if disc.model.linear else "imex2")
        if method not in INTEGRATORS:
            raise ConfigurationError(f"integrator must be one of {INTEGRATORS}, got {method!r}")
        if method == "dirk2" and not disc.model.linear:
            raise ConfigurationError(f"dirk2 needs a solution-independent drift; use imex2 for {disc.model.name}")
        self.disc, self.scheme, self.dt, self.method = disc, scheme, float(dt), method
        self._factor = None
        if method == "dirk2":
            self._factor = disc.factor_implicit(disc.drift_nodal(None), GAMMA * self.dt)

    def step(self, c, t: float = 0.0):
        if self.method == "dirk2":
            return step_dirk2(self.disc, c, self.dt, self.scheme, factor=self._factor)
        return step_imex2(self.disc, c, self.dt, self.scheme, t)


@dataclass
class Trajectory:
    """Coefficient fields at the recorded times, in increasing order."""

    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    n_steps: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]

    def __len__(self):
        return len(self.times)


def step_count(T: float, dt: float) -> int:
    """Number of steps covering [0, T]; T must be an integer multiple of dt to 1e-9."""
    if not dt > 0 or not T >= 0:
        raise ConfigurationError(f"need dt > 0 and T >= 0, got dt={dt!r}, T={T!r}")
    if T > 0 and dt > T * (1 + 1e-12):
        raise ConfigurationError(f"time step {dt} exceeds the horizon {T}")
    n = round(T / dt)
    if abs(n * dt - T) > 1e-9 * max(1.0, T):
        raise ConfigurationError(f"horizon {T} is not an integer multiple of dt={dt}")
    return int(n)


def simulate(
    disc: SGDiscretization,
    T: float,
    dt: float,
    scheme: str = "cdsg",
    method: str | None = None,
    c0=None,
    output_times=None,
    on_step: Callable | None = None,
) -> Trajectory:
    """Integrate from ``c0`` (the projected initial datum by default) up to ``T``.

    Parameters
    ----------
    output_times : sequence of float, optional
        Times to record; each must fall on the step lattice. The final time
        is always recorded.
    on_step : callable, optional
        Called as ``on_step(step_index, t, c)`` after every step.
    """
    n = step_count(T, dt)
    stepper = Stepper(disc, scheme, dt, method)
    c = disc.initial_coeffs() if c0 is None else np.array(c0, dtype=float)
    wanted = set()
    for t_out in output_times or ():
        if t_out < -1e-12 or t_out > T + 1e-9 * max(1.0, T):
            raise ConfigurationError(f"output time {t_out} outside [0, {T}]")
        k = round(t_out / dt)
        if abs(k * dt - t_out) > 1e-9 * max(1.0, T):
            raise ConfigurationError(f"output time {t_out} is not on the step lattice of dt={dt}")
        wanted.add(int(k))
    wanted.add(n)
    traj = Trajectory()
    if 0 in wanted:
        traj.times.append(0.0)
        traj.fields.append(c.copy())
    warned = False
    for k in range(1, n + 1):
        c = stepper.step(c, (k - 1) * dt)
        t = k * dt
        if on_step is not None:
            on_step(k, t, c)
        if not warned and np.any(disc.grid.trapezoid(disc.nodal(c)) <= 0):
            warnings.warn(f"non-positive mass at some z-node at t={t:g}", RuntimeWarning, stacklevel=2)
            warned = True
        if k in wanted and k > 0:
            traj.times.append(t)
            traj.fields.append(c.copy())
    traj.n_steps = n
    return traj
