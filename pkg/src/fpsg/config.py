"""JSON run configurations.

A configuration is a JSON object with the keys below; unknown keys are
rejected and every violation is reported at once.

=============== =========================================================
key             meaning
=============== =========================================================
model           ``{"type": ..., parameters..., "initial": {...}}``
scheme          ``"cdsg"`` or ``"mmsg"``
M, N            chaos order, number of velocity nodes
Nq              z-quadrature size (optional)
dt, T           time step and horizon
domain          ``[v_min, v_max]`` (default ``[-1, 1]``)
integrator      ``"dirk2"`` or ``"imex2"`` (optional, chosen by model)
output_times    times at which diagnostics are recorded (optional)
source          ``"solver"`` (default) or ``"exact"`` (classical model only)
reference       ``{"M", "N", "scheme"}``, ``{"path"}`` or ``{"kind": "exact", "M"}``
sweep           ``{"parameter": name, "values": [...]}``
fq_quadrature   ``"spline"`` (default) or ``"trapezoid"``
output_dir      default output directory (optional)
=============== =========================================================

Sweep parameters are top-level keys (``M``, ``N``, ``Nq``, ``dt``, ``scheme``,
``integrator``) or model parameters (``beta``, ``alpha``, ...).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError, ModelParameterError
from .models import FokkerPlanckModel, model_from_config

TOP_KEYS = {
    "model", "scheme", "M", "N", "Nq", "dt", "T", "domain", "integrator", "output_times",
    "source", "reference", "sweep", "fq_quadrature", "output_dir",
}
REQUIRED = ("model", "scheme", "M", "N", "dt", "T")
RUN_SWEEPABLE = ("M", "N", "Nq", "dt", "scheme", "integrator")


@dataclass(frozen=True)
class ReferenceSpec:
    kind: str  # "run", "path" or "exact"
    M: int | None = None
    N: int | None = None
    scheme: str = "mmsg"
    path: str | None = None


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class RunConfig:
    model: FokkerPlanckModel
    scheme: str
    M: int
    N: int
    dt: float
    T: float
    Nq: int | None = None
    domain: tuple[float, float] = (-1.0, 1.0)
    integrator: str | None = None
    output_times: tuple[float, ...] = ()
    source: str = "solver"
    reference: ReferenceSpec | None = None
    sweep: SweepSpec | None = None
    fq_quadrature: str = "spline"
    output_dir: str | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def with_value(self, parameter: str, value) -> "RunConfig":
        """Copy with one sweepable parameter replaced; the sweep itself is dropped."""
        raw = {k: v for k, v in self.raw.items() if k != "sweep"}
        if parameter in RUN_SWEEPABLE:
            raw[parameter] = value
        else:
            model = dict(raw["model"])
            model[parameter] = value
            raw["model"] = model
        return validate(raw)


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def validate(raw: dict) -> RunConfig:
    """Validate a decoded configuration object, listing every problem found."""
    if not isinstance(raw, dict):
        raise ConfigurationError("configuration must be a JSON object")
    errors = []
    for key in sorted(set(raw) - TOP_KEYS):
        errors.append(f"unknown key {key!r}")
    for key in REQUIRED:
        if key not in raw:
            errors.append(f"missing required key {key!r}")
    if "scheme" in raw and raw["scheme"] not in ("cdsg", "mmsg"):
        errors.append(f"scheme: must be 'cdsg' or 'mmsg', got {raw['scheme']!r}")
    for key in ("M", "N"):
        if key in raw and not (_is_int(raw[key]) and raw[key] >= (0 if key == "M" else 3)):
            errors.append(f"{key}: must be an integer >= {0 if key == 'M' else 3}, got {raw[key]!r}")
    if raw.get("Nq") is not None and not (_is_int(raw["Nq"]) and raw["Nq"] > 0):
        errors.append(f"Nq: must be a positive integer, got {raw['Nq']!r}")
    for key in ("dt", "T"):
        if key in raw and not (_is_number(raw[key]) and raw[key] > 0):
            errors.append(f"{key}: must be a positive number, got {raw[key]!r}")
    if all(_is_number(raw.get(k)) and raw[k] > 0 for k in ("dt", "T")):
        dt, T = float(raw["dt"]), float(raw["T"])
        n = round(T / dt)
        if dt > T * (1 + 1e-12):
            errors.append(f"dt: {dt} exceeds the horizon T={T}")
        elif abs(n * dt - T) > 1e-9 * max(1.0, T):
            errors.append(f"T: {T} is not an integer multiple of dt={dt}")
    domain = raw.get("domain", [-1.0, 1.0])
    if not (isinstance(domain, list) and len(domain) == 2 and all(map(_is_number, domain)) and domain[1] > domain[0]):
        errors.append(f"domain: must be [v_min, v_max] with v_min < v_max, got {domain!r}")
        domain = [-1.0, 1.0]
    if raw.get("integrator") not in (None, "dirk2", "imex2"):
        errors.append(f"integrator: must be 'dirk2' or 'imex2', got {raw['integrator']!r}")
    times = raw.get("output_times", [])
    if not (isinstance(times, list) and all(map(_is_number, times))):
        errors.append("output_times: must be a list of numbers")
        times = []
    elif _is_number(raw.get("T")):
        bad = [t for t in times if t < 0 or t > raw["T"] * (1 + 1e-12)]
        if bad:
            errors.append(f"output_times: {bad} outside [0, T]")
    if raw.get("source", "solver") not in ("solver", "exact"):
        errors.append(f"source: must be 'solver' or 'exact', got {raw['source']!r}")
    if raw.get("fq_quadrature", "spline") not in ("spline", "trapezoid"):
        errors.append(f"fq_quadrature: must be 'spline' or 'trapezoid', got {raw['fq_quadrature']!r}")
    reference = None
    if raw.get("reference") is not None:
        reference, ref_errors = _parse_reference(raw["reference"])
        errors.extend(ref_errors)
    sweep = None
    if raw.get("sweep") is not None:
        sw = raw["sweep"]
        if not (isinstance(sw, dict) and set(sw) == {"parameter", "values"}):
            errors.append("sweep: must be {'parameter': name, 'values': [...]}")
        elif not (isinstance(sw["values"], list) and sw["values"]):
            errors.append("sweep.values: must be a non-empty list")
        else:
            sweep = SweepSpec(str(sw["parameter"]), tuple(sw["values"]))
    model = None
    if "model" in raw:
        try:
            model = model_from_config(raw["model"])
        except (ModelParameterError, TypeError, KeyError, ValueError) as exc:
            errors.append(f"model: {exc}")
    if model is not None and raw.get("source") == "exact" and model.name != "classical":
        errors.append("source: 'exact' is only available for the classical model")
    if errors:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(errors))
    return RunConfig(
        model=model,
        scheme=raw["scheme"],
        M=raw["M"],
        N=raw["N"],
        dt=float(raw["dt"]),
        T=float(raw["T"]),
        Nq=raw.get("Nq"),
        domain=(float(domain[0]), float(domain[1])),
        integrator=raw.get("integrator"),
        output_times=tuple(float(t) for t in times),
        source=raw.get("source", "solver"),
        reference=reference,
        sweep=sweep,
        fq_quadrature=raw.get("fq_quadrature", "spline"),
        output_dir=raw.get("output_dir"),
        raw=raw,
    )


def _parse_reference(ref):
    errors = []
    if not isinstance(ref, dict):
        return None, ["reference: must be an object"]
    if "path" in ref:
        if set(ref) != {"path"}:
            errors.append("reference: 'path' cannot be combined with other keys")
        return ReferenceSpec(kind="path", path=str(ref["path"])), errors
    if ref.get("kind") == "exact":
        extra = set(ref) - {"kind", "M"}
        if extra:
            errors.append(f"reference: unknown keys {sorted(extra)}")
        m = ref.get("M", 50)
        if not (_is_int(m) and m >= 0):
            errors.append("reference.M: must be a non-negative integer")
        return ReferenceSpec(kind="exact", M=m), errors
    extra = set(ref) - {"M", "N", "scheme"}
    if extra:
        errors.append(f"reference: unknown keys {sorted(extra)}")
    for key in ("M", "N"):
        if not _is_int(ref.get(key)):
            errors.append(f"reference.{key}: must be an integer")
    if ref.get("scheme", "mmsg") not in ("cdsg", "mmsg"):
        errors.append("reference.scheme: must be 'cdsg' or 'mmsg'")
    return ReferenceSpec(kind="run", M=ref.get("M"), N=ref.get("N"), scheme=ref.get("scheme", "mmsg")), errors


def parse_config(path) -> RunConfig:
    """Read and validate a JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return validate(raw)


__all__ = ["RunConfig", "ReferenceSpec", "SweepSpec", "parse_config", "validate"]
