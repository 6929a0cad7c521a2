"""JSON market specification files and ``key=value`` overrides.

Sector shorthand::

    {"n": 5, "lambda": 0.01, "eta": 0.01, "beta0": 0.1, "sigma": 1.0,
     "rho_eps": 0.3, "rho_xi": 0.1}

General matrices (correlations with unit diagonal; ``sigma`` scales the
noise)::

    {"lambda": 0.01, "eta": 0.01, "beta0": [0.05, 0.1], "sigma": [1, 2],
     "corr_noise": [[1, 0.5], [0.5, 1]], "corr_trend": [[1, -0.3], [-0.3, 1]]}

``beta`` may replace ``beta0`` to give raw trend strengths.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import SpecError
from .market import ValidatedSpec, equicorrelation, make_spec

SPEC_KEYS = {"n", "lambda", "eta", "beta0", "beta", "sigma", "rho_eps", "rho_xi", "corr_noise", "corr_trend"}
DEFAULTS = {"lambda": 0.01, "eta": 0.01, "beta0": 0.1, "sigma": 1.0, "rho_eps": 0.0, "rho_xi": 0.0}


class SpecParseError(SpecError):
    """Malformed spec file or override."""


def parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise SpecParseError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        raise SpecParseError(f"cannot parse value of override {key!r}: {raw!r}") from None
    return key, value


def apply_overrides(data: dict, overrides, known=SPEC_KEYS) -> dict:
    out = dict(data)
    for item in overrides or ():
        key, value = parse_override(item) if isinstance(item, str) else item
        if key not in known:
            raise SpecParseError(f"unknown parameter {key!r}; expected one of {sorted(known)}")
        out[key] = value
    return out


def load_spec_dict(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise SpecParseError(f"{path}: top level must be a JSON object")
    unknown = set(data) - SPEC_KEYS
    if unknown:
        raise SpecParseError(f"{path}: unknown keys {sorted(unknown)}")
    return data


def spec_from_dict(data: dict) -> ValidatedSpec:
    d = {**DEFAULTS, **data}
    try:
        lam, eta = float(d["lambda"]), float(d["eta"])
        if "corr_noise" in data or "corr_trend" in data:
            ref = data.get("corr_noise", data.get("corr_trend"))
            n = len(ref)
            noise = np.asarray(data.get("corr_noise", np.eye(n)), dtype=float)
            trend = np.asarray(data.get("corr_trend", np.eye(n)), dtype=float)
        else:
            if "n" not in data:
                raise SpecParseError("sector shorthand needs 'n'")
            n = int(d["n"])
            if n < 1:
                raise SpecParseError("'n' must be a positive integer")
            noise = equicorrelation(n, float(d["rho_eps"]))
            trend = equicorrelation(n, float(d["rho_xi"]))
        if "n" in data and int(data["n"]) != noise.shape[0]:
            raise SpecParseError("'n' disagrees with the matrix size")
        if "beta" in data:
            q = 1.0 - lam
            beta0 = np.asarray(data["beta"], dtype=float) / math.sqrt(1.0 - q * q)
        else:
            beta0 = np.asarray(d["beta0"], dtype=float)
        sigma = np.asarray(d["sigma"], dtype=float)
        if noise.ndim != 2 or trend.ndim != 2:
            raise SpecParseError("correlation matrices must be 2-D arrays")
        if beta0.ndim > 1 or sigma.ndim > 1 or (beta0.ndim and beta0.size != noise.shape[0]) or (
            sigma.ndim and sigma.size != noise.shape[0]
        ):
            raise SpecParseError("beta0/sigma must be scalars or length-n lists")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecParseError(f"malformed spec: {exc}") from None
    return make_spec(lam, eta, beta0, sigma, noise, trend)


def load_spec(path=None, overrides=()) -> ValidatedSpec:
    """Read a spec file (optional) and apply ``key=value`` overrides."""
    data = load_spec_dict(path) if path else {}
    data = apply_overrides(data, overrides)
    return spec_from_dict(data)
