"""JSON run configuration.

Complex numbers are written as two-element arrays [re, im].  Unknown keys
are rejected so that typos fail loudly instead of silently using a
default.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import ConfigError, ValidationError
from .evolution import EvolutionConfig
from .fock import TruncatedSpace
from .measurement import ObservableSpec, dpo_observables
from .model import (DpoParams, ModelSpec, dpo_laser_field, dpo_model,
                    trivial_model)
from .signals import ZERO, Constant, FieldProfile, Harmonic, TestFunction


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    data["_sha256"] = hashlib.sha256(raw.encode()).hexdigest()
    return data


def _complex(node, where: str) -> complex:
    if isinstance(node, (int, float)):
        return complex(node)
    if (isinstance(node, list) and len(node) == 2
            and all(isinstance(x, (int, float)) for x in node)):
        return complex(node[0], node[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair")


def _take(node: dict, where: str, required=(), optional=()):
    if not isinstance(node, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(node) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in node]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    return node


def build_model(cfg: dict):
    """Returns (model, params_or_None)."""
    node = _take(cfg, "model", required=("type",),
                 optional=("truncation", "params", "d"))
    kind = node["type"]
    if kind == "trivial":
        d = node.get("d")
        if not isinstance(d, int) or d < 1:
            raise ConfigError("model: trivial model needs integer d >= 1")
        return trivial_model(d), None
    if kind != "dpo":
        raise ConfigError(f"model: unknown type {kind!r}")
    tr = _take(node.get("truncation", {}), "model.truncation",
               required=("n_max", "m_max"))
    space = TruncatedSpace(int(tr["n_max"]), int(tr["m_max"]))
    p = _take(node.get("params", {}), "model.params",
              required=("omega_c", "g", "kappa", "nbar", "kappa_p", "nbar_p",
                        "alpha", "beta"),
              optional=("theta3", "lambda_drive"))
    for key in ("alpha", "beta"):
        if not isinstance(p[key], list) or len(p[key]) != 4:
            raise ConfigError(f"model.params.{key}: expected 4 entries")
    params = DpoParams(
        omega_c=float(p["omega_c"]), g=float(p["g"]),
        kappa=float(p["kappa"]), nbar=float(p["nbar"]),
        kappa_p=float(p["kappa_p"]), nbar_p=float(p["nbar_p"]),
        alpha=tuple(_complex(x, "model.params.alpha") for x in p["alpha"]),
        beta=tuple(_complex(x, "model.params.beta") for x in p["beta"]),
        theta3=float(p.get("theta3", 0.0)),
        lambda_drive=_complex(p.get("lambda_drive", 0.0),
                              "model.params.lambda_drive"))
    try:
        model = dpo_model(params, space)
    except ValidationError:
        # parameter constraint violations keep their own exit code
        raise
    except Exception as exc:
        raise ConfigError(f"model: {exc}") from exc
    return model, params


def build_observables(cfg: dict, model: ModelSpec, params) -> ObservableSpec:
    node = _take(cfg, "observables", required=("type", "horizon"),
                 optional=("eigenvalues",))
    horizon = float(node["horizon"])
    if node["type"] == "dpo":
        if params is None:
            raise ConfigError("observables: dpo observables need a dpo model")
        return dpo_observables(params, horizon)
    if node["type"] == "counting":
        ev = node.get("eigenvalues")
        if ev is None:
            raise ConfigError("observables: counting type needs eigenvalues")
        ev = np.asarray(ev, dtype=float)
        if ev.ndim != 2 or ev.shape[1] != model.d:
            raise ConfigError(f"observables.eigenvalues: expected shape "
                              f"(m, {model.d})")
        return ObservableSpec.counting_only(model.d, horizon, ev)
    raise ConfigError(f"observables: unknown type {node['type']!r}")


def _build_signal(node, where: str):
    node = dict(node) if isinstance(node, dict) else node
    if not isinstance(node, dict) or "type" not in node:
        raise ConfigError(f"{where}: expected an object with a type")
    kind = node.pop("type")
    if kind == "zero":
        if node:
            raise ConfigError(f"{where}: unknown keys {sorted(node)}")
        return ZERO
    if kind == "constant":
        value = _complex(node.pop("value", 0.0), where)
        if node:
            raise ConfigError(f"{where}: unknown keys {sorted(node)}")
        return Constant(value)
    if kind == "harmonic":
        amp = _complex(node.pop("amplitude", 1.0), where)
        phase = float(node.pop("phase", 0.0))
        freq = float(node.pop("frequency", 0.0))
        if node:
            raise ConfigError(f"{where}: unknown keys {sorted(node)}")
        return Harmonic(amp, phase, freq)
    raise ConfigError(f"{where}: unknown signal type {kind!r}")


def build_field(cfg, model: ModelSpec, params, horizon: float) -> FieldProfile:
    if cfg is None:
        return FieldProfile((ZERO,) * model.d, horizon)
    node = _take(cfg, "field", required=("type",),
                 optional=("window", "signals"))
    window = float(node.get("window", horizon))
    if node["type"] == "laser":
        if params is None:
            raise ConfigError("field: laser profile needs a dpo model")
        return dpo_laser_field(params, window)
    if node["type"] == "signals":
        sigs = node.get("signals")
        if not isinstance(sigs, list) or len(sigs) != model.d:
            raise ConfigError(f"field.signals: expected {model.d} entries")
        return FieldProfile(tuple(_build_signal(s, f"field.signals[{i}]")
                                  for i, s in enumerate(sigs)), window)
    raise ConfigError(f"field: unknown type {node['type']!r}")


def build_evolution(cfg) -> EvolutionConfig:
    if cfg is None:
        return EvolutionConfig()
    node = _take(cfg, "evolution", optional=(
        "dt", "method", "rtol", "atol", "max_steps", "contractivity_check",
        "contractivity_tol"))
    try:
        return EvolutionConfig(
            dt=float(node.get("dt", 1e-2)),
            method=node.get("method", "rk4"),
            rtol=float(node.get("rtol", 1e-8)),
            atol=float(node.get("atol", 1e-10)),
            max_steps=int(node.get("max_steps", 2_000_000)),
            contractivity_check=node.get("contractivity_check", "auto"),
            contractivity_tol=float(node.get("contractivity_tol", 1e-6)))
    except ValueError as exc:
        raise ConfigError(f"evolution: {exc}") from exc


def build_initial_state(cfg, model: ModelSpec) -> np.ndarray:
    space = model.space
    if cfg is None:
        cfg = {"type": "vacuum"}
    node = _take(cfg, "initial_state", required=("type",),
                 optional=("n", "m"))
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    if node["type"] == "vacuum":
        rho[space.index(0, 0), space.index(0, 0)] = 1.0
        return rho
    if node["type"] == "fock":
        n = int(node.get("n", 0))
        m = int(node.get("m", 0))
        if not (0 <= n <= space.n_max and 0 <= m <= space.m_max):
            raise ConfigError("initial_state: occupation outside truncation")
        rho[space.index(n, m), space.index(n, m)] = 1.0
        return rho
    raise ConfigError(f"initial_state: unknown type {node['type']!r}")


def build_kappa(cfg, m: int) -> TestFunction:
    if cfg is None:
        return TestFunction.zero(m)
    node = _take(cfg, "kappa", required=("breakpoints", "values"))
    breaks = node["breakpoints"]
    values = np.asarray(node["values"], dtype=float)
    if values.ndim != 2 or values.shape[1] != m:
        raise ConfigError(f"kappa.values: expected shape (n_intervals, {m})")
    try:
        return TestFunction(np.asarray(breaks, dtype=float), values)
    except ValueError as exc:
        raise ConfigError(f"kappa: {exc}") from exc
