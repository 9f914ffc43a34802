"""Run configuration: JSON schema and state/generator construction.

A config is one JSON object. Complex amplitudes are written either as a
number or as a ``[re, im]`` pair. Example::

    {"representation": "bosonic", "N": 4, "M": 2,
     "state": {"kind": "three_mode", "z": 0.91, "zeta": 0.5},
     "generator": {"axis": "z"}}

A fluctuating particle number replaces ``N`` with ``"P": {"1": 0.5, "2": 0.5}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from mmqi import distinguishable as dist
from mmqi import states
from mmqi.errors import ConfigError
from mmqi.fock import enumerate_basis
from mmqi.operators import as_direction

_complex = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_vec = {"type": "array", "items": _complex, "minItems": 1}
_unit = {"type": "number", "minimum": 0, "maximum": 1}
_amps = {
    "type": "object",
    "properties": {"z": _unit, "phi": {"type": "number"}, "alpha": _vec, "beta": _vec},
    "oneOf": [{"required": ["z"]}, {"required": ["alpha", "beta"]}],
}


def _kind(name, props=None, required=()):
    props = dict(props or {})
    props["kind"] = {"const": name}
    return {
        "type": "object",
        "properties": props,
        "required": ["kind", *required],
    }


STATE_SCHEMA = {
    "oneOf": [
        {
            **_kind("coherent", {"z": _unit, "phi": {"type": "number"}, "alpha": _vec, "beta": _vec}),
            "oneOf": [{"required": ["z"]}, {"required": ["alpha", "beta"]}],
        },
        _kind("noon", {"mode": {"type": "integer", "minimum": 0}}),
        _kind("three_mode", {"z": _unit, "zeta": _unit}, ["z", "zeta"]),
        _kind(
            "mixture",
            {
                "components": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        **_amps,
                        "properties": {**_amps["properties"], "weight": {"type": "number", "minimum": 0}},
                        "required": ["weight"],
                    },
                }
            },
            ["components"],
        ),
        _kind(
            "random_separable",
            {
                "n_components": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "weight_law": {"enum": ["uniform", "dirichlet"]},
            },
            ["seed"],
        ),
        _kind("product", {"particles": {"type": "array", "items": _amps, "minItems": 1}}, ["particles"]),
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "representation": {"enum": ["bosonic", "distinguishable"]},
        "N": {"type": "integer", "minimum": 0},
        "P": {
            "type": "object",
            "patternProperties": {"^[0-9]+$": {"type": "number", "minimum": 0}},
            "additionalProperties": False,
            "minProperties": 1,
        },
        "M": {"type": "integer", "minimum": 1},
        "state": STATE_SCHEMA,
        "generator": {
            "type": "object",
            "properties": {
                "axis": {"enum": ["x", "y", "z"]},
                "direction": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
            },
            "oneOf": [{"required": ["axis"]}, {"required": ["direction"]}],
        },
        "seed": {"type": "integer", "minimum": 0},
        "theta": {"type": "number"},
        "m": {"type": "integer", "minimum": 1},
        "repeats": {"type": "integer", "minimum": 0},
        "grid": {"type": "integer", "minimum": 10000},
        "window": {"type": "number", "exclusiveMinimum": 0},
        "z": _unit,
        "zeta": _unit,
        "k": {"type": "number"},
        "dk": {"type": "number"},
        "model": {"enum": ["closed_form", "density"]},
        "draws": {"type": "integer", "minimum": 1},
        "N_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "M_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "n_components": {"type": "integer", "minimum": 1},
        "directions": {"type": "integer", "minimum": 0},
        "noon_controls": {"type": "integer", "minimum": 0},
    },
    "not": {"required": ["N", "P"]},
    "additionalProperties": False,
}


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return cfg


def validate(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    if "P" in cfg:
        total = sum(cfg["P"].values())
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"config error at P: probabilities sum to {total!r}, expected 1")
    if "generator" in cfg and "direction" in cfg["generator"]:
        d = np.asarray(cfg["generator"]["direction"], dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ConfigError("config error at generator/direction: must be a unit vector")
    return cfg


def _c(value) -> complex:
    if isinstance(value, list):
        return complex(value[0], value[1])
    return complex(value)


def parse_amplitudes(spec: dict, M: int) -> states.ArmAmplitudes:
    if "z" in spec:
        return states.ArmAmplitudes.two_mode(spec["z"], spec.get("phi", 0.0), M)
    alpha = [_c(v) for v in spec["alpha"]]
    beta = [_c(v) for v in spec["beta"]]
    if len(alpha) != M or len(beta) != M:
        raise ConfigError(f"config error at state: alpha/beta must have length M={M}")
    return states.ArmAmplitudes(alpha, beta)


@dataclass(frozen=True)
class Experiment:
    representation: str
    M: int
    state_spec: dict
    direction: np.ndarray

    def build(self, N: int):
        """Construct the configured state in the N-particle sector."""
        spec = self.state_spec
        kind = spec["kind"]
        M = self.M
        if self.representation == "bosonic":
            basis = enumerate_basis(N, M)
            if kind == "coherent":
                return states.coherent_state(basis, parse_amplitudes(spec, M))
            if kind == "noon":
                return states.noon_state(basis, spec.get("mode", 0))
            if kind == "three_mode":
                return states.three_mode_example(basis, spec["z"], spec["zeta"])
            if kind == "mixture":
                comps = [(c["weight"], parse_amplitudes(c, M)) for c in spec["components"]]
                return states.separable_mixture(basis, states.MixtureSpec(tuple(comps)))
            if kind == "random_separable":
                return states.random_separable(
                    basis, spec.get("n_components", 4), spec["seed"], spec.get("weight_law", "uniform")
                )
            raise ConfigError(f"config error at state/kind: {kind!r} needs representation=distinguishable")
        if kind == "coherent":
            return dist.product_state([parse_amplitudes(spec, M)] * N)
        if kind == "product":
            parts = [parse_amplitudes(p, M) for p in spec["particles"]]
            if len(parts) != N:
                raise ConfigError(f"config error at state/particles: need N={N} particles")
            return dist.product_state(parts)
        if kind == "noon":
            return dist.noon_distinguishable(N, M, spec.get("mode", 0))
        if kind == "three_mode":
            return dist.product_state([states.three_mode_amplitudes(M, spec["z"], spec["zeta"])] * N)
        if kind == "mixture":
            comps = [parse_amplitudes(c, M) for c in spec["components"]]
            weights = [c["weight"] for c in spec["components"]]
            states.MixtureSpec(tuple(zip(weights, comps)))  # weight validation only
            return dist.product_mixture(weights, [dist.product_state([a] * N) for a in comps])
        if kind == "random_separable":
            return dist.random_product_mixture(
                N, M, spec.get("n_components", 4), spec["seed"], spec.get("weight_law", "uniform")
            )
        raise ConfigError(f"config error at state/kind: unknown kind {kind!r}")


def experiment(cfg: dict, default_state: dict | None = None) -> Experiment:
    spec = cfg.get("state", default_state)
    if spec is None:
        raise ConfigError("config error at <root>: a state spec is required")
    gen = cfg.get("generator", {"axis": "z"})
    direction = as_direction(gen.get("axis", gen.get("direction")))
    return Experiment(cfg.get("representation", "bosonic"), cfg.get("M", 1), spec, direction)


def particle_table(cfg: dict) -> list[tuple[int, float]] | None:
    """``[(N, P(N)), ...]`` for fluctuating configs, ``None`` for fixed N."""
    if "P" not in cfg:
        return None
    return sorted((int(n), float(p)) for n, p in cfg["P"].items() if p > 0)
