"""Run configuration: one JSON document, schema-checked, with dotted overrides."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import jsonschema

from .ensemble import EnsembleConfig
from .functionals import AlphaSpec
from .grid import TorusGrid
from .initial import MeasureIC, measure_from_config
from .noise import NoiseSpec, noise_from_config
from .stepper import CORRECTIONS, FACE_MEANS, SCHEMES, SimParams

OUT_DIR_ENV = "STFE_OUT_DIR"


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"N": {"type": "integer", "minimum": 8}},
        },
        "sim": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": _number,
                "T": _pos,
                "dt": {"oneOf": [_pos, {"type": "null"}]},
                "dt_safety": _pos,
                "scheme": {"enum": list(SCHEMES)},
                "face_mean": {"enum": list(FACE_MEANS)},
                "correction": {"enum": list(CORRECTIONS)},
                "solver_tol": _pos,
                "clip_report": {"type": "boolean"},
                "noise_substeps": {"type": "integer", "minimum": 1},
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["zero", "single", "pair", "power", "explicit"]},
                "k": {"type": "integer"},
                "lambda": _number,
                "s": _number,
                "c": _number,
                "k_max": {"type": "integer", "minimum": 0},
                "coeffs": {
                    "type": "array",
                    "items": {"type": "array", "prefixItems": [{"type": "integer"}, _number],
                              "minItems": 2, "maxItems": 2},
                },
                "amplitude": _number,
                "cutoff": {"oneOf": [_pos, {"type": "null"}]},
            },
        },
        "ic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eps": _pos,
                "atoms": {
                    "type": "array",
                    "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                },
                "density": {
                    "oneOf": [
                        {"type": "null"},
                        {"type": "object", "required": ["preset"],
                         "properties": {"preset": {"enum": ["constant", "cosine", "bump"]}}},
                    ]
                },
            },
        },
        "alphas": {"type": "array", "items": _number},
        "seed": {"type": "integer", "minimum": 0},
        "ensemble": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "replicates": {"type": "integer", "minimum": 1},
                "base_seed": {"type": "integer", "minimum": 0},
                "jobs": {"type": "integer", "minimum": 1},
                "monitored": {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "string"}}]},
                "mass_scalings": {"type": "array", "items": _pos},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "snapshot_every": {"type": "integer", "minimum": 0},
                "diagnostics_every": {"type": "integer", "minimum": 1},
            },
        },
    },
}

DEFAULTS: dict = {
    "grid": {"N": 128},
    "sim": {
        "n": 8.0 / 3.0,
        "T": 0.01,
        "dt": None,
        "dt_safety": 0.1,
        "scheme": "semi_implicit",
        "face_mean": "arithmetic",
        "correction": "discrete",
        "solver_tol": 1e-12,
        "clip_report": False,
        "noise_substeps": 1,
    },
    "noise": {"family": "zero"},
    "ic": {"eps": 0.05, "atoms": [], "density": {"preset": "cosine", "mean": 0.5, "amp": 0.25, "k": 1}},
    "alphas": [-0.8],
    "seed": 0,
    "ensemble": {"replicates": 8, "base_seed": 0, "jobs": 1, "monitored": None, "mass_scalings": []},
    "output": {"dir": "stfe_out", "snapshot_every": 0, "diagnostics_every": 10},
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("noise", "density"):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def parse_override(text: str) -> tuple[list[str], Any]:
    """``"sim.dt=1e-6"`` -> ``(["sim", "dt"], 1e-06)``; values are JSON, else plain strings."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key.path=value")
    key, raw = text.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(cfg: dict, overrides: Sequence[str]) -> dict:
    cfg = copy.deepcopy(cfg)
    for text in overrides:
        path, value = parse_override(text)
        node = cfg
        for part in path[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {text!r}: {part!r} is not a section")
            node = nxt
        node[path[-1]] = value
    return cfg


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None


def load_config(path: str | os.PathLike | None, overrides: Sequence[str] = ()) -> dict:
    """Read, merge over defaults, apply overrides and validate.

    Both the file and the merged result are schema-checked, so unknown keys
    are rejected wherever they appear.
    """
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object")
        validate(raw)
    base = copy.deepcopy(DEFAULTS)
    if "ic" in raw:
        # a given IC replaces the default shape; only eps falls back to its default
        base["ic"] = {"eps": DEFAULTS["ic"]["eps"], "atoms": [], "density": None}
    cfg = apply_overrides(_merge(base, raw), overrides)
    if isinstance(cfg.get("ic"), dict):
        # an ic replaced wholesale by an override gets the same fallbacks
        for key, val in (("eps", DEFAULTS["ic"]["eps"]), ("atoms", []), ("density", None)):
            cfg["ic"].setdefault(key, val)
    if os.environ.get(OUT_DIR_ENV):
        cfg["output"]["dir"] = os.environ[OUT_DIR_ENV]
    validate(cfg)
    return cfg


@dataclass
class RunConfig:
    """Typed view of a validated configuration document."""

    raw: dict
    grid: TorusGrid
    sim: SimParams
    noise: NoiseSpec
    ic: MeasureIC
    eps: float
    alphas: list[AlphaSpec]
    seed: int
    noise_substeps: int
    out_dir: Path
    snapshot_every: int
    diagnostics_every: int

    @classmethod
    def from_dict(cls, cfg: dict) -> "RunConfig":
        try:
            grid = TorusGrid(cfg["grid"]["N"])
            sim_cfg = dict(cfg["sim"])
            substeps = sim_cfg.pop("noise_substeps")
            sim = SimParams(**sim_cfg)
            eps = cfg["ic"]["eps"]
            noise = noise_from_config(cfg["noise"], grid, default_cutoff=eps)
            ic = measure_from_config(cfg["ic"], grid)
            alphas = [AlphaSpec(a, sim.n) for a in cfg["alphas"]]
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        out = cfg["output"]
        return cls(cfg, grid, sim, noise, ic, eps, alphas, cfg["seed"], substeps,
                   Path(out["dir"]), out["snapshot_every"], out["diagnostics_every"])

    def ensemble(self) -> EnsembleConfig:
        e = self.raw["ensemble"]
        try:
            return EnsembleConfig(
                grid=self.grid, sim=self.sim, noise=self.noise, ic=self.ic, eps=self.eps,
                replicates=e["replicates"], base_seed=e["base_seed"], alphas=self.alphas,
                monitored=e["monitored"], mass_scalings=e["mass_scalings"],
                diag_every=self.diagnostics_every, jobs=e["jobs"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
