"""Flat key-value run configuration with validated defaults.

Keys are dotted names such as ``envelope.sigma_or_delta``; nested JSON
objects are flattened on load.  Energies and frequencies are in units of the
reference frequency, times in its inverse.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import DimerSystem, Geometry, ParticleSpec
from .propagator import STEPS_PER_CYCLE, PropagationSettings
from .pulses import (OMEGA_21, GaussianEnvelope, PulseTrainConfig, RectangularEnvelope,
                     normalize_to_area)
from .sweep import V_RATIO, Scenario, SweepSpec

DEFAULTS = {
    "particle.omega_eg": 1.5,
    "particle.omega_fe": 0.05,
    "particle.mu_e": 0.75,
    "particle.mu_f": 1.054,
    "particle.eps_g": 0.0,
    "coupling.v_ee": 0.01,
    "coupling.ratio": V_RATIO,
    "envelope.shape": "gaussian",
    "envelope.sigma_or_delta": 10.4,
    "t1": 0.0,
    "Omega21": OMEGA_21,
    "phi21_0": 0.0,
    "T_rep": 1.0,
    "M": 1000,
    "clock": "absolute",
    "t21.count": 1024,
    "t21.step": 0.5,
    "window_sigma": 120.0,
    "propagation.steps_per_cycle": STEPS_PER_CYCLE,
    "propagation.pad": 6.0,
    "demod.omega_M": 0.0,
    "demod.mode": "projection",
    "background.method": "poly",
    "sweep.route": "both",
}

OPTIONAL = {
    "coupling.v_ff", "geometry.r", "geometry.theta", "envelope.E0", "envelope.area",
    "omega_L", "delta_eg", "Omega1", "propagation.dt", "demod.tau_LI",
    "sweep.axis", "sweep.values",
}

FULL_GRID = {"t21.count": 4500, "window_sigma": 500.0}
DEFAULT_AREA = 0.1
DEFAULT_DELTA_EG = -0.025


class ConfigError(ValueError):
    """Invalid or contradictory configuration; ``offenders`` lists the keys."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


@dataclass
class RunConfig:
    scenario: Scenario
    sweep: SweepSpec | None
    resolved: dict

    @property
    def digest(self) -> str:
        return config_hash(self.resolved)

    @property
    def grid_digest(self) -> str:
        keys = [k for k in self.resolved
                if not k.startswith(("demod.", "background.", "sweep.", "window_sigma"))]
        return config_hash({k: self.resolved[k] for k in keys})


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def canonical(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical(cfg).encode()).hexdigest()


def read_config_file(path) -> dict:
    """Parse a JSON config or an emitted manifest; an empty file means defaults."""
    text = Path(path).read_text()
    if not text.strip():
        return {}
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a key-value object")
    if "config" in raw and "config_hash" in raw:
        raw = raw["config"]
    return _flatten(raw)


def resolve(user: dict, full_grid: bool = False) -> dict:
    """Merge user keys with defaults and check for contradictions."""
    unknown = sorted(k for k in user if k not in DEFAULTS and k not in OPTIONAL)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}", unknown)
    pairs = [("envelope.E0", "envelope.area"), ("omega_L", "delta_eg")]
    for a, b in pairs:
        if a in user and b in user:
            raise ConfigError(f"{a} and {b} are mutually exclusive", [a, b])
    geo = {"geometry.r", "geometry.theta"} & set(user)
    if geo and ({"coupling.v_ee", "coupling.v_ff"} & set(user)):
        raise ConfigError("give either geometry or coupling constants",
                          sorted(geo | ({"coupling.v_ee", "coupling.v_ff"} & set(user))))
    if len(geo) == 1:
        raise ConfigError("geometry needs both r and theta", sorted(geo))
    cfg = dict(DEFAULTS)
    if full_grid:
        cfg.update(FULL_GRID)
    cfg.update(user)
    if "envelope.E0" not in cfg and "envelope.area" not in cfg:
        cfg["envelope.area"] = DEFAULT_AREA
    if "omega_L" not in cfg and "delta_eg" not in cfg:
        cfg["delta_eg"] = DEFAULT_DELTA_EG
    if "sweep.axis" in cfg and "sweep.values" not in cfg:
        raise ConfigError("sweep.axis needs sweep.values", ["sweep.values"])
    return cfg


def _num(cfg, key, kind=float):
    try:
        return kind(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {cfg[key]!r}", [key]) from exc


def build(cfg: dict) -> RunConfig:
    """Construct validated library objects from a resolved configuration."""
    try:
        particle = ParticleSpec.from_transitions(
            _num(cfg, "particle.omega_eg"), _num(cfg, "particle.omega_fe"),
            _num(cfg, "particle.mu_e"), _num(cfg, "particle.mu_f"),
            _num(cfg, "particle.eps_g"))
        if "geometry.r" in cfg:
            system = DimerSystem.from_geometry(
                particle, Geometry(_num(cfg, "geometry.r"), _num(cfg, "geometry.theta")))
        else:
            v_ee = _num(cfg, "coupling.v_ee")
            v_ff = cfg.get("coupling.v_ff")
            v_ff = _num(cfg, "coupling.ratio") * v_ee if v_ff is None else float(v_ff)
            system = DimerSystem(particle, v_ee, v_ff)

        shape = str(cfg["envelope.shape"]).lower()
        width = _num(cfg, "envelope.sigma_or_delta")
        if shape == "gaussian":
            env = GaussianEnvelope(width, 1.0)
        elif shape == "rectangular":
            env = RectangularEnvelope(width, 1.0)
        else:
            raise ConfigError(f"unknown envelope shape {shape!r}", ["envelope.shape"])
        if "envelope.E0" in cfg:
            env = env.with_E0(_num(cfg, "envelope.E0"))
        else:
            env = normalize_to_area(_num(cfg, "envelope.area"), env)

        if "omega_L" in cfg:
            omega_L = _num(cfg, "omega_L")
        else:
            omega_L = particle.omega_eg - _num(cfg, "delta_eg")
        O21 = _num(cfg, "Omega21")
        O1 = _num(cfg, "Omega1") if "Omega1" in cfg else -O21
        pulses = PulseTrainConfig(
            env, omega_L=omega_L, t1=_num(cfg, "t1"), omega_1=O1, omega_2=O1 + O21,
            phi1_0=0.0, phi2_0=_num(cfg, "phi21_0"), T_rep=_num(cfg, "T_rep"),
            M=_num(cfg, "M", int), clock=str(cfg["clock"]))

        if "propagation.dt" in cfg:
            prop = PropagationSettings(dt=_num(cfg, "propagation.dt"),
                                       pad=_num(cfg, "propagation.pad"))
        else:
            prop = PropagationSettings.for_carrier(
                omega_L, _num(cfg, "propagation.steps_per_cycle", int),
                pad=_num(cfg, "propagation.pad"))
        scenario = Scenario(system, pulses, prop, n_t21=_num(cfg, "t21.count", int),
                            dt21=_num(cfg, "t21.step"), window_sigma=_num(cfg, "window_sigma"),
                            omega_M=_num(cfg, "demod.omega_M"),
                            demod_mode=str(cfg["demod.mode"]),
                            background=str(cfg["background.method"]))
        sweep = None
        if "sweep.axis" in cfg:
            sweep = SweepSpec(str(cfg["sweep.axis"]), np.asarray(cfg["sweep.values"], float),
                              scenario, route=str(cfg["sweep.route"]),
                              ratio=_num(cfg, "coupling.ratio"))
    except ConfigError:
        raise
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(scenario, sweep, cfg)


def load_config(path=None, full_grid: bool = False, overrides: dict | None = None) -> RunConfig:
    user = read_config_file(path) if path is not None else {}
    if overrides:
        user.update(overrides)
    return build(resolve(user, full_grid))
