"""Scenario factory shared by the test modules."""

from __future__ import annotations

from dataclasses import replace

from pmdimer import (DimerSystem, GaussianEnvelope, ParticleSpec, PulseTrainConfig, Scenario,
                     normalize_to_area)
from pmdimer.sweep import V_RATIO

AREA = 0.1
SIGMA_REF = 10.4


def make_scenario(sigma=SIGMA_REF, v=0.01, E0=None, full=True, dt_scale=1.0, **kw) -> Scenario:
    """Reference parameters with Gaussian pulses of area 0.1 unless ``E0`` is given."""
    env = normalize_to_area(AREA, GaussianEnvelope(sigma, 1.0))
    if E0 is not None:
        env = env.with_E0(E0)
    sc = Scenario(DimerSystem(ParticleSpec(), v, V_RATIO * v), PulseTrainConfig(env), **kw)
    if dt_scale != 1.0:
        sc = replace(sc, propagation=replace(sc.propagation, dt=sc.propagation.dt * dt_scale))
    return sc.full_grid() if full else sc
