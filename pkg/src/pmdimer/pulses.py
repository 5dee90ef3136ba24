"""Phase-modulated pulse pairs: envelopes and the lab-frame electric field."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

OMEGA_21 = 2 * np.pi * 1e-3
GAUSSIAN_CUTOFF = 6.0  # envelope is set to zero beyond this many sigma


@dataclass(frozen=True)
class GaussianEnvelope:
    sigma: float
    E0: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.E0 < 0:
            raise ValueError("E0 must be non-negative")

    @property
    def width(self) -> float:
        return self.sigma

    @property
    def support(self) -> float:
        """Half-width outside of which the envelope vanishes identically."""
        return GAUSSIAN_CUTOFF * self.sigma

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        val = self.E0 * np.exp(-0.5 * (u / self.sigma) ** 2)
        return np.where(np.abs(u) <= self.support, val, 0.0)

    def with_E0(self, E0: float) -> "GaussianEnvelope":
        return replace(self, E0=float(E0))

    def with_width(self, sigma: float) -> "GaussianEnvelope":
        return replace(self, sigma=float(sigma))


@dataclass(frozen=True)
class RectangularEnvelope:
    delta: float
    E0: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.E0 < 0:
            raise ValueError("E0 must be non-negative")

    @property
    def width(self) -> float:
        return self.delta

    @property
    def support(self) -> float:
        return 0.5 * self.delta

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) < 0.5 * self.delta, self.E0, 0.0)

    def with_E0(self, E0: float) -> "RectangularEnvelope":
        return replace(self, E0=float(E0))

    def with_width(self, delta: float) -> "RectangularEnvelope":
        return replace(self, delta=float(delta))


Envelope = Union[GaussianEnvelope, RectangularEnvelope]


def envelope_area(env: Envelope) -> float:
    """Time integral of the envelope (untruncated Gaussian)."""
    if isinstance(env, GaussianEnvelope):
        return env.E0 * env.sigma * np.sqrt(2 * np.pi)
    return env.E0 * env.delta


def normalize_to_area(target_area: float, env: Envelope) -> Envelope:
    """Rescale ``E0`` so that :func:`envelope_area` equals ``target_area``."""
    if target_area <= 0:
        raise ValueError("target area must be positive")
    unit = envelope_area(env.with_E0(1.0))
    return env.with_E0(target_area / unit)


@dataclass(frozen=True)
class PulseTrainConfig:
    """Train of identical pulse pairs with linear phase sweeps.

    Pulse ``j`` of pair ``m`` is centred at ``t_j + m T_rep`` and carries the
    phase ``Omega_j t + phi_j``.  With ``clock="absolute"`` the sweep term is
    evaluated at the running lab time ``t`` (the pulse's carrier is then shifted
    by ``Omega_j``); ``clock="pair"`` freezes it at the pair start ``m T_rep``.

    The default sweep rates put the whole modulation on the first pulse so the
    scanned second pulse carries no lab-clock frequency offset.
    """

    envelope: Envelope
    omega_L: float = 1.525
    t1: float = 0.0
    omega_1: float = -OMEGA_21
    omega_2: float = 0.0
    phi1_0: float = 0.0
    phi2_0: float = 0.0
    T_rep: float = 1.0
    M: int = 1000
    clock: str = "absolute"

    def __post_init__(self):
        if self.T_rep <= 0:
            raise ValueError("T_rep must be positive")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.clock not in ("absolute", "pair"):
            raise ValueError(f"unknown clock {self.clock!r}")

    @property
    def omega_21(self) -> float:
        return self.omega_2 - self.omega_1

    @property
    def phi_21(self) -> float:
        return self.phi2_0 - self.phi1_0

    @property
    def tau(self) -> np.ndarray:
        return np.arange(self.M) * self.T_rep

    def carrier(self, j: int) -> float:
        """Instantaneous carrier frequency of pulse ``j``."""
        if self.clock == "pair":
            return self.omega_L
        return self.omega_L + (self.omega_1 if j == 1 else self.omega_2)

    def pulse_phase(self, j: int, tau, t21: float = 0.0):
        """Constant phase of pulse ``j`` about its own centre.

        The field of pulse ``j`` is ``A(u) cos(carrier(j) u + pulse_phase)``
        with ``u`` the time from the pulse centre.
        """
        tau = np.asarray(tau, dtype=float)
        Omega = self.omega_1 if j == 1 else self.omega_2
        phi0 = self.phi1_0 if j == 1 else self.phi2_0
        centre = self.t1 + (t21 if j == 2 else 0.0)
        if self.clock == "pair":
            return Omega * tau + phi0
        return Omega * (tau + centre) + phi0

    def with_envelope(self, env: Envelope) -> "PulseTrainConfig":
        return replace(self, envelope=env)


def field_value(cfg: PulseTrainConfig, m: int, t, t21: float):
    """Electric field of pair ``m`` at local time ``t`` (measured from ``m T_rep``)."""
    if not 0 <= m < cfg.M:
        raise IndexError(f"pair index {m} outside 0..{cfg.M - 1}")
    t = np.asarray(t, dtype=float)
    t_abs = t + m * cfg.T_rep
    clock = t_abs if cfg.clock == "absolute" else m * cfg.T_rep
    total = np.zeros_like(t)
    for t_j, Omega, phi0 in (
        (cfg.t1, cfg.omega_1, cfg.phi1_0),
        (cfg.t1 + t21, cfg.omega_2, cfg.phi2_0),
    ):
        u = t - t_j
        total = total + cfg.envelope(u) * np.cos(cfg.omega_L * u + Omega * clock + phi0)
    return total
