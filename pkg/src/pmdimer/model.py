"""Two coupled three-level emitters: product basis, static Hamiltonian, operators.

States of a single particle are ``g``, ``e`` and ``f``; the two-particle
product basis is ordered as ``BASIS_LABELS``.  Energies are in units of the
reference frequency and hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

LEVELS = ("g", "e", "f")
BASIS_LABELS = ("gg", "ge", "eg", "gf", "fg", "ee", "ef", "fe", "ff")
INDEX = {label: k for k, label in enumerate(BASIS_LABELS)}

# Magic angle, zero of 1 - 3 cos^2(theta).
MAGIC_ANGLE = float(np.arccos(1.0 / np.sqrt(3.0)))


@dataclass(frozen=True)
class ParticleSpec:
    """A single three-level emitter with transitions g-e and g-f only."""

    eps_g: float = 0.0
    eps_e: float = 1.5
    eps_f: float = 1.55
    mu_e: float = 0.75
    mu_f: float = 1.054

    def __post_init__(self):
        if not (self.eps_g < self.eps_e < self.eps_f):
            raise ValueError(
                f"level energies must satisfy eps_g < eps_e < eps_f, got "
                f"{self.eps_g}, {self.eps_e}, {self.eps_f}"
            )
        if self.mu_e <= 0 or self.mu_f <= 0:
            raise ValueError("transition dipoles must be positive")

    @property
    def omega_eg(self) -> float:
        return self.eps_e - self.eps_g

    @property
    def omega_fg(self) -> float:
        return self.eps_f - self.eps_g

    @property
    def omega_fe(self) -> float:
        return self.eps_f - self.eps_e

    @classmethod
    def from_transitions(cls, omega_eg, omega_fe, mu_e=0.75, mu_f=1.054, eps_g=0.0):
        return cls(eps_g, eps_g + omega_eg, eps_g + omega_eg + omega_fe, mu_e, mu_f)


@dataclass(frozen=True)
class Geometry:
    """Separation ``r`` and angle ``theta`` between separation vector and dipoles."""

    r: float
    theta: float

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r < 0:
            raise ValueError(f"separation must be non-negative and finite, got {self.r}")
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


def dipole_coupling(geom: Geometry, mu_a: float, mu_b: float) -> float:
    """Point-dipole coupling ``mu_a mu_b (1 - 3 cos^2 theta) / r^3``."""
    if geom.r == 0:
        raise ZeroDivisionError("point-dipole coupling is singular at r = 0")
    return mu_a * mu_b * (1.0 - 3.0 * np.cos(geom.theta) ** 2) / geom.r**3


@dataclass(frozen=True)
class DimerSystem:
    """Two identical particles coupled by resonant dipole-dipole terms.

    Only the ``ge <-> eg`` (``v_ee``) and ``gf <-> fg`` (``v_ff``) exchange
    terms are kept; the off-resonant ``ge <-> fg`` coupling is dropped.
    """

    particle: ParticleSpec = ParticleSpec()
    v_ee: float = 0.0
    v_ff: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.v_ee) and np.isfinite(self.v_ff)):
            raise ValueError("couplings must be finite")

    @classmethod
    def from_geometry(cls, particle: ParticleSpec, geom: Geometry) -> "DimerSystem":
        return cls(
            particle,
            v_ee=dipole_coupling(geom, particle.mu_e, particle.mu_e),
            v_ff=dipole_coupling(geom, particle.mu_f, particle.mu_f),
        )

    def with_couplings(self, v_ee, v_ff) -> "DimerSystem":
        return DimerSystem(self.particle, float(v_ee), float(v_ff))

    def v(self, alpha: str) -> float:
        return {"e": self.v_ee, "f": self.v_ff}[alpha]

    def mu(self, alpha: str) -> float:
        return {"e": self.particle.mu_e, "f": self.particle.mu_f}[alpha]

    def omega(self, alpha: str) -> float:
        return {"e": self.particle.omega_eg, "f": self.particle.omega_fg}[alpha]

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        return build_static_hamiltonian(self)

    @cached_property
    def dipole(self) -> np.ndarray:
        return build_dipole_operator(self)

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenvectors (columns) of the static Hamiltonian."""
        return np.linalg.eigh(self.hamiltonian)


def _single_particle_energies(p: ParticleSpec) -> dict[str, float]:
    return {"g": p.eps_g, "e": p.eps_e, "f": p.eps_f}


def build_static_hamiltonian(sys: DimerSystem) -> np.ndarray:
    """``H_1 + H_2 + V_12`` in the product basis (9x9, Hermitian)."""
    eps = _single_particle_energies(sys.particle)
    H = np.zeros((9, 9), dtype=complex)
    for label, k in INDEX.items():
        H[k, k] = eps[label[0]] + eps[label[1]]
    for a, b, v in (("ge", "eg", sys.v_ee), ("gf", "fg", sys.v_ff)):
        H[INDEX[a], INDEX[b]] = v
        H[INDEX[b], INDEX[a]] = np.conj(v)
    return H


def _one_body(single: np.ndarray) -> np.ndarray:
    """Lift a 3x3 single-particle operator to ``O x 1 + 1 x O`` in the 9-dim basis."""
    order = [LEVELS.index(a) * 3 + LEVELS.index(b) for a, b in BASIS_LABELS]
    full = np.kron(single, np.eye(3)) + np.kron(np.eye(3), single)
    return full[np.ix_(order, order)]


def build_dipole_operator(sys: DimerSystem) -> np.ndarray:
    """Field-independent coupling operator; the light-matter term is ``-E(t) D``."""
    p = sys.particle
    d = np.zeros((3, 3), dtype=complex)
    d[0, 1] = d[1, 0] = p.mu_e
    d[0, 2] = d[2, 0] = p.mu_f
    return _one_body(d)


def fluorescence_operator() -> np.ndarray:
    """Number of excited particles, diagonal in the product basis."""
    return _one_body(np.diag([0.0, 1.0, 1.0]).astype(complex))


def basis_state(label: str) -> np.ndarray:
    psi = np.zeros(9, dtype=complex)
    psi[INDEX[label]] = 1.0
    return psi


def collective_eigenbasis(sys: DimerSystem) -> list[tuple[str, float, np.ndarray]]:
    """Symmetric and antisymmetric two-particle states with their energies.

    The ``gf`` manifold sits at ``eps_g + eps_f +- v_ff``.
    """
    eps = _single_particle_energies(sys.particle)
    s = 1.0 / np.sqrt(2.0)
    out = [("gg", 2 * eps["g"], basis_state("gg"))]
    for pair, v in (("ge", sys.v_ee), ("gf", sys.v_ff), ("ef", 0.0)):
        a, b = basis_state(pair), basis_state(pair[::-1])
        base = eps[pair[0]] + eps[pair[1]]
        out.append((pair + "+", base + v, s * (a + b)))
        out.append((pair + "-", base - v, s * (a - b)))
        if pair == "gf":
            out.append(("ee", 2 * eps["e"], basis_state("ee")))
    out.append(("ff", 2 * eps["f"], basis_state("ff")))
    return out
