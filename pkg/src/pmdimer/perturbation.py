"""Perturbative first- and second-harmonic signals of the coupled pair.

Every signal is assembled from two envelope integrals: the single-interaction
amplitude ``A_j(w)`` and the time-ordered double-interaction amplitude
``A_jj(wf, wi)``.  Overlap of the two pulses is neglected.  Rectangular
pulses have closed forms; other envelopes use nested quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
from scipy.special import dawsn

from .demod import ComplexSpectrum
from .model import DimerSystem
from .pulses import Envelope, GaussianEnvelope, PulseTrainConfig, RectangularEnvelope

QUAD_RANGE = 8.0  # Gaussian quadrature half-range in sigma
QUAD_START = 4001
QUAD_TOL = 1e-9
TAYLOR_SWITCH = 1e-4


class QuadratureError(RuntimeError):
    pass


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def single_amplitude(env: Envelope, omega_L: float, omega):
    """``int A(t) exp(i (w - omega_L) t) dt``, real for symmetric envelopes."""
    d = np.asarray(omega, dtype=float) - omega_L
    if isinstance(env, GaussianEnvelope):
        s = env.sigma
        return env.E0 * s * np.sqrt(2 * np.pi) * np.exp(-0.5 * (d * s) ** 2)
    if isinstance(env, RectangularEnvelope):
        return env.E0 * env.delta * _sinc(0.5 * d * env.delta)
    raise TypeError(f"unsupported envelope {type(env).__name__}")


def _sinc_derivatives(y: float, n: int) -> list[float]:
    """``d^k/dy^k sin(y)/y`` at ``y`` for ``k = 0..n``."""
    if abs(y) < 1.0:
        out = []
        for k in range(n + 1):
            acc = 0.0
            for m in range(30):
                if 2 * m < k:
                    continue
                acc += ((-1) ** m / factorial(2 * m + 1) * factorial(2 * m)
                        / factorial(2 * m - k) * y ** (2 * m - k))
            out.append(acc)
        return out
    # y s(y) = sin y, differentiated k times
    out = [np.sin(y) / y]
    for k in range(1, n + 1):
        out.append((np.sin(y + k * np.pi / 2) - k * out[k - 1]) / y)
    return out


def _rect_double(E0, delta, a, c):
    """Closed form for a rectangular pulse with ``a = wi - wL``, ``c = wf - 2 wL``."""
    x = 0.5 * a * delta
    if abs(a * delta) >= TAYLOR_SWITCH:
        return (E0**2 * delta / (1j * a)
                * (_sinc(0.5 * c * delta) - np.exp(-1j * x) * _sinc(0.5 * (c - a) * delta)))
    # removable singularity: expand h(a) = e^{-ix} sinc(y0 - x) to third order
    s = _sinc_derivatives(0.5 * c * delta, 3)
    total = 0.0 + 0.0j
    for n in range(1, 4):
        g = sum(comb(n, k) * (1j) ** (n - k) * s[k] for k in range(n + 1))
        g *= (-0.5 * delta) ** n
        total += g * a ** (n - 1) / factorial(n)
    return 1j * E0**2 * delta * total


def _gauss_double_trapz(env, omega_L, omega_f, omega_i, n):
    s = env.sigma
    t = np.linspace(-QUAD_RANGE * s, QUAD_RANGE * s, n)
    h = t[1] - t[0]
    A = env.E0 * np.exp(-0.5 * (t / s) ** 2)
    inner_f = A * np.exp(1j * (omega_i - omega_L) * t)
    inner = np.concatenate([[0.0], np.cumsum(0.5 * h * (inner_f[1:] + inner_f[:-1]))])
    outer_f = A * np.exp(1j * (omega_f - omega_i - omega_L) * t) * inner
    return h * (np.sum(outer_f) - 0.5 * (outer_f[0] + outer_f[-1]))


def _gauss_double(env, omega_L, omega_f, omega_i):
    """Nested trapezoid with one Richardson step, refined until converged."""
    n = QUAD_START
    coarse = _gauss_double_trapz(env, omega_L, omega_f, omega_i, n)
    prev = None
    for _ in range(8):
        n2 = 2 * n - 1
        fine = _gauss_double_trapz(env, omega_L, omega_f, omega_i, n2)
        est = (4 * fine - coarse) / 3
        if prev is not None and abs(est - prev) <= QUAD_TOL * max(abs(est), 1e-300):
            return est
        prev, coarse, n = est, fine, n2
    raise QuadratureError(
        f"double amplitude not converged: last change {abs(est - prev):.2e}"
    )


def double_amplitude(env: Envelope, omega_L: float, omega_f: float, omega_i: float) -> complex:
    """Time-ordered ``int dt' int^{t'} dt'' A(t')A(t'') e^{i(wf-wi-wL)t'} e^{i(wi-wL)t''}``."""
    if isinstance(env, RectangularEnvelope):
        return complex(_rect_double(env.E0, env.delta, omega_i - omega_L,
                                    omega_f - 2 * omega_L))
    if isinstance(env, GaussianEnvelope):
        if env.E0 == 0:
            return 0j
        return complex(_gauss_double(env, omega_L, omega_f, omega_i))
    raise TypeError(f"unsupported envelope {type(env).__name__}")


@dataclass
class AmplitudeBank:
    """Named single and double amplitudes of the two pulses."""

    values: dict[str, complex]

    def __getitem__(self, key):
        return self.values[key]


def amplitude_bank(sys: DimerSystem, env: Envelope, omega_1: float,
                   omega_2: float | None = None) -> AmplitudeBank:
    """All amplitudes entering the harmonic signals.

    ``omega_1`` and ``omega_2`` are the carriers of the first and second
    pulse (equal unless a sweep shifts one of them).  Keys follow
    ``A{j}_g{a}``, ``A{jj}_{aa}``, ``A{jj}_ef{a}``, ``A211_{name}``.
    """
    omega_2 = omega_1 if omega_2 is None else omega_2
    w = {"e": sys.particle.omega_eg, "f": sys.particle.omega_fg}
    V = {"e": sys.v_ee, "f": sys.v_ff}
    carriers = {1: omega_1, 2: omega_2}
    wef = w["e"] + w["f"]

    def A(j, om):
        return complex(single_amplitude(env, carriers[j], om))

    def AA(j, wf, wi):
        return double_amplitude(env, carriers[j], wf, wi)

    out = {}
    for a in "ef":
        for j in (1, 2):
            out[f"A{j}_g{a}"] = A(j, w[a] + V[a])
            out[f"A{j}{j}_{a}{a}"] = AA(j, 2 * w[a], w[a] + V[a])
            # intermediate singly excited state of manifold a
            out[f"A{j}{j}_ef{a}"] = AA(j, wef, w[a] + V[a])
    out["A211_ge2"] = A(2, w["f"] - V["e"]) * out["A11_efe"]
    out["A211_gf2bar"] = A(2, w["e"] - V["f"]) * out["A11_efe"]
    out["A211_ge2bar"] = A(2, w["f"] - V["e"]) * out["A11_eff"]
    out["A211_gf2"] = A(2, w["e"] - V["f"]) * out["A11_eff"]
    out["A211_ge3"] = A(2, w["e"] - V["e"]) * out["A11_ee"]
    out["A211_gf3"] = A(2, w["f"] - V["f"]) * out["A11_ff"]
    return AmplitudeBank(out)


def coefficients(bank: AmplitudeBank) -> dict[str, complex]:
    """``Lambda`` coefficients of the five resonances."""
    b = bank.values
    c = np.conj
    lam = {}
    for a in "ef":
        lam[a] = b[f"A1_g{a}"] * b[f"A2_g{a}"]
        lam[a + a] = (2 * c(b[f"A11_{a}{a}"]) * b[f"A22_{a}{a}"]
                      - b[f"A2_g{a}"] * c(b[f"A211_g{a}3"]))
    lam["ef"] = (2 * c(b["A11_efe"]) * b["A22_efe"]
                 + 2 * c(b["A11_eff"]) * b["A22_eff"]
                 + 2 * b["A22_efe"] * c(b["A11_eff"])
                 + 2 * c(b["A11_efe"]) * b["A22_eff"]
                 - b["A2_ge"] * (c(b["A211_ge2"]) + c(b["A211_ge2bar"]))
                 - b["A2_gf"] * (c(b["A211_gf2"]) + c(b["A211_gf2bar"])))
    return lam


@dataclass
class HarmonicSignal:
    """Real signal ``sum_c Re[a_c exp(i w_c t21)]`` of one harmonic order."""

    t21: np.ndarray
    kappa: int
    components: dict[str, tuple[complex, float]] = field(default_factory=dict)

    def component(self, label: str) -> np.ndarray:
        a, w = self.components[label]
        return np.real(a * np.exp(1j * w * self.t21))

    @property
    def values(self) -> np.ndarray:
        total = np.zeros(len(self.t21))
        for label in self.components:
            total += self.component(label)
        return total


def _frequency_shift(cfg: PulseTrainConfig, kappa: int, omega_M: float) -> float:
    # a sweep on the scanned pulse acts like an undersampling reference
    sweep = cfg.omega_2 if cfg.clock == "absolute" else 0.0
    return kappa * (omega_M + sweep)


def _bank_for(sys, cfg):
    return amplitude_bank(sys, cfg.envelope, cfg.carrier(1), cfg.carrier(2))


def first_harmonic_signal(sys: DimerSystem, cfg: PulseTrainConfig, t21,
                          omega_M: float = 0.0, bank: AmplitudeBank | None = None
                          ) -> HarmonicSignal:
    """``S_e + S_f`` with ``S_a = mu_a^2 Lambda_a cos((w_ag + V_aa - w_M) t21)``."""
    bank = _bank_for(sys, cfg) if bank is None else bank
    lam = coefficients(bank)
    shift = _frequency_shift(cfg, 1, omega_M)
    comps = {}
    for a in "ef":
        comps[a] = (sys.mu(a) ** 2 * lam[a], sys.omega(a) + sys.v(a) - shift)
    return HarmonicSignal(np.asarray(t21, dtype=float), 1, comps)


def second_harmonic_signal(sys: DimerSystem, cfg: PulseTrainConfig, t21,
                           omega_M: float = 0.0, bank: AmplitudeBank | None = None
                           ) -> HarmonicSignal:
    """``S_ee + S_ef + S_ff`` at the V-independent two-particle frequencies."""
    bank = _bank_for(sys, cfg) if bank is None else bank
    lam = coefficients(bank)
    shift = _frequency_shift(cfg, 2, omega_M)
    mu_e, mu_f = sys.mu("e"), sys.mu("f")
    we, wf = sys.omega("e"), sys.omega("f")
    comps = {
        "ee": (0.5 * mu_e**4 * lam["ee"], 2 * we - shift),
        "ef": (0.25 * mu_e**2 * mu_f**2 * lam["ef"], we + wf - shift),
        "ff": (0.5 * mu_f**4 * lam["ff"], 2 * wf - shift),
    }
    return HarmonicSignal(np.asarray(t21, dtype=float), 2, comps)


def _half_line(x, sigma):
    """``(2pi)^-1/2 int_0^inf exp(-t^2/2s^2 - i x t) dt``."""
    return 0.5 * sigma * np.exp(-0.5 * (x * sigma) ** 2) - 1j * sigma / np.sqrt(np.pi) * dawsn(
        x * sigma / np.sqrt(2))


def analytic_spectrum(sig: HarmonicSignal, window_sigma: float, omega,
                      components=None) -> ComplexSpectrum:
    """Closed-form Gaussian-windowed one-sided transform of a harmonic signal.

    Real parts are the Gaussian pairs, imaginary parts involve the Dawson
    function.  ``components`` restricts the sum to the given labels.
    """
    omega = np.asarray(omega, dtype=float)
    labels = sig.components if components is None else components
    vals = np.zeros(len(omega), dtype=complex)
    for label in labels:
        a, w0 = sig.components[label]
        vals += 0.5 * a * _half_line(omega - w0, window_sigma)
        vals += 0.5 * np.conj(a) * _half_line(omega + w0, window_sigma)
    return ComplexSpectrum(omega, vals, sig.kappa, float(window_sigma))


# ---------------------------------------------------------------------------
# series expansions for rectangular pulses


def _detunings(sys, omega_L):
    return {a: sys.omega(a) - omega_L for a in "ef"}


def expansion_small_V_over_detuning(sys: DimerSystem, env: RectangularEnvelope,
                                    omega_L: float) -> dict[str, complex]:
    """Leading order in ``V / detuning`` for rectangular pulses."""
    if not isinstance(env, RectangularEnvelope):
        raise TypeError("expansion requires a rectangular envelope")
    d = _detunings(sys, omega_L)
    if d["e"] == 0 or d["f"] == 0:
        raise ValueError("expansion in V/detuning needs nonzero detunings")
    for a in "ef":
        if abs(sys.v(a) / d[a]) > 0.3:
            warnings.warn(f"|V_{a}{a}/delta_{a}g| = {abs(sys.v(a) / d[a]):.2f} is not small")
    D, E = env.delta, env.E0
    area2, area4 = (E * D) ** 2, (E * D) ** 4
    out = {}
    for a in "ef":
        x = D * d[a]
        out[a] = (area2 * _sinc(x / 2) ** 2
                  - 2 * area2 * (2 - 2 * np.cos(x) - x * np.sin(x)) / x**2 * sys.v(a) / d[a])
        out[a + a] = (-1j * area4 * _sinc(x / 2) ** 2 * (1 - _sinc(x)) / x
                      * sys.v(a) / d[a])
    de, df = d["e"], d["f"]
    h = 0.5 * D
    C = (2 * np.cos(h * (df - de))
         + 2 * (df - de) / (D * de * df) * np.sin(h * (df - de))
         - (df**2 + de**2) / (de * df) * _sinc(h * (df + de)))
    # the two square roots of de*df combine to a real product
    out["ef"] = (-1j * area4 * _sinc(h * de) * _sinc(h * df) / (D * de * df)
                 * C * (sys.v_ee + sys.v_ff))
    out["C"] = C
    return out


def expansion_small_V_delta(sys: DimerSystem, env: RectangularEnvelope,
                            omega_L: float) -> dict[str, complex]:
    """Expansion to third order in the pulse width for rectangular pulses."""
    if not isinstance(env, RectangularEnvelope):
        raise TypeError("expansion requires a rectangular envelope")
    d = _detunings(sys, omega_L)
    D, E = env.delta, env.E0
    area2, area4 = (E * D) ** 2, (E * D) ** 4
    out = {}
    for a in "ef":
        V = sys.v(a)
        out[a] = area2 * (1 - (D * (d[a] + V)) ** 2 / 12)
        out[a + a] = (-1j / 6 * area4 * V * D
                      * (1 + 1j / 3 * V * D - 6 / 45 * (V**2 + d[a] ** 2) * D**2))
    Vee, Vff = sys.v_ee, sys.v_ff
    weg, wfg = sys.omega("e"), sys.omega("f")
    B = (11 * (Vee**2 + Vff**2 + weg**2 + wfg**2)
         - 6 * (Vee * Vff + weg * wfg)
         + 14 * (Vff - Vee) * (wfg - weg)
         + 16 * omega_L * (omega_L - weg - wfg))
    out["ef"] = (-1j / 3 * area4 * (Vee + Vff) * D
                 * (1 + 1j / 6 * (Vee + Vff) * D - B * D**2 / 120))
    out["B"] = B
    return out


def exact_coefficients(sys: DimerSystem, env: Envelope, omega_L: float) -> dict[str, complex]:
    """``Lambda`` coefficients from the full amplitude bank with a common carrier."""
    return coefficients(amplitude_bank(sys, env, omega_L))
