"""Numeric and analytic spectra for one parameter set, peak extraction and sweeps."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import perturbation as pt
from .demod import ComplexSpectrum, DemodSettings, demodulate, spectrum, subtract_background
from .model import DimerSystem
from .propagator import PropagationSettings, SignalGrid, compute_signal_grid
from .pulses import PulseTrainConfig, envelope_area, normalize_to_area

log = logging.getLogger(__name__)

V_RATIO = 1.974
LABELS = {1: ("S_e", "S_f"), 2: ("S_ee", "S_ef", "S_ff")}
COMPONENT = {"S_e": "e", "S_f": "f", "S_ee": "ee", "S_ef": "ef", "S_ff": "ff"}


class PeakError(RuntimeError):
    pass


def extract_peak(spec: ComplexSpectrum, predicted_omega: float,
                 halfwidth: float | None = None, part: str = "abs") -> tuple[float, complex]:
    """Apex of a spectral line near ``predicted_omega`` and the complex value there.

    Parameters
    ----------
    spec : ComplexSpectrum
        Must cover ``predicted_omega`` +- 3 ``halfwidth``.
    predicted_omega : float
        Expected line position.
    halfwidth : float, optional
        Search half-width, one FWHM by default.
    part : {"abs", "real", "imag"}
        Quantity whose extremum defines the apex: ``|S|`` or the magnitude of
        the real or imaginary part.  The absorptive part is robust against
        dispersive wings of neighbouring lines that pull the ``|S|`` maximum
        off centre.

    Notes
    -----
    The extremum is refined by a parabola through the logarithm of the three
    samples around it, exact for Gaussian lines; the complex value is
    interpolated quadratically at the refined position.
    """
    hw = spec.fwhm if halfwidth is None else halfwidth
    om, vals = spec.omega, spec.values
    if predicted_omega - 3 * hw < om[0] or predicted_omega + 3 * hw > om[-1]:
        raise PeakError(f"spectrum does not cover {predicted_omega:.5f} +- 3 FWHM")
    if part == "abs":
        mag = np.abs(vals)
    elif part in ("real", "imag"):
        mag = np.abs(getattr(vals, part))
    else:
        raise ValueError(f"unknown part {part!r}")
    sel = np.flatnonzero(np.abs(om - predicted_omega) <= hw)
    k = sel[np.argmax(mag[sel])]
    if k in (sel[0], sel[-1]) or not (mag[k] > mag[k - 1] and mag[k] > mag[k + 1]):
        raise PeakError(f"no local maximum ({part}) within {hw:.4g} of {predicted_omega:.5f}")
    y0, y1, y2 = np.log(mag[k - 1: k + 2])
    denom = y0 - 2 * y1 + y2
    x = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
    h = om[k + 1] - om[k]
    v0, v1, v2 = vals[k - 1: k + 2]
    value = v1 + 0.5 * x * (v2 - v0) + 0.5 * x**2 * (v2 - 2 * v1 + v0)
    return float(om[k] + x * h), complex(value)


def absorptive_part(label: str) -> str:
    return "real" if label in LABELS[1] else "imag"


def peak_height(label: str, value: complex) -> float:
    """Absorptive part: real part for first-harmonic peaks, imaginary for second."""
    return value.real if label in LABELS[1] else value.imag


@dataclass(frozen=True)
class Scenario:
    """Everything that defines one numeric/analytic spectrum pair.

    The default delay grid is the reduced one (1024 delays spaced 0.5 with a
    window of 120); :meth:`full_grid` switches to 4500 delays and 500.
    """

    system: DimerSystem
    pulses: PulseTrainConfig
    propagation: PropagationSettings = PropagationSettings()
    n_t21: int = 1024
    dt21: float = 0.5
    window_sigma: float = 120.0
    omega_M: float = 0.0
    demod_mode: str = "projection"
    background: str = "poly"

    def full_grid(self) -> "Scenario":
        return replace(self, n_t21=4500, window_sigma=500.0)

    @property
    def t21(self) -> np.ndarray:
        return np.arange(self.n_t21) * self.dt21

    @property
    def fwhm(self) -> float:
        return 2 * np.sqrt(2 * np.log(2)) / self.window_sigma

    def predicted(self, kappa: int) -> dict[str, float]:
        """Resonance positions after the frequency shift of the reference."""
        shift = pt._frequency_shift(self.pulses, kappa, self.omega_M)
        s = self.system
        we, wf = s.omega("e"), s.omega("f")
        if kappa == 1:
            raw = {"S_e": we + s.v_ee, "S_f": wf + s.v_ff}
        else:
            raw = {"S_ee": 2 * we, "S_ef": we + wf, "S_ff": 2 * wf}
        return {k: v - shift for k, v in raw.items()}

    def band(self, kappa: int) -> tuple[float, float]:
        pos = list(self.predicted(kappa).values())
        return min(pos) - 0.5, max(pos) + 0.5

    def signal_grid(self, workers: int = 1) -> SignalGrid:
        return compute_signal_grid(self.system, self.pulses, self.propagation, self.t21,
                                   workers=workers)

    def _postprocess(self, spec: ComplexSpectrum, kappa: int,
                     background: str | None) -> ComplexSpectrum:
        method = self.background if background is None else background
        if method == "none":
            return spec
        return subtract_background(spec, list(self.predicted(kappa).values()),
                                   method=method)

    def numeric_spectrum(self, grid: SignalGrid, kappa: int,
                         background: str | None = None) -> ComplexSpectrum:
        d = demodulate(grid, DemodSettings(kappa=kappa, omega_M=self.omega_M,
                                           mode=self.demod_mode))
        spec = spectrum(d, self.window_sigma).restrict(*self.band(kappa))
        return self._postprocess(spec, kappa, background)

    def analytic_signal(self, kappa: int, bank=None) -> pt.HarmonicSignal:
        fn = pt.first_harmonic_signal if kappa == 1 else pt.second_harmonic_signal
        return fn(self.system, self.pulses, self.t21, self.omega_M, bank=bank)

    def analytic_spectrum(self, kappa: int, omega=None, bank=None,
                          background: str | None = None) -> ComplexSpectrum:
        """Closed-form spectrum, post-processed exactly like the numeric one.

        The dispersive wings of neighbouring lines decay slowly and are removed
        from the numeric spectrum together with the baseline, so the same
        subtraction is applied here; pass ``background="none"`` for the raw sum.
        """
        if omega is None:
            n = 4 * self.n_t21
            full = np.fft.fftshift(2 * np.pi * np.fft.fftfreq(n, d=self.dt21))
            lo, hi = self.band(kappa)
            omega = full[(full >= lo) & (full <= hi)]
        spec = pt.analytic_spectrum(self.analytic_signal(kappa, bank), self.window_sigma, omega)
        return self._postprocess(spec, kappa, background)

    def bank(self):
        return pt.amplitude_bank(self.system, self.pulses.envelope,
                                 self.pulses.carrier(1), self.pulses.carrier(2))


@dataclass
class PeakRow:
    sweep_value: float
    label: str
    omega_peak: float
    value: complex
    route: str

    @property
    def height(self) -> float:
        return peak_height(self.label, self.value)


@dataclass
class PeakTable:
    axis: str
    rows: list[PeakRow] = field(default_factory=list)

    def select(self, label: str, route: str) -> tuple[np.ndarray, np.ndarray]:
        """Sweep values and absorptive heights of one resonance and route."""
        sel = [r for r in self.rows if r.label == label and r.route == route]
        return (np.array([r.sweep_value for r in sel]),
                np.array([r.height for r in sel]))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sweep_value", "label", "omega_peak", "re", "im", "route"])
            for r in self.rows:
                w.writerow([repr(r.sweep_value), r.label, repr(r.omega_peak),
                            repr(r.value.real), repr(r.value.imag), r.route])


def scenario_peaks(sc: Scenario, route: str, workers: int = 1,
                   kappas=(1, 2)) -> list[tuple[str, float, complex]]:
    """Peaks of one scenario by one route, ``(label, omega, value)``."""
    out = []
    grid = sc.signal_grid(workers) if route == "numeric" else None
    bank = sc.bank() if route == "analytic" else None
    for k in kappas:
        if route == "numeric":
            spec = sc.numeric_spectrum(grid, k)
        else:
            spec = sc.analytic_spectrum(k, bank=bank)
        for label, om in sc.predicted(k).items():
            w, v = extract_peak(spec, om, part=absorptive_part(label))
            out.append((label, w, v))
    return out


@dataclass
class SweepSpec:
    """Sweep of one axis: ``v_ee`` (with ``v_ff = ratio v_ee``), ``sigma`` at
    fixed pulse area, or ``E0``."""

    axis: str
    values: np.ndarray
    base: Scenario
    route: str = "both"
    ratio: float = V_RATIO

    def __post_init__(self):
        self.values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if self.values.size == 0:
            raise ValueError("sweep needs at least one value")
        if self.axis not in ("v_ee", "sigma", "E0"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if self.route not in ("numeric", "analytic", "both"):
            raise ValueError(f"unknown route {self.route!r}")

    def scenario(self, value: float) -> Scenario:
        b = self.base
        if self.axis == "v_ee":
            return replace(b, system=b.system.with_couplings(value, self.ratio * value))
        env = b.pulses.envelope
        if self.axis == "sigma":
            env = normalize_to_area(envelope_area(env), env.with_width(value))
        else:
            env = env.with_E0(value)
        return replace(b, pulses=b.pulses.with_envelope(env))

    @property
    def routes(self) -> tuple[str, ...]:
        return ("numeric", "analytic") if self.route == "both" else (self.route,)


def run_sweep(spec: SweepSpec, workers: int = 1, kappas=(1, 2)) -> PeakTable:
    """Peak heights for every sweep value; rows come out in sweep order."""
    table = PeakTable(spec.axis)
    for value in spec.values:
        for route in spec.routes:
            try:
                peaks = scenario_peaks(spec.scenario(float(value)), route, workers, kappas)
            except Exception as exc:
                raise RuntimeError(f"sweep {spec.axis}={value} ({route}): {exc}") from exc
            for label, w, v in peaks:
                table.rows.append(PeakRow(float(value), label, w, v, route))
        log.info("sweep %s=%g done", spec.axis, value)
    return table
