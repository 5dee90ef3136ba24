"""Fluorescence-detected phase-modulation spectroscopy of a coupled dimer."""

from .demod import (ComplexSpectrum, DemodSettings, DemodSignal, demodulate, spectrum,
                    subtract_background)
from .model import (BASIS_LABELS, MAGIC_ANGLE, DimerSystem, Geometry, ParticleSpec,
                    basis_state, build_dipole_operator, build_static_hamiltonian,
                    collective_eigenbasis, dipole_coupling, fluorescence_operator)
from .perturbation import (HarmonicSignal, amplitude_bank, analytic_spectrum, coefficients,
                           double_amplitude, exact_coefficients, expansion_small_V_delta,
                           expansion_small_V_over_detuning, first_harmonic_signal,
                           second_harmonic_signal, single_amplitude)
from .propagator import (PropagationError, PropagationSettings, SignalGrid,
                         compute_signal_grid, pair_fluorescence, propagate_pair)
from .pulses import (OMEGA_21, GaussianEnvelope, PulseTrainConfig, RectangularEnvelope,
                     envelope_area, field_value, normalize_to_area)
from .sweep import (PeakTable, Scenario, SweepSpec, absorptive_part, extract_peak,
                    peak_height, run_sweep)

__version__ = "0.1.0"

__all__ = [
    "BASIS_LABELS", "MAGIC_ANGLE", "OMEGA_21", "ComplexSpectrum", "DemodSettings",
    "DemodSignal", "DimerSystem", "GaussianEnvelope", "Geometry", "HarmonicSignal",
    "ParticleSpec", "PeakTable", "PropagationError", "PropagationSettings",
    "PulseTrainConfig", "RectangularEnvelope", "Scenario", "SignalGrid", "SweepSpec",
    "absorptive_part", "amplitude_bank", "analytic_spectrum", "coefficients", "basis_state", "build_dipole_operator",
    "build_static_hamiltonian", "collective_eigenbasis", "compute_signal_grid",
    "demodulate", "dipole_coupling", "double_amplitude", "envelope_area", "exact_coefficients",
    "expansion_small_V_delta", "expansion_small_V_over_detuning", "extract_peak",
    "field_value", "first_harmonic_signal", "fluorescence_operator", "normalize_to_area",
    "pair_fluorescence", "peak_height", "propagate_pair", "run_sweep", "second_harmonic_signal",
    "single_amplitude", "spectrum", "subtract_background",
]
