"""Acceptance criteria on the full delay grid (4500 delays, window 500).

Each test records one pass/fail line, printed in the terminal summary.
Expected values come from the physical setup (transition frequencies,
couplings, truncation orders of the series) and never from the code under
test.  The whole module takes roughly a quarter of an hour on one core; set
``PMDIMER_TEST_CACHE`` to reuse grids between runs.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate

from pmdimer import (DimerSystem, ParticleSpec, RectangularEnvelope, absorptive_part,
                     double_amplitude, exact_coefficients, expansion_small_V_delta,
                     expansion_small_V_over_detuning, extract_peak, peak_height,
                     single_amplitude)
from pmdimer.perturbation import QUAD_TOL, amplitude_bank
from pmdimer.sweep import LABELS, V_RATIO

from .support import make_scenario

pytestmark = pytest.mark.acceptance

OMEGA_EG, OMEGA_FG = 1.5, 1.55
ONE_HD, TWO_HD = LABELS[1], LABELS[2]
ALL = ONE_HD + TWO_HD


def peaks(sc, grid=None, route="numeric"):
    """``label -> (omega, complex value)`` at the absorptive apex of every line."""
    out = {}
    for k in (1, 2):
        spec = sc.numeric_spectrum(grid, k) if route == "numeric" else sc.analytic_spectrum(k)
        for label, om in sc.predicted(k).items():
            out[label] = extract_peak(spec, om, part=absorptive_part(label))
    return out


def heights(pk):
    return {label: peak_height(label, v) for label, (_, v) in pk.items()}


def finish(report, number, title, checks):
    """Record and assert a list of ``(ok, description)`` sub-checks."""
    failed = [d for ok, d in checks if not ok]
    detail = "; ".join(failed) if failed else "; ".join(d for _, d in checks)
    report(number, title, not failed, detail)
    print(f"criterion {number}: {'PASS' if not failed else 'FAIL'} {title}: {detail}")
    assert not failed, detail


def test_criterion_1_peak_positions(grids, report):
    sc = make_scenario(10.4, 0.01)
    expected = {"S_e": OMEGA_EG + 0.01, "S_f": OMEGA_FG + 0.01974,
                "S_ee": 2 * OMEGA_EG, "S_ef": OMEGA_EG + OMEGA_FG, "S_ff": 2 * OMEGA_FG}
    half = 0.5 * sc.fwhm
    checks = []
    for route in ("numeric", "analytic"):
        pk = peaks(sc, grids(sc) if route == "numeric" else None, route)
        for label, w in expected.items():
            off = pk[label][0] - w
            checks.append((abs(off) < half, f"{route} {label} offset {off:+.2e}"))
    finish(report, 1, "peak positions within half FWHM "
           f"({half:.4f})", checks)


def test_criterion_2_phase_structure(grids, report):
    checks = []
    for v in (0.01, -0.01):
        sc = make_scenario(10.4, v)
        for route in ("numeric", "analytic"):
            pk = peaks(sc, grids(sc) if route == "numeric" else None, route)
            for label in ONE_HD:
                z = pk[label][1]
                checks.append((z.real > 0 and abs(z.imag) < 0.15 * abs(z.real),
                               f"{route} V={v:+} {label} Im/Re {z.imag / z.real:+.3f}"))
            for label in TWO_HD:
                z = pk[label][1]
                sign_ok = z.imag < 0 if v > 0 else z.imag > 0
                ratio = abs(z.real) / abs(z.imag)
                checks.append((sign_ok and ratio < 0.15,
                               f"{route} V={v:+} {label} Im {z.imag:+.2e} |Re/Im| {ratio:.3f}"))
    finish(report, 2, "1HD absorptive in Re, 2HD in Im with sign of -V", checks)


V_SWEEP = (0.0005, 0.001, 0.005, 0.01)


def test_criterion_3_linearity_in_V(grids, report):
    values = np.array(sorted(V_SWEEP + tuple(-v for v in V_SWEEP)))
    table = {}
    for v in values:
        sc = make_scenario(10.4, float(v))
        table[v] = {"numeric": heights(peaks(sc, grids(sc))),
                    "analytic": heights(peaks(sc, route="analytic"))}
    checks = []
    for route in ("numeric", "analytic"):
        for label in TWO_HD:
            h = np.array([table[v][route][label] for v in values])
            slope = values @ h / (values @ values)
            r2 = 1 - np.sum((h - slope * values) ** 2) / np.sum((h - h.mean()) ** 2)
            checks.append((r2 > 0.99, f"{route} {label} R2 {r2:.5f}"))
        for v in V_SWEEP:
            plus, minus = table[v][route], table[-v][route]
            for label in ("S_ee", "S_ff"):
                asym = abs(plus[label] + minus[label]) / max(abs(plus[label]), abs(minus[label]))
                checks.append((asym < 0.02, f"{route} {label} |V|={v} odd within {asym:.4f}"))
            checks.append((abs(minus["S_ef"]) > abs(plus["S_ef"]),
                           f"{route} S_ef |V|={v} ratio -V/+V "
                           f"{abs(minus['S_ef']) / abs(plus['S_ef']):.4f}"))
    finish(report, 3, "2HD linear and odd in V, S_ef asymmetric", checks)


E0_SWEEP = tuple(0.0025 * k for k in range(1, 9))
VISIBLE = 0.05  # relative change of numeric/analytic ratio counted as a visible deviation


def test_criterion_4_field_strength_scaling(grids, report):
    E0 = np.array(E0_SWEEP)
    num, ana = {}, {}
    for e in E0_SWEEP:
        sc = make_scenario(10.4, 0.01, E0=e)
        num[e] = heights(peaks(sc, grids(sc)))
        ana[e] = heights(peaks(sc, route="analytic"))
    weak = E0 <= 0.01 + 1e-12
    checks = []
    for label in ALL:
        hn = np.array([num[e][label] for e in E0_SWEEP])
        ha = np.array([ana[e][label] for e in E0_SWEEP])
        slope = np.polyfit(np.log(E0[weak]), np.log(np.abs(hn[weak])), 1)[0]
        target, tol = (2.0, 0.05) if label in ONE_HD else (4.0, 0.10)
        checks.append((abs(slope - target) <= tol, f"{label} slope {slope:.3f}"))
        ratio = hn / ha
        dev = np.abs(ratio / ratio[0] - 1)
        visible = [float(e) for e, d in zip(E0, dev) if d > VISIBLE]
        checks.append((visible == [float(e) for e in E0[-2:]],
                       f"{label} deviation > {VISIBLE:.0%} at E0 {visible} "
                       f"(max {dev.max():.3f})"))
    finish(report, 4, "E0^2 and E0^4 scaling, deviations only at the two largest E0", checks)


SIGMA_1HD = (2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0)
SIGMA_2HD = (0.5, 1.0) + SIGMA_1HD + (16.0, 20.0, 24.0)


def test_criterion_5_pulse_width(grids, report):
    table = {}
    for s in SIGMA_2HD:
        sc = make_scenario(s, 0.01)
        grid = grids(sc)
        out = {}
        for k in (1, 2):
            spec = sc.numeric_spectrum(grid, k)
            for label, om in sc.predicted(k).items():
                if k == 1 and s not in SIGMA_1HD:
                    continue
                out[label] = peak_height(label, extract_peak(spec, om, part=absorptive_part(label))[1])
        table[s] = out
    checks = []
    for label in ONE_HD:
        h = np.array([table[s][label] for s in SIGMA_1HD])
        var = (h.max() - h.min()) / h.max()
        checks.append((var < 0.15, f"{label} varies {var:.3f} over sigma 2..12"))
    for label in TWO_HD:
        h = np.abs([table[s][label] for s in SIGMA_2HD])
        k = int(np.argmax(h))
        interior = 0 < k < len(h) - 1
        small = h[0] / h.max()
        rising = h[0] < h[1] < h[2]
        checks.append((interior, f"{label} maximum at sigma {SIGMA_2HD[k]}"))
        checks.append((small < 0.1 and rising,
                       f"{label} at sigma {SIGMA_2HD[0]} is {small:.3f} of maximum"))
    finish(report, 5, "pulse-width dependence at fixed area", checks)


def _max_deviation(grids, sigma):
    sc = make_scenario(sigma, 0.01)
    hn = heights(peaks(sc, grids(sc)))
    ha = heights(peaks(sc, route="analytic"))
    dev = {label: hn[label] / ha[label] - 1 for label in ALL}
    return dev, hn, ha


def test_criterion_6_agreement_vs_pulse_length(grids, report):
    dev6, _, _ = _max_deviation(grids, 6.0)
    dev10, hn, ha = _max_deviation(grids, 10.4)
    checks = [(abs(d) < 0.10, f"sigma 6 {label} {d:+.4f}") for label, d in dev6.items()]
    for group in (ONE_HD, TWO_HD):
        order_n = sorted(group, key=lambda lab: abs(hn[lab]))
        order_a = sorted(group, key=lambda lab: abs(ha[lab]))
        checks.append((order_n == order_a, f"sigma 10.4 ordering {order_n} vs {order_a}"))
    signs = all(np.sign(hn[lab]) == np.sign(ha[lab]) for lab in ALL)
    checks.append((signs, "sigma 10.4 signs match"))
    m6 = max(abs(d) for d in dev6.values())
    m10 = max(abs(d) for d in dev10.values())
    checks.append((m10 > m6, f"max deviation sigma 10.4 {m10:.4f} vs sigma 6 {m6:.4f}"))
    finish(report, 6, "numeric/analytic agreement versus pulse length", checks)


def _nested_rect(E0, delta, omega_L, wf, wi):
    """Time-ordered double integral by adaptive quadrature over the triangle."""
    h = 0.5 * delta

    def part(fn):
        val, _ = integrate.dblquad(fn, -h, h, lambda t1: -h, lambda t1: t1,
                                   epsabs=0, epsrel=1e-12)
        return val

    def phase(t2, t1):
        return (wf - wi - omega_L) * t1 + (wi - omega_L) * t2

    re = part(lambda t2, t1: np.cos(phase(t2, t1)))
    im = part(lambda t2, t1: np.sin(phase(t2, t1)))
    return E0**2 * (re + 1j * im)


def _rel_errors(expansion, key, systems_envs, omega_L):
    errs = []
    for sys_, env in systems_envs:
        exact = exact_coefficients(sys_, env, omega_L)[key]
        errs.append(abs(expansion(sys_, env, omega_L)[key] - exact) / abs(exact))
    return np.array(errs)


def test_criterion_7_oracles(grids, report):
    checks = []
    omega_L = 1.525
    # closed forms against quadrature
    env = RectangularEnvelope(4.0, 0.05)
    worst = 0.0
    for wf in (2 * omega_L - 0.3, 3.0, 3.05, 3.1):
        for wi in (omega_L - 0.2, 1.51, omega_L + 1e-6, 1.56, omega_L):
            ref = _nested_rect(env.E0, env.delta, omega_L, wf, wi)
            worst = max(worst, abs(double_amplitude(env, omega_L, wf, wi) - ref) / abs(ref))
    for w in (1.4, 1.51, 1.6):
        ref, _ = integrate.quad(lambda t: np.cos((w - omega_L) * t), -2.0, 2.0, epsrel=1e-13)
        worst = max(worst, abs(single_amplitude(env, omega_L, w) - env.E0 * ref) / abs(env.E0 * ref))
    checks.append((worst < 1e-8, f"closed forms vs quadrature {worst:.1e}"))

    # small V / detuning: Lambda_a error ~ V^2 (ratio 4), collective ~ V (ratio 2)
    p = ParticleSpec()
    envB1 = RectangularEnvelope(20.0, 0.005)
    cases = [(DimerSystem(p, v, V_RATIO * v), envB1) for v in (0.004, 0.002, 0.001)]
    for key, expected in (("e", 4), ("f", 4), ("ee", 2), ("ff", 2), ("ef", 2)):
        e = _rel_errors(expansion_small_V_over_detuning, key, cases, omega_L)
        r = e[:-1] / e[1:]
        checks.append((np.all(np.abs(r / expected - 1) < 0.1),
                       f"V/detuning {key} ratios {np.round(r, 3).tolist()} expect {expected}"))
    # small V Delta at fixed area: error ~ Delta^4 (ratio 16) and Delta^3 (ratio 8)
    sysB2 = DimerSystem(p, 0.01, V_RATIO * 0.01)
    cases = [(sysB2, RectangularEnvelope(d, 0.1 / d)) for d in (0.8, 0.4, 0.2)]
    for key, expected in (("e", 16), ("f", 16), ("ee", 8), ("ff", 8), ("ef", 8)):
        e = _rel_errors(expansion_small_V_delta, key, cases, omega_L)
        r = e[:-1] / e[1:]
        checks.append((np.all(np.abs(r / expected - 1) < 0.1),
                       f"V Delta {key} ratios {np.round(r, 3).tolist()} expect {expected}"))

    # V = 0: analytic collective amplitudes vanish, numeric peaks two decades down
    sc0 = make_scenario(10.4, 0.0)
    for env0 in (sc0.pulses.envelope, envB1):
        bank = amplitude_bank(sc0.system, env0, omega_L).values
        lam = exact_coefficients(sc0.system, env0, omega_L)
        for key in ("ee", "ff", "ef"):
            a = key[0] if key != "ef" else "e"
            scale = abs(2 * bank[f"A11_{a}{a}"] * bank[f"A22_{a}{a}"])
            checks.append((abs(lam[key]) <= QUAD_TOL * scale,
                           f"{type(env0).__name__} V=0 Lambda_{key} {abs(lam[key]) / scale:.1e}"))
    spec0 = sc0.numeric_spectrum(grids(sc0), 2)
    sc1 = make_scenario(10.4, 0.01)
    ref = heights(peaks(sc1, grids(sc1)))
    for label, om in sc0.predicted(2).items():
        near = np.abs(spec0.omega - om) <= spec0.fwhm
        level = np.max(np.abs(spec0.values[near].imag)) / abs(ref[label])
        checks.append((level < 0.01, f"numeric V=0 {label} at {level:.4f} of V=0.01"))
    finish(report, 7, "closed forms, series orders and V=0 limit", checks)


def test_criterion_8_numerical_hygiene(grids, report):
    checks = []
    for sigma in (10.4, 6.0):
        sc = make_scenario(sigma, 0.01)
        drift = grids(sc).diagnostics["norm_drift"]
        checks.append((drift < 1e-9, f"norm drift sigma {sigma} {drift:.1e}"))
    sc = make_scenario(6.0, 0.01)
    half = make_scenario(6.0, 0.01, dt_scale=0.5)
    a, b = heights(peaks(sc, grids(sc))), heights(peaks(half, grids(half)))
    worst = max(abs(b[lab] / a[lab] - 1) for lab in ALL)
    checks.append((worst < 1e-6, f"dt halving changes peaks by {worst:.1e}"))
    small = make_scenario(6.0, 0.01, full=False, n_t21=320)
    g1, g3 = small.signal_grid(workers=1), small.signal_grid(workers=3)
    same = g1.values.tobytes() == g3.values.tobytes()
    checks.append((same, "grid bitwise identical for 1 and 3 workers"))
    finish(report, 8, "norm, step-size convergence and worker independence", checks)
