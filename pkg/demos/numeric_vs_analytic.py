"""Numeric spectrum of one scenario next to the perturbative one.

Uses the reduced delay grid and short pulses so the propagation finishes in
about a minute on one core.  Pass a worker count as the first argument to
spread the delay rows over processes.
"""

import sys

from pmdimer import (DimerSystem, GaussianEnvelope, ParticleSpec, PulseTrainConfig, Scenario,
                     absorptive_part, extract_peak, normalize_to_area, peak_height)
from pmdimer.sweep import V_RATIO

workers = int(sys.argv[1]) if len(sys.argv) > 1 else 1
v = 0.01
env = normalize_to_area(0.1, GaussianEnvelope(6.0, 1.0))
sc = Scenario(DimerSystem(ParticleSpec(), v, V_RATIO * v), PulseTrainConfig(env))

grid = sc.signal_grid(workers)
bank = sc.bank()
print(f"{'peak':6}{'omega':>10}{'numeric':>13}{'analytic':>13}{'rel dev':>10}")
for kappa in (1, 2):
    num = sc.numeric_spectrum(grid, kappa)
    ana = sc.analytic_spectrum(kappa, bank=bank)
    for label, om in sc.predicted(kappa).items():
        part = absorptive_part(label)
        _, vn = extract_peak(num, om, part=part)
        _, va = extract_peak(ana, om, part=part)
        hn, ha = peak_height(label, vn), peak_height(label, va)
        print(f"{label:6}{om:10.4f}{hn:13.4e}{ha:13.4e}{(hn - ha) / abs(ha):10.3f}")
