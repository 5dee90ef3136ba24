"""Closed-form peak heights against the coupling strength.

Runs in a few seconds; prints one line per coupling with the absorptive
height of every first- and second-harmonic resonance.
"""

import numpy as np

from pmdimer import (DimerSystem, GaussianEnvelope, ParticleSpec, PulseTrainConfig, Scenario,
                     SweepSpec, normalize_to_area, run_sweep)

env = normalize_to_area(0.1, GaussianEnvelope(10.4, 1.0))
base = Scenario(DimerSystem(ParticleSpec(), 0.01, 0.0), PulseTrainConfig(env)).full_grid()
spec = SweepSpec("v_ee", np.linspace(-0.02, 0.02, 9), base, route="analytic")
table = run_sweep(spec)

labels = ["S_e", "S_f", "S_ee", "S_ef", "S_ff"]
print("v_ee     " + "".join(f"{lab:>12}" for lab in labels))
heights = {lab: table.select(lab, "analytic")[1] for lab in labels}
for i, v in enumerate(spec.values):
    print(f"{v:+.4f}  " + "".join(f"{heights[lab][i]:12.3e}" for lab in labels))
