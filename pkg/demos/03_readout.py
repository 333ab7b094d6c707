"""
Reading the phase from a spectrum
=================================

The gate phase lands on the control spin. Turning both spins to +x before
the gate and recording the control-spin signal afterwards shows it as a
rotation of the doublet.
"""

import numpy as np

from aagate import CHLOROFORM, fig2_program, measure_beta, resolve
from aagate.readout import doublet_phase

tl = resolve(fig2_program(), {"theta": np.pi / 8}, CHLOROFORM, instantaneous=True)
res = measure_beta(tl, CHLOROFORM, epsilon=0.01)

spec = res.reference
k = np.argsort(np.abs(spec.amplitudes))[-2:]
print("reference lines (Hz):", np.sort(spec.freqs[k]))
print("line phases, reference:", np.round(doublet_phase(res.reference, CHLOROFORM), 6))
print("line phases, after gate:", np.round(doublet_phase(res.final, CHLOROFORM), 6))
print(f"beta = {res.beta:.9f}   (2 theta = {np.pi / 4:.9f})")

# polarization only scales the lines
for eps in (1e-3, 1e-2, 1.0):
    r = measure_beta(tl, CHLOROFORM, epsilon=eps)
    print(f"epsilon = {eps:g}: beta = {r.beta:.9f}, amplitude = {r.amplitude:.3f}")
