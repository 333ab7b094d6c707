"""
How much coherence does each gate cost?
=======================================

Compare exp(-t/T2) for the quoted gate durations, then switch on phase
damping during the simulated gate and look at the doublet.
"""

from aagate import run_decoherence_compare, run_gate_check

rep = run_decoherence_compare()
for r in rep["rows"]:
    print(f"{r['gate']:<24} {r['gate_time'] * 1e3:8.4f} ms  {r['nucleus']:>4}  {r['retention']:.4f}")

print(f"doublet amplitude with/without damping: {rep['readout_amplitude_ratio']:.6f}")
print(f"beta shift from damping: {rep['readout_beta_shift']:.2e} rad")

# pulse width is the other imperfection
chk = run_gate_check(3.141592653589793 / 4, finite_pulses=True)
print(f"gate fidelity with 5 us pulses: {chk.fidelity:.9f}")
