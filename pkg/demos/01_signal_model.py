"""
Synthetic multiplexed readout
=============================

Six resonator tones share one digitised line. Each qubit's state turns the
phase of its own tone; a neighbour's excited state also leaks a small fixed
offset into the target's tone. This script builds the reference signal and
shows the leak as a shift of the target's I-Q cloud.
"""
import numpy as np

from qsc import BasisState, demodulate, generate_dataset, rectangular_kernel
from qsc.config import reference_signal_config

cfg = reference_signal_config()
print("IFs (MHz):", cfg.if_freqs / 1e6)
print("tone amplitudes:", cfg.amp)
print(f"noise sigma per sample: {cfg.noise_sigma:.3f}")

# One state per line: target Q3 in ground, its neighbours Q2 and Q4 swept.
states = [BasisState.from_string(s) for s in ("000000", "010000", "000100", "010100")]
ds = generate_dataset(cfg, 500, states, target_qubit=2)

# Plain boxcar demodulation at the target's IF.
kernel = rectangular_kernel(cfg.if_freqs[2], cfg.n_samples, cfg.sample_rate)
iq = demodulate(kernel, ds.samples)

print("\nQ3 ground-state centroid for each neighbour setting")
print("  |Q2,Q4>        I        Q")
for s in states:
    m = ds.masks == s.mask
    i, q = iq[m].mean(axis=0)
    print(f"  |{s.bits[1]}{s.bits[3]}>     {i:7.3f}  {q:7.3f}")

spread = iq[ds.masks == states[0].mask].std(axis=0, ddof=1)
print(f"\ncloud standard deviation (I, Q): {spread[0]:.3f}, {spread[1]:.3f}")
