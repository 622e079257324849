"""
Training the two-layer classifier
=================================

The network starts as a copy of the conventional chain: its first layer is the
matched kernel and its output is the bisector of the class centroids. Training
the whole thing on labelled shots lets the first layer pick up the neighbours'
tones and cancel their leak.
"""
import numpy as np

from qsc import classify_dsp, classify_qsc, format_percent
from qsc.config import reference_config
from qsc.pipeline import cloud_shift, run_reference

run = run_reference(reference_config())
x = run.training.samples

agree = np.mean(classify_qsc(run.initial, x) == classify_dsp(run.baseline.kernel, run.baseline.unified, x))
print(f"untrained network agrees with the DSP chain on {agree:.2%} of training shots")

loss = run.trace.loss + [run.trace.final_loss]
for k in (0, 50, 100, 200, 300, 400, len(loss) - 1):
    print(f"  iteration {k:3d}  loss {loss[k]:.4f}")
print(f"training took {run.timings['train']:.1f} s")

rep = run.report
print(f"\nper-subset fidelity {[format_percent(f) for f in rep.F]}")
print(f"mu6 = {format_percent(rep.mu)} (mu0 = {format_percent(rep.mu0)})")
print(f"sigma6 = {format_percent(rep.sigma)} (sigma0 = {format_percent(rep.sigma0)})")
print(f"crosstalk free: {rep.crosstalk_free}")

# How far the target's ground cloud moves when a neighbour flips, in cloud widths.
spectators = run.cfg.eval.spectators
before = cloud_shift(run.initial.hidden(run.test.samples), run.test, spectators)
after = cloud_shift(run.model.hidden(run.test.samples), run.test, spectators)
for q in spectators:
    print(f"Q{q + 1} flip moves the cloud {before[q]:.3f} -> {after[q]:.3f} widths")
