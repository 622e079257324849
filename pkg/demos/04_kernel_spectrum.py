"""
What the first layer learned
============================

Look at the spectrum of the demodulation weights before and after training.
The matched kernel has one line at the target's IF. After training, lines
appear at the neighbouring IFs as well.
"""
from qsc.config import reference_config
from qsc.pipeline import kernel_row_spectrum, run_reference

run = run_reference(reference_config())
cfg = run.cfg


def show(label, source):
    report, checks = kernel_row_spectrum(source, cfg.signal.sample_rate, cfg.spectrum, cfg.signal.if_freqs)
    top = report.amps.max()
    print(label)
    for q, c in enumerate(checks):
        bar = "#" * int(round(60 * c.amp / top))
        print(f"  Q{q + 1} {c.candidate / 1e6:5.0f} MHz {'*' if c.found else ' '} {c.amp / top:6.3f} {bar}")


show("matched kernel, row 0", run.baseline.kernel)
show("trained layer, row 0", run.model)
print("\n* = local maximum within 2 MHz above 2% of the largest amplitude")
