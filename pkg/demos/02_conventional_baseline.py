"""
The conventional readout chain
==============================

A matched kernel built from the calibration data's class means, then a
linear SVM in the I-Q plane. One line shared by every neighbour setting loses
fidelity; a dedicated line per setting sets the bar that a crosstalk-free
classifier has to reach.
"""
from qsc import format_percent
from qsc.metrics import render_table, subset_fidelities
from qsc.config import reference_config
from qsc.pipeline import fit_baseline, generate_split

cfg = reference_config()
training, test = generate_split(cfg)
print(f"{len(training)} calibration shots, {len(test)} held-out shots")

bl = fit_baseline(training, cfg.eval, cfg.signal.if_freqs[cfg.eval.target_qubit])
mu0, sigma0, unified = bl.stats(test)

rows = {f"F{k + 1}": subset_fidelities(clf, test, spectators=bl.spectators).F
        for k, clf in enumerate(bl.dedicated_classifiers())}
rows["F5"] = unified.F
print()
print(render_table(rows, bl.subset_labels, ["Q2", "Q4"], "Held-out fidelities of Q3"))

# Dedicated lines scored on their own subsets are the diagonal of F1..F4.
print(f"\nmu0 = {format_percent(mu0)}  sigma0 = {format_percent(sigma0)}")
print(f"unified line: mu = {format_percent(unified.mu)}  sigma = {format_percent(unified.sigma)}")
print(f"f_p1 = {format_percent(unified.mu - mu0)}")
