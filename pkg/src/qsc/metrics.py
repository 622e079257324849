"""Assignment fidelity, per-spectator-subset evaluation and crosstalk-free checks.

Fidelity is the balanced probability of correct assignment
``F = (P(g|g) + P(e|e)) / 2``. A classifier is crosstalk-free for a target
qubit when the mean of its per-subset fidelities is at least ``mu0`` and their
sample standard deviation is at most ``sigma0``, where ``mu0`` and ``sigma0``
summarise dedicated classifiers each evaluated on their own subset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

import numpy as np

from .errors import ShapeError, UndefinedFidelityError
from .signal import Dataset


@dataclass
class ConfusionStats:
    """Counts ``n_xy``: prepared ``y``, assigned ``x`` (g ground, e excited)."""

    n_gg: int
    n_eg: int
    n_ge: int
    n_ee: int

    @property
    def prepared_g(self) -> int:
        return self.n_gg + self.n_eg

    @property
    def prepared_e(self) -> int:
        return self.n_ge + self.n_ee


def confusion(predictions, prepared) -> ConfusionStats:
    pred = np.asarray(predictions).astype(np.int64).ravel()
    prep = np.asarray(prepared).astype(np.int64).ravel()
    if pred.shape != prep.shape or pred.size == 0:
        raise ShapeError("predictions and prepared labels must be non-empty and of equal length")
    if np.any((pred != 0) & (pred != 1)) or np.any((prep != 0) & (prep != 1)):
        raise ShapeError("labels must be 0 or 1")
    counts = np.bincount(2 * prep + pred, minlength=4)
    return ConfusionStats(n_gg=int(counts[0]), n_eg=int(counts[1]), n_ge=int(counts[2]), n_ee=int(counts[3]))


def assignment_fidelity(stats: ConfusionStats) -> float:
    if stats.prepared_g == 0 or stats.prepared_e == 0:
        raise UndefinedFidelityError("fidelity needs shots prepared in both states")
    return 0.5 * (stats.n_gg / stats.prepared_g + stats.n_ee / stats.prepared_e)


def format_percent(value: float, digits: int = 2) -> str:
    """Percentage with ``digits`` decimals; exact ties round towards +inf."""
    scaled = round(value * 100 * 10**digits, 6)
    return f"{math.floor(scaled + 0.5) / 10**digits:.{digits}f}%"


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample (n - 1) standard deviation; a single value has spread 0."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ShapeError("no values")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1))


@dataclass
class FidelityReport:
    subset_labels: list
    F: list
    mu: float
    sigma: float
    mu0: float | None = None
    sigma0: float | None = None
    f_p1: float | None = None
    f_p2: float | None = None
    crosstalk_free: bool | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FidelityReport":
        return cls(**d)


def partition(dataset: Dataset, spectators: Sequence[int]) -> list[tuple[str, np.ndarray]]:
    """Shot indices grouped by spectator configuration, in lexicographic order.

    The first spectator is the leading character of each label, so spectators
    ``[1, 3]`` give labels ``"00", "01", "10", "11"`` for |Q2,Q4>.
    Only configurations present in the data are returned.
    """
    spectators = list(spectators)
    if not spectators:
        return [("", np.arange(len(dataset)))]
    if dataset.target_qubit in spectators:
        raise ShapeError("the target qubit cannot be its own spectator")
    bits = dataset.states[:, spectators].astype(np.int64)
    key = bits @ (1 << np.arange(len(spectators))[::-1])
    groups = []
    for k in np.unique(key):
        label = format(int(k), f"0{len(spectators)}b")
        groups.append((label, np.flatnonzero(key == k)))
    return groups


def _subset_fidelity(predict, dataset, idx, label):
    stats = confusion(predict(dataset.samples[idx]), dataset.labels[idx])
    try:
        return assignment_fidelity(stats)
    except UndefinedFidelityError:
        raise UndefinedFidelityError(f"spectator subset |{label}> lacks one of the target states") from None


def subset_fidelities(classifier: Callable, dataset: Dataset, target_qubit: int | None = None,
                      spectators: Sequence[int] = ()) -> FidelityReport:
    """Fidelity of one classifier on every spectator subset.

    ``classifier`` maps an ``(M, N)`` batch of shots to ``M`` decisions.
    """
    if target_qubit is not None and target_qubit != dataset.target_qubit:
        dataset = dataset.subset(slice(None))
        dataset.target_qubit = target_qubit
    F, labels = [], []
    for label, idx in partition(dataset, spectators):
        labels.append(label)
        F.append(_subset_fidelity(classifier, dataset, idx, label))
    mu, sigma = mean_std(F)
    return FidelityReport(subset_labels=labels, F=F, mu=mu, sigma=sigma)


def dedicated_fidelities(per_subset_classifiers: Sequence[Callable], dataset: Dataset,
                         spectators: Sequence[int]) -> list[float]:
    """Classifier ``k`` evaluated only on the ``k``-th spectator subset."""
    groups = partition(dataset, spectators)
    if len(groups) != len(per_subset_classifiers):
        raise ShapeError(f"{len(per_subset_classifiers)} classifiers for {len(groups)} subsets")
    return [_subset_fidelity(clf, dataset, idx, label)
            for clf, (label, idx) in zip(per_subset_classifiers, groups)]


def baseline_stats(per_subset_classifiers: Sequence[Callable], dataset: Dataset,
                   spectators: Sequence[int]) -> tuple[float, float]:
    return mean_std(dedicated_fidelities(per_subset_classifiers, dataset, spectators))


def crosstalk_free_check(mu: float, sigma: float, mu0: float, sigma0: float) -> bool:
    return bool(mu >= mu0 and sigma <= sigma0)


def fidelity_gaps(mu5: float, mu6: float, mu0: float) -> tuple[float, float]:
    """Loss of the unified conventional classifier and gain of the trained network."""
    return mu5 - mu0, mu6 - mu0


def render_table(rows: dict, subset_labels: Sequence[str], spectator_names: Sequence[str] = (),
                 title: str = "") -> str:
    """Plain-text table of per-subset fidelities, one row per classifier."""
    head = "|" + ",".join(spectator_names) + ">" if spectator_names else "subset"
    cols = [f"|{lab}>" for lab in subset_labels]
    width = max(10, *(len(c) for c in cols))
    name_w = max(len(head), *(len(r) for r in rows)) if rows else len(head)
    lines = []
    if title:
        lines.append(title)
    lines.append(head.ljust(name_w) + "".join(c.rjust(width) for c in cols))
    for name, values in rows.items():
        lines.append(name.ljust(name_w) + "".join(format_percent(v).rjust(width) for v in values))
    return "\n".join(lines)


def render_summary(stats: dict) -> str:
    """Mean/std table: ``stats`` maps a row name to ``(mu, sigma)``."""
    names = list(stats)
    width = max(10, *(len(n) + 2 for n in names))
    lines = ["".ljust(6) + "".join(n.rjust(width) for n in names),
             "mu".ljust(6) + "".join(format_percent(stats[n][0]).rjust(width) for n in names),
             "sigma".ljust(6) + "".join(format_percent(stats[n][1]).rjust(width) for n in names)]
    return "\n".join(lines)
