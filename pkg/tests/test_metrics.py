import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsc.errors import ShapeError, UndefinedFidelityError
from qsc.metrics import (ConfusionStats, FidelityReport, assignment_fidelity, baseline_stats, confusion,
                         crosstalk_free_check, dedicated_fidelities, fidelity_gaps, format_percent, mean_std,
                         partition, render_summary, render_table, subset_fidelities)
from qsc.signal import Dataset

# Published per-subset fidelities of Q3 (columns |Q2,Q4> = 00, 01, 10, 11)
PUBLISHED_ROWS = {
    "F1": [0.8915, 0.8690, 0.8475, 0.8805],
    "F2": [0.8690, 0.8905, 0.8000, 0.8755],
    "F3": [0.8745, 0.7960, 0.8800, 0.8475],
    "F4": [0.8810, 0.8690, 0.8555, 0.8920],
    "F5": [0.8880, 0.8755, 0.8510, 0.8865],
    "F6": [0.8975, 0.9020, 0.9090, 0.9040],
}
DIAGONAL = [0.8915, 0.8905, 0.8800, 0.8920]


def pct(values):
    return tuple(format_percent(v) for v in values)


# ---- confusion and fidelity ----------------------------------------------------

def test_perfect_classifier_has_no_off_diagonal():
    s = confusion([0, 1, 1, 0, 1], [0, 1, 1, 0, 1])
    assert (s.n_eg, s.n_ge) == (0, 0)
    assert assignment_fidelity(s) == 1.0


def test_constant_classifier():
    s = confusion([0] * 6, [0, 1, 0, 1, 1, 1])
    assert s.n_eg == 0 and s.n_ee == 0
    assert assignment_fidelity(s) == 0.5


def test_confusion_against_independent_count():
    rng = np.random.default_rng(0)
    pred, prep = rng.integers(0, 2, 1000), rng.integers(0, 2, 1000)
    counts = {"gg": 0, "eg": 0, "ge": 0, "ee": 0}
    for p, y in zip(pred, prep):
        counts[("e" if p else "g") + ("e" if y else "g")] += 1
    s = confusion(pred, prep)
    assert (s.n_gg, s.n_eg, s.n_ge, s.n_ee) == (counts["gg"], counts["eg"], counts["ge"], counts["ee"])
    assert s.prepared_g == int(np.sum(prep == 0))


def test_fidelity_arithmetic():
    s = ConfusionStats(n_gg=900, n_eg=100, n_ge=150, n_ee=850)
    assert assignment_fidelity(s) == pytest.approx(0.875)


def test_undefined_fidelity():
    with pytest.raises(UndefinedFidelityError):
        assignment_fidelity(confusion([0, 1], [0, 0]))


@pytest.mark.parametrize("pred,prep", [([], []), ([0, 1], [0]), ([0, 2], [0, 1])])
def test_confusion_input_errors(pred, prep):
    with pytest.raises(ShapeError):
        confusion(pred, prep)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1))
def test_fidelity_bounds(pairs):
    pred, prep = zip(*pairs)
    s = confusion(pred, prep)
    assert s.n_gg + s.n_eg + s.n_ge + s.n_ee == len(pairs)
    if s.prepared_g and s.prepared_e:
        f = assignment_fidelity(s)
        assert 0 <= f <= 1
        assert (f == 1) == (s.n_eg == 0 and s.n_ge == 0)


# ---- formatting and statistics -------------------------------------------------------

def test_percent_style():
    assert format_percent(0.8745) == "87.45%"
    assert format_percent(-0.01325) == "-1.32%"
    assert format_percent(0.87525) == "87.53%"
    assert format_percent(1.0) == "100.00%"


def test_single_value_has_zero_spread():
    assert mean_std([0.9]) == (0.9, 0.0)
    with pytest.raises(ShapeError):
        mean_std([])


def test_statistics_against_direct_oracle():
    rng = np.random.default_rng(1)
    v = rng.uniform(0.8, 0.95, 7)
    mu = sum(v) / len(v)
    sd = (sum((x - mu) ** 2 for x in v) / (len(v) - 1)) ** 0.5
    assert mean_std(v) == pytest.approx((mu, sd), rel=1e-12)


@pytest.mark.parametrize("row,mu,sigma", [
    ("F1", "87.21%", "1.88%"),
    ("F3", "84.95%", "3.84%"),
    ("F4", "87.44%", "1.57%"),
    ("F5", "87.53%", "1.71%"),
    ("F6", "90.31%", "0.48%"),
])
def test_published_rows_reproduce_summary_table(row, mu, sigma):
    assert pct(mean_std(PUBLISHED_ROWS[row])) == (mu, sigma)


def test_published_diagonal_gives_baseline():
    assert pct(mean_std(DIAGONAL)) == ("88.85%", "0.57%")


def test_population_divisor_would_fail_the_cross_check():
    v = np.array(PUBLISHED_ROWS["F5"])
    assert format_percent(v.std(ddof=0)) != "1.71%"


def test_all_equal_diagonal():
    assert mean_std([0.88] * 4)[1] == 0.0


# ---- crosstalk-free and gaps --------------------------------------------------------------

def test_crosstalk_free_published_cases():
    assert crosstalk_free_check(0.9031, 0.0048, 0.8885, 0.0057)
    assert not crosstalk_free_check(0.8753, 0.0171, 0.8885, 0.0057)


def test_crosstalk_free_boundaries_inclusive():
    assert crosstalk_free_check(0.8885, 0.0057, 0.8885, 0.0057)
    assert not crosstalk_free_check(0.8885, 0.00571, 0.8885, 0.0057)


def test_published_gaps_for_q3():
    mu0, _ = mean_std(DIAGONAL)
    mu5, _ = mean_std(PUBLISHED_ROWS["F5"])
    mu6, _ = mean_std(PUBLISHED_ROWS["F6"])
    assert pct(fidelity_gaps(mu5, mu6, mu0)) == ("-1.32%", "1.46%")
    # from the two-decimal summary values directly
    assert pct(fidelity_gaps(0.8753, 0.9031, 0.8885)) == ("-1.32%", "1.46%")


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_gap_antisymmetry(a, b, mu0):
    f1, f2 = fidelity_gaps(a, b, mu0)
    g1, g2 = fidelity_gaps(b, a, mu0)
    assert (f1, f2) == (g2, g1)
    assert fidelity_gaps(mu0, mu0, mu0) == (0.0, 0.0)


# ---- subsets ----------------------------------------------------------------------------

def make_dataset(rng, n=400):
    states = rng.integers(0, 2, (n, 6)).astype(np.uint8)
    return Dataset(6, 1.0, 1, 2, np.zeros((n, 1)), states)


def test_partition_is_complete_and_lexicographic():
    ds = make_dataset(np.random.default_rng(2))
    groups = partition(ds, [1, 3])
    assert [g for g, _ in groups] == ["00", "01", "10", "11"]
    idx = np.concatenate([i for _, i in groups])
    assert sorted(idx.tolist()) == list(range(len(ds)))
    for label, i in groups:
        assert np.all(ds.states[i, 1] == int(label[0])) and np.all(ds.states[i, 3] == int(label[1]))


def test_partition_rejects_target_as_spectator():
    with pytest.raises(ShapeError):
        partition(make_dataset(np.random.default_rng(3)), [2])


def oracle_classifier(ds):
    # reads the true label but flips it on a spectator-dependent fraction of shots
    def clf(x):
        return x[:, 0].astype(int)
    rng = np.random.default_rng(4)
    flip = rng.uniform(size=len(ds)) < 0.05 + 0.1 * ds.states[:, 1]
    samples = (ds.labels ^ flip).astype(float)[:, None]
    return Dataset(ds.n_qubits, 1.0, 1, ds.target_qubit, samples, ds.states), clf


def test_subset_fidelities_against_manual_evaluation():
    ds, clf = oracle_classifier(make_dataset(np.random.default_rng(5), 4000))
    rep = subset_fidelities(clf, ds, spectators=[1, 3])
    for label, f in zip(rep.subset_labels, rep.F):
        m = (ds.states[:, 1] == int(label[0])) & (ds.states[:, 3] == int(label[1]))
        pred, y = ds.samples[m, 0], ds.labels[m]
        manual = 0.5 * (np.mean(pred[y == 0] == 0) + np.mean(pred[y == 1] == 1))
        assert f == pytest.approx(manual)
    assert rep.F[2] < rep.F[0]  # spectator Q2 excited costs fidelity
    assert (rep.mu, rep.sigma) == mean_std(rep.F)


def test_single_subset_report():
    ds, clf = oracle_classifier(make_dataset(np.random.default_rng(6)))
    rep = subset_fidelities(clf, ds)
    assert rep.subset_labels == [""] and rep.sigma == 0.0 and rep.mu == rep.F[0]


def test_permuting_subset_order_keeps_statistics():
    ds, clf = oracle_classifier(make_dataset(np.random.default_rng(7), 2000))
    a = subset_fidelities(clf, ds, spectators=[1, 3])
    b = subset_fidelities(clf, ds, spectators=[3, 1])
    assert sorted(a.F) == pytest.approx(sorted(b.F))
    assert (a.mu, a.sigma) == pytest.approx((b.mu, b.sigma), rel=1e-12)


def test_subset_missing_a_target_state_is_named():
    states = np.zeros((4, 6), dtype=np.uint8)
    states[[1, 3], 2] = 1
    states[[2, 3], 1] = 1
    states[3, 2] = 0  # subset |1> now holds only ground shots
    ds = Dataset(6, 1.0, 1, 2, np.zeros((4, 1)), states)
    with pytest.raises(UndefinedFidelityError, match=r"\|1>"):
        subset_fidelities(lambda x: np.zeros(len(x), int), ds, spectators=[1])


def test_dedicated_classifiers_only_see_their_subset():
    ds, clf = oracle_classifier(make_dataset(np.random.default_rng(8), 2000))
    seen = []

    def spy(k):
        def f(x):
            seen.append((k, len(x)))
            return clf(x)
        return f

    F = dedicated_fidelities([spy(k) for k in range(4)], ds, [1, 3])
    sizes = [len(i) for _, i in partition(ds, [1, 3])]
    assert seen == [(k, sizes[k]) for k in range(4)]
    assert baseline_stats([clf] * 4, ds, [1, 3]) == mean_std(F)
    with pytest.raises(ShapeError):
        dedicated_fidelities([clf] * 3, ds, [1, 3])


def test_report_roundtrip():
    rep = FidelityReport(["0", "1"], [0.9, 0.8], 0.85, 0.07, crosstalk_free=False)
    assert FidelityReport.from_dict(rep.to_dict()) == rep


def test_text_tables():
    table = render_table({"F5": PUBLISHED_ROWS["F5"], "F6": PUBLISHED_ROWS["F6"]}, ["00", "01", "10", "11"], ["Q2", "Q4"])
    lines = table.splitlines()
    assert lines[0].split() == ["|Q2,Q4>", "|00>", "|01>", "|10>", "|11>"]
    assert lines[1].split() == ["F5", "88.80%", "87.55%", "85.10%", "88.65%"]
    summary = render_summary({"F5": mean_std(PUBLISHED_ROWS["F5"]), "F6": mean_std(PUBLISHED_ROWS["F6"])})
    assert "87.53%" in summary and "0.48%" in summary
