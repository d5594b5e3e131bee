import pytest

from proofminer.evaluation import (
    ConfusionMatrix,
    EvaluationError,
    build_negatives,
    cross_validate,
    make_folds,
    metrics,
    mutate_negative,
)
from proofminer.inference import InferenceConfig
from proofminer.traces import Corpus, Trace, encode_step
from synthcorpus import five_state_machine


def T(name, steps):
    return Trace(name, tuple(encode_step(m, p, c) for (m, p, c) in steps))


def small_corpus(n=10):
    machine = five_state_machine()
    return machine.sample_corpus(3, n, source="small")


# -- folds --------------------------------------------------------------------

def test_folds_ten_traces_five_folds_of_two():
    plan = make_folds(small_corpus(10), 5, seed=1)
    sizes = [list(plan.assignment.values()).count(i) for i in range(5)]
    assert sizes == [2, 2, 2, 2, 2]


def test_folds_seven_traces_five_folds():
    plan = make_folds(small_corpus(7), 5, seed=1)
    sizes = sorted(list(plan.assignment.values()).count(i) for i in range(5))
    assert sizes == [1, 1, 1, 2, 2]


def test_folds_reproducible_per_seed():
    corpus = small_corpus(9)
    assert make_folds(corpus, 4, seed=5) == make_folds(corpus, 4, seed=5)
    assert make_folds(corpus, 4, seed=5) != make_folds(corpus, 4, seed=6)


def test_folds_partition_and_bounds():
    corpus = small_corpus(13)
    for k in (2, 3, 5, 13):
        plan = make_folds(corpus, k, seed=0)
        assert set(plan.assignment) == {t.name for t in corpus.traces}
        assert set(plan.assignment.values()) <= set(range(k))
        sizes = [list(plan.assignment.values()).count(i) for i in range(k)]
        assert max(sizes) - min(sizes) <= 1
    with pytest.raises(EvaluationError):
        make_folds(corpus, 14)


# -- mutation -----------------------------------------------------------------

def test_mutate_two_events_swaps():
    trace = T("t", [("a", [], False), ("b", [], False)])
    mutated = mutate_negative(trace, 0)
    assert [e.label for e in mutated.events] == ["b_0", "a_0"]
    assert mutated.polarity == "negative"
    assert mutated.name == "t#neg"


def test_mutate_table1_length_and_inequality():
    steps = [
        ("intros", [], False), ("induction", ["n"], False), ("tauto", [], False),
        ("simpl", ["in H"], False), ("right", [], False), ("assert", ["m <= O"], True),
        ("try", ["omega"], False), ("rewrite", ["<- H"], False), ("auto", ["with arith"], False),
    ]
    trace = T("ex", steps)
    for seed in range(5):
        mutated = mutate_negative(trace, seed)
        assert len(mutated.events) == 9
        assert mutated.events != trace.events
        assert sorted(e.label for e in mutated.events) == sorted(e.label for e in trace.events)


def test_mutate_single_event_is_error():
    with pytest.raises(EvaluationError):
        mutate_negative(T("t", [("a", [], False)]), 0)


def test_mutate_identical_events_is_error():
    with pytest.raises(EvaluationError):
        mutate_negative(T("t", [("a", [], False), ("a", [], False)]), 0)


# -- negatives ----------------------------------------------------------------

def test_build_negatives_exact_count_and_determinism():
    corpus = small_corpus(20)
    from synthcorpus import diverse_machines
    foreign = diverse_machines()[1].sample_corpus(77, 10, prefix="f", source="foreign")
    negs = build_negatives(corpus, foreign, count=30, seed=4)
    assert len(negs) == 30
    assert all(t.polarity == "negative" for t in negs)
    again = build_negatives(corpus, foreign, count=30, seed=4)
    assert negs == again


def test_build_negatives_without_foreign():
    negs = build_negatives(small_corpus(8), None, count=2, seed=0)
    assert len(negs) == 2
    assert all("#neg" in t.name for t in negs)


def test_build_negatives_redraws_accidental_positives():
    # a(x) b / b a(x): each one's mutation IS the other trace; with only
    # these two traces every mutation is PTA-accepted, so material runs out
    corpus = Corpus((
        T("t1", [("a", ["x"], False), ("b", [], False)]),
        T("t2", [("b", [], False), ("a", ["x"], False)]),
    ))
    with pytest.raises(EvaluationError):
        build_negatives(corpus, None, count=2, seed=0)
    # adding an unrelated third trace gives the drawer usable material
    corpus2 = Corpus(corpus.traces + (T("t3", [("c", ["u"], False), ("d", [], False)]),))
    negs = build_negatives(corpus2, None, count=2, seed=0)
    assert len(negs) == 2


# -- metrics ------------------------------------------------------------------

def test_metrics_perfect_sensitivity():
    assert metrics(ConfusionMatrix(tp=5, fn=0, tn=0, fp=1))[0] == 1.0


def test_metrics_reported_values():
    sens, spec = metrics(ConfusionMatrix(tp=84, fn=16, tn=81, fp=19))
    assert sens == 0.84
    assert spec == 0.81


def test_metrics_zero_denominator_undefined():
    sens, spec = metrics(ConfusionMatrix(tp=0, fn=0, tn=3, fp=1))
    assert sens is None
    assert spec == 0.75


# -- cross validation ---------------------------------------------------------

def test_cross_validate_counts_and_partition():
    corpus = small_corpus(15)
    negatives = build_negatives(corpus, None, count=10, seed=2)
    report = cross_validate(corpus, negatives, k=3, config=InferenceConfig(seed=1))
    assert len(report.folds) == 3
    fold_sizes = [m.tp + m.fn for m in report.folds]
    assert sum(fold_sizes) == 15
    for m in report.folds:
        assert m.tn + m.fp == 10
    assert report.proofs == 15
    assert report.lines == sum(len(t.events) for t in corpus.traces)


def test_cross_validate_duplicated_corpus_full_sensitivity():
    # every evaluation trace also occurs in training -> sensitivity 1.0,
    # regardless of how the fold shuffle lands
    base = T("base", [("intros", [], False), ("apply", ["lem1"], False),
                      ("rewrite", ["H1"], False), ("auto", [], False)])
    duplicated = Corpus(
        tuple(Trace(f"copy{i}", base.events) for i in range(12)),
        source="duplicated",
    )
    negatives = build_negatives(duplicated, None, count=5, seed=0)
    report = cross_validate(duplicated, negatives, k=2, config=InferenceConfig(seed=3))
    assert report.mean_sensitivity == 1.0


def test_cross_validate_label_disjoint_negatives_full_specificity():
    corpus = small_corpus(12)
    foreign = tuple(
        T(f"f{i}", [("zzz", ["q"], False), ("www", [], False)]) for i in range(6)
    )
    negatives = [Trace(t.name, t.events, "negative") for t in foreign]
    report = cross_validate(corpus, negatives, k=3, config=InferenceConfig(seed=0))
    assert report.mean_specificity == 1.0


def test_cross_validate_ground_truth_scores():
    from synthcorpus import diverse_machines

    machine = five_state_machine()
    corpus = machine.sample_corpus(31, 60, source="gt")
    foreign = diverse_machines()[0].sample_corpus(99, 10, prefix="f", source="foreign")
    negatives = build_negatives(corpus, foreign, count=20, seed=7)
    report = cross_validate(corpus, negatives, k=5, config=InferenceConfig(seed=7))
    assert report.mean_sensitivity >= 0.8
    assert report.mean_specificity >= 0.8


def test_cross_validate_reproducible():
    corpus = small_corpus(12)
    negatives = build_negatives(corpus, None, count=8, seed=3)
    r1 = cross_validate(corpus, negatives, k=4, config=InferenceConfig(seed=5))
    r2 = cross_validate(corpus, negatives, k=4, config=InferenceConfig(seed=5))
    assert r1.to_json() == r2.to_json()


def test_report_table_layout():
    corpus = small_corpus(10)
    negatives = build_negatives(corpus, None, count=5, seed=1)
    report = cross_validate(corpus, negatives, k=2, config=InferenceConfig(seed=1))
    table = report.format_table()
    assert "Data Set" in table and "Sensitivity" in table and "Specificity" in table
    assert "small" in table


def test_cross_validate_requires_negatives():
    with pytest.raises(EvaluationError):
        cross_validate(small_corpus(6), [], k=2)
