import pytest

from proofminer.guards import (
    ABSENT,
    END_OF_TRACE,
    GuardError,
    GuardModel,
    Leaf,
    Node,
    TrainingInstance,
    build_training_sets,
    learn_tree,
    rules_text,
    tree_rules,
)
from proofminer.traces import Corpus, ParamVector, Trace, encode_step


def T(name, steps):
    return Trace(name, tuple(encode_step(m, p, c) for (m, p, c) in steps))


def fig2a_instances():
    return [
        TrainingInstance.make({"p1": "n", "combined": "false"}, "simpl"),
        TrainingInstance.make({"p1": "a", "combined": "false"}, "simpl"),
        TrainingInstance.make({"p1": "m", "combined": "false"}, "trivial"),
        TrainingInstance.make({"p1": "l", "combined": "false"}, "simpl"),
    ]


def fig2a_model():
    return GuardModel({"induction": learn_tree(fig2a_instances())}, {"induction": 1})


def test_build_training_sets_one_instance_per_event():
    corpus = Corpus((
        T("a", [("induction", ["n"], False), ("simpl", [], False)]),
        T("b", [("induction", ["a"], False), ("simpl", [], False)]),
        T("c", [("induction", ["m"], False), ("trivial", [], False)]),
        T("d", [("induction", ["l"], False), ("simpl", [], False)]),
    ))
    sets = build_training_sets(corpus)
    assert len(sets["induction"]) == 4
    assert {i.cls for i in sets["induction"]} == {"simpl_0", "trivial_0"}
    # total instances equal total events
    assert sum(len(v) for v in sets.values()) == sum(len(t.events) for t in corpus.traces)


def test_single_event_trace_yields_end_instance():
    sets = build_training_sets(Corpus((T("t", [("trivial", [], False)]),)))
    assert sets == {
        "trivial_0": [TrainingInstance.make({"combined": "false"}, END_OF_TRACE)]
    }


def test_table1_trace_instances():
    events = [
        ("intros", [], False), ("induction", ["n"], False), ("tauto", [], False),
        ("simpl", ["in H"], False), ("right", [], False), ("assert", ["m <= O"], True),
        ("try", ["omega"], False), ("rewrite", ["<- H"], False), ("auto", ["with arith"], False),
    ]
    corpus = Corpus((T("ex", events),))
    sets = build_training_sets(corpus)
    assert sum(len(v) for v in sets.values()) == 9
    assert sets["intros_0"][0].cls == "induction"
    assert sets["auto"][0].cls == END_OF_TRACE
    assert sets["assert"][0].get("combined") == "true"


def test_learn_tree_reproduces_parameter_rules():
    tree = learn_tree(fig2a_instances())
    assert isinstance(tree, Node)
    assert tree.attribute == "p1"
    expected = {"n": "simpl", "a": "simpl", "m": "trivial", "l": "simpl"}
    for value, sub in tree.children:
        assert isinstance(sub, Leaf)
        assert sub.cls == expected[value]


def test_learn_tree_pure_instances_single_leaf():
    insts = [TrainingInstance.make({"p1": "x", "combined": "false"}, "a")] * 3
    tree = learn_tree(insts)
    assert tree == Leaf("a", (("a", 3),))


def test_learn_tree_tie_breaks_lexicographically():
    insts = [
        TrainingInstance.make({"p1": "x", "combined": "false"}, "a"),
        TrainingInstance.make({"p1": "x", "combined": "false"}, "b"),
    ]
    tree = learn_tree(insts)
    assert tree == Leaf("a", (("a", 1), ("b", 1)))


def test_learn_tree_empty_is_error():
    with pytest.raises(GuardError):
        learn_tree([])


def test_learn_tree_deterministic_under_instance_order():
    insts = fig2a_instances()
    assert learn_tree(insts) == learn_tree(list(reversed(insts)))


def test_no_attribute_repeats_on_any_path():
    corpus = Corpus(tuple(
        T(f"t{i}", [("m", [p1, p2], False), (nxt, [], False)])
        for i, (p1, p2, nxt) in enumerate([
            ("a", "x", "u"), ("a", "y", "v"), ("b", "x", "w"),
            ("b", "y", "u"), ("a", "x", "u"),
        ])
    ))
    model = GuardModel.from_corpus(corpus)

    def scan(tree, used):
        if isinstance(tree, Leaf):
            return
        assert tree.attribute not in used
        for _, sub in tree.children:
            scan(sub, used | {tree.attribute})

    for tree in model.trees.values():
        scan(tree, set())


def test_predict_fig2a_cases():
    model = fig2a_model()
    assert model.predict("induction", ParamVector(("m",))) == "trivial"
    assert model.predict("induction", ParamVector(("n",))) == "simpl"
    assert model.predict("induction", ParamVector(("l",))) == "simpl"


def test_predict_single_leaf_ignores_values():
    model = GuardModel({"m": Leaf("simpl", (("simpl", 2),))}, {"m": 1})
    assert model.predict("m", ParamVector(("whatever",))) == "simpl"
    assert model.predict("m", ParamVector()) == "simpl"


def test_predict_unseen_value_uses_heaviest_child():
    # leaf masses are 1 each; the tie breaks to the lexicographically first
    model = fig2a_model()
    tree = model.trees["induction"]
    assert tree.default == "a"
    assert model.predict("induction", ParamVector(("z",))) == "simpl"


def test_predict_unknown_label_distinguished():
    assert fig2a_model().predict("nosuch", ParamVector()) is None
    assert fig2a_model().support("nosuch", ParamVector()) is None


def test_support_collects_leaf_classes():
    insts = [
        TrainingInstance.make({"p1": "x", "combined": "false"}, "a"),
        TrainingInstance.make({"p1": "x", "combined": "false"}, "b"),
    ]
    model = GuardModel({"m": learn_tree(insts)}, {"m": 1})
    assert model.support("m", ParamVector(("x",))) == {"a", "b"}


def test_absent_parameter_encoding():
    corpus = Corpus((
        T("a", [("apply", ["x", "y"], False), ("auto", [], False)]),
        T("b", [("apply", ["x"], False), ("auto", [], False)]),
    ))
    sets = build_training_sets(corpus)
    by_params = {i.get("p2") for i in sets["apply"]}
    assert by_params == {"y", ABSENT}


def test_training_rejects_negative_traces():
    bad = Corpus((Trace("n", (encode_step("a", [], False),), "negative"),))
    with pytest.raises(GuardError):
        build_training_sets(bad)


def test_rule_dump_matches_textual_format():
    rules = tree_rules(learn_tree(fig2a_instances()))
    assert "(p1 = n): simpl" in rules
    assert "(p1 = m): trivial" in rules
    assert "(p1 = l): simpl" in rules
    text = rules_text(fig2a_model())
    assert "MODEL FOR: induction" in text


def test_guard_model_json_roundtrip_and_hash():
    corpus = Corpus((
        T("a", [("induction", ["n"], False), ("simpl", [], False)]),
        T("b", [("induction", ["m"], False), ("trivial", [], False)]),
        T("c", [("assert", ["m <= O"], True), ("try", ["omega"], False)]),
    ))
    model = GuardModel.from_corpus(corpus)
    doc = model.to_doc()
    again = GuardModel.from_doc(doc)
    assert again == model
    assert again.content_hash() == model.content_hash()


def test_min_leaf_stops_recursion():
    insts = [
        TrainingInstance.make({"p1": "x", "combined": "false"}, "a"),
        TrainingInstance.make({"p1": "y", "combined": "false"}, "b"),
    ]
    assert isinstance(learn_tree(insts, min_leaf=1), Node)
    assert isinstance(learn_tree(insts, min_leaf=3), Leaf)


def test_training_prediction_agrees_on_pure_leaves():
    corpus = Corpus((
        T("a", [("induction", ["n"], False), ("simpl", [], False)]),
        T("b", [("induction", ["m"], False), ("trivial", [], False)]),
        T("c", [("induction", ["n"], False), ("simpl", [], False)]),
    ))
    model = GuardModel.from_corpus(corpus)
    for label, instances in build_training_sets(corpus).items():
        for inst in instances:
            params = tuple(v for k, v in inst.attributes if k.startswith("p") and v != ABSENT)
            vec = ParamVector(params, inst.get("combined") == "true")
            support = model.support(label, vec)
            assert inst.cls in support
