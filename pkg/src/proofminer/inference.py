"""Guard-constrained blue-fringe state merging over the prefix tree.

The prefix tree is first label-determinized, then generalized red-blue
style: the initial state is red, the frontier of non-red children of red
states is blue, and each round either promotes a blue state that is
incompatible with every red state or commits the highest-scoring
compatible (red, blue) merge. Merging folds same-labeled transitions
recursively (classic evidence-driven scoring: one point per folded pair).

Compatibility is where the data guards act. A merge is rejected when it
would increase the model's guard-violation count, where violations are
counted per transition witness against the classifier leaf that witness
reaches: the majority prediction must remain available from the target
state, every label offered by the target must appear in the leaf's
observed-class set, and an accepting target requires the leaf to have
observed a trace end. The observed-class reading is what gives merging
its bite: a state whose incoming data says "this run continues with X"
refuses to merge with states offering foreign continuations, while the
prefix tree itself always starts at the baseline count.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .efsm import Efsm, Transition, build_pta, compact, walk, GUARDED
from .guards import END_OF_TRACE, GuardModel, InfoGainTreeLearner
from .traces import Corpus, ParamVector

log = logging.getLogger("proofminer.inference")


class InferenceError(ValueError):
    """Inference cannot proceed (empty corpus, unknown state...)."""


class IncompatibleMergeError(InferenceError):
    """The requested merge would break guard consistency."""


@dataclass(frozen=True)
class InferenceConfig:
    """Knobs for the merging loop; the algorithm itself is deterministic
    so the seed is plumbing for callers that batch experiments."""

    merge_threshold: int = 0
    min_leaf: int = 1
    seed: int = 0
    verify_each_merge: bool = False

    @staticmethod
    def from_doc(doc: Mapping) -> "InferenceConfig":
        known = {"mergeThreshold", "minLeaf", "seed"}
        unknown = set(doc) - known
        if unknown:
            raise InferenceError(f"unknown config keys: {sorted(unknown)}")
        return InferenceConfig(
            merge_threshold=int(doc.get("mergeThreshold", 0)),
            min_leaf=int(doc.get("minLeaf", 1)),
            seed=int(doc.get("seed", 0)),
        )

    def to_doc(self) -> dict:
        return {
            "mergeThreshold": self.merge_threshold,
            "minLeaf": self.min_leaf,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class MergeCandidate:
    red: int
    blue: int
    score: int


# ---------------------------------------------------------------------------
# Guard-violation counting (reference implementation over Efsm)
# ---------------------------------------------------------------------------

def _prediction_violations(
    guards: GuardModel,
    label: str,
    witnesses: Iterable[ParamVector],
    target_labels: frozenset[str] | set[str],
    target_accepting: bool,
) -> int:
    """The majority-prediction clauses: each witness's predicted successor
    must be an outgoing label of the target (or the target must accept,
    for the terminal prediction)."""
    count = 0
    for vec in witnesses:
        predicted = guards.predict(label, vec)
        if predicted is None:
            continue
        if predicted == END_OF_TRACE:
            if not target_accepting:
                count += 1
        elif predicted not in target_labels:
            count += 1
    return count


def _support_violations(
    guards: GuardModel,
    label: str,
    witnesses: Iterable[ParamVector],
    target_labels: frozenset[str] | set[str],
    target_accepting: bool,
) -> int:
    """The observed-class clauses: every label the target offers must occur
    in the witness's classifier leaf, and an accepting target requires the
    leaf to have observed a trace end."""
    count = 0
    for vec in witnesses:
        allowed = guards.support(label, vec)
        if allowed is None:
            continue
        for offered in target_labels:
            if offered not in allowed:
                count += 1
        if target_accepting and END_OF_TRACE not in allowed:
            count += 1
    return count


def _witness_violations(guards, label, witnesses, target_labels, target_accepting) -> int:
    return _prediction_violations(
        guards, label, witnesses, target_labels, target_accepting
    ) + _support_violations(guards, label, witnesses, target_labels, target_accepting)


def _sum_over_transitions(model: Efsm, counter) -> int:
    if model.guards is None:
        return 0
    out_labels = model.out_labels()
    return sum(
        counter(model.guards, t.label, t.witnesses,
                out_labels[t.target], t.target in model.accepting)
        for t in model.transitions
    )


def prediction_violations(model: Efsm) -> int:
    """Majority-prediction violations only; monotone non-increasing under
    any fold, so a merged model never exceeds the raw prefix tree."""
    return _sum_over_transitions(model, _prediction_violations)


def support_violations(model: Efsm) -> int:
    """Observed-class violations only; zero on the raw prefix tree, and
    the component that actually rejects over-generalizing merges."""
    return _sum_over_transitions(model, _support_violations)


def check_guard_consistency(model: Efsm) -> int:
    """Total guard violations of a model (0 when it has no guard model).

    Counted per (transition, witness): the witness's majority prediction
    must be satisfied by the target state (an outgoing transition with
    that label, or acceptance for the terminal prediction), every label
    the target offers must occur in the witness's classifier leaf, and an
    accepting target requires the leaf to contain the terminal class.
    The merging loop never increases this count relative to its starting
    model (the label-determinized prefix tree).
    """
    return _sum_over_transitions(model, _witness_violations)


# ---------------------------------------------------------------------------
# Generic fold over a possibly nondeterministic model (public merge and
# determinize); the blue-fringe loop uses the faster _Engine below.
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        root = x
        parent = self.parent
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != x:
            parent[x], x = root, parent[x]
        return root

    def union(self, keep: int, absorb: int) -> None:
        self.parent[absorb] = keep


def _merge_witnesses(a: dict[ParamVector, int], b: dict[ParamVector, int]) -> dict:
    merged = dict(a)
    for vec, n in b.items():
        merged[vec] = merged.get(vec, 0) + n
    return merged


def _fold(model: Efsm, seed_pairs: list[tuple[int, int]], pin: frozenset[int] = frozenset()):
    """Union states (recursively folding same-labeled transitions) and
    return (score, folded Efsm). States in `pin` win representative picks.
    """
    uf = _UnionFind()
    out: dict[int, dict[str, list[tuple[int, dict]]]] = {s: {} for s in model.states}
    for t in model.transitions:
        out[t.source].setdefault(t.label, []).append((t.target, dict(t.witnesses)))
    accepting = set(model.accepting)
    score = 0
    stack = list(seed_pairs)

    def pick(x: int, y: int) -> tuple[int, int]:
        if y in pin and x not in pin:
            return y, x
        if x in pin or x <= y:
            return x, y
        return y, x

    while True:
        while stack:
            x, y = stack.pop()
            rx, ry = uf.find(x), uf.find(y)
            if rx == ry:
                continue
            keep, absorb = pick(rx, ry)
            uf.union(keep, absorb)
            ko = out[keep]
            for label, entries in out.pop(absorb).items():
                ko.setdefault(label, []).extend(entries)
            if absorb in accepting:
                accepting.add(keep)
        # resolve residual nondeterminism (same label, several target classes)
        dirty = False
        for root in list(out):
            for label, entries in out[root].items():
                if len(entries) < 2:
                    continue
                by_root: dict[int, dict] = {}
                for target, wits in entries:
                    rt = uf.find(target)
                    if rt in by_root:
                        by_root[rt] = _merge_witnesses(by_root[rt], wits)
                    else:
                        by_root[rt] = wits
                roots = sorted(by_root)
                out[root][label] = [(rt, by_root[rt]) for rt in roots]
                if len(roots) > 1:
                    score += len(roots) - 1
                    stack.extend((roots[0], other) for other in roots[1:])
                    dirty = True
        if not stack and not dirty:
            break

    transitions = []
    for root, labels in out.items():
        for label, entries in labels.items():
            assert len(entries) == 1
            target, wits = entries[0]
            transitions.append(Transition(root, label, uf.find(target), wits))
    states = frozenset(out)
    return score, Efsm(
        states=states,
        initial=uf.find(model.initial),
        accepting=frozenset(a for a in accepting if a in states),
        transitions=tuple(sorted(transitions, key=lambda t: (t.source, t.label, t.target))),
        guards=model.guards,
    )


def _check_states(model: Efsm, a: int, b: int) -> None:
    if a not in model.states or b not in model.states:
        raise InferenceError(f"unknown state id {a if a not in model.states else b}")
    if a == b:
        raise InferenceError("cannot merge a state with itself")


def score_merge(model: Efsm, a: int, b: int) -> int | None:
    """Evidence score of overlaying `a` and `b`, or None when the merged
    model would violate guard consistency more than the input does."""
    _check_states(model, a, b)
    score, folded = _fold(model, [(a, b)], pin=frozenset({a}))
    if check_guard_consistency(folded) > check_guard_consistency(model):
        return None
    return score


def merge(model: Efsm, a: int, b: int) -> Efsm:
    """Redirect b's transitions onto a, determinize, and compact.

    Raises IncompatibleMergeError when the result would have more guard
    violations than the input (the merge is rolled back by not happening).
    """
    _check_states(model, a, b)
    _, folded = _fold(model, [(a, b)], pin=frozenset({a}))
    if check_guard_consistency(folded) > check_guard_consistency(model):
        raise IncompatibleMergeError(f"states {a} and {b} are incompatible")
    return compact(folded)


def determinize(model: Efsm) -> Efsm:
    """Merge targets of same-labeled sibling transitions to a fixpoint.

    This is forced post-processing, not subject to the guard check; the
    state count strictly decreases with every fold so it terminates.
    """
    _, folded = _fold(model, [])
    return compact(folded)


# ---------------------------------------------------------------------------
# Blue-fringe engine (label-deterministic machines, incremental violations)
# ---------------------------------------------------------------------------

class _TryMergeOutcome:
    __slots__ = ("score", "delta", "compatible", "uf", "merged_out", "acc", "touched")

    def __init__(self, score, delta, compatible, uf, merged_out, acc, touched):
        self.score = score
        self.delta = delta
        self.compatible = compatible
        self.uf = uf
        self.merged_out = merged_out
        self.acc = acc
        self.touched = touched


class _Engine:
    """Mutable working machine for the merging loop.

    `out` maps state -> {label: (target, witnesses)}; the machine is
    label-deterministic throughout. Candidate merges are evaluated on
    copy-on-write overlays, so scoring never disturbs the committed
    machine; commits rebuild the adjacency.
    """

    def __init__(self, model: Efsm, guards: GuardModel):
        if not model.is_label_deterministic():
            raise InferenceError("engine requires a label-deterministic model")
        self.guards = guards
        self.out: dict[int, dict[str, tuple[int, dict]]] = {s: {} for s in model.states}
        for t in model.transitions:
            self.out[t.source][t.label] = (t.target, dict(t.witnesses))
        self.accepting = set(model.accepting)
        self.initial = model.initial
        self._reindex()

    def _reindex(self) -> None:
        self.outlabels = {s: frozenset(m) for s, m in self.out.items()}
        self.in_edges: dict[int, list[tuple[int, str]]] = {s: [] for s in self.out}
        for s, m in self.out.items():
            for label, (target, _) in m.items():
                self.in_edges[target].append((s, label))
        self.violations = sum(
            self._contribution(s, label) for s, m in self.out.items() for label in m
        )

    def _contribution(self, source: int, label: str) -> int:
        target, wits = self.out[source][label]
        return _witness_violations(
            self.guards, label, wits, self.outlabels[target], target in self.accepting
        )

    def children(self, state: int) -> list[int]:
        return sorted({target for target, _ in self.out[state].values()})

    def blue_of(self, red: set[int]) -> list[int]:
        blue = {t for r in red for t in self.children(r)} - red
        return sorted(blue)

    def try_merge(self, a: int, b: int, red: frozenset[int]) -> _TryMergeOutcome:
        uf = _UnionFind()
        merged_out: dict[int, dict[str, tuple[int, dict]]] = {}
        acc: dict[int, bool] = {}
        touched: set[int] = set()
        score = 0
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            rx, ry = uf.find(x), uf.find(y)
            if rx == ry:
                continue
            if ry in red and rx not in red:
                keep, absorb = ry, rx
            elif rx in red or rx <= ry:
                keep, absorb = rx, ry
            else:
                keep, absorb = ry, rx
            uf.union(keep, absorb)
            touched.add(keep)
            touched.add(absorb)
            ko = merged_out.get(keep)
            if ko is None:
                ko = dict(self.out[keep])
            ao = merged_out.pop(absorb, None)
            if ao is None:
                ao = self.out[absorb]
            for label, (t2, w2) in ao.items():
                existing = ko.get(label)
                if existing is None:
                    ko[label] = (t2, w2)
                else:
                    t1, w1 = existing
                    score += 1
                    stack.append((t1, t2))
                    ko[label] = (t1, _merge_witnesses(w1, w2))
            merged_out[keep] = ko
            acc[keep] = acc.get(keep, keep in self.accepting) or acc.get(
                absorb, absorb in self.accepting
            )

        roots = {s for s in touched if uf.find(s) == s}

        def new_target(t: int) -> tuple[frozenset[str] | set, bool]:
            rt = uf.find(t)
            if rt in roots:
                return set(merged_out[rt]), acc.get(rt, rt in self.accepting)
            return self.outlabels[rt], rt in self.accepting

        old = 0
        seen: set[tuple[int, str]] = set()
        for s in touched:
            for label in self.out[s]:
                seen.add((s, label))
            for src, label in self.in_edges[s]:
                seen.add((src, label))
        for s, label in seen:
            old += self._contribution(s, label)

        new = 0
        for root in roots:
            for label, (t, wits) in merged_out[root].items():
                labels, accepting = new_target(t)
                new += _witness_violations(self.guards, label, wits, labels, accepting)
        for s in touched:
            for src, label in self.in_edges[s]:
                if src in touched:
                    continue
                _, wits = self.out[src][label]
                labels, accepting = new_target(s)
                new += _witness_violations(self.guards, label, wits, labels, accepting)

        delta = new - old
        return _TryMergeOutcome(score, delta, delta <= 0, uf, merged_out, acc, touched)

    def commit(self, outcome: _TryMergeOutcome) -> None:
        find = outcome.uf.find
        new_out: dict[int, dict[str, tuple[int, dict]]] = {}
        for s, m in self.out.items():
            if find(s) != s:
                continue
            source_map = outcome.merged_out.get(s, m)
            new_out[s] = {label: (find(t), w) for label, (t, w) in source_map.items()}
        new_accepting = {
            s for s in new_out
            if outcome.acc.get(s, s in self.accepting)
        }
        self.out = new_out
        self.accepting = new_accepting
        self._reindex()

    def to_efsm(self) -> Efsm:
        transitions = tuple(
            Transition(s, label, t, dict(w))
            for s, m in sorted(self.out.items())
            for label, (t, w) in sorted(m.items())
        )
        return Efsm(
            states=frozenset(self.out),
            initial=self.initial,
            accepting=frozenset(self.accepting),
            transitions=transitions,
            guards=self.guards,
        )


def infer(corpus: Corpus, config: InferenceConfig | None = None) -> Efsm:
    """Learn guards, build and determinize the prefix tree, then run the
    guard-constrained blue-fringe loop. The result is label-deterministic,
    has no more guard violations than its starting point, and accepts
    every training trace in guarded mode."""
    config = config or InferenceConfig()
    if not corpus.traces:
        raise InferenceError("cannot infer from an empty corpus")
    guards = GuardModel.from_corpus(corpus, InfoGainTreeLearner(config.min_leaf))
    pta = replace(build_pta(corpus), guards=guards)
    start = determinize(pta)
    engine = _Engine(start, guards)

    red: set[int] = {engine.initial}
    cache: dict[tuple[int, int], tuple[int, bool]] = {}
    merges = promotions = 0
    while True:
        blue = engine.blue_of(red)
        if not blue:
            break
        frozen_red = frozenset(red)
        promote: int | None = None
        best: tuple[tuple[int, int, int], int, int] | None = None
        for b in blue:
            mergeable = False
            for r in sorted(red):
                key = (r, b)
                cached = cache.get(key)
                if cached is None:
                    outcome = engine.try_merge(r, b, frozen_red)
                    cached = (outcome.score, outcome.compatible)
                    cache[key] = cached
                score, compatible = cached
                if compatible and score >= config.merge_threshold:
                    mergeable = True
                    rank = (score, -r, -b)
                    if best is None or rank > best[0]:
                        best = (rank, r, b)
            if not mergeable and promote is None:
                promote = b
        if promote is not None:
            red.add(promote)
            promotions += 1
            continue
        assert best is not None
        _, r, b = best
        engine.commit(engine.try_merge(r, b, frozen_red))
        merges += 1
        cache.clear()
        if config.verify_each_merge:
            snapshot = compact(engine.to_efsm())
            for trace in corpus.traces:
                result = walk(snapshot, trace, GUARDED)
                if not result.accepted:
                    raise AssertionError(
                        f"training trace {trace.name} rejected after merge "
                        f"({result.reason})"
                    )
    log.info("inference finished: %d merges, %d promotions, %d states",
             merges, promotions, len(engine.out))
    return compact(engine.to_efsm())
