"""Per-label decision trees predicting the next proof method from parameters.

For every label in a corpus, each occurrence yields one training instance:
the step's parameter strings as categorical attributes (p1..pK plus the
combination flag) and the label of the following step as the class, with a
reserved terminal class for trace ends. Trees are induced top-down with
information-gain attribute selection and multiway categorical splits.

The learner sits behind `Classifier` so alternative algorithms can be
plugged in; `InfoGainTreeLearner` is the one shipped.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol, Sequence, Union

from .traces import Corpus, ParamVector, POSITIVE

#: Class of an instance built from the last event of a trace.
END_OF_TRACE = "⟨end⟩"
#: Attribute value standing in for a parameter the step did not supply.
ABSENT = "∅"
COMBINED_ATTR = "combined"

GUARD_SCHEMA_VERSION = 1


class GuardError(ValueError):
    """Bad training data or malformed guard-model document."""


@dataclass(frozen=True)
class TrainingInstance:
    """One (parameter configuration -> next label) observation."""

    attributes: tuple[tuple[str, str], ...]  # sorted (name, value) pairs
    cls: str

    @staticmethod
    def make(attributes: Mapping[str, str], cls: str) -> "TrainingInstance":
        return TrainingInstance(tuple(sorted(attributes.items())), cls)

    def get(self, name: str) -> str:
        for k, v in self.attributes:
            if k == name:
                return v
        return ABSENT


@dataclass(frozen=True)
class Leaf:
    cls: str
    dist: tuple[tuple[str, int], ...]  # class -> count, sorted by class

    def classes(self) -> frozenset[str]:
        return frozenset(c for c, _ in self.dist)


@dataclass(frozen=True)
class Node:
    attribute: str
    children: tuple[tuple[str, "DecisionTree"], ...]  # value -> subtree, sorted
    default: str  # value of the child holding the largest training mass

    def child(self, value: str) -> "DecisionTree":
        for v, sub in self.children:
            if v == value:
                return sub
        for v, sub in self.children:
            if v == self.default:
                return sub
        raise AssertionError("default child missing")


DecisionTree = Union[Leaf, Node]


def _entropy(counts: Iterable[int]) -> float:
    total = sum(counts)
    ent = 0.0
    for c in counts:
        if c:
            p = c / total
            ent -= p * math.log2(p)
    return ent


def _majority(dist: Counter) -> str:
    # most frequent class; ties broken by lexicographic class name
    top = max(dist.values())
    return min(c for c, n in dist.items() if n == top)


def _make_leaf(instances: Sequence[TrainingInstance]) -> Leaf:
    dist = Counter(inst.cls for inst in instances)
    return Leaf(_majority(dist), tuple(sorted(dist.items())))


class Classifier(Protocol):
    def learn(self, instances: Sequence[TrainingInstance]) -> DecisionTree: ...


@dataclass(frozen=True)
class InfoGainTreeLearner:
    """Unpruned categorical tree, deterministic for any instance order.

    Recursion stops on class purity, when no attribute still has two or
    more distinct values (a single-valued attribute cannot split the
    node), or when fewer than `min_leaf` instances remain.
    """

    min_leaf: int = 1

    def learn(self, instances: Sequence[TrainingInstance]) -> DecisionTree:
        if not instances:
            raise GuardError("cannot learn a tree from zero instances")
        names = {k for inst in instances for k, _ in inst.attributes}
        for inst in instances:
            if {k for k, _ in inst.attributes} != names:
                raise GuardError("instances do not share one attribute set")
        ordered = sorted(instances, key=lambda i: (i.attributes, i.cls))
        return self._induce(ordered, tuple(sorted(names)))

    def _induce(self, instances, attributes) -> DecisionTree:
        dist = Counter(inst.cls for inst in instances)
        if len(dist) == 1 or not attributes or len(instances) < self.min_leaf:
            return _make_leaf(instances)
        base = _entropy(dist.values())
        best_attr = None
        best_gain = -1.0
        for attr in attributes:  # name order breaks gain ties
            groups: dict[str, Counter] = defaultdict(Counter)
            for inst in instances:
                groups[inst.get(attr)][inst.cls] += 1
            if len(groups) < 2:
                continue
            remainder = sum(
                sum(g.values()) / len(instances) * _entropy(g.values())
                for g in groups.values()
            )
            gain = base - remainder
            if gain > best_gain + 1e-12:
                best_gain = gain
                best_attr = attr
        if best_attr is None:
            return _make_leaf(instances)
        partitions: dict[str, list[TrainingInstance]] = defaultdict(list)
        for inst in instances:
            partitions[inst.get(best_attr)].append(inst)
        remaining = tuple(a for a in attributes if a != best_attr)
        children = tuple(
            (value, self._induce(subset, remaining))
            for value, subset in sorted(partitions.items())
        )
        default = max(sorted(partitions), key=lambda v: len(partitions[v]))
        return Node(best_attr, children, default)


def learn_tree(instances: Sequence[TrainingInstance], min_leaf: int = 1) -> DecisionTree:
    return InfoGainTreeLearner(min_leaf).learn(instances)


def _vector_attributes(values: ParamVector, arity: int) -> dict[str, str]:
    attrs = {f"p{i + 1}": values.params[i] if i < len(values.params) else ABSENT
             for i in range(arity)}
    attrs[COMBINED_ATTR] = "true" if values.combined else "false"
    return attrs


def build_training_sets(corpus: Corpus) -> dict[str, list[TrainingInstance]]:
    """One instance per event: its parameters against the successor label."""
    arities: dict[str, int] = defaultdict(int)
    for trace in corpus.traces:
        if trace.polarity != POSITIVE:
            raise GuardError(f"trace {trace.name} is not positive")
        for event in trace.events:
            arities[event.label] = max(arities[event.label], len(event.values.params))
    sets: dict[str, list[TrainingInstance]] = defaultdict(list)
    for trace in corpus.traces:
        for i, event in enumerate(trace.events):
            cls = trace.events[i + 1].label if i + 1 < len(trace.events) else END_OF_TRACE
            attrs = _vector_attributes(event.values, arities[event.label])
            sets[event.label].append(TrainingInstance.make(attrs, cls))
    return dict(sets)


@dataclass(frozen=True)
class GuardModel:
    """The learned data guards: a decision tree and arity per label."""

    trees: Mapping[str, DecisionTree]
    arities: Mapping[str, int]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @staticmethod
    def from_corpus(corpus: Corpus, classifier: Classifier | None = None) -> "GuardModel":
        classifier = classifier or InfoGainTreeLearner()
        sets = build_training_sets(corpus)
        trees = {label: classifier.learn(instances) for label, instances in sets.items()}
        arities = {
            label: max((len(i.attributes) - 1 for i in instances), default=0)
            for label, instances in sets.items()
        }
        return GuardModel(trees, arities)

    def labels(self) -> frozenset[str]:
        return frozenset(self.trees)

    def _leaf(self, label: str, values: ParamVector) -> Leaf | None:
        if label not in self.trees:
            return None
        key = (label, values)
        leaf = self._cache.get(key)
        if leaf is None:
            tree = self.trees[label]
            attrs = _vector_attributes(values, self.arities[label])
            while isinstance(tree, Node):
                tree = tree.child(attrs.get(tree.attribute, ABSENT))
            leaf = tree
            self._cache[key] = leaf
        return leaf

    def predict(self, label: str, values: ParamVector) -> str | None:
        """Majority-class prediction; None for an unknown label.

        At a node whose attribute value never occurred in training the
        walk descends the default (heaviest) child.
        """
        leaf = self._leaf(label, values)
        return None if leaf is None else leaf.cls

    def support(self, label: str, values: ParamVector) -> frozenset[str] | None:
        """All classes observed in the leaf this configuration reaches.

        This is the permissive reading of the classifier used for guard
        consistency: a successor is compatible with (label, values) iff it
        appears in the reached leaf's class distribution.
        """
        leaf = self._leaf(label, values)
        return None if leaf is None else leaf.classes()

    # -- serialization ------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "version": GUARD_SCHEMA_VERSION,
            "labels": {
                label: {
                    "arity": self.arities[label],
                    "tree": _tree_to_doc(self.trees[label]),
                    "rules": tree_rules(self.trees[label]),
                }
                for label in sorted(self.trees)
            },
        }

    def to_json(self) -> bytes:
        return json.dumps(self.to_doc(), ensure_ascii=False, indent=1).encode("utf-8")

    @staticmethod
    def from_doc(doc: dict) -> "GuardModel":
        if not isinstance(doc, dict) or doc.get("version") != GUARD_SCHEMA_VERSION:
            raise GuardError(f"unknown guard document version {doc.get('version')!r}")
        trees = {}
        arities = {}
        for label, entry in doc.get("labels", {}).items():
            trees[label] = _tree_from_doc(entry["tree"])
            arities[label] = int(entry["arity"])
        return GuardModel(trees, arities)

    def content_hash(self) -> str:
        canonical = json.dumps(self.to_doc(), sort_keys=True, separators=(",", ":"),
                               ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def __eq__(self, other):
        return (isinstance(other, GuardModel)
                and dict(self.trees) == dict(other.trees)
                and dict(self.arities) == dict(other.arities))


def _tree_to_doc(tree: DecisionTree) -> dict:
    if isinstance(tree, Leaf):
        return {"leaf": {"class": tree.cls, "dist": {c: n for c, n in tree.dist}}}
    return {
        "node": {
            "attribute": tree.attribute,
            "default": tree.default,
            "children": {v: _tree_to_doc(sub) for v, sub in tree.children},
        }
    }


def _tree_from_doc(doc: dict) -> DecisionTree:
    if "leaf" in doc:
        leaf = doc["leaf"]
        dist = tuple(sorted((str(c), int(n)) for c, n in leaf["dist"].items()))
        return Leaf(leaf["class"], dist)
    if "node" in doc:
        node = doc["node"]
        children = tuple(
            sorted((v, _tree_from_doc(sub)) for v, sub in node["children"].items())
        )
        return Node(node["attribute"], children, node["default"])
    raise GuardError(f"malformed tree document: {sorted(doc)}")


def tree_rules(tree: DecisionTree, _conditions: tuple[str, ...] = ()) -> list[str]:
    """Flatten a tree into `(p1 = n): simpl`-style rule lines."""
    if isinstance(tree, Leaf):
        cond = " & ".join(_conditions) if _conditions else "(always)"
        return [f"{cond}: {tree.cls}"]
    rules: list[str] = []
    for value, sub in tree.children:
        rules.extend(tree_rules(sub, _conditions + (f"({tree.attribute} = {value})",)))
    return rules


def rules_text(model: GuardModel) -> str:
    """Human-readable rule dump, one block per label."""
    blocks = []
    for label in sorted(model.trees):
        lines = [f"MODEL FOR: {label}", "-" * 24]
        lines.extend(tree_rules(model.trees[label]))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
