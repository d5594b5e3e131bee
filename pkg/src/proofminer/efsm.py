"""The guarded state-machine structure: prefix-tree construction, trace
acceptance, and DOT/JSON export.

States are dense non-negative integers with 0 initial. A transition keeps
the multiset of parameter vectors observed on it ("witnesses", with usage
counts); the data guard of a transition is realized jointly by those
witnesses and the guard model's tree for the transition label.

Models are immutable once built; walks are read-only and safe to run
concurrently over a shared model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .guards import GuardModel
from .traces import Corpus, ParamVector, POSITIVE, Trace

MODEL_SCHEMA_VERSION = 1

CONTROL_ONLY = "control-only"
GUARDED = "guarded"

ACCEPTED = "accepted"
REJECTED = "rejected"

OK = "ok"
MISSING_TRANSITION = "missing-transition"
NON_ACCEPTING_FINAL = "non-accepting-final"
GUARD_VIOLATION = "guard-violation"


class ModelError(ValueError):
    """Malformed model or model document."""


@dataclass
class Transition:
    source: int
    label: str
    target: int
    witnesses: dict[ParamVector, int] = field(default_factory=dict)

    def add_witness(self, values: ParamVector, count: int = 1) -> None:
        self.witnesses[values] = self.witnesses.get(values, 0) + count

    def ranked_witnesses(self) -> list[ParamVector]:
        """Witness vectors by descending usage count, then lexicographically."""
        return [
            v for v, _ in sorted(
                self.witnesses.items(), key=lambda kv: (-kv[1], kv[0].params, kv[0].combined)
            )
        ]


@dataclass
class Efsm:
    states: frozenset[int]
    initial: int
    accepting: frozenset[int]
    transitions: tuple[Transition, ...]
    guards: GuardModel | None = None

    def out_map(self) -> dict[int, dict[str, list[Transition]]]:
        out: dict[int, dict[str, list[Transition]]] = {s: {} for s in self.states}
        for t in self.transitions:
            out[t.source].setdefault(t.label, []).append(t)
        return out

    def out_labels(self) -> dict[int, frozenset[str]]:
        labels: dict[int, set[str]] = {s: set() for s in self.states}
        for t in self.transitions:
            labels[t.source].add(t.label)
        return {s: frozenset(v) for s, v in labels.items()}

    def is_label_deterministic(self) -> bool:
        seen: set[tuple[int, str]] = set()
        for t in self.transitions:
            key = (t.source, t.label)
            if key in seen:
                return False
            seen.add(key)
        return True

    def structurally_equal(self, other: "Efsm") -> bool:
        def norm(m: Efsm):
            return (
                m.states,
                m.initial,
                m.accepting,
                sorted(
                    (t.source, t.label, t.target, tuple(sorted(
                        (v.params, v.combined, c) for v, c in t.witnesses.items())))
                    for t in m.transitions
                ),
            )
        return norm(self) == norm(other) and self.guards == other.guards


@dataclass(frozen=True)
class WalkResult:
    verdict: str
    reason: str
    path: tuple[int, ...]
    failed_at: int | None = None  # event index for rejections

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPTED


def build_pta(corpus: Corpus) -> Efsm:
    """Arrange positive traces as a prefix tree.

    Two events share a tree edge only when both label and the full
    parameter vector match; differing parameters fork the tree. The state
    at the end of each trace is accepting.
    """
    children: dict[tuple[int, str, ParamVector], int] = {}
    transitions: dict[tuple[int, str, ParamVector], Transition] = {}
    accepting: set[int] = set()
    next_state = 1
    for trace in corpus.traces:
        if trace.polarity != POSITIVE:
            raise ModelError(f"trace {trace.name} is not positive")
        if not trace.events:
            raise ModelError(f"trace {trace.name} is empty")
        state = 0
        for event in trace.events:
            key = (state, event.label, event.values)
            target = children.get(key)
            if target is None:
                target = next_state
                next_state += 1
                children[key] = target
                transitions[key] = Transition(state, event.label, target)
            transitions[key].add_witness(event.values)
            state = target
        accepting.add(state)
    return Efsm(
        states=frozenset(range(next_state)),
        initial=0,
        accepting=frozenset(accepting),
        transitions=tuple(transitions[k] for k in sorted(transitions, key=lambda k: (k[0], k[1], k[2].params, k[2].combined))),
    )


def _pick_transition(candidates: list[Transition], values: ParamVector) -> Transition:
    if len(candidates) == 1:
        return candidates[0]
    exact = [t for t in candidates if values in t.witnesses]
    pool = exact or candidates
    return min(pool, key=lambda t: t.target)


def walk(model: Efsm, trace: Trace, mode: str = GUARDED) -> WalkResult:
    """Run a trace through the model and report the verdict.

    Control-only mode follows labels and checks final-state acceptance.
    Guarded mode additionally requires each consecutive step pair to be
    compatible with the data guards: the successor's label must occur in
    the classifier leaf reached by the current step's (label, parameters).
    Every training trace satisfies this by construction, since its own
    continuation is part of the leaf it reaches.
    """
    if mode not in (CONTROL_ONLY, GUARDED):
        raise ValueError(f"unknown walk mode {mode!r}")
    out = model.out_map()
    guards = model.guards if mode == GUARDED else None
    state = model.initial
    path = [state]
    for i, event in enumerate(trace.events):
        candidates = out.get(state, {}).get(event.label)
        if not candidates:
            return WalkResult(REJECTED, MISSING_TRANSITION, tuple(path), i)
        transition = _pick_transition(candidates, event.values)
        if guards is not None and i + 1 < len(trace.events):
            allowed = guards.support(event.label, event.values)
            if allowed is not None and trace.events[i + 1].label not in allowed:
                return WalkResult(REJECTED, GUARD_VIOLATION, tuple(path), i)
        state = transition.target
        path.append(state)
    if state in model.accepting:
        return WalkResult(ACCEPTED, OK, tuple(path))
    return WalkResult(REJECTED, NON_ACCEPTING_FINAL, tuple(path), len(trace.events) - 1)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _witness_text(values: ParamVector) -> str:
    text = " ".join(values.params) if values.params else "()"
    return text + " ;" if values.combined else text


def _guard_summary(transition: Transition, limit: int = 3) -> str:
    ranked = transition.ranked_witnesses()
    shown = [_witness_text(v) for v in ranked[:limit]]
    if len(ranked) > limit:
        shown.append("…")
    return " | ".join(shown)


def export_dot(model: Efsm) -> str:
    """GraphViz digraph: initial marked, accepting double-circled, edges
    labeled with the transition label and up to three witness vectors."""
    def esc(text: str) -> str:
        return text.replace("\\", "\\\\").replace('"', '\\"')

    lines = ["digraph proofmodel {", "  rankdir=LR;", '  node [shape=circle];']
    lines.append("  __start__ [shape=point];")
    lines.append(f'  __start__ -> "{model.initial}";')
    for state in sorted(model.states):
        shape = "doublecircle" if state in model.accepting else "circle"
        lines.append(f'  "{state}" [shape={shape}];')
    for t in sorted(model.transitions, key=lambda t: (t.source, t.label, t.target)):
        summary = _guard_summary(t)
        label = f"{t.label} [{summary}]" if summary else t.label
        lines.append(f'  "{t.source}" -> "{t.target}" [label="{esc(label)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _witnesses_to_doc(witnesses: Mapping[ParamVector, int]) -> list[dict]:
    ordered = sorted(witnesses.items(), key=lambda kv: (-kv[1], kv[0].params, kv[0].combined))
    return [
        {"params": list(v.params), "combined": v.combined, "count": c}
        for v, c in ordered
    ]


def export_json(model: Efsm) -> bytes:
    """Lossless model document; embeds the guard model plus its content
    hash so a tampered or mismatched guards section is rejected on import."""
    doc = {
        "version": MODEL_SCHEMA_VERSION,
        "states": len(model.states),
        "initial": model.initial,
        "accepting": sorted(model.accepting),
        "transitions": [
            {
                "source": t.source,
                "label": t.label,
                "target": t.target,
                "witnesses": _witnesses_to_doc(t.witnesses),
            }
            for t in sorted(model.transitions, key=lambda t: (t.source, t.label, t.target))
        ],
        "guards": model.guards.to_doc() if model.guards else None,
        "guardHash": model.guards.content_hash() if model.guards else None,
    }
    return json.dumps(doc, ensure_ascii=False, indent=1).encode("utf-8")


def import_json(data: bytes | str) -> Efsm:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed model JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != MODEL_SCHEMA_VERSION:
        raise ModelError(f"unknown model schema version {doc.get('version')!r}")
    n = doc.get("states")
    if not isinstance(n, int) or n < 1:
        raise ModelError("'states' must be a positive state count")
    states = frozenset(range(n))
    initial = doc.get("initial", 0)
    if initial not in states:
        raise ModelError(f"initial state {initial} out of range")
    accepting = frozenset(doc.get("accepting", ()))
    if not accepting <= states:
        raise ModelError("accepting set references unknown states")
    transitions = []
    for tdoc in doc.get("transitions", ()):
        source, target = tdoc.get("source"), tdoc.get("target")
        if source not in states or target not in states:
            raise ModelError(
                f"transition {tdoc.get('label')!r} references dangling state "
                f"{source if source not in states else target}"
            )
        witnesses: dict[ParamVector, int] = {}
        for w in tdoc.get("witnesses", ()):
            vec = ParamVector(tuple(w["params"]), bool(w["combined"]))
            witnesses[vec] = witnesses.get(vec, 0) + int(w.get("count", 1))
        transitions.append(Transition(source, tdoc["label"], target, witnesses))
    guards_doc = doc.get("guards")
    guard_hash = doc.get("guardHash")
    guards = None
    if guards_doc is not None:
        guards = GuardModel.from_doc(guards_doc)
        if guards.content_hash() != guard_hash:
            raise ModelError("guard model hash mismatch")
    elif guard_hash is not None:
        raise ModelError("guardHash present but no guards section")
    return Efsm(states, initial, accepting, tuple(transitions), guards)


def compact(model: Efsm) -> Efsm:
    """Relabel states densely in breadth-first label order from the initial
    state (which becomes 0); unreachable states are dropped."""
    order: dict[int, int] = {model.initial: 0}
    out = model.out_map()
    frontier = [model.initial]
    while frontier:
        state = frontier.pop(0)
        for label in sorted(out.get(state, {})):
            for t in sorted(out[state][label], key=lambda t: t.target):
                if t.target not in order:
                    order[t.target] = len(order)
                    frontier.append(t.target)
    transitions = tuple(
        Transition(order[t.source], t.label, order[t.target], dict(t.witnesses))
        for t in model.transitions
        if t.source in order and t.target in order
    )
    return Efsm(
        states=frozenset(order.values()),
        initial=0,
        accepting=frozenset(order[s] for s in model.accepting if s in order),
        transitions=tuple(sorted(transitions, key=lambda t: (t.source, t.label, t.target))),
        guards=model.guards,
    )
