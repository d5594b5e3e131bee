"""k-fold cross validation with mutation-generated negative traces.

Positives come from the corpus under evaluation; negatives are seeded
permutations of corpus traces interleaved with verbatim traces from a
foreign corpus, filtered so nothing the full-corpus prefix tree already
accepts slips in as a "negative". Reported metrics are sensitivity
(accepted positives) and specificity (rejected negatives), averaged over
the folds.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Sequence

from .efsm import CONTROL_ONLY, GUARDED, build_pta, walk
from .inference import InferenceConfig, InferenceError, infer
from .traces import Corpus, NEGATIVE, Trace

UNDEFINED = None  # explicit zero-denominator marker


class EvaluationError(ValueError):
    """Evaluation cannot proceed (fold bounds, negative shortfall...)."""


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: dict[str, int]  # trace name -> fold index
    seed: int

    def fold(self, index: int, corpus: Corpus) -> list[Trace]:
        return [t for t in corpus.traces if self.assignment[t.name] == index]

    def rest(self, index: int, corpus: Corpus) -> list[Trace]:
        return [t for t in corpus.traces if self.assignment[t.name] != index]


@dataclass
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise EvaluationError("confusion counts must be non-negative")


def metrics(m: ConfusionMatrix) -> tuple[float | None, float | None]:
    """(sensitivity, specificity); a zero denominator yields None."""
    sensitivity = m.tp / (m.tp + m.fn) if (m.tp + m.fn) else UNDEFINED
    specificity = m.tn / (m.tn + m.fp) if (m.tn + m.fp) else UNDEFINED
    return sensitivity, specificity


@dataclass
class EvalReport:
    dataset: str
    proofs: int
    lines: int
    k: int
    mode: str
    folds: list[ConfusionMatrix]
    mean_sensitivity: float | None
    mean_specificity: float | None
    config: dict = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "dataset": self.dataset,
            "proofs": self.proofs,
            "lines": self.lines,
            "k": self.k,
            "mode": self.mode,
            "folds": [
                {"tp": m.tp, "tn": m.tn, "fp": m.fp, "fn": m.fn} for m in self.folds
            ],
            "meanSensitivity": self.mean_sensitivity,
            "meanSpecificity": self.mean_specificity,
            "config": self.config,
        }

    def to_json(self) -> bytes:
        return json.dumps(self.to_doc(), ensure_ascii=False, indent=1).encode("utf-8")

    def format_table(self) -> str:
        """Aligned-column row in the Data Set / Proofs / Lines / Sensitivity /
        Specificity layout."""
        def fmt(value):
            return "undef" if value is None else f"{value:.2f}"

        headers = ["Data Set", "Proofs", "Lines", "Sensitivity", "Specificity"]
        row = [self.dataset, str(self.proofs), str(self.lines),
               fmt(self.mean_sensitivity), fmt(self.mean_specificity)]
        widths = [max(len(h), len(r)) for h, r in zip(headers, row)]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
            "  ".join("-" * w for w in widths),
            "  ".join(r.ljust(w) for r, w in zip(row, widths)),
        ]
        return "\n".join(lines) + "\n"


def make_folds(corpus: Corpus, k: int, seed: int = 0) -> FoldPlan:
    """Seeded shuffle then round-robin assignment into k folds."""
    if k < 2:
        raise EvaluationError("k must be at least 2")
    if k > len(corpus.traces):
        raise EvaluationError(f"k={k} exceeds corpus size {len(corpus.traces)}")
    names = [t.name for t in corpus.traces]
    random.Random(f"folds:{seed}").shuffle(names)
    return FoldPlan(k, {name: i % k for i, name in enumerate(names)}, seed)


def mutate_negative(trace: Trace, seed: int) -> Trace:
    """Seeded uniform permutation of the step sequence, distinct from the
    original ordering; the result is a negative named `<name>#neg`."""
    if len(trace.events) < 2:
        raise EvaluationError(f"trace {trace.name} has fewer than 2 events")
    if len(set(trace.events)) < 2:
        raise EvaluationError(
            f"trace {trace.name} has no distinct permutation (all events equal)"
        )
    rng = random.Random(f"mutate:{seed}")
    events = list(trace.events)
    for _ in range(1000):
        shuffled = rng.sample(events, len(events))
        if tuple(shuffled) != trace.events:
            return Trace(f"{trace.name}#neg", tuple(shuffled), NEGATIVE)
    raise EvaluationError(f"could not find a distinct permutation of {trace.name}")


def build_negatives(
    corpus: Corpus,
    foreign: Corpus | None = None,
    count: int = 30,
    seed: int = 0,
) -> list[Trace]:
    """Alternate mutated corpus traces and verbatim foreign traces (forced
    negative) until `count` is reached; any candidate the full-corpus
    prefix tree accepts is discarded and redrawn."""
    if count < 1:
        raise EvaluationError("count must be at least 1")
    pta = build_pta(corpus)
    rng = random.Random(f"negatives:{seed}")
    mutable = [
        t for t in corpus.traces if len(t.events) >= 2 and len(set(t.events)) >= 2
    ]
    foreign_traces = list(foreign.traces) if foreign is not None else []

    if not mutable and not foreign_traces:
        raise EvaluationError("no material to build negatives from")

    negatives: list[Trace] = []
    used_names: set[str] = set()
    attempts = 0
    from_foreign = False
    while len(negatives) < count:
        attempts += 1
        if attempts > 10 * count:
            raise EvaluationError(
                f"could not build {count} negatives after {attempts - 1} draws "
                f"(got {len(negatives)}, short by {count - len(negatives)})"
            )
        if foreign_traces and (from_foreign or not mutable):
            candidate = replace(rng.choice(foreign_traces), polarity=NEGATIVE)
        else:
            candidate = mutate_negative(rng.choice(mutable), rng.randrange(2**31))
        from_foreign = not from_foreign
        if walk(pta, candidate, CONTROL_ONLY).accepted:
            continue  # accidental positive: discard and redraw
        name = candidate.name
        n = 1
        while name in used_names:
            n += 1
            name = f"{candidate.name}{n}"
        used_names.add(name)
        negatives.append(replace(candidate, name=name))
    return negatives


def cross_validate(
    corpus: Corpus,
    negatives: Sequence[Trace],
    k: int = 5,
    config: InferenceConfig | None = None,
    mode: str = GUARDED,
) -> EvalReport:
    """Per fold: infer on the other folds, walk the held-out positives and
    the whole negative pool, then average sensitivity/specificity."""
    config = config or InferenceConfig()
    if not negatives:
        raise EvaluationError("negatives must be non-empty")
    plan = make_folds(corpus, k, config.seed)
    folds: list[ConfusionMatrix] = []
    for i in range(k):
        training = Corpus(tuple(plan.rest(i, corpus)), source=corpus.source)
        try:
            model = infer(training, config)
        except InferenceError as exc:
            raise EvaluationError(f"fold {i}: inference failed: {exc}") from exc
        m = ConfusionMatrix()
        for trace in plan.fold(i, corpus):
            if walk(model, trace, mode).accepted:
                m.tp += 1
            else:
                m.fn += 1
        for trace in negatives:
            if walk(model, trace, mode).accepted:
                m.fp += 1
            else:
                m.tn += 1
        folds.append(m)

    def mean(values):
        defined = [v for v in values if v is not None]
        return sum(defined) / len(defined) if len(defined) == len(values) else UNDEFINED

    sens, spec = zip(*(metrics(m) for m in folds))
    return EvalReport(
        dataset=corpus.source,
        proofs=len(corpus.traces),
        lines=sum(len(t.events) for t in corpus.traces),
        k=k,
        mode=mode,
        folds=folds,
        mean_sensitivity=mean(sens),
        mean_specificity=mean(spec),
        config=config.to_doc(),
    )
