"""Domain types for proof traces and corpora, plus the JSON interchange format.

A proof is represented as a sequence of events, each pairing a label (the
proof method, suffixed with ``_0`` when it took no parameters) with the
parameter strings that were supplied to it and a flag marking whether the
step was chained to its successor with a semicolon.

All types here are immutable after construction; the functions are pure.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

POSITIVE = "positive"
NEGATIVE = "negative"

#: Suffix appended to a method name when the step carried no parameters.
ZERO_PARAM_SUFFIX = "_0"

SCHEMA_VERSION = 1

_LABEL_FORBIDDEN = re.compile(r"[\s.;]")


class TraceError(ValueError):
    """Malformed trace data (bad label, empty parameter, duplicate name...)."""


class TraceJsonError(TraceError):
    """A trace document failed to parse; carries trace/event context."""

    def __init__(self, message: str, *, trace: object = None, event: object = None):
        parts = [message]
        if trace is not None:
            parts.append(f"trace={trace!r}")
        if event is not None:
            parts.append(f"event={event!r}")
        super().__init__(" ".join(parts))
        self.trace = trace
        self.event = event


def validate_label(name: str) -> str:
    """Check that `name` is a legal label token and return it."""
    if not name:
        raise TraceError("label must be a non-empty token")
    if _LABEL_FORBIDDEN.search(name):
        raise TraceError(f"label {name!r} contains whitespace, '.' or ';'")
    return name


def normalize_param(param: str) -> str:
    """Collapse internal whitespace runs to single spaces and strip ends."""
    cleaned = " ".join(param.split())
    if not cleaned:
        raise TraceError("parameter is empty after whitespace normalization")
    return cleaned


@dataclass(frozen=True)
class ParamVector:
    """Ordered parameter strings of one step plus its combination flag.

    ``combined`` is true when the step was chained to the next one by a
    semicolon; it is stored here as a flag rather than as a literal ";"
    parameter so positional parameters keep their meaning.
    """

    params: tuple[str, ...] = ()
    combined: bool = False

    def __post_init__(self):
        for p in self.params:
            if not p or p != " ".join(p.split()):
                raise TraceError(f"parameter {p!r} is empty or not normalized")


EMPTY_PARAMS = ParamVector()


@dataclass(frozen=True)
class TraceEvent:
    """One proof step: a label and the parameter values it was applied to."""

    label: str
    values: ParamVector = EMPTY_PARAMS

    def __post_init__(self):
        validate_label(self.label)


@dataclass(frozen=True)
class Trace:
    """A whole proof as an event sequence, tagged with a polarity.

    Polarity is metadata only: inference consumes positive traces
    exclusively, negatives exist for evaluation.
    """

    name: str
    events: tuple[TraceEvent, ...]
    polarity: str = POSITIVE

    def __post_init__(self):
        if self.polarity not in (POSITIVE, NEGATIVE):
            raise TraceError(f"unknown polarity {self.polarity!r}")

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class Corpus:
    """A named collection of traces with unique trace names."""

    traces: tuple[Trace, ...]
    source: str = "synthetic"

    def __post_init__(self):
        seen = set()
        for t in self.traces:
            if t.name in seen:
                raise TraceError(f"duplicate trace name {t.name!r} in corpus")
            seen.add(t.name)

    def __len__(self) -> int:
        return len(self.traces)

    def positives(self) -> tuple[Trace, ...]:
        return tuple(t for t in self.traces if t.polarity == POSITIVE)


def dedupe_names(traces: Iterable[Trace]) -> tuple[Trace, ...]:
    """Disambiguate duplicate trace names with a numeric suffix at load time."""
    out: list[Trace] = []
    used: set[str] = set()
    for t in traces:
        name = t.name
        n = 1
        while name in used:
            n += 1
            name = f"{t.name}#{n}"
        used.add(name)
        out.append(t if name == t.name else replace(t, name=name))
    return tuple(out)


def encode_step(method: str, params: Sequence[str], combined: bool = False) -> TraceEvent:
    """Encode one proof step as a trace event.

    The label is `method` verbatim when parameters are present and
    `method` + ``_0`` when there are none; parameters are carried through
    whitespace-normalized. Methods already ending in the zero-parameter
    suffix are rejected, which keeps the encoding injective.
    """
    validate_label(method)
    if method.endswith(ZERO_PARAM_SUFFIX):
        raise TraceError(
            f"method {method!r} ends in the reserved suffix {ZERO_PARAM_SUFFIX!r}"
        )
    cleaned = tuple(normalize_param(p) for p in params)
    label = method if cleaned else method + ZERO_PARAM_SUFFIX
    return TraceEvent(label, ParamVector(cleaned, combined))


# ---------------------------------------------------------------------------
# JSON interchange (schema version 1)
#
#   {"version":1,"source":<string>,"traces":[
#     {"name":..., "polarity":"positive"|"negative",
#      "events":[{"label":..., "params":[...], "combined":bool}, ...]}, ...]}
#
# "source" is optional provenance on input and always written on output.
# Unknown top-level keys are rejected.
# ---------------------------------------------------------------------------

def corpus_to_json(corpus: Corpus) -> bytes:
    doc = {
        "version": SCHEMA_VERSION,
        "source": corpus.source,
        "traces": [
            {
                "name": t.name,
                "polarity": t.polarity,
                "events": [
                    {
                        "label": e.label,
                        "params": list(e.values.params),
                        "combined": e.values.combined,
                    }
                    for e in t.events
                ],
            }
            for t in corpus.traces
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=1).encode("utf-8")


def _require(cond: bool, message: str, *, trace=None, event=None) -> None:
    if not cond:
        raise TraceJsonError(message, trace=trace, event=event)


def corpus_from_json(data: bytes | str) -> Corpus:
    """Parse a corpus document, validating structure and naming offenders."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise TraceJsonError(f"malformed JSON: {exc}") from exc
    _require(isinstance(doc, dict), "top-level value must be an object")
    unknown = set(doc) - {"version", "traces", "source"}
    _require(not unknown, f"unknown top-level keys: {sorted(unknown)}")
    _require(doc.get("version") == SCHEMA_VERSION,
             f"unknown schema version {doc.get('version')!r}")
    _require(isinstance(doc.get("traces"), list), "'traces' must be a list")
    source = doc.get("source", "json")
    _require(isinstance(source, str), "'source' must be a string")

    traces: list[Trace] = []
    for ti, tdoc in enumerate(doc["traces"]):
        _require(isinstance(tdoc, dict), "trace entry must be an object", trace=ti)
        tkeys = set(tdoc)
        _require(tkeys == {"name", "polarity", "events"},
                 f"trace keys must be name/polarity/events, got {sorted(tkeys)}",
                 trace=ti)
        name = tdoc["name"]
        _require(isinstance(name, str) and name, "trace name must be a non-empty string", trace=ti)
        polarity = tdoc["polarity"]
        _require(polarity in (POSITIVE, NEGATIVE),
                 f"polarity must be positive|negative, got {polarity!r}", trace=name)
        _require(isinstance(tdoc["events"], list), "'events' must be a list", trace=name)
        events: list[TraceEvent] = []
        for ei, edoc in enumerate(tdoc["events"]):
            _require(isinstance(edoc, dict), "event must be an object", trace=name, event=ei)
            ekeys = set(edoc)
            _require(ekeys == {"label", "params", "combined"},
                     f"event keys must be label/params/combined, got {sorted(ekeys)}",
                     trace=name, event=ei)
            _require(isinstance(edoc["label"], str), "label must be a string",
                     trace=name, event=ei)
            _require(isinstance(edoc["params"], list)
                     and all(isinstance(p, str) for p in edoc["params"]),
                     "params must be a list of strings", trace=name, event=ei)
            _require(all(p.strip() for p in edoc["params"]),
                     "empty params entry", trace=name, event=ei)
            _require(isinstance(edoc["combined"], bool), "combined must be a boolean",
                     trace=name, event=ei)
            try:
                events.append(TraceEvent(
                    edoc["label"],
                    ParamVector(tuple(normalize_param(p) for p in edoc["params"]),
                                edoc["combined"]),
                ))
            except TraceError as exc:
                raise TraceJsonError(str(exc), trace=name, event=ei) from exc
        traces.append(Trace(name, tuple(events), polarity))
    return Corpus(dedupe_names(traces), source)
