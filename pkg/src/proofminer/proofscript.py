"""Lexical parser turning tactical proof scripts (Coq `.v` files) into traces.

This is deliberately not a Coq grammar: proofs are treated as text. The
parser strips (nested) comments, splits the file into sentences on
top-level ``.``, collects the sentences between a proposition header
(``Lemma``/``Theorem``/...) and its ``Qed.``/``Defined.`` terminator, and
encodes each proof step as a trace event. Within a step, top-level ``;``
chains sub-steps, marking every sub-step but the last as combined.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .traces import (
    Corpus,
    Trace,
    TraceEvent,
    TraceError,
    ZERO_PARAM_SUFFIX,
    dedupe_names,
    encode_step,
    normalize_param,
)

log = logging.getLogger("proofminer.proofscript")

PROPOSITION_KEYWORDS = frozenset(
    {"Lemma", "Theorem", "Corollary", "Fact", "Remark", "Proposition"}
)
COMPLETED_TERMINATORS = frozenset({"Qed", "Defined"})
ABANDONED_TERMINATORS = frozenset({"Admitted", "Abort"})

# A keyword in parameter position glues the remainder of the sub-step into
# a single parameter ("simpl in H" -> p1 = "in H").
GLUE_KEYWORDS = frozenset({"in", "with", "as", "using", "by"})
# Rewrite direction arrows attach to the following token ("<- H").
ARROW_TOKENS = frozenset({"<-", "->"})

_BULLET_CHARS = frozenset("-+*")


class ParseError(ValueError):
    """Unrecoverable script-level parse failure."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ScriptBlock:
    """One proof: proposition name, its statement, and the proof body text."""

    name: str
    statement: str
    body: str


@dataclass(frozen=True)
class SkippedProof:
    name: str
    reason: str


@dataclass
class ScanResult:
    blocks: list[ScriptBlock] = field(default_factory=list)
    skipped: list[SkippedProof] = field(default_factory=list)


def strip_comments(text: str) -> str:
    """Replace (possibly nested) ``(* ... *)`` comments with a space.

    Raises ParseError with the opening line number when delimiters are
    unbalanced. Comment delimiters inside double-quoted strings are inert.
    """
    out: list[str] = []
    i, n = 0, len(text)
    line = 1
    depth = 0
    opener_line = 0
    in_string = False
    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch == "\n":
            line += 1
        if depth == 0:
            if in_string:
                out.append(ch)
                if ch == '"':
                    if nxt == '"':  # doubled quote escapes itself
                        out.append(nxt)
                        i += 2
                        continue
                    in_string = False
                i += 1
                continue
            if ch == '"':
                in_string = True
                out.append(ch)
                i += 1
                continue
            if ch == "(" and nxt == "*":
                depth = 1
                opener_line = line
                i += 2
                continue
            if ch == "*" and nxt == ")":
                raise ParseError("comment terminator without opener", line)
            out.append(ch)
            i += 1
        else:
            if ch == "(" and nxt == "*":
                depth += 1
                i += 2
            elif ch == "*" and nxt == ")":
                depth -= 1
                if depth == 0:
                    out.append(" ")
                i += 2
            else:
                i += 1
    if depth > 0:
        raise ParseError("unterminated comment", opener_line)
    if in_string:
        raise ParseError("unterminated string literal", line)
    return "".join(out)


def split_sentences(text: str) -> list[str]:
    """Split on top-level ``.`` followed by whitespace or end of input.

    Dots inside parentheses, brackets or strings never split, and a dot
    glued to a following identifier (``List.app``) does not terminate a
    sentence.
    """
    sentences: list[str] = []
    buf: list[str] = []
    depth = 0
    in_string = False
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if in_string:
            buf.append(ch)
            if ch == '"':
                if i + 1 < n and text[i + 1] == '"':
                    buf.append('"')
                    i += 2
                    continue
                in_string = False
            i += 1
            continue
        if ch == '"':
            in_string = True
            buf.append(ch)
        elif ch in "([":
            depth += 1
            buf.append(ch)
        elif ch in ")]":
            depth = max(0, depth - 1)
            buf.append(ch)
        elif ch == "." and depth == 0 and (i + 1 == n or text[i + 1].isspace()):
            sentence = "".join(buf).strip()
            if sentence:
                sentences.append(sentence)
            buf = []
        else:
            buf.append(ch)
        i += 1
    tail = "".join(buf).strip()
    if tail:
        sentences.append(tail)
    return sentences


def scan_script(text: str) -> ScanResult:
    """Collect proof blocks and skip reports from one script."""
    sentences = split_sentences(strip_comments(text))
    result = ScanResult()
    current: tuple[str, str] | None = None  # (name, statement)
    body: list[str] = []

    def close_current(reason: str | None) -> None:
        nonlocal current, body
        if current is None:
            return
        name, statement = current
        if reason is None:
            result.blocks.append(ScriptBlock(name, statement, _join_steps(body)))
        else:
            result.skipped.append(SkippedProof(name, reason))
        current = None
        body = []

    for sentence in sentences:
        head = sentence.split(None, 1)[0] if sentence.split() else ""
        if head in PROPOSITION_KEYWORDS:
            if current is not None:
                close_current("no Qed./Defined. terminator before next proposition")
            rest = sentence[len(head):].strip()
            if not rest:
                result.skipped.append(SkippedProof("<anonymous>", "missing name"))
                continue
            name = rest.split(None, 1)[0].rstrip(":")
            current = (name, rest)
            continue
        if current is None:
            if head == "Ltac":
                log.warning("skipping Ltac definition: %s", sentence.split("\n")[0])
            continue
        if head in COMPLETED_TERMINATORS:
            close_current(None)
        elif head in ABANDONED_TERMINATORS:
            close_current(f"proof ends with {head}.")
        else:
            body.append(sentence)
    close_current("no Qed./Defined. terminator before end of file")
    return result


def _join_steps(steps: Sequence[str]) -> str:
    return " ".join(s + "." for s in steps) if steps else ""


def extract_blocks(script: str) -> list[ScriptBlock]:
    """One block per completed proof, in source order; skips are logged."""
    result = scan_script(script)
    for skip in result.skipped:
        log.warning("skipping proof %s: %s", skip.name, skip.reason)
    return result.blocks


# ---------------------------------------------------------------------------
# Step tokenization and encoding
# ---------------------------------------------------------------------------

def _tokenize_step(step: str) -> list[str]:
    """Split a step into top-level tokens.

    Parenthesized/bracketed groups and quoted strings stay single tokens
    (delimiters included); top-level ``;`` becomes its own token; top-level
    braces are structural noise and are dropped.
    """
    tokens: list[str] = []
    buf: list[str] = []
    i, n = 0, len(step)

    def flush() -> None:
        if buf:
            tokens.append("".join(buf))
            buf.clear()

    while i < n:
        ch = step[i]
        if ch.isspace():
            flush()
            i += 1
        elif ch == ";":
            flush()
            tokens.append(";")
            i += 1
        elif ch in "{}":
            flush()
            i += 1
        elif ch in "([":
            flush()
            close = {"(": ")", "[": "]"}[ch]
            depth = 0
            start = i
            in_string = False
            while i < n:
                c = step[i]
                if in_string:
                    if c == '"':
                        in_string = False
                elif c == '"':
                    in_string = True
                elif c in "([":
                    depth += 1
                elif c in ")]":
                    depth -= 1
                    if depth == 0:
                        break
                i += 1
            tokens.append(step[start:i + 1] if i < n else step[start:])
            i += 1
        elif ch == '"':
            flush()
            start = i
            i += 1
            while i < n:
                if step[i] == '"':
                    if i + 1 < n and step[i + 1] == '"':
                        i += 2
                        continue
                    break
                i += 1
            tokens.append(step[start:i + 1] if i < n else step[start:])
            i += 1
        else:
            buf.append(ch)
            i += 1
    flush()
    return tokens


def _is_bullet(token: str) -> bool:
    return bool(token) and all(c in _BULLET_CHARS for c in token)


def _is_goal_selector(tokens: list[str]) -> bool:
    if not tokens:
        return False
    first = tokens[0]
    if first.endswith(":"):
        first = first[:-1]
        return first.isdigit() or first == "all"
    if len(tokens) >= 2 and tokens[1] == ":":
        return first.isdigit() or first == "all"
    return False


def _strip_single_group(token: str) -> str:
    """Strip one layer of outer parentheses when the token is one group."""
    if not (token.startswith("(") and token.endswith(")")):
        return token
    depth = 0
    for i, c in enumerate(token):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0 and i != len(token) - 1:
                return token  # e.g. "(a)(b)" is not a single group
    return token[1:-1]


def _is_single_group(token: str) -> bool:
    return token != _strip_single_group(token)


def _assemble_params(tokens: list[str]) -> list[str]:
    params: list[str] = []
    i = 0
    while i < len(tokens):
        t = tokens[i]
        if t in GLUE_KEYWORDS:
            params.append(normalize_param(" ".join(tokens[i:])))
            break
        if t in ARROW_TOKENS and i + 1 < len(tokens):
            params.append(normalize_param(t + " " + tokens[i + 1]))
            i += 2
            continue
        params.append(normalize_param(_strip_single_group(t)))
        i += 1
    return params


def _encode_substep(tokens: list[str], combined: bool) -> TraceEvent:
    method = tokens[0]
    return encode_step(method, _assemble_params(tokens[1:]), combined)


def block_to_trace(block: ScriptBlock) -> Trace:
    """Encode a proof body as a trace, one event per top-level sub-step."""
    events: list[TraceEvent] = []
    for step in split_sentences(block.body):
        tokens = _tokenize_step(step)
        while tokens and _is_bullet(tokens[0]):
            tokens.pop(0)
        if not tokens:
            continue
        if tokens[0] == "Proof":
            continue
        if _is_goal_selector(tokens):
            log.warning("proof %s: skipping goal-selector step %r", block.name, step)
            continue
        # split on top-level ';'; every sub-step but the last is combined
        groups: list[list[str]] = [[]]
        for t in tokens:
            if t == ";":
                groups.append([])
            else:
                groups[-1].append(t)
        groups = [g for g in groups if g]
        for gi, group in enumerate(groups):
            events.append(_encode_substep(group, combined=gi < len(groups) - 1))
    if not events:
        raise TraceError(f"proof {block.name} has no steps")
    return Trace(block.name, tuple(events))


def parse_script(text: str, source: str = "<script>") -> Corpus:
    """Parse one script's completed proofs into a positive corpus."""
    traces = []
    for block in extract_blocks(text):
        try:
            traces.append(block_to_trace(block))
        except (TraceError, ParseError) as exc:
            log.warning("%s: skipping proof %s: %s", source, block.name, exc)
    return Corpus(dedupe_names(traces), source)


@dataclass
class ParseSummary:
    files_read: int = 0
    proofs_parsed: int = 0
    proofs_skipped: list[tuple[str, str, str]] = field(default_factory=list)  # (file, name, reason)


def parse_corpus(paths: Sequence[str | Path]) -> tuple[Corpus, ParseSummary]:
    """Parse several `.v` files into one corpus.

    An unreadable file is fatal; a proof that fails to parse is skipped
    with a warning and recorded in the summary.
    """
    summary = ParseSummary()
    traces: list[Trace] = []
    for path in paths:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        summary.files_read += 1
        scan = scan_script(text)
        for skip in scan.skipped:
            log.warning("%s: skipping proof %s: %s", path, skip.name, skip.reason)
            summary.proofs_skipped.append((str(path), skip.name, skip.reason))
        for block in scan.blocks:
            try:
                traces.append(block_to_trace(block))
                summary.proofs_parsed += 1
            except (TraceError, ParseError) as exc:
                log.warning("%s: skipping proof %s: %s", path, block.name, exc)
                summary.proofs_skipped.append((str(path), block.name, str(exc)))
    source = ", ".join(str(p) for p in paths) if paths else "<empty>"
    return Corpus(dedupe_names(traces), source), summary


# ---------------------------------------------------------------------------
# Rendering (inverse of parsing, used for derived scripts and fixpoint tests)
# ---------------------------------------------------------------------------

_SENTINEL = "zz9qsentinel"


def _bare_roundtrips(param: str, is_last: bool) -> bool:
    """True when rendering `param` without parentheses reparses to itself.

    Spaced parameters survive only via keyword/arrow re-gluing, bare
    groups get stripped, and a glue-headed parameter swallows whatever
    follows it, so a non-last parameter is probed with a sentinel token.
    """
    try:
        if is_last:
            return _assemble_params(_tokenize_step(param)) == [param]
        probe = _assemble_params(_tokenize_step(f"{param} {_SENTINEL}"))
        return probe == [param, _SENTINEL]
    except TraceError:
        return False


def render_event_text(event: TraceEvent) -> str:
    """Render one event as ``method p1 ... pn`` (without separator)."""
    label = event.label
    if not event.values.params and label.endswith(ZERO_PARAM_SUFFIX):
        label = label[: -len(ZERO_PARAM_SUFFIX)]
    parts = [label]
    params = event.values.params
    for i, p in enumerate(params):
        bare = _bare_roundtrips(p, is_last=i == len(params) - 1)
        parts.append(p if bare else f"({p})")
    return " ".join(parts)


def render_events(events: Sequence[TraceEvent]) -> str:
    """Render events back into script text.

    Events are joined with ``; `` when the earlier event is combined and
    with ``. `` otherwise; a terminal ``.`` is appended.
    """
    if not events:
        return ""
    pieces: list[str] = []
    for i, event in enumerate(events):
        pieces.append(render_event_text(event))
        if i < len(events) - 1:
            pieces.append("; " if event.values.combined else ". ")
    return "".join(pieces) + "."


def parse_steps(text: str) -> tuple[TraceEvent, ...]:
    """Parse a bare step sequence (no proposition header) into events."""
    block = ScriptBlock("<steps>", "", text)
    return block_to_trace(block).events
