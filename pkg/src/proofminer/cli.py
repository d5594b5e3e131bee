"""Command-line front end: parse, infer, eval, accept, suggest, serve, export.

Exit codes: 0 success, 1 usage, 2 parse failure, 3 inference failure,
4 evaluation failure. PROOFMINER_LOG in {error, info, debug} controls
logging verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .efsm import (
    CONTROL_ONLY,
    GUARDED,
    Efsm,
    ModelError,
    export_dot,
    import_json,
    walk,
)
from .evaluation import EvaluationError, build_negatives, cross_validate
from .guidance import GuidanceError, open_session
from .inference import InferenceConfig, InferenceError, infer
from .proofscript import ParseError, parse_corpus, parse_steps
from .traces import Corpus, TraceError, corpus_from_json, corpus_to_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_INFER = 3
EXIT_EVAL = 4

log = logging.getLogger("proofminer.cli")


def _configure_logging() -> None:
    level = os.environ.get("PROOFMINER_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proofminer",
        description="Mine guarded state-machine models from proof scripts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse .v files into a trace corpus")
    p.add_argument("files", nargs="+")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("infer", help="infer a model from a trace corpus")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--holdout", help="drop the named trace before inference")

    p = sub.add_parser("eval", help="k-fold cross validation report")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--foreign", help="corpus of foreign traces for negatives")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--negatives", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[GUARDED, CONTROL_ONLY], default=GUARDED)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("-o", "--output", help="also write the report as JSON")

    p = sub.add_parser("accept", help="per-trace verdicts against a model")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--mode", choices=[GUARDED, CONTROL_ONLY], default=GUARDED)

    p = sub.add_parser("suggest", help="one-shot options for a proof prefix")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--history", default="", help="steps taken so far, as script text")

    p = sub.add_parser("serve", help="start the guidance HTTP service")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="directory of web explorer files to serve at /")

    p = sub.add_parser("export", help="export a model to GraphViz DOT")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--dot", required=True)

    return parser


def _load_corpus(path: str) -> Corpus:
    return corpus_from_json(Path(path).read_bytes())


def _load_model(path: str) -> Efsm:
    return import_json(Path(path).read_bytes())


def _load_config(path: str | None) -> InferenceConfig:
    if path is None:
        return InferenceConfig()
    return InferenceConfig.from_doc(json.loads(Path(path).read_text()))


def _cmd_parse(args) -> int:
    corpus, summary = parse_corpus(args.files)
    Path(args.output).write_bytes(corpus_to_json(corpus))
    print(
        f"read {summary.files_read} file(s): {summary.proofs_parsed} proof(s) "
        f"parsed, {len(summary.proofs_skipped)} skipped"
    )
    for path, name, reason in summary.proofs_skipped:
        print(f"  skipped {name} ({path}): {reason}", file=sys.stderr)
    return EXIT_OK


def _cmd_infer(args) -> int:
    corpus = _load_corpus(args.input)
    config = _load_config(args.config)
    if args.holdout is not None:
        remaining = tuple(t for t in corpus.traces if t.name != args.holdout)
        if len(remaining) == len(corpus.traces):
            log.warning("holdout %r not found in corpus", args.holdout)
        corpus = Corpus(remaining, source=corpus.source)
    model = infer(corpus, config)
    from .efsm import export_json

    Path(args.output).write_bytes(export_json(model))
    print(
        f"inferred model: {len(model.states)} states, "
        f"{len(model.transitions)} transitions, "
        f"{len(model.accepting)} accepting"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    corpus = _load_corpus(args.input)
    foreign = _load_corpus(args.foreign) if args.foreign else None
    config = replace(_load_config(args.config), seed=args.seed)
    negatives = build_negatives(corpus, foreign, count=args.negatives, seed=args.seed)
    report = cross_validate(corpus, negatives, k=args.k, config=config, mode=args.mode)
    print(report.format_table(), end="")
    if args.output:
        Path(args.output).write_bytes(report.to_json())
    return EXIT_OK


def _cmd_accept(args) -> int:
    model = _load_model(args.model)
    corpus = _load_corpus(args.input)
    for trace in corpus.traces:
        result = walk(model, trace, args.mode)
        detail = "" if result.accepted else f" ({result.reason} at event {result.failed_at})"
        print(f"{trace.name}: {result.verdict}{detail}")
    return EXIT_OK


def _cmd_suggest(args) -> int:
    model = _load_model(args.model)
    session = open_session(model)
    if args.history.strip():
        for event in parse_steps(args.history):
            session.step(event.label, event.values)
    suggestions = session.options()
    if session.can_finish:
        print("(current state is accepting: the proof can finish here)")
    if not suggestions:
        print("(no options from this state)")
    for s in suggestions:
        params = ", ".join(
            " ".join(v.params) + (" ;" if v.combined else "")
            for v in s.parameter_candidates[:4]
            if v.params or v.combined
        )
        marker = " -> accepting" if s.leads_to_accepting else ""
        print(f"{s.display_name}" + (f"  [{params}]" if params else "") + marker)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    model = _load_model(args.model)
    app = create_app(initial_model=model)
    if args.static:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.static, html=True), name="static")
    print(f"serving model {args.model} on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _cmd_export(args) -> int:
    model = _load_model(args.model)
    Path(args.dot).write_text(export_dot(model), encoding="utf-8")
    print(f"wrote {args.dot}")
    return EXIT_OK


_HANDLERS = {
    "parse": (_cmd_parse, EXIT_PARSE),
    "infer": (_cmd_infer, EXIT_INFER),
    "eval": (_cmd_eval, EXIT_EVAL),
    "accept": (_cmd_accept, EXIT_PARSE),
    "suggest": (_cmd_suggest, EXIT_PARSE),
    "serve": (_cmd_serve, EXIT_PARSE),
    "export": (_cmd_export, EXIT_PARSE),
}


def run(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handler, failure_code = _HANDLERS[args.command]
    try:
        return handler(args)
    except (ParseError, TraceError, ModelError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InferenceError as exc:
        print(f"inference error: {exc}", file=sys.stderr)
        return EXIT_INFER
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except GuidanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.available:
            print(f"available: {', '.join(exc.available)}", file=sys.stderr)
        return failure_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
