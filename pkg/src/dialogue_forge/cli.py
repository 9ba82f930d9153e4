"""Operator command line.

Exit codes: 0 success, 1 validation or compile failure, 2 I/O or config
failure. Mock generator and judge clients are the default everywhere; real
HTTP backends require --real-clients plus the endpoint environment
variables.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .content_store import (
    CohortError,
    CohortFilesMissingError,
    CohortStore,
    MemoryEntry,
)
from .genpipe import GeneratorClient, MockGenerator
from .moderation import (
    Action,
    ConflictError,
    Decision,
    DecisionValidationError,
    IllegalTransitionError,
    ModerationStore,
    UnknownItemError,
)
from .pipeline import DECISIONS_FILE, PipelineResult, run_pipeline
from .runtime import (
    AwaitInput,
    Ended,
    MissingContentError,
    MissingInputError,
    Session,
    SessionAbortedError,
    bind,
    write_transcript,
)
from .script_core import CompiledScript, ScriptCompileError, ScriptSyntaxError, compile_text
from .timeutil import make_tick_clock, utc_now
from .validator import JudgeClient, MockJudge, ValidatorConfig, load_lexicon

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


def _load_scripts(scripts_dir: Path, out: TextIO) -> list[CompiledScript] | None:
    """Compile every .dlg in the directory; print per-file errors."""
    files = sorted(scripts_dir.glob("*.dlg"))
    if not files:
        print(f"no scripts found in {scripts_dir}", file=out)
        return None
    compiled: list[CompiledScript] = []
    ok = True
    for path in files:
        try:
            compiled.append(compile_text(path.read_text(encoding="utf-8")))
        except ScriptSyntaxError as exc:
            ok = False
            for error in exc.errors:
                print(f"{path.name}: line {error.line}: {error.message}", file=out)
        except ScriptCompileError as exc:
            ok = False
            for error in exc.errors:
                print(f"{path.name}: {error.kind}: {error.message}", file=out)
    return compiled if ok else None


def _clients(args, out_dir: Path) -> tuple[GeneratorClient, JudgeClient] | None:
    if not getattr(args, "real_clients", False):
        return MockGenerator(), MockJudge()
    from . import remote

    generator_url = os.environ.get(remote.GENERATOR_URL_ENV)
    judge_url = os.environ.get(remote.JUDGE_URL_ENV)
    if not generator_url or not judge_url:
        print(
            f"--real-clients requires {remote.GENERATOR_URL_ENV} and {remote.JUDGE_URL_ENV}",
            file=sys.stderr,
        )
        return None
    archive = out_dir / "raw"
    return (
        remote.RemoteGenerator(generator_url, os.environ.get(remote.GENERATOR_KEY_ENV), archive),
        remote.RemoteJudge(judge_url, os.environ.get(remote.JUDGE_KEY_ENV), archive),
    )


def _validator_config(args) -> ValidatorConfig:
    banned = load_lexicon(args.lexicon) if args.lexicon else ValidatorConfig.default().banned_words
    return ValidatorConfig(max_grade=args.max_grade, max_words=args.max_words, banned_words=banned)


def cmd_compile(args, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    scripts_dir = Path(args.scripts)
    if not scripts_dir.is_dir():
        print(f"scripts directory not found: {scripts_dir}", file=out)
        return EXIT_CONFIG
    files = sorted(scripts_dir.glob("*.dlg"))
    if not files:
        print(f"no scripts found in {scripts_dir}", file=out)
        return EXIT_VALIDATION
    failures = 0
    for path in files:
        try:
            compiled = compile_text(path.read_text(encoding="utf-8"))
        except ScriptSyntaxError as exc:
            failures += 1
            for error in exc.errors:
                print(f"{path.name}: line {error.line}: {error.message}", file=out)
        except ScriptCompileError as exc:
            failures += 1
            for error in exc.errors:
                print(f"{path.name}: {error.kind}: {error.message}", file=out)
        else:
            print(
                f"{path.name}: ok ({len(compiled.script.blocks)} blocks, "
                f"{len(compiled.slot_manifest)} slots)",
                file=out,
            )
    return EXIT_VALIDATION if failures else EXIT_OK


def cmd_pipeline(args, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    cohort_dir = Path(args.cohort)
    scripts_dir = Path(args.scripts)
    out_dir = Path(args.out)
    if not scripts_dir.is_dir():
        print(f"scripts directory not found: {scripts_dir}", file=out)
        return EXIT_CONFIG
    try:
        store = CohortStore.open(cohort_dir)
    except CohortFilesMissingError as exc:
        for problem in exc.problems:
            print(problem, file=out)
        return EXIT_CONFIG
    except CohortError as exc:
        for problem in exc.problems:
            print(problem, file=out)
        return EXIT_VALIDATION
    scripts = _load_scripts(scripts_dir, out)
    if scripts is None:
        return EXIT_VALIDATION
    clients = _clients(args, out_dir)
    if clients is None:
        return EXIT_CONFIG
    generator, judge = clients
    result: PipelineResult = run_pipeline(
        cohort=store.cohort,
        scripts=scripts,
        out_dir=out_dir,
        generator=generator,
        judge=judge,
        seed=args.seed,
        config=_validator_config(args),
        clock=make_tick_clock(),
    )
    print(
        f"generated={result.generated} auto_passed={result.auto_passed} "
        f"flagged={result.flagged} ingested={result.ingested} "
        f"skipped_existing={result.skipped_existing} regenerated={result.regenerated} "
        f"failures={len(result.failures)}",
        file=out,
    )
    for failure in result.failures:
        print(
            f"failure: child={failure.child_id} session={failure.session_no} "
            f"slot={failure.slot_id}: {failure.error}",
            file=out,
        )
    return EXIT_VALIDATION if result.failures else EXIT_OK


def _open_store(out_dir: Path, out: TextIO) -> ModerationStore | None:
    log = out_dir / DECISIONS_FILE
    if not log.exists():
        print(f"no pipeline artifacts in {out_dir} (run 'pipeline' first)", file=out)
        return None
    return ModerationStore(log)


def cmd_queue(args, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    store = _open_store(Path(args.out), out)
    if store is None:
        return EXIT_CONFIG
    items = store.next_queue(args.kind, args.limit)
    if not items:
        print("queue empty", file=out)
        return EXIT_OK
    for item in items:
        text = item.current_text if len(item.current_text) <= 60 else item.current_text[:57] + "..."
        print(
            f"{item.id}  overall={item.rubric.overall:.2f} min={item.rubric.min_criterion()} "
            f"violations={len(item.violations)} rev={item.revision}  {text}",
            file=out,
        )
    return EXIT_OK


def cmd_decide(args, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    store = _open_store(Path(args.out), out)
    if store is None:
        return EXIT_CONFIG
    decision = Decision(
        action=Action(args.action),
        moderator=args.moderator,
        note=args.note,
        new_text=args.text,
        at=utc_now(),
    )
    try:
        item = store.apply_decision(args.id, decision, args.rev)
    except UnknownItemError:
        print(f"unknown item '{args.id}'", file=out)
        return EXIT_VALIDATION
    except ConflictError as exc:
        print(f"conflict: expected revision {exc.expected}, item is at {exc.actual}", file=out)
        return EXIT_VALIDATION
    except (IllegalTransitionError, DecisionValidationError) as exc:
        print(f"refused: {exc}", file=out)
        return EXIT_VALIDATION
    print(f"{item.id}: status={item.status.value} revision={item.revision}", file=out)
    if decision.action is Action.REQUEST_REGEN:
        print("regeneration queued; re-run 'pipeline' (or use 'serve') to produce the replacement", file=out)
    return EXIT_OK


def cmd_stats(args, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    store = _open_store(Path(args.out), out)
    if store is None:
        return EXIT_CONFIG
    print(json.dumps(store.stats(), indent=2, sort_keys=True), file=out)
    return EXIT_OK


def cmd_serve(args, out: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    from .api import create_app

    out_dir = Path(args.out)
    store = _open_store(out_dir, out)
    if store is None:
        return EXIT_CONFIG
    regen_runner = None
    if args.cohort:
        try:
            cohort_store = CohortStore.open(Path(args.cohort))
        except CohortError as exc:
            for problem in exc.problems:
                print(problem, file=out)
            return EXIT_CONFIG
        clients = _clients(args, out_dir)
        if clients is None:
            return EXIT_CONFIG
        generator, judge = clients
        config = _validator_config(args)
        from .pipeline import process_regen_orders

        def regen_runner():
            return process_regen_orders(store, cohort_store.cohort, generator, judge, config)

    static_dir = Path(args.static) if args.static else None
    if static_dir is not None and not static_dir.is_dir():
        print(f"static directory not found: {static_dir}", file=out)
        return EXIT_CONFIG
    app = create_app(store, regen_runner=regen_runner, static_dir=static_dir)

    import uvicorn

    print(f"serving moderation API on http://{args.host}:{args.port}", file=out)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_session(args, out: TextIO | None = None, stdin: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    stdin = stdin if stdin is not None else sys.stdin
    cohort_dir = Path(args.cohort)
    out_dir = Path(args.out)
    try:
        cohort_store = CohortStore.open(cohort_dir)
    except CohortFilesMissingError as exc:
        for problem in exc.problems:
            print(problem, file=out)
        return EXIT_CONFIG
    except CohortError as exc:
        for problem in exc.problems:
            print(problem, file=out)
        return EXIT_VALIDATION
    scripts_dir = Path(args.scripts)
    if not scripts_dir.is_dir():
        print(f"scripts directory not found: {scripts_dir}", file=out)
        return EXIT_CONFIG
    scripts = _load_scripts(scripts_dir, out)
    if scripts is None:
        return EXIT_VALIDATION
    matching = [s for s in scripts if s.script.session_no == args.session]
    if args.script:
        matching = [s for s in matching if s.script.name == args.script]
    if not matching:
        print(f"no script for session {args.session}", file=out)
        return EXIT_VALIDATION
    if len(matching) > 1:
        names = ", ".join(s.script.name for s in matching)
        print(f"multiple scripts for session {args.session} ({names}); use --script", file=out)
        return EXIT_VALIDATION
    compiled = matching[0]

    store = _open_store(out_dir, out)
    if store is None:
        return EXIT_CONFIG
    cohort = cohort_store.cohort
    try:
        profile = cohort.profile(args.child)
        book = cohort.assigned_book(args.child)
        bound = bind(compiled, store, cohort, args.child, book.id)
    except KeyError as exc:
        print(exc.args[0] if exc.args else str(exc), file=out)
        return EXIT_VALIDATION
    except MissingContentError as exc:
        print("refusing to run: no approved content for slots: " + ", ".join(exc.slot_ids), file=out)
        return EXIT_VALIDATION

    def writer(key: str, value: str) -> None:
        cohort_store.append_memory(
            MemoryEntry(
                child_id=args.child,
                session_no=compiled.script.session_no,
                key=key,
                value=value,
                created_at=utc_now(),
            )
        )

    memory = cohort_store.memory_view(args.child, upto_session=compiled.script.session_no)
    session = Session(bound, profile, book, memory, memory_writer=writer)
    interactive = stdin.isatty()
    try:
        event = session.step()
        while not isinstance(event, Ended):
            if isinstance(event, AwaitInput):
                if interactive:
                    print("child> ", end="", file=out, flush=True)
                line = stdin.readline()
                if not line:
                    raise MissingInputError("input ended before the script finished")
                answer = line.rstrip("\n")
                if not interactive:
                    print(f"child> {answer}", file=out)
                event = session.step(answer)
            else:
                print(f"robot> {event.text}", file=out)
                event = session.step()
    except SessionAbortedError as exc:
        print(f"session aborted: {exc}", file=out)
        _write_session_transcript(out_dir, args.child, compiled.script.session_no, session)
        return EXIT_VALIDATION
    except MissingInputError as exc:
        print(f"session incomplete: {exc}", file=out)
        return EXIT_VALIDATION

    path = _write_session_transcript(out_dir, args.child, compiled.script.session_no, session)
    print(f"transcript written to {path}", file=out)
    return EXIT_OK


def _write_session_transcript(out_dir: Path, child: str, session_no: int, session: Session) -> Path:
    path = out_dir / "transcripts" / child / f"{session_no}.ndjson"
    write_transcript(path, session.transcript)
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialogue-forge",
        description="Scripted book-chat dialogues: compile scaffolds, generate and validate slot "
        "content offline, moderate it, and run sessions from approved content only.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compile = sub.add_parser("compile", help="compile every .dlg script in a directory")
    p_compile.add_argument("--scripts", required=True)
    p_compile.set_defaults(func=cmd_compile)

    p_pipe = sub.add_parser("pipeline", help="generate, score and route slot content for a cohort")
    p_pipe.add_argument("--cohort", required=True)
    p_pipe.add_argument("--scripts", required=True)
    p_pipe.add_argument("--out", required=True)
    p_pipe.add_argument("--seed", type=int, default=42)
    p_pipe.add_argument("--max-grade", type=float, default=5.0)
    p_pipe.add_argument("--max-words", type=int, default=40)
    p_pipe.add_argument("--lexicon", help="banned-word file (defaults to the packaged list)")
    p_pipe.add_argument("--real-clients", action="store_true", help="use HTTP generator/judge from env")
    p_pipe.set_defaults(func=cmd_pipeline)

    p_queue = sub.add_parser("queue", help="list a moderation queue")
    p_queue.add_argument("--out", required=True)
    p_queue.add_argument("--kind", choices=["priority", "glance"], default="priority")
    p_queue.add_argument("--limit", type=int, default=20)
    p_queue.set_defaults(func=cmd_queue)

    p_decide = sub.add_parser("decide", help="apply one moderation decision")
    p_decide.add_argument("--out", required=True)
    p_decide.add_argument("--id", required=True)
    p_decide.add_argument("--action", choices=[a.value for a in Action], required=True)
    p_decide.add_argument("--text", help="replacement text (edit only)")
    p_decide.add_argument("--rev", type=int, required=True, help="revision you reviewed")
    p_decide.add_argument("--moderator", default="cli")
    p_decide.add_argument("--note", default="")
    p_decide.set_defaults(func=cmd_decide)

    p_stats = sub.add_parser("stats", help="show moderation counts")
    p_stats.add_argument("--out", required=True)
    p_stats.set_defaults(func=cmd_stats)

    p_serve = sub.add_parser("serve", help="serve the moderation API (and console, if built)")
    p_serve.add_argument("--out", required=True)
    p_serve.add_argument("--cohort", help="cohort dir; enables serve-time regeneration")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--static", help="directory of console assets to serve at /")
    p_serve.add_argument("--max-grade", type=float, default=5.0)
    p_serve.add_argument("--max-words", type=int, default=40)
    p_serve.add_argument("--lexicon")
    p_serve.add_argument("--real-clients", action="store_true")
    p_serve.set_defaults(func=cmd_serve)

    p_session = sub.add_parser("session", help="run one child session from approved content")
    p_session.add_argument("--child", required=True)
    p_session.add_argument("--session", type=int, required=True)
    p_session.add_argument("--cohort", required=True)
    p_session.add_argument("--scripts", required=True)
    p_session.add_argument("--out", required=True)
    p_session.add_argument("--script", help="script name when several share a session number")
    p_session.set_defaults(func=cmd_session)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
