"""Command-line interface.

Four subcommands cover the toolchain: ``analyze`` reports conflicts and
their classification as JSON lines, ``repair`` runs the interactive or
scripted repair loop, ``enumerate`` dumps the bounded tree language and
``serve`` exposes the session over a local HTTP API for the browser UI.

Exit codes follow the usual triad: 0 for success (conflict-free /
repaired), 1 for a truthful negative (conflicts found, repair stalled or
non-addressable), 2 for errors in the invocation or input files.
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click

from gramata.automata import ResourceLimitError, cfg_to_ta, enumerate_trees
from gramata.examples import ContradictionError, Prompt
from gramata.grammar import Grammar, GrammarError, parse_grammar, serialize_grammar
from gramata.intersection import MODES
from gramata.lr import classify_conflicts, detect_conflicts
from gramata.session import (
    IN_PROGRESS,
    REPAIRED,
    RepairSession,
    SessionError,
    run_scripted,
)
from gramata.trees import dumps as tree_dumps
from gramata.trees import render_ascii


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _load_grammar(path: str) -> Grammar:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot read grammar file: {exc}")
    try:
        return parse_grammar(text)
    except GrammarError as exc:
        _fail(f"invalid grammar: {exc}")
    raise AssertionError("unreachable")


def _read_answers(path: str) -> list[int]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot read answers file: {exc}")
    answers: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line not in ("0", "1"):
            _fail(f"answers file line {lineno}: expected 0 or 1, got {line!r}")
        answers.append(int(line))
    return answers


@click.group()
def main() -> None:
    """Interactive grammar repair: detect conflicts, choose trees, rewrite."""


@main.command()
@click.option("--grammar", "grammar_path", required=True, type=click.Path())
def analyze(grammar_path: str) -> None:
    """Print conflicts and their classes as JSON lines; exit 1 if any."""
    g = _load_grammar(grammar_path)
    conflicts = detect_conflicts(g)
    classes, failures = classify_conflicts(g, conflicts)
    for c in conflicts:
        click.echo(json.dumps(c.to_json()))
    for cc in classes:
        click.echo(
            json.dumps(
                {
                    "pair": list(cc.key),
                    "kind": cc.kind,
                    "sources": [[s, la] for s, la in cc.sources],
                }
            )
        )
    for f in failures:
        click.echo(
            json.dumps(
                {
                    "non_addressable": f.reason,
                    "sources": [[s, la] for s, la in f.sources],
                }
            )
        )
    sys.exit(1 if conflicts else 0)


def _render_prompt(p: Prompt) -> str:
    lines = [
        f"Prompt {p.id} [{p.kind}] {p.pair[0]} vs {p.pair[1]}",
        "Choose your preference! (Type either 0 or 1.)",
    ]
    for i, tree in enumerate(p.trees):
        lines.append(f"Option {i}:")
        lines.append(render_ascii(tree, indent=1))
    return "\n".join(lines)


def _run_interactive(session: RepairSession, dump_learning: bool) -> None:
    while session.verdict == IN_PROGRESS:
        p = session.next_prompt()
        if p is None:
            session.step()
            if dump_learning and session.learning_log:
                click.echo(json.dumps({"learning": session.learning_log[-1]}))
            continue
        click.echo(_render_prompt(p))
        while True:
            try:
                raw = click.prompt(
                    "Your choice", type=click.Choice(["0", "1"])
                )
            except click.Abort:
                _fail("input ended before all prompts were answered")
            try:
                session.answer(p.id, int(raw))
                break
            except ContradictionError as exc:
                click.echo(f"rejected: {exc} — pick the other option")


@main.command()
@click.option("--grammar", "grammar_path", required=True, type=click.Path())
@click.option("--answers", "answers_path", type=click.Path(), default=None)
@click.option("--interactive", is_flag=True, default=False)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option(
    "--intersect-mode",
    type=click.Choice(MODES),
    default="default",
    show_default=True,
)
@click.option("--dump-learning", is_flag=True, default=False)
def repair(
    grammar_path: str,
    answers_path: str | None,
    interactive: bool,
    out_path: str | None,
    intersect_mode: str,
    dump_learning: bool,
) -> None:
    """Run the repair loop; exit 0 repaired, 1 stalled/non-addressable."""
    if interactive == (answers_path is not None):
        _fail("exactly one of --answers or --interactive is required")
    g = _load_grammar(grammar_path)
    if interactive:
        session = RepairSession(g, intersect_mode=intersect_mode)
        _run_interactive(session, dump_learning)
        report = session.report()
    else:
        answers = _read_answers(answers_path)
        try:
            session, report = run_scripted(g, answers, intersect_mode)
        except (SessionError, ContradictionError) as exc:
            _fail(str(exc))
        if dump_learning:
            for entry in session.learning_log:
                click.echo(json.dumps({"learning": entry}))
    if out_path is not None:
        Path(out_path).write_text(
            serialize_grammar(session.current), encoding="utf-8"
        )
    click.echo(json.dumps(report.to_json()))
    if report.verdict != REPAIRED:
        for c in session.conflicts:
            click.echo(json.dumps({"residual": c.to_json()}), err=True)
    sys.exit(0 if report.verdict == REPAIRED else 1)


@main.command("enumerate")
@click.option("--grammar", "grammar_path", required=True, type=click.Path())
@click.option("--depth", type=int, required=True)
@click.option("--cap", type=int, default=1_000_000, show_default=True)
def enumerate_cmd(grammar_path: str, depth: int, cap: int) -> None:
    """Dump every parse tree up to the given depth as JSON lines."""
    g = _load_grammar(grammar_path)
    try:
        trees = enumerate_trees(cfg_to_ta(g), depth, cap=cap)
    except ResourceLimitError as exc:
        _fail(str(exc))
    for t in trees:
        click.echo(tree_dumps(t))


@main.command()
@click.option("--grammar", "grammar_path", required=True, type=click.Path())
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--ui-dir", type=click.Path(), default=None)
@click.option(
    "--intersect-mode",
    type=click.Choice(MODES),
    default="default",
    show_default=True,
)
def serve(
    grammar_path: str, port: int, ui_dir: str | None, intersect_mode: str
) -> None:
    """Serve the repair session over HTTP for the browser UI."""
    import uvicorn

    from gramata.service import create_app

    g = _load_grammar(grammar_path)
    with socket.socket() as probe:
        try:
            probe.bind(("127.0.0.1", port))
        except OSError as exc:
            _fail(f"port {port} unavailable: {exc}")
    app = create_app(g, intersect_mode=intersect_mode, ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    main()
