"""``roadcode`` command line.

Exit codes: 0 success, 1 error (bad input, parse error, bad config),
2 query had no solution, 3 validation found punishable violations.
Machine-readable results go to standard output as JSON Lines; messages
and explanations go to standard error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .cnl import (
    CNLError,
    lower,
    parse_document,
    parse_literal,
    render_document,
    render_failure,
    render_rules,
    render_term,
    render_trace,
)
from .logic import LogicError, Scenario, Solver, explain_failure
from .rulebase import CORPUS_ENV, Corpus, CorpusError, UnknownOffence, load_corpus
from .sim.world import dumps

EXIT_OK, EXIT_ERROR, EXIT_NO, EXIT_PUNISHABLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    corpus: str | None = None
    config: str | None = None
    seed: int | None = None
    ticks: int = 1000
    log: str | None = None
    out: str | None = None

    def __post_init__(self) -> None:
        if self.ticks < 0:
            raise UsageError("--ticks must be >= 0")
        if self.seed is not None and not -(2**63) <= self.seed < 2**64:
            raise UsageError("--seed must fit in 64 bits")


def _corpus(path: str | None) -> Corpus:
    return load_corpus(path)  # None falls back to $ROADCODE_CORPUS, then the shipped corpus


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _open_out(path: str | None, stdout: TextIO):
    if path is None or path == "-":
        return stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


# -- subcommands -----------------------------------------------------------------


def cmd_parse(args, out: TextIO, err: TextIO) -> int:
    base = _corpus(args.corpus).vocabulary
    doc = parse_document(_read(args.file), base, source=args.file)
    rules, scenarios, goals = lower(doc)
    for i, clause in enumerate(rules.clauses):
        span = rules.spans[i] if i < len(rules.spans) else None
        row = {"clause": i, "line": span.start_line if span else None, "logic": str(clause)}
        out.write(dumps(row) + "\n")
    err.write(f"{args.file}: {len(rules.clauses)} clauses, {len(scenarios)} scenarios, {len(goals)} goals\n")
    if rules.clauses:
        err.write(render_rules(rules.clauses, doc.vocabulary) + "\n")
    return EXIT_OK


def cmd_render(args, out: TextIO, err: TextIO) -> int:
    base = _corpus(args.corpus).vocabulary
    doc = parse_document(_read(args.file), base, source=args.file)
    fh, close = _open_out(args.out, out)
    try:
        fh.write(render_document(doc, base=base))
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_query(args, out: TextIO, err: TextIO) -> int:
    corpus = _corpus(args.corpus)
    vocab, rules, scenario, goal_text = corpus.vocabulary, corpus.rules, Scenario(), args.goal
    goal = None
    if args.scenario:
        doc = parse_document(_read(args.scenario), corpus.vocabulary, source=args.scenario)
        extra, scenarios, goals = lower(doc)
        vocab = doc.vocabulary
        if extra.clauses:
            rules = rules + extra
        if scenarios:
            scenario = Scenario.of((f for sc in scenarios.values() for f in sc), name="scenario")
        if goal_text is None and goals:
            goal = next(iter(goals.values()))
    if goal is None:
        if goal_text is None:
            raise UsageError("no goal: pass --goal or put a goal block in the scenario file")
        goal = parse_literal(goal_text, vocab, source="--goal")
    solutions = Solver(rules, scenario).solve(goal)
    for sol in solutions:
        bindings = {v.name: render_term(t) for v, t in sorted(sol.bindings.items(), key=lambda kv: kv[0].name)}
        out.write(dumps({"goal": str(goal), "answer": True, "bindings": bindings}) + "\n")
        if args.explain:
            err.write(render_trace(sol.trace, vocab, rules) + "\n")
    if not solutions:
        out.write(dumps({"goal": str(goal), "answer": False}) + "\n")
        err.write(render_failure(explain_failure(goal, rules, scenario), vocab, rules) + "\n")
        return EXIT_NO
    return EXIT_OK


def cmd_simulate(args, out: TextIO, err: TextIO) -> int:
    from .sim import load_config, run, summary

    rc = RunConfig(args.corpus, args.config, args.seed, args.ticks, args.log)
    config = load_config(rc.config)
    world = run(config, rc.seed, rc.ticks, corpus=_corpus(rc.corpus))
    stats = summary(world)
    if rc.log:
        world.write_log(rc.log)
        out.write(dumps({"summary": stats, "log": rc.log}) + "\n")
    else:
        for line in world.log_lines():
            out.write(line + "\n")
    err.write(
        f"ticks {stats['ticks']}: {stats['vehicles_spawned']} vehicles spawned, "
        f"{stats['queries']} queries, {stats['potential_violations']} potential violations\n"
    )
    return EXIT_OK


def cmd_validate(args, out: TextIO, err: TextIO) -> int:
    from .compliance import read_log, report, validate

    if not args.log:
        raise UsageError("validate needs --log")
    verdicts = validate(read_log(args.log), _corpus(args.corpus))
    fh, close = _open_out(args.out, out)
    try:
        for v in verdicts:
            fh.write(v.to_json() + "\n")
    finally:
        if close:
            fh.close()
    err.write(report(verdicts))
    return EXIT_PUNISHABLE if any(v.punishable for v in verdicts) else EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roadcode", description="Executable junction rules: query, simulate, validate.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def corpus_flag(sp):
        sp.add_argument("--corpus", help=f"corpus directory (default: ${CORPUS_ENV} or the shipped corpus)")

    sp = sub.add_parser("parse", help="check a .rules file and list its clauses")
    sp.add_argument("file")
    corpus_flag(sp)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("render", help="print a .rules file in canonical layout")
    sp.add_argument("file")
    corpus_flag(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("query", help="ask the corpus a question about a scenario")
    corpus_flag(sp)
    sp.add_argument("--scenario", help=".rules file with a scenario block")
    sp.add_argument("--goal", help="goal sentence, e.g. 'v1 can enter the junction'")
    sp.add_argument("--explain", action="store_true", help="print the proof of each answer")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("simulate", help="run the traffic simulation and write its event log")
    corpus_flag(sp)
    sp.add_argument("--config", help="key = value settings file")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--ticks", type=int, default=1000)
    sp.add_argument("--log", help="event log path (default: standard output)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="classify the potential violations in an event log")
    corpus_flag(sp)
    sp.add_argument("--log", required=True)
    sp.add_argument("--out", help="verdicts path (default: standard output)")
    sp.set_defaults(func=cmd_validate)
    return p


def _location(exc: CNLError) -> str:
    span = getattr(exc, "span", None)
    if span is None:
        return ""
    where = f"{span.source}:" if span.source else ""
    return f"{where}{span.start_line}:{span.start_col}: "


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args, out, err)
    except CNLError as exc:
        err.write(f"{_location(exc)}error: {type(exc).__name__}: {exc.message}\n")
    except (CorpusError, UsageError, LogicError, UnknownOffence) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
    except ValueError as exc:  # InvalidConfig, LogFormatError
        err.write(f"error: {type(exc).__name__}: {exc}\n")
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
