"""magicforge compile|run|diagnose <grammar> [flags]

Exit codes: 0 success, 1 unreadable or unparsable input, 2 invalid option
combination, 3 evaluation or analysis cap hit (a partial chart is still
printed by ``run``), 4 dependency-constraint violations found by ``diagnose``.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from typing import Optional

from .abstract import AnalysisLimit
from .engine import NOT_SO_NAIVE, STRATEGIES, EvalConfig, ResourceExceeded, evaluate
from .magic import DEFAULT_DEPTH, FULL_MAGIC, LEXICAL_ONLY, CompileError, make_seed
from .optimize import ALL, OVERLAPPING_ONLY, analyze_duplicates
from .pipeline import OPTIMIZATIONS, PRESETS, ConfigError, PipelineConfig, compile_program
from .program import AbstractQuery, ParseError, parse_atom, parse_program, print_program
from .terms import Predicate, format_term, letter_names, predicate_of

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_OPTIONS = 2
EXIT_RESOURCE = 3
EXIT_VIOLATION = 4

OUTPUTS = ("program", "report", "chart", "trace", "answers")
DEFAULT_OUTPUT = {"compile": "program,report", "run": "chart,answers", "diagnose": "report"}


class UsageError(Exception):
    pass


def _csv(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magicforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("grammar", help="grammar file, or - for stdin")
    common.add_argument("--query", help="query predicate (name/arity) or query atom")
    common.add_argument("--mode", help='abstract query, e.g. "sentence(f,f,b)"')
    group = common.add_mutually_exclusive_group()
    group.add_argument("--pipeline", choices=sorted(PRESETS) + ["none"],
                       help="named optimization preset; none skips magic compilation")
    group.add_argument("--opt", help=f"comma-separated subset of {','.join(OPTIMIZATIONS)}")
    common.add_argument("--compile-mode", choices=(FULL_MAGIC, LEXICAL_ONLY), default=FULL_MAGIC)
    common.add_argument("--keep-structural", action="store_true",
                        help="keep magic arguments that are only partially instantiated")
    common.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="abstraction depth bound")
    common.add_argument("--scope", choices=(OVERLAPPING_ONLY, ALL), default=OVERLAPPING_ONLY,
                        help="which magic predicates to index")
    common.add_argument("--output", help=f"comma-separated subset of {','.join(OUTPUTS)}")

    evaluation = argparse.ArgumentParser(add_help=False)
    evaluation.add_argument("--strategy", choices=STRATEGIES, default="semi_naive")
    evaluation.add_argument("--subsumption", action=argparse.BooleanOptionalAction, default=True)
    evaluation.add_argument("--no-occurs-check", action="store_true")
    evaluation.add_argument("--max-iter", type=int, default=EvalConfig.max_iterations)
    evaluation.add_argument("--max-facts", type=int, default=EvalConfig.max_facts)
    evaluation.add_argument("--max-joins", type=int, default=None,
                            help="cap on unification attempts (default unbounded)")
    evaluation.add_argument("--seed", action="append", default=[],
                            help="extra seed fact (repeatable); the only seeds with --pipeline none")
    evaluation.add_argument("--trace", type=int, action="append", default=[],
                            help="print the derivation tree of a fact id (repeatable)")

    sub.add_parser("compile", parents=[common], help="print the compiled program")
    sub.add_parser("run", parents=[common, evaluation], help="evaluate bottom-up")
    sub.add_parser("diagnose", parents=[common, evaluation],
                   help="report duplicate derivations under not-so-naive evaluation")
    return parser


# ------------------------------------------------------------------ helpers

def _read(path: str) -> str:
    """A file path, ``-`` for stdin, or the name of a bundled grammar."""
    if path == "-":
        return sys.stdin.read()
    if not os.path.exists(path) and os.path.basename(path) == path:
        bundled = resources.files("magicforge") / "grammars" / path
        if bundled.is_file():
            return bundled.read_text(encoding="utf-8")
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _pipeline(args) -> Optional[PipelineConfig]:
    """None means: evaluate the source program as is."""
    extra = dict(compile_mode=args.compile_mode, keep_structural=args.keep_structural,
                 depth=args.depth, scope=args.scope)
    if args.opt is not None:
        return PipelineConfig(optimizations=_csv(args.opt), **extra)
    name = args.pipeline or "v2"
    if name == "none":
        return None
    return PipelineConfig.preset(name, **extra)


def _query(args, program):
    """(predicate, concrete query atom or None)."""
    text = args.query
    if text is None:
        if program.queries:
            atom = program.queries[0]
            return predicate_of(atom), atom
        if len(program.modes) == 1:
            return program.modes[0].predicate, None
        return None, None
    name, slash, arity = text.rpartition("/")
    if slash and name and arity.isdigit() and "(" not in text:
        pred = Predicate(name, int(arity))
        atom = next((q for q in program.queries if predicate_of(q) == pred), None)
        return pred, atom
    atom = parse_atom(text)
    return predicate_of(atom), atom


def _outputs(args) -> tuple:
    chosen = _csv(args.output or DEFAULT_OUTPUT[args.command])
    bad = [o for o in chosen if o not in OUTPUTS]
    if bad:
        raise UsageError(f"unknown output(s): {', '.join(bad)}")
    return chosen


def _report(lines) -> str:
    return "".join(f"% {line}\n" for line in lines)


def _answer_lines(chart, query) -> str:
    out = []
    for a in chart.answers(query):
        out.append(f"answer: {format_term(a, letter_names([a]))}\n")
    return "".join(out) or "no answers\n"


# ----------------------------------------------------------------- commands

def _prepare(args):
    program = parse_program(_read(args.grammar))
    cfg = _pipeline(args)
    pred, atom = _query(args, program)
    mode = AbstractQuery.parse(args.mode) if args.mode else None
    if cfg is None or (pred is None and len(program) == 0):
        return program, None, pred, atom
    if pred is None:
        raise UsageError("no query given and the grammar has no query or single mode directive")
    if args.mode is None and pred is not None:
        mode = program.mode_for(pred)
    mp = compile_program(program, pred, cfg, mode)
    return program, mp, pred, atom


def _evaluate(args, program, mp, atom, force_strategy=None):
    seeds = [parse_atom(s) for s in args.seed]
    target = program
    if mp is not None:
        target = mp.program
        if atom is not None:
            seed = make_seed(mp, atom)
            if seed is not None:
                seeds.insert(0, seed)
        elif not seeds:
            raise UsageError("run needs a concrete query atom (or --seed) to build the seed")
    cfg = EvalConfig(
        strategy=force_strategy or args.strategy,
        subsumption=args.subsumption,
        occurs_check=not args.no_occurs_check,
        max_iterations=args.max_iter,
        max_facts=args.max_facts,
        max_joins=args.max_joins,
    )
    return target, seeds, cfg


def cmd_compile(args, out) -> int:
    program, mp, _, _ = _prepare(args)
    outputs = _outputs(args)
    if "report" in outputs and mp is not None:
        out.write(_report(mp.log))
    if "program" in outputs:
        out.write(print_program(mp.program if mp is not None else program))
    return EXIT_OK


def _print_run(out, outputs, chart, atom, traces):
    if "chart" in outputs:
        out.write(chart.dump())
    if "answers" in outputs and atom is not None:
        out.write(_answer_lines(chart, atom))
    for fid in traces:
        out.write(chart.trace(fid).format() + "\n")


def cmd_run(args, out, err) -> int:
    program, mp, _, atom = _prepare(args)
    outputs = _outputs(args)
    if mp is not None:
        if "report" in outputs:
            out.write(_report(mp.log))
        if "program" in outputs:
            out.write(print_program(mp.program))
    target, seeds, cfg = _evaluate(args, program, mp, atom)
    try:
        chart = evaluate(target, seeds, cfg)
    except ResourceExceeded as exc:
        _print_run(out, outputs, exc.chart, atom, [])
        err.write(f"resource exceeded: {exc.reason} ({exc.chart.stored} facts stored)\n")
        return EXIT_RESOURCE
    _print_run(out, outputs, chart, atom, args.trace)
    return EXIT_OK


def cmd_diagnose(args, out, err) -> int:
    program, mp, _, atom = _prepare(args)
    outputs = _outputs(args)
    target, seeds, cfg = _evaluate(args, program, mp, atom, force_strategy=NOT_SO_NAIVE)
    try:
        chart = evaluate(target, seeds, cfg)
    except ResourceExceeded as exc:
        err.write(f"resource exceeded: {exc.reason} ({exc.chart.stored} facts stored)\n")
        return EXIT_RESOURCE
    report = analyze_duplicates(chart)
    if "chart" in outputs:
        out.write(chart.dump())
    if "report" in outputs:
        out.write(report.format())
    return EXIT_VIOLATION if report else EXIT_OK


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OPTIONS if exc.code else EXIT_OK
    try:
        if args.command == "compile":
            return cmd_compile(args, out)
        if args.command == "run":
            return cmd_run(args, out, err)
        return cmd_diagnose(args, out, err)
    except AnalysisLimit as exc:
        err.write(f"resource exceeded: {exc}\n")
        return EXIT_RESOURCE
    except (OSError, ParseError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (ConfigError, CompileError, UsageError, ValueError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_OPTIONS


if __name__ == "__main__":
    sys.exit(main())
