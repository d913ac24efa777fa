"""Chart sizes per pipeline preset and evaluation strategy.

For each bundled grammar and query, compile with every preset and evaluate
with every strategy. Prints one CSV row per run: total facts, magic facts,
variant-duplicate facts, rounds, answers, or the cap that was hit.

    python scripts/compare_pipelines.py
    python scripts/compare_pipelines.py --max-facts 20000 --strategies semi_naive
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from importlib import resources

from magicforge import (
    EvalConfig,
    PipelineConfig,
    ResourceExceeded,
    compile_program,
    evaluate,
    make_seed,
    parse_atom,
)
from magicforge.program import parse_program
from magicforge.terms import predicate_of, variant_key


@dataclass(frozen=True)
class Workload:
    grammar: str
    query: str


@dataclass(frozen=True)
class ExperimentConfig:
    workloads: tuple = (
        Workload("fig1.gr", "sentence(P0,P,decl(buys(john,a(book),mary)))"),
        Workload("fig1-parse.gr", "sentence([john,buys,mary,a,book],[],S)"),
    )
    presets: tuple = ("magic", "v1", "v2")
    strategies: tuple = ("naive", "semi_naive", "not_so_naive")
    max_iterations: int = 40
    max_facts: int = 5000


@dataclass
class Row:
    grammar: str
    preset: str
    strategy: str
    outcome: str
    facts: int
    magic_facts: int
    duplicates: int
    rounds: int
    answers: int = 0


def load(grammar: str):
    return parse_program((resources.files("magicforge") / "grammars" / grammar).read_text())


def run_one(cfg: ExperimentConfig, work: Workload, preset: str, strategy: str) -> Row:
    program = load(work.grammar)
    query = parse_atom(work.query)
    mp = compile_program(program, predicate_of(query), PipelineConfig.preset(preset))
    seed = make_seed(mp, query)
    eval_cfg = EvalConfig(strategy=strategy, max_iterations=cfg.max_iterations,
                          max_facts=cfg.max_facts)
    try:
        chart = evaluate(mp.program, [seed] if seed is not None else [], eval_cfg)
        outcome = "fixpoint"
    except ResourceExceeded as exc:
        chart, outcome = exc.chart, exc.reason
    facts = chart.facts()
    keys = [variant_key(f.term) for f in facts]
    return Row(
        grammar=work.grammar,
        preset=preset,
        strategy=strategy,
        outcome=outcome,
        facts=len(facts),
        magic_facts=sum(1 for f in facts if mp.is_magic(f.term)),
        duplicates=len(keys) - len(set(keys)),
        rounds=max((f.round for f in facts), default=0),
        answers=len(chart.answers(query)) if outcome == "fixpoint" else 0,
    )


def main(argv=None) -> int:
    defaults = ExperimentConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--presets", default=",".join(defaults.presets))
    ap.add_argument("--strategies", default=",".join(defaults.strategies))
    ap.add_argument("--max-iter", type=int, default=defaults.max_iterations)
    ap.add_argument("--max-facts", type=int, default=defaults.max_facts)
    args = ap.parse_args(argv)
    cfg = ExperimentConfig(
        presets=tuple(args.presets.split(",")),
        strategies=tuple(args.strategies.split(",")),
        max_iterations=args.max_iter,
        max_facts=args.max_facts,
    )
    columns = ["grammar", "preset", "strategy", "outcome", "facts", "magic_facts",
               "duplicates", "rounds", "answers"]
    writer = csv.writer(sys.stdout)
    writer.writerow(columns)
    for work in cfg.workloads:
        for preset in cfg.presets:
            for strategy in cfg.strategies:
                row = run_one(cfg, work, preset, strategy)
                writer.writerow([getattr(row, c) for c in columns])
    return 0


if __name__ == "__main__":
    sys.exit(main())
