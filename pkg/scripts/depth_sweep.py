"""Effect of the abstraction depth on cycle removal.

Compiles the generation grammar with cycle removal for a range of depth
bounds, with and without keeping partially instantiated magic arguments,
and records how many magic rules survive and whether generation reaches a
fixpoint.

    python scripts/depth_sweep.py --depths 1,2,3,4,5
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
from magicforge.terms import predicate_of


@dataclass(frozen=True)
class SweepConfig:
    grammar: str = "fig1.gr"
    query: str = "sentence(P0,P,decl(buys(john,a(book),mary)))"
    depths: tuple = (1, 2, 3, 4)
    structural: tuple = (False, True)
    preset: str = "v2"
    max_iterations: int = 40
    max_facts: int = 5000


def sweep(cfg: SweepConfig):
    text = (resources.files("magicforge") / "grammars" / cfg.grammar).read_text()
    program = parse_program(text)
    query = parse_atom(cfg.query)
    for keep in cfg.structural:
        for depth in cfg.depths:
            pipeline = PipelineConfig.preset(cfg.preset, keep_structural=keep, depth=depth)
            mp = compile_program(program, predicate_of(query), pipeline)
            removed = sum(1 for line in mp.log if line.startswith("cycles: removed"))
            seed = make_seed(mp, query)
            try:
                chart = evaluate(mp.program, [seed] if seed is not None else [],
                                 EvalConfig(strategy="not_so_naive",
                                            max_iterations=cfg.max_iterations,
                                            max_facts=cfg.max_facts))
                outcome, facts, answers = "fixpoint", len(chart), len(chart.answers(query))
            except ResourceExceeded as exc:
                outcome, facts, answers = exc.reason, exc.chart.stored, 0
            yield dict(keep_structural=keep, depth=depth, magic_rules=len(mp.magic_rules()),
                       cycles_removed=removed, outcome=outcome, facts=facts, answers=answers)


def main(argv=None) -> int:
    defaults = SweepConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", default=",".join(map(str, defaults.depths)))
    ap.add_argument("--preset", default=defaults.preset, choices=("v2", "v1"))
    args = ap.parse_args(argv)
    cfg = SweepConfig(depths=tuple(int(d) for d in args.depths.split(",")), preset=args.preset)
    rows = list(sweep(cfg))
    writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
