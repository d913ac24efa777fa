from collections import Counter
from importlib import resources
from pathlib import Path

import pytest

from magicforge.engine import EvalConfig, evaluate
from magicforge.magic import make_seed
from magicforge.pipeline import PipelineConfig, compile_program
from magicforge.program import AbstractQuery, parse_atom, parse_program
from magicforge.terms import Const, predicate_of, variant_key

GOLDENS = Path(__file__).parent / "goldens"

GENERATION_QUERY = "sentence(P0,P,decl(buys(john,a(book),mary)))"
PARSING_QUERY = "sentence([john,buys,mary,a,book],[],S)"


def grammar_text(name):
    return (resources.files("magicforge") / "grammars" / name).read_text()


def load_grammar(name):
    return parse_program(grammar_text(name))


def load_golden(name):
    return parse_program((GOLDENS / name).read_text())


def golden_facts(name):
    lines = (GOLDENS / name).read_text().splitlines()
    return [parse_atom(line) for line in lines if line.strip()]


def clause_bag(program):
    """Clauses as a multiset of variant keys; ids and provenance ignored."""
    return Counter(variant_key(c.as_term()) for c in program)


def fact_keys(terms):
    return {variant_key(t) for t in terms}


def compile_fixture(name, preset, mode=None, **overrides):
    p = load_grammar(name)
    aq = AbstractQuery.parse(mode) if mode else p.modes[0]
    return compile_program(p, aq.predicate, PipelineConfig.preset(preset, **overrides), aq)


def run_compiled(mp, query, **cfg):
    atom = parse_atom(query)
    return evaluate(mp.program, [make_seed(mp, atom)], EvalConfig(**cfg)), atom


def magic_count(chart):
    return sum(1 for f in chart.facts() if predicate_of(f.term).name.startswith("magic_"))


@pytest.fixture
def fig1():
    return load_grammar("fig1.gr")


@pytest.fixture
def v1():
    return compile_fixture("fig1.gr", "v1")


@pytest.fixture
def v2():
    return compile_fixture("fig1.gr", "v2")


def normalize_index(program):
    """Rename index constants by first appearance so goldens ignore numbering."""
    mapping = {}

    def walk(t):
        if isinstance(t, Const) and t.name.startswith("index_"):
            mapping.setdefault(t.name, f"index_{len(mapping) + 1}")
            return Const(mapping[t.name])
        if hasattr(t, "args"):
            return type(t)(t.functor, tuple(walk(a) for a in t.args))
        return t

    return [c.rename(walk) for c in program]
