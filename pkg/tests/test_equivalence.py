"""Strategy and compilation equivalence on random small programs.

The naive evaluator is the oracle. Random programs may not terminate (terms
can grow, and the not-so-naive strategy loops on cyclic data), and their
trimming analysis can be expensive; such cases are discarded, and only
cases that finish under the caps are compared.
"""

import warnings
from unittest import mock

import pytest
from hypothesis import HealthCheck, assume, given, settings

from conftest import fact_keys
from strategies import programs_with_query
import magicforge.abstract as abstract
from magicforge.abstract import AnalysisLimit
from magicforge.engine import EvalConfig, ResourceExceeded, evaluate
from magicforge.magic import make_seed
from magicforge.pipeline import PipelineConfig, compile_program
from magicforge.program import AbstractQuery, parse_atom, parse_program
from magicforge.terms import is_ground, predicate_of

CAPS = dict(max_iterations=40, max_facts=2000, max_joins=100_000)
ANALYSIS_JOINS = 20_000
CONFIGS = [
    dict(strategy="naive"),
    dict(strategy="semi_naive", subsumption=True),
    dict(strategy="semi_naive", subsumption=False),
    dict(strategy="not_so_naive"),
]
RANDOM = settings(max_examples=100, deadline=None,
                  suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])


def parse_quietly(text):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return parse_program(text)


def fixpoint(program, seeds, **cfg):
    try:
        return evaluate(program, seeds, EvalConfig(**cfg, **CAPS))
    except ResourceExceeded:
        return None


def mode_of(query):
    return AbstractQuery(predicate_of(query),
                         tuple("b" if is_ground(a) else "f" for a in query.args))


def strategies_agree(text, seed_texts):
    """None when some configuration hits a cap, else whether all agree."""
    program = parse_quietly(text)
    seeds = [parse_atom(s) for s in seed_texts]
    charts = [fixpoint(program, seeds, **cfg) for cfg in CONFIGS]
    if any(c is None for c in charts):
        return None
    reference = fact_keys(charts[0].terms())
    return all(fact_keys(c.terms()) == reference for c in charts[1:])


def compiled_answers_agree(text, query_text, preset):
    """None when a cap is hit, else whether the compiled program returns
    exactly the source program's answers to the query."""
    program = parse_quietly(text)
    query = parse_atom(query_text)
    source = fixpoint(program, [], strategy="naive")
    if source is None:
        return None
    expected = fact_keys(source.answers(query))
    try:
        with mock.patch.object(abstract, "MAX_ABSTRACT_JOINS", ANALYSIS_JOINS):
            mp = compile_program(program, predicate_of(query), PipelineConfig.preset(preset),
                                 mode_of(query))
    except AnalysisLimit:
        return None
    seed = make_seed(mp, query)
    compiled = fixpoint(mp.program, [seed] if seed is not None else [], strategy="semi_naive")
    if compiled is None:
        return None
    return fact_keys(compiled.answers(query)) == expected


@RANDOM
@given(programs_with_query())
def test_strategies_agree_on_random_programs(case):
    text, _, seeds = case
    agree = strategies_agree(text, seeds)
    assume(agree is not None)
    assert agree


@pytest.mark.parametrize("preset", ["magic", "v1", "v2"])
@RANDOM
@given(case=programs_with_query())
def test_compiled_program_preserves_answers(preset, case):
    text, query, _ = case
    agree = compiled_answers_agree(text, query, preset)
    assume(agree is not None)
    assert agree
