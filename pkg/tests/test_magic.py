import pytest

from conftest import GENERATION_QUERY, clause_bag, compile_fixture, load_golden, load_grammar
from magicforge.abstract import is_abstract_ground
from magicforge.magic import (
    LEXICAL_ONLY,
    CompileError,
    adorn_and_trim,
    binding_patterns,
    magic_transform,
    make_seed,
    prune_lexical_magic,
)
from magicforge.program import AbstractQuery, parse_atom, parse_program
from magicforge.terms import Predicate, Var, format_term, predicate_of

SENTENCE = Predicate("sentence", 3)
GENERATION = AbstractQuery.parse("sentence(f,f,b)")


def guards(mp):
    """Source ids of modified clauses whose first literal is magic."""
    return sorted(c.id for c in mp.program
                  if c.origin.role == "modified" and c.body and mp.is_magic(c.body[0]))


def test_raw_transform_shape(fig1):
    mp = magic_transform(fig1, SENTENCE)
    modified = [c for c in mp.program if c.origin.role == "modified"]
    magic = [c for c in mp.program if c.origin.role == "magic"]
    assert len(modified) == 11
    # one magic rule per body literal of the source grammar
    assert len(magic) == sum(len(c.body) for c in fig1)
    assert [c.id for c in magic] == list(range(12, 12 + len(magic)))
    assert guards(mp) == list(range(1, 12))
    heads = [predicate_of(c.head).name for c in magic]
    # grouped by head predicate
    assert heads == sorted(heads, key=heads.index)


def test_magic_rule_body_is_guard_plus_preceding_literals(fig1):
    mp = magic_transform(fig1, SENTENCE)
    (rule,) = [c for c in mp.program if c.origin.role == "magic"
               and c.origin.source == 6 and c.origin.literal == 2]
    assert format_term(rule.head).startswith("magic_n(")
    assert [predicate_of(b).name for b in rule.body] == ["magic_np", "det"]


def test_prune_removes_lexical_magic(fig1):
    mp = prune_lexical_magic(magic_transform(fig1, SENTENCE))
    assert guards(mp) == [1, 2, 3, 4, 5, 6]
    names = {predicate_of(c.head).name for c in mp.magic_rules()}
    assert names == {"magic_s", "magic_vp", "magic_np"}
    assert len(mp.magic_rules()) == 5


def test_generation_compilation_matches_golden():
    mp = compile_fixture("fig1.gr", "v1")
    assert clause_bag(mp.program) == clause_bag(load_golden("fig2.gr"))
    assert mp.magic_of[Predicate("s", 4)] == Predicate("magic_s", 2)
    assert mp.magic_of[Predicate("vp", 5)] == Predicate("magic_vp", 2)
    assert mp.magic_of[Predicate("np", 3)] == Predicate("magic_np", 1)
    assert mp.kept_positions[Predicate("vp", 5)] == (2, 4)


def test_verbatim_grammar_compiles_to_ten_plus_five_clauses():
    p = load_golden("fig1-verbatim.gr")
    mp = adorn_and_trim(prune_lexical_magic(magic_transform(p, SENTENCE)), GENERATION)
    assert len(mp.program) == 15
    assert len(mp.magic_rules()) == 5
    expected = [c for c in load_golden("fig2.gr") if "john" not in format_term(c.head)]
    assert clause_bag(mp.program) == clause_bag(expected)


def test_keep_structural_keeps_partially_instantiated_arguments():
    mp = compile_fixture("fig1.gr", "v1", keep_structural=True)
    assert mp.magic_of[Predicate("vp", 5)].arity == 3
    assert mp.kept_positions[Predicate("vp", 5)] == (2, 3, 4)


def test_binding_patterns_for_generation(fig1):
    mp = prune_lexical_magic(magic_transform(fig1, SENTENCE))
    np_facts = binding_patterns(mp, GENERATION)[Predicate("np", 3)]
    assert np_facts
    # the semantics of every np call is known, the string positions are not
    assert all(is_abstract_ground(args[2]) for args in np_facts)
    assert any(isinstance(args[0], Var) for args in np_facts)


def test_parsing_direction_keeps_string_positions():
    mp = compile_fixture("fig1-parse.gr", "v1")
    assert mp.magic_of[SENTENCE] == Predicate("magic_sentence", 2)
    assert mp.magic_of[Predicate("s", 4)] == Predicate("magic_s", 3)
    assert mp.magic_of[Predicate("np", 3)] == Predicate("magic_np", 1)
    assert mp.kept_positions[Predicate("np", 3)] == (0,)


def test_seed_is_projected_onto_kept_positions():
    mp = compile_fixture("fig1.gr", "v1")
    seed = make_seed(mp, parse_atom(GENERATION_QUERY))
    assert format_term(seed) == "magic_sentence(decl(buys(john,a(book),mary)))"
    with pytest.raises(CompileError):
        make_seed(mp, parse_atom("s(A,B,C,D)"))


def test_unpruned_seed_keeps_every_argument(fig1):
    mp = magic_transform(fig1, SENTENCE)
    seed = make_seed(mp, parse_atom(GENERATION_QUERY))
    assert predicate_of(seed) == Predicate("magic_sentence", 3)


def test_lexical_only_guards_only_lexical_entries(fig1):
    mp = magic_transform(fig1, SENTENCE, LEXICAL_ONLY)
    assert guards(mp) == [7, 8, 9, 10, 11]
    assert len(mp.magic_rules()) == sum(len(c.body) for c in fig1)


def test_query_must_be_defined(fig1):
    with pytest.raises(CompileError):
        magic_transform(fig1, Predicate("nothing", 2))


def test_unknown_compile_mode(fig1):
    with pytest.raises(CompileError):
        magic_transform(fig1, SENTENCE, "bogus")


def test_fresh_magic_names_avoid_clashes():
    p = parse_program("p(X) :- magic_p(X).\nmagic_p(a).\n")
    mp = magic_transform(p, Predicate("p", 1))
    assert mp.magic_of[Predicate("p", 1)].name not in ("p", "magic_p")


def test_abstract_query_must_match(fig1):
    mp = magic_transform(fig1, SENTENCE)
    with pytest.raises(CompileError):
        adorn_and_trim(mp, AbstractQuery.parse("np(f,f,b)"))


def test_compile_is_deterministic():
    a = compile_fixture("fig1.gr", "v2")
    b = compile_fixture("fig1.gr", "v2")
    assert [c.id for c in a.program] == [c.id for c in b.program]
    assert clause_bag(a.program) == clause_bag(b.program)
    assert a.log == b.log


def test_fixture_has_the_extra_lexical_entry():
    p = load_grammar("fig1.gr")
    assert "pn([john|P],P,john)" in [format_term(c.head) for c in p]
