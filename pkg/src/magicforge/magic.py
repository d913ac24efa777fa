"""Magic templates compilation, lexical pruning and data-flow trimming."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .abstract import GROUND, abstract_closure, is_abstract_ground
from .program import AbstractQuery, Clause, Origin, Program, is_lexical
from .terms import Predicate, Term, Var, args_of, mk, new_var, predicate_of

FULL_MAGIC = "full_magic"
LEXICAL_ONLY = "lexical_only"

DEFAULT_DEPTH = 3


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class MagicProgram:
    """A compiled program plus what is needed to seed and rewrite it.

    ``magic_of`` and ``kept_positions`` are keyed by the source predicate.
    ``indexed`` maps a source predicate to its arity after indexing.
    """

    program: Program
    source: Program
    query: Predicate
    magic_of: dict
    kept_positions: dict
    mode: str = FULL_MAGIC
    indexed: dict = field(default_factory=dict)
    log: tuple = ()

    @property
    def seed_template(self) -> Optional[Predicate]:
        return self.magic_of.get(self.query)

    @property
    def magic_names(self) -> frozenset:
        return frozenset(m.name for m in self.magic_of.values())

    def is_magic(self, atom: Term) -> bool:
        return predicate_of(atom).name in self.magic_names

    def source_of(self, magic_name: str) -> Predicate:
        for src, m in self.magic_of.items():
            if m.name == magic_name:
                return src
        raise KeyError(magic_name)

    def magic_rules(self) -> list:
        return [c for c in self.program if self.is_magic(c.head)]

    def evolve(self, clauses=None, note=(), **changes) -> "MagicProgram":
        if clauses is not None:
            changes["program"] = self.program.with_clauses(clauses)
        return replace(self, log=self.log + tuple(note), **changes)


def _magic_name(name: str, taken: set) -> str:
    candidate = "magic_" + name
    n = 1
    while candidate in taken:
        n += 1
        candidate = f"magic_{name}_{n}"
    taken.add(candidate)
    return candidate


def _magic_atom(name: str, atom: Term) -> Term:
    return mk(name, *args_of(atom))


def magic_transform(p: Program, query: Predicate, mode: str = FULL_MAGIC) -> MagicProgram:
    """Modified rules keep their source ids; magic rules follow, grouped by
    head predicate in order of first appearance. No seed is emitted."""
    if mode not in (FULL_MAGIC, LEXICAL_ONLY):
        raise CompileError(f"unknown compile mode {mode!r}")
    if not p.defining(query):
        raise CompileError(f"query predicate {query} is not defined")

    taken = {pred.name for pred in p.predicates()}
    magic_of = {}
    for pred in p.predicates():
        magic_of[pred] = Predicate(_magic_name(pred.name, taken), pred.arity)

    def guarded(c: Clause) -> bool:
        if mode == FULL_MAGIC:
            return True
        return c.is_unit and is_lexical(p, c.predicate)

    modified = []
    groups: dict = {}
    for c in p:
        guard = _magic_atom(magic_of[c.predicate].name, c.head)
        body = (guard, *c.body) if guarded(c) else c.body
        modified.append(Clause(c.id, c.head, body, Origin(c.id, "modified")))
        for k, literal in enumerate(c.body, 1):
            head = _magic_atom(magic_of[predicate_of(literal)].name, literal)
            rule = (head, (guard, *c.body[: k - 1]), Origin(c.id, "magic", k))
            groups.setdefault(predicate_of(head), []).append(rule)

    clauses = list(modified)
    next_id = p.next_id()
    for rules in groups.values():
        for head, body, origin in rules:
            clauses.append(Clause(next_id, head, body, origin))
            next_id += 1

    kept = {pred: tuple(range(pred.arity)) for pred in magic_of}
    note = (f"magic: {len(modified)} modified rules, {next_id - p.next_id()} magic rules ({mode})",)
    return MagicProgram(p.with_clauses(clauses), p, query, magic_of, kept, mode, {}, note)


def lexical_only_transform(p: Program, query: Predicate) -> MagicProgram:
    return magic_transform(p, query, LEXICAL_ONLY)


def make_seed(mp: MagicProgram, query: Term) -> Optional[Term]:
    """Seed fact for a concrete query, projected to the kept positions.

    Returns None when the query predicate has no magic predicate left.
    """
    if predicate_of(query) != mp.query:
        raise CompileError(f"query {predicate_of(query)} does not match compiled {mp.query}")
    template = mp.seed_template
    if template is None:
        return None
    args = args_of(query)
    return mk(template.name, *(args[i] for i in mp.kept_positions[mp.query]))


def prune_lexical_magic(mp: MagicProgram) -> MagicProgram:
    """Drop magic rules and guards belonging to lexical predicates."""
    src = mp.source
    lexical = [pred for pred in mp.magic_of if src.defining(pred) and is_lexical(src, pred)]
    if not lexical:
        return mp
    names = {mp.magic_of[pred].name for pred in lexical}
    clauses = []
    notes = []
    for c in mp.program:
        pred = predicate_of(c.head)
        if pred.name in names:
            notes.append(f"prune_lexical: removed rule {c.id} ({pred})")
            continue
        body = tuple(b for b in c.body if predicate_of(b).name not in names)
        if len(body) != len(c.body):
            notes.append(f"prune_lexical: unguarded rule {c.id} ({pred})")
        clauses.append(replace(c, body=body))
    magic_of = {k: v for k, v in mp.magic_of.items() if k not in lexical}
    kept = {k: v for k, v in mp.kept_positions.items() if k not in lexical}
    return mp.evolve(clauses, notes, magic_of=magic_of, kept_positions=kept)


# ----------------------------------------------------------------- trimming

def abstract_seed(mp: MagicProgram, aq: AbstractQuery) -> Optional[Term]:
    """Magic atom for the query: ground marker at bound positions, fresh
    variables elsewhere, projected to the currently kept positions."""
    if aq.predicate != mp.query:
        raise CompileError(f"abstract query {aq.predicate} does not match compiled {mp.query}")
    template = mp.seed_template
    if template is None:
        return None
    args = [GROUND if a == "b" else new_var() for a in aq.adornment]
    return mk(template.name, *(args[i] for i in mp.kept_positions[mp.query]))


def binding_patterns(mp: MagicProgram, aq: AbstractQuery, depth: int = DEFAULT_DEPTH) -> dict:
    """Per magic predicate, the abstract facts reachable from the abstract seed."""
    seed = abstract_seed(mp, aq)
    if seed is None:
        return {}
    fp = abstract_closure(mp.program, [seed], depth)
    patterns = {pred: [] for pred in mp.magic_of}
    for fact in fp.facts:
        name = predicate_of(fact).name
        if name in mp.magic_names:
            patterns[mp.source_of(name)].append(args_of(fact))
    return patterns


def adorn_and_trim(
    mp: MagicProgram,
    aq: AbstractQuery,
    keep_structural: bool = False,
    depth: int = DEFAULT_DEPTH,
) -> MagicProgram:
    """Remove magic arguments that carry no filtering information.

    The whole compiled program is evaluated abstractly from the abstract
    seed. A position survives when every abstract magic fact has a ground
    term there or, with ``keep_structural``, at least a non-variable one.
    Positions bound by the seed always survive.
    """
    patterns = binding_patterns(mp, aq, depth)
    seed_kept = mp.kept_positions.get(mp.query, ())
    seed_bound = {seed_kept.index(i) for i in aq.bound_positions() if i in seed_kept}

    def useful(t: Term) -> bool:
        if is_abstract_ground(t):
            return True
        return keep_structural and not isinstance(t, Var)

    keep_local: dict = {}
    for pred, current in mp.kept_positions.items():
        facts = patterns.get(pred, [])
        local = []
        for j in range(len(current)):
            if pred == mp.query and j in seed_bound:
                local.append(j)
            elif facts and all(useful(args[j]) for args in facts):
                local.append(j)
        keep_local[pred] = tuple(local)

    by_name = {mp.magic_of[pred].name: pred for pred in mp.magic_of}

    def project(atom: Term) -> Term:
        pred = by_name.get(predicate_of(atom).name)
        if pred is None:
            return atom
        args = args_of(atom)
        return mk(predicate_of(atom).name, *(args[j] for j in keep_local[pred]))

    clauses = [replace(c, head=project(c.head), body=tuple(project(b) for b in c.body))
               for c in mp.program]
    magic_of = {pred: Predicate(m.name, len(keep_local[pred])) for pred, m in mp.magic_of.items()}
    kept = {pred: tuple(mp.kept_positions[pred][j] for j in keep_local[pred])
            for pred in mp.kept_positions}
    notes = [f"trim: {magic_of[pred]} keeps {[i + 1 for i in kept[pred]]} of {pred}"
             for pred in mp.magic_of]
    return mp.evolve(clauses, notes, magic_of=magic_of, kept_positions=kept)
