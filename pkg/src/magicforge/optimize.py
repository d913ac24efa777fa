"""Filter optimizations on magic-compiled programs.

Cycle removal under off-line abstraction, indexing of overlapping magic
rules, unfolding of redundant filtering steps, and a run-time diagnostic
for grammars that break the dependency constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .abstract import AbstractFixpoint, abstract_closure, abstract_consequences
from .magic import DEFAULT_DEPTH, CompileError, MagicProgram, abstract_seed
from .program import AbstractQuery, Clause
from .terms import (
    Const,
    Predicate,
    apply,
    args_of,
    format_term,
    letter_names,
    mk,
    new_var,
    predicate_of,
    rename_apart,
    restrict,
    unify,
    variant,
    variant_key,
)

OVERLAPPING_ONLY = "overlapping_only"
ALL = "all"


def abstract_fixpoint(
    mp: MagicProgram,
    aq: AbstractQuery,
    d: int = DEFAULT_DEPTH,
    rules: Optional[list] = None,
) -> AbstractFixpoint:
    """Magic facts reachable from the abstract seed, cut at depth ``d``.

    Non-magic body literals are taken to hold for any instance.
    """
    if d < 1:
        raise ValueError("depth bound must be at least 1")
    seed = abstract_seed(mp, aq)
    if seed is None:
        return AbstractFixpoint()
    if rules is None:
        rules = mp.magic_rules()
    return abstract_closure(rules, [seed], d, considered=mp.is_magic)


def _magic_only(mp: MagicProgram, c: Clause) -> bool:
    return bool(c.body) and all(mp.is_magic(b) for b in c.body)


def remove_cycles(mp: MagicProgram, aq: AbstractQuery, d: int = DEFAULT_DEPTH) -> MagicProgram:
    """Abstract the magic rule heads to depth ``d``, then delete redundant
    magic rules.

    Only rules whose bodies are made of magic literals are candidates. A
    candidate is redundant when everything it derives from the abstract
    fixpoint is derived again by the other magic-only rules. Rules that
    consult grammar facts may not stand in for it: their grammar premises can
    themselves depend on the candidate, which the abstraction cannot see.
    Redundancy implies that the fixpoint is unchanged without the candidate.
    """
    notes = []
    clauses = []
    for c in mp.program:
        if mp.is_magic(c.head):
            cut = restrict(c.head, d)
            if not variant(cut, c.head):
                notes.append(f"cycles: abstracted head of rule {c.id} to {format_term(cut)}")
                c = replace(c, head=cut)
        clauses.append(c)
    mp = mp.evolve(clauses, notes)

    removed = True
    while removed:
        removed = False
        rules = mp.magic_rules()
        reference = abstract_fixpoint(mp, aq, d, rules).facts
        for r in rules:
            if not _magic_only(mp, r):
                continue
            derived = abstract_consequences(r, reference, d, mp.is_magic)
            others = [c for c in rules if c.id != r.id and _magic_only(mp, c)]
            if derived <= abstract_fixpoint(mp, aq, d, others).keys():
                kept = [c for c in mp.program if c.id != r.id]
                mp = mp.evolve(kept, [f"cycles: removed rule {r.id} {_clause_text(r)}"])
                removed = True
                break
    return mp


def _clause_text(c: Clause) -> str:
    names = letter_names((c.head, *c.body))
    head = format_term(c.head, names)
    if not c.body:
        return head + "."
    return head + " :- " + ", ".join(format_term(b, names) for b in c.body) + "."


# ------------------------------------------------------------------ indexing

def _overlap(heads: list) -> bool:
    for i, h1 in enumerate(heads):
        for h2 in heads[i + 1:]:
            if unify(rename_apart(h1), rename_apart(h2)) is not None:
                return True
    return False


def add_indexing(mp: MagicProgram, scope: str = OVERLAPPING_ONLY) -> MagicProgram:
    """Couple magic rules with the call sites that instigated them.

    Each defining rule of an indexed magic predicate gets its own index
    constant as an extra last argument, the instigating call site gets the
    same constant, and the rules of the called predicate pass the index of
    their guard up through their head.
    """
    if scope not in (OVERLAPPING_ONLY, ALL):
        raise ValueError(f"unknown indexing scope {scope!r}")
    seed_name = mp.seed_template.name if mp.seed_template else None
    groups: dict = {}
    for c in mp.magic_rules():
        groups.setdefault(predicate_of(c.head).name, []).append(c)

    chosen = []
    for name, rules in groups.items():
        if name == seed_name:
            continue
        if scope == ALL or (len(rules) >= 2 and _overlap([c.head for c in rules])):
            chosen.append(name)
    if not chosen:
        return mp

    tags: dict = {}      # magic rule id -> index constant
    callsite: dict = {}  # (source rule id, literal number) -> index constant
    notes = []
    counter = 0
    for c in mp.program:
        if predicate_of(c.head).name in chosen:
            o = c.origin
            if o is None or o.role != "magic" or o.literal is None or o.unfolded:
                raise CompileError(f"rule {c.id} lacks the provenance needed for indexing")
            counter += 1
            tag = Const(f"index_{counter}")
            tags[c.id] = tag
            callsite[(o.source, o.literal)] = tag
            notes.append(f"index: rule {c.id} {predicate_of(c.head).name} -> {tag.name} "
                         f"(call site: rule {o.source} literal {o.literal})")

    magic_names = set(chosen)
    plain_names = {mp.source_of(n).name for n in chosen}

    def extend(atom, extra):
        return mk(predicate_of(atom).name, *args_of(atom), extra)

    clauses = []
    for c in mp.program:
        if c.origin is not None and c.origin.unfolded:
            raise CompileError(f"rule {c.id} was unfolded; index before unfolding")
        head_name = predicate_of(c.head).name
        guarded = bool(c.body) and mp.is_magic(c.body[0]) and not mp.is_magic(c.head)
        index_var = new_var("INDEX")
        head = c.head
        if head_name in magic_names:
            head = extend(head, tags[c.id])
        elif head_name in plain_names:
            head = extend(head, index_var if guarded else new_var())
        body = []
        for j, lit in enumerate(c.body):
            name = predicate_of(lit).name
            if name in magic_names:
                lit = extend(lit, index_var if (j == 0 and guarded and head_name in plain_names)
                             else new_var("INDEX"))
            elif name in plain_names:
                lit = extend(lit, _callsite_tag(mp, c, j, callsite))
            body.append(lit)
        clauses.append(replace(c, head=head, body=tuple(body)))

    magic_of = dict(mp.magic_of)
    indexed = dict(mp.indexed)
    for name in chosen:
        src = mp.source_of(name)
        magic_of[src] = Predicate(name, magic_of[src].arity + 1)
        indexed[src] = src.arity + 1
    return mp.evolve(clauses, notes, magic_of=magic_of, indexed=indexed)


def _callsite_tag(mp: MagicProgram, c: Clause, j: int, callsite: dict):
    """Index for body position ``j``; a fresh variable when no surviving
    magic rule was built for this call site."""
    o = c.origin
    if o is None:
        return new_var("INDEX")
    if o.role == "magic":
        k = j  # position 0 holds the copy of the instigating guard
    else:
        guarded = bool(c.body) and mp.is_magic(c.body[0])
        k = j if guarded else j + 1
    return callsite.get((o.source, k)) or new_var("INDEX")


# ----------------------------------------------------------------- unfolding

def _unfoldable(mp: MagicProgram) -> Optional[Clause]:
    seed_name = mp.seed_template.name if mp.seed_template else None
    groups: dict = {}
    for c in mp.magic_rules():
        groups.setdefault(predicate_of(c.head).name, []).append(c)
    for name, rules in groups.items():
        if name == seed_name or len(rules) != 1:
            continue
        (c,) = rules
        if _magic_only(mp, c) and all(predicate_of(b).name != name for b in c.body):
            return c
    return None


def unfold_magic(mp: MagicProgram) -> MagicProgram:
    """Collapse magic predicates defined by a single magic-only clause."""
    while True:
        d = _unfoldable(mp)
        if d is None:
            return mp
        name = predicate_of(d.head).name
        notes = []
        clauses = []
        for c in mp.program:
            if c.id == d.id:
                continue
            touched = False
            while c is not None and any(predicate_of(b).name == name for b in c.body):
                c = _unfold_once(c, d, name)
                touched = True
            if c is None:
                notes.append(f"unfold: deleted a rule whose {name} literal cannot match rule {d.id}")
                continue
            if touched:
                notes.append(f"unfold: rule {d.id} ({name}) into rule {c.id}")
            clauses.append(c)
        notes.append(f"unfold: removed rule {d.id} {_clause_text(d)}")
        mp = mp.evolve(clauses, notes)


def _unfold_once(c: Clause, d: Clause, name: str) -> Optional[Clause]:
    i = next(k for k, b in enumerate(c.body) if predicate_of(b).name == name)
    fresh = rename_apart(d)
    s = unify(fresh.head, c.body[i])
    if s is None:
        return None
    body = c.body[:i] + fresh.body + c.body[i + 1:]
    origin = c.origin
    if origin is not None:
        origin = replace(origin, unfolded=origin.unfolded + (d.id,))
    return Clause(c.id, apply(s, c.head), tuple(apply(s, b) for b in body), origin)


# --------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class DuplicateGroup:
    predicate: Predicate
    term: object
    facts: tuple  # ((fact id, rule id, premise ids), ...)

    def __str__(self):
        derivations = "; ".join(
            f"{fid} <- rule:{rule} premises:[{','.join(map(str, prem))}]"
            for fid, rule, prem in self.facts
        )
        term = format_term(self.term, letter_names([self.term]))
        return f"{self.predicate} {term}: {derivations}"


@dataclass(frozen=True)
class DependencyReport:
    groups: tuple = ()

    def __bool__(self):
        return bool(self.groups)

    def by_predicate(self) -> dict:
        out: dict = {}
        for g in self.groups:
            out.setdefault(g.predicate, []).append(g)
        return out

    def format(self) -> str:
        if not self.groups:
            return "no duplicate derivations\n"
        return "".join(f"duplicate {g}\n" for g in self.groups)


def analyze_duplicates(chart) -> DependencyReport:
    """Variant facts stored more than once, each with its derivation."""
    seen: dict = {}
    for f in chart.facts():
        seen.setdefault(variant_key(f.term), []).append(f)
    groups = []
    for facts in seen.values():
        if len(facts) < 2:
            continue
        derivations = tuple((f.id, f.rule, f.premises) for f in facts)
        groups.append(DuplicateGroup(predicate_of(facts[0].term), facts[0].term, derivations))
    groups.sort(key=lambda g: (g.predicate.name, g.predicate.arity, g.facts[0][0]))
    return DependencyReport(tuple(groups))
