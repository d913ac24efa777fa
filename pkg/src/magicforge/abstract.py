"""Off-line abstract evaluation over depth-restricted atoms.

The domain is ordinary terms plus one marker constant standing for "some
ground term". The marker unifies with any term by grounding all of that
term's variables, which is what lets the trimming analysis learn which
magic arguments will carry ground bindings at run time.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from operator import itemgetter
from typing import Callable, Iterable, Optional

from .terms import (
    Const,
    Struct,
    Term,
    Var,
    apply,
    predicate_of,
    rename_apart,
    restrict,
    variant_key,
    walk,
)

GROUND = Const("$ground")

# Guards against a pathological signature blowing up the analysis.
MAX_ABSTRACT_FACTS = 50_000
MAX_ABSTRACT_JOINS = 1_000_000


class AnalysisLimit(RuntimeError):
    pass


def abstract_unify(a: Term, b: Term, s: dict) -> Optional[dict]:
    s = dict(s)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, s)
        y = walk(y, s)
        if x == y:
            continue
        if y == GROUND:
            x, y = y, x
        if x == GROUND:
            if isinstance(y, Var):
                s[y] = GROUND
            elif isinstance(y, Struct):
                stack.extend((GROUND, arg) for arg in y.args)
            continue
        if isinstance(y, Var) and not isinstance(x, Var):
            x, y = y, x
        if isinstance(x, Var):
            if _occurs(x, y, s):
                return None
            s[x] = y
        elif isinstance(x, Struct) and isinstance(y, Struct):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
        else:
            return None
    return s


def _occurs(v: Var, t: Term, s: dict) -> bool:
    t = walk(t, s)
    if t == v:
        return True
    return isinstance(t, Struct) and any(_occurs(v, a, s) for a in t.args)


def is_abstract_ground(t: Term) -> bool:
    """No variables; the marker counts as ground."""
    if isinstance(t, Var):
        return False
    if isinstance(t, Struct):
        return all(is_abstract_ground(a) for a in t.args)
    return True


@dataclass
class AbstractFixpoint:
    facts: list = field(default_factory=list)

    def keys(self) -> frozenset:
        return frozenset(variant_key(f) for f in self.facts)

    def of(self, pred) -> list:
        return [f for f in self.facts if predicate_of(f) == pred]


def abstract_closure(
    clauses: Iterable,
    seeds: Iterable[Term],
    depth: int,
    considered: Callable[[Term], bool] = lambda atom: True,
) -> AbstractFixpoint:
    """Least set of restricted atoms closed under ``clauses``.

    Body literals for which ``considered`` is false are assumed satisfiable
    by any instance and place no constraint on the derivation.
    """
    clauses = list(clauses)
    fp = AbstractFixpoint()
    seen: set = set()
    by_pred: dict = {}

    def add(atom: Term, cut: bool = True) -> bool:
        if cut:
            atom = restrict(atom, depth, ground=GROUND)
        key = variant_key(atom)
        if key in seen:
            return False
        if len(seen) >= MAX_ABSTRACT_FACTS:
            raise AnalysisLimit("abstract fixpoint exceeded its size limit")
        seen.add(key)
        fp.facts.append(atom)
        by_pred.setdefault(predicate_of(atom), []).append((len(fp.facts) - 1, atom))
        return True

    for seed in seeds:
        add(seed)
    # Unit clauses are finite already; cutting them would only lose sharing.
    for c in clauses:
        if c.is_unit:
            add(c.head, cut=False)

    # Semi-naive: each pass only tries joins that use a fact from the last one.
    rules = [(c, [b for b in c.body if considered(b)]) for c in clauses if not c.is_unit]
    budget = [MAX_ABSTRACT_JOINS]
    lo, hi = 0, len(fp.facts)
    while lo < hi:
        for c, body in rules:
            heads = [c.head] if not body and lo == 0 else []
            for i in range(len(body)):
                bounds = [(0, lo)] * i + [(lo, hi)] + [(0, hi)] * (len(body) - i - 1)
                heads.extend(apply(s, c.head) for s in _joins(body, 0, {}, by_pred, bounds, budget))
            for head in heads:
                add(head)
        lo, hi = hi, len(fp.facts)
    return fp


def abstract_consequences(
    clause,
    facts: Iterable[Term],
    depth: int,
    considered: Callable[[Term], bool] = lambda atom: True,
) -> frozenset:
    """Variant keys of what one application of ``clause`` derives from
    ``facts``, leaving out conclusions that restate one of their premises."""
    by_pred: dict = {}
    n = 0
    for n, fact in enumerate(facts, 1):
        by_pred.setdefault(predicate_of(fact), []).append((n - 1, fact))
    body = [b for b in clause.body if considered(b)]
    out = set()
    for s in _joins(body, 0, {}, by_pred, [(0, n)] * len(body), [MAX_ABSTRACT_JOINS]):
        key = variant_key(restrict(apply(s, clause.head), depth, ground=GROUND))
        if all(key != variant_key(restrict(apply(s, b), depth, ground=GROUND)) for b in body):
            out.add(key)
    return frozenset(out)


def _joins(body, i, s, by_pred, bounds, budget):
    if i == len(body):
        yield s
        return
    literal = body[i]
    start, stop = bounds[i]
    entries = by_pred.get(predicate_of(literal), ())
    for k in range(bisect_left(entries, start, key=itemgetter(0)), len(entries)):
        idx, fact = entries[k]
        if idx >= stop:
            break
        budget[0] -= 1
        if budget[0] < 0:
            raise AnalysisLimit("abstract fixpoint exceeded its join budget")
        s2 = abstract_unify(literal, rename_apart(fact), s)
        if s2 is not None:
            yield from _joins(body, i + 1, s2, by_pred, bounds, budget)
