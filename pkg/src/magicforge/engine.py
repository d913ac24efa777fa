"""Bottom-up evaluation: naive, semi-naive and not-so-naive.

Only derived atoms are stored; joins inside a rule body are recomputed
every round. Fact numbering is deterministic: rules in clause order, then
delta position, then premises in fact-id order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .program import Program
from .terms import (
    CyclicTerm,
    Term,
    apply,
    apply_checked,
    format_term,
    is_ground,
    letter_names,
    match,
    predicate_of,
    rename_apart,
    unify,
    unify_into,
    variant_key,
)

NAIVE = "naive"
SEMI_NAIVE = "semi_naive"
NOT_SO_NAIVE = "not_so_naive"
STRATEGIES = (NAIVE, SEMI_NAIVE, NOT_SO_NAIVE)


@dataclass(frozen=True)
class EvalConfig:
    strategy: str = SEMI_NAIVE
    subsumption: bool = True
    occurs_check: bool = True
    max_iterations: int = 1000
    max_facts: int = 100_000
    # unification attempts across all joins; None means unbounded
    max_joins: Optional[int] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == NOT_SO_NAIVE and self.subsumption:
            object.__setattr__(self, "subsumption", False)


class ResourceExceeded(RuntimeError):
    """Evaluation hit a cap; ``chart`` holds what was derived so far."""

    def __init__(self, chart: "Chart", reason: str):
        super().__init__(reason)
        self.chart = chart
        self.reason = reason


@dataclass
class Fact:
    id: int
    term: Term
    rule: Optional[int]  # None for seeds
    premises: tuple = ()
    round: int = 0
    retracted: bool = False
    ground: bool = False

    def line(self) -> str:
        term = format_term(self.term, letter_names([self.term]))
        if self.rule is None:
            return f"{self.id}. {term} <- seed"
        prem = ",".join(map(str, self.premises))
        return f"{self.id}. {term} <- rule:{self.rule} premises:[{prem}] round:{self.round}"


@dataclass
class DerivationTree:
    fact: Fact
    children: list = field(default_factory=list)

    def format(self, indent: int = 0) -> str:
        f = self.fact
        how = "seed" if f.rule is None else f"rule {f.rule}"
        term = format_term(f.term, letter_names([f.term]))
        lines = [f"{'  ' * indent}{f.id}. {term}  [{how}]"]
        lines += [child.format(indent + 1) for child in self.children]
        return "\n".join(lines)


class Chart:
    def __init__(self):
        self._facts: list = []
        self._by_pred: dict = {}
        self._keys: dict = {}  # variant key -> count of live facts

    # -- storage
    def _store(self, term, rule, premises, rnd) -> Fact:
        ground = is_ground(term)
        if not ground:
            term = rename_apart(term)
        fact = Fact(len(self._facts) + 1, term, rule, tuple(premises), rnd, False, ground)
        self._facts.append(fact)
        self._by_pred.setdefault(predicate_of(term), []).append(fact.id)
        key = variant_key(term)
        self._keys[key] = self._keys.get(key, 0) + 1
        return fact

    def _retract(self, fact: Fact) -> None:
        fact.retracted = True
        self._keys[variant_key(fact.term)] -= 1

    def has_variant(self, term) -> bool:
        return self._keys.get(variant_key(term), 0) > 0

    def candidates(self, pred, lo: int = 1, hi: Optional[int] = None):
        ids = self._by_pred.get(pred, ())
        start = bisect.bisect_left(ids, lo)
        stop = len(ids) if hi is None else bisect.bisect_left(ids, hi)
        for i in ids[start:stop]:
            fact = self._facts[i - 1]
            if not fact.retracted:
                yield fact

    # -- queries
    def __len__(self):
        return sum(1 for f in self._facts if not f.retracted)

    def __getitem__(self, fact_id: int) -> Fact:
        if not 1 <= fact_id <= len(self._facts):
            raise KeyError(fact_id)
        return self._facts[fact_id - 1]

    def facts(self) -> list:
        return [f for f in self._facts if not f.retracted]

    def all_facts(self) -> list:
        return list(self._facts)

    def terms(self) -> list:
        return [f.term for f in self.facts()]

    @property
    def stored(self) -> int:
        return len(self._facts)

    def dump(self) -> str:
        return "".join(f.line() + "\n" for f in self.facts())

    def answers(self, query: Term) -> list:
        return answers(self, query)

    def trace(self, fact_id: int) -> DerivationTree:
        return trace(self, fact_id)


def answers(chart: Chart, query: Term) -> list:
    """Instances of ``query`` given by stored facts, without variant repeats."""
    out, seen = [], set()
    for fact in chart.candidates(predicate_of(query)):
        s = unify(query, fact.term if fact.ground else rename_apart(fact.term))
        if s is None:
            continue
        inst = apply(s, query)
        key = variant_key(inst)
        if key not in seen:
            seen.add(key)
            out.append(inst)
    return out


def trace(chart: Chart, fact_id: int) -> DerivationTree:
    fact = chart[fact_id]
    return DerivationTree(fact, [trace(chart, p) for p in fact.premises])


def replay(program: Program, chart: Chart, fact_id: int, occurs_check: bool = True) -> Term:
    """Rebuild a fact from its rule and premises, to check a derivation."""
    fact = chart[fact_id]
    if fact.rule is None:
        return fact.term
    clause = rename_apart(program.clause(fact.rule))
    s: Optional[dict] = {}
    for literal, pid in zip(clause.body, fact.premises):
        s = unify_into(literal, rename_apart(replay(program, chart, pid)), s, occurs_check)
        if s is None:
            raise ValueError(f"derivation of fact {fact_id} does not replay")
    return apply(s, clause.head)


# ------------------------------------------------------------------ evaluate

def evaluate(program: Program, seeds: Iterable[Term] = (), config: EvalConfig = EvalConfig()) -> Chart:
    seeds = list(seeds)
    known = set(program.predicates())
    for seed in seeds:
        if predicate_of(seed) not in known:
            raise ValueError(f"seed predicate {predicate_of(seed)} does not occur in the program")
    return _Evaluator(program, config).run(seeds)


class _Evaluator:
    def __init__(self, program: Program, config: EvalConfig):
        self.program = program
        self.cfg = config
        self.chart = Chart()
        self.rules = [c for c in program if c.body]
        self.joins = 0

    def admit(self, term, rule, premises, rnd) -> bool:
        chart, cfg = self.chart, self.cfg
        if cfg.strategy == NOT_SO_NAIVE:
            pass
        elif cfg.subsumption:
            if chart.has_variant(term):
                return False
            pred = predicate_of(term)
            if any(match(f.term, term) is not None for f in chart.candidates(pred)):
                return False
            for f in list(chart.candidates(pred)):
                if match(term, f.term) is not None:
                    chart._retract(f)
        elif chart.has_variant(term):
            return False
        chart._store(term, rule, premises, rnd)
        if chart.stored > cfg.max_facts:
            raise ResourceExceeded(chart, f"more than {cfg.max_facts} facts")
        return True

    def run(self, seeds) -> Chart:
        for seed in seeds:
            self.admit(seed, None, (), 0)
        for c in self.program:
            if not c.body:
                self.admit(c.head, c.id, (), 0)
        lo, hi = 1, self.chart.stored + 1  # ids of the previous round
        rnd = 0
        while True:
            rnd += 1
            if rnd > self.cfg.max_iterations:
                raise ResourceExceeded(self.chart, f"more than {self.cfg.max_iterations} iterations")
            added = False
            for c in self.rules:
                for term, premises in self.derive(c, lo, hi):
                    if self.admit(term, c.id, premises, rnd):
                        added = True
            if not added:
                return self.chart
            lo, hi = hi, self.chart.stored + 1

    def derive(self, clause, lo, hi):
        """Head instances for this round, in deterministic order."""
        body = clause.body
        if self.cfg.strategy == NAIVE:
            plans = [[(1, hi)] * len(body)]
        else:
            # literal i reads the delta, earlier ones old facts, later ones all
            plans = [[(1, lo)] * i + [(lo, hi)] + [(1, hi)] * (len(body) - i - 1)
                     for i in range(len(body))]
        # Facts admitted during this round have ids >= hi and stay invisible.
        for plan in plans:
            for s, premises in self.join(body, plan, 0, {}, ()):
                if self.cfg.occurs_check:
                    yield apply(s, clause.head), premises
                    continue
                try:
                    yield apply_checked(s, clause.head), premises
                except CyclicTerm:
                    pass  # no finite fact to store

    def join(self, body, plan, i, s, premises):
        if i == len(body):
            yield s, premises
            return
        literal = body[i]
        lo, hi = plan[i]
        cap = self.cfg.max_joins
        for fact in self.chart.candidates(predicate_of(literal), lo, hi):
            self.joins += 1
            if cap is not None and self.joins > cap:
                raise ResourceExceeded(self.chart, f"more than {cap} join steps")
            term = fact.term if fact.ground else rename_apart(fact.term)
            s2 = unify_into(literal, term, s, self.cfg.occurs_check)
            if s2 is not None:
                yield from self.join(body, plan, i + 1, s2, premises + (fact.id,))
