"""First-order terms: unification, matching, variants, renaming, restriction.

Terms are immutable. Variables are identified by an integer id; the name is
only a printing hint. Lists are ``'.'/2`` cells ending in the ``[]`` constant.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Union

_fresh_ids = itertools.count(1)


def fresh_id() -> int:
    return next(_fresh_ids)


@dataclass(frozen=True, slots=True)
class Var:
    id: int
    name: str = "_"

    def __eq__(self, other):
        return isinstance(other, Var) and other.id == self.id

    def __hash__(self):
        return hash(("var", self.id))

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True, slots=True)
class Struct:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("compound terms need at least one argument")

    def __str__(self):
        return format_term(self)


Term = Union[Var, Const, Struct]
Subst = dict  # Var -> Term

NIL = Const("[]")
CONS = "."


class Predicate(NamedTuple):
    name: str
    arity: int

    def __str__(self):
        return f"{self.name}/{self.arity}"


def new_var(name: str = "_") -> Var:
    return Var(fresh_id(), name)


def mk(functor: str, *args: Term) -> Term:
    """Atom or compound; zero arguments give a constant."""
    return Struct(functor, tuple(args)) if args else Const(functor)


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    result = tail
    for item in reversed(list(items)):
        result = Struct(CONS, (item, result))
    return result


def args_of(t: Term) -> tuple:
    return t.args if isinstance(t, Struct) else ()


def predicate_of(atom: Term) -> Predicate:
    if isinstance(atom, Struct):
        return Predicate(atom.functor, len(atom.args))
    if isinstance(atom, Const):
        return Predicate(atom.name, 0)
    raise TypeError(f"variable {atom} is not an atom")


def with_args(atom: Term, args) -> Term:
    """Rebuild ``atom`` under the same name with new arguments."""
    return mk(predicate_of(atom).name, *args)


# ---------------------------------------------------------------- traversal

def iter_vars(t: Term) -> Iterator[Var]:
    """Variables in left-to-right order, with repeats."""
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Struct):
            stack.extend(reversed(t.args))


def term_vars(t: Term) -> list:
    """Distinct variables in first-occurrence order."""
    return list(dict.fromkeys(iter_vars(t)))


def is_ground(t: Term) -> bool:
    return next(iter_vars(t), None) is None


def depth(t: Term) -> int:
    if isinstance(t, Struct):
        return 1 + max(depth(a) for a in t.args)
    return 0


# ------------------------------------------------------------- substitution

def walk(t: Term, s: Subst) -> Term:
    while isinstance(t, Var):
        bound = s.get(t)
        if bound is None:
            return t
        t = bound
    return t


def apply(s: Subst, t: Term) -> Term:
    """Apply a (possibly triangular) substitution all the way down."""
    if not s:
        return t
    if isinstance(t, Var):
        bound = walk(t, s)
        return bound if bound is t else apply(s, bound)
    if isinstance(t, Struct):
        args = tuple(apply(s, a) for a in t.args)
        return t if args == t.args else Struct(t.functor, args)
    return t


class CyclicTerm(ValueError):
    """A substitution built without the occurs check binds a variable to a
    term containing it; no finite term is its result."""


def apply_checked(s: Subst, t: Term, _active: frozenset = frozenset()) -> Term:
    """Like :func:`apply`, but raises :class:`CyclicTerm` on cyclic bindings."""
    if isinstance(t, Var):
        bound = walk(t, s)
        if bound is t or isinstance(bound, Var):
            return bound
        if t in _active:
            raise CyclicTerm(f"variable {t} occurs in its own binding")
        return apply_checked(s, bound, _active | {t})
    if isinstance(t, Struct):
        return Struct(t.functor, tuple(apply_checked(s, a, _active) for a in t.args))
    return t


def _occurs(v: Var, t: Term, s: Subst) -> bool:
    stack = [t]
    while stack:
        t = walk(stack.pop(), s)
        if t == v:
            return True
        if isinstance(t, Struct):
            stack.extend(t.args)
    return False


def unify_into(a: Term, b: Term, s: Subst, occurs_check: bool = True) -> Optional[Subst]:
    """Extend triangular substitution ``s`` (not mutated) to unify a and b.

    When both sides are unbound variables the left one is bound to the right.
    """
    s = dict(s)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, s)
        y = walk(y, s)
        if x is y or x == y and not isinstance(x, Struct):
            continue
        if isinstance(x, Var):
            if occurs_check and _occurs(x, y, s):
                return None
            s[x] = y
        elif isinstance(y, Var):
            if occurs_check and _occurs(y, x, s):
                return None
            s[y] = x
        elif isinstance(x, Struct) and isinstance(y, Struct):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return None
            stack.extend(zip(reversed(x.args), reversed(y.args)))
        else:
            return None
    return s


def unify(t1: Term, t2: Term, occurs_check: bool = True) -> Optional[Subst]:
    """Most general unifier in idempotent form, or None.

    Without the occurs check a cyclic unifier is returned in triangular form.
    """
    s = unify_into(t1, t2, {}, occurs_check)
    if s is None:
        return None
    if occurs_check:
        return {v: apply(s, v) for v in s}
    try:
        return {v: apply_checked(s, v) for v in s}
    except CyclicTerm:
        return s


def compose(outer: Subst, inner: Subst) -> Subst:
    """Substitution equivalent to applying ``inner`` then ``outer``."""
    result = {v: apply(outer, t) for v, t in inner.items()}
    for v, t in outer.items():
        result.setdefault(v, t)
    return {v: t for v, t in result.items() if t != v}


# ----------------------------------------------------- matching and variants

def match(general: Term, specific: Term, s: Optional[Subst] = None) -> Optional[Subst]:
    """One-way matching: theta with theta(general) == specific, or None.

    Variables of ``specific`` are treated as constants.
    """
    s = {} if s is None else dict(s)
    stack = [(general, specific)]
    while stack:
        g, t = stack.pop()
        if isinstance(g, Var):
            bound = s.get(g)
            if bound is None:
                s[g] = t
            elif bound != t:
                return None
        elif isinstance(g, Const):
            if g != t:
                return None
        else:
            if not isinstance(t, Struct) or t.functor != g.functor or len(t.args) != len(g.args):
                return None
            stack.extend(zip(g.args, t.args))
    return s


def subsumes(general: Term, specific: Term) -> bool:
    return match(general, specific) is not None


def variant(t1: Term, t2: Term) -> bool:
    """Equal up to a bijective renaming of variables."""
    fwd: dict = {}
    back: dict = {}
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        if isinstance(a, Var):
            if not isinstance(b, Var):
                return False
            if fwd.setdefault(a, b) != b or back.setdefault(b, a) != a:
                return False
        elif isinstance(a, Const):
            if a != b:
                return False
        else:
            if not isinstance(b, Struct) or a.functor != b.functor or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
    return True


def variant_key(t: Term) -> str:
    """Hashable key shared exactly by variant terms."""
    return format_term(t, names=_NumberedNames())


class _NumberedNames(dict):
    def __missing__(self, v):
        name = f"_{len(self)}"
        self[v] = name
        return name


# ------------------------------------------------------------------ renaming

def rename_apart(t, counter: Optional[Iterator[int]] = None, mapping: Optional[dict] = None):
    """Copy of a term or clause with every variable replaced by a fresh one.

    Pass ``mapping`` to share the renaming across several terms.
    """
    ids = counter if counter is not None else _fresh_ids
    mapping = {} if mapping is None else mapping

    def fresh(v: Var) -> Var:
        new = mapping.get(v)
        if new is None:
            new = mapping[v] = Var(next(ids), v.name)
        return new

    if hasattr(t, "rename"):
        return t.rename(lambda term: _rename(term, fresh))
    return _rename(t, fresh)


def _rename(t: Term, fresh) -> Term:
    if isinstance(t, Var):
        return fresh(t)
    if isinstance(t, Struct):
        return Struct(t.functor, tuple(_rename(a, fresh) for a in t.args))
    return t


# --------------------------------------------------------------- restriction

def restrict(t: Term, d: int, ground: Optional[Term] = None) -> Term:
    """Cut every non-variable subterm at depth >= d (root depth 0).

    Cut subterms become fresh variables. When ``ground`` is given, ground cut
    subterms become that marker instead, so groundness survives the cut.
    Variables are left in place, which keeps sharing intact.
    """
    if d < 1:
        raise ValueError("depth bound must be at least 1")

    def go(t: Term, level: int) -> Term:
        if isinstance(t, Var):
            return t
        if level >= d:
            if ground is not None and is_ground(t):
                return ground
            return new_var()
        if isinstance(t, Struct):
            return Struct(t.functor, tuple(go(a, level + 1) for a in t.args))
        return t

    return go(t, 0)


# ------------------------------------------------------------------ printing

_PLAIN_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z|-?[0-9]+\Z|\[\]\Z")


def _atom_text(name: str) -> str:
    if _PLAIN_ATOM.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_term(t: Term, names=None) -> str:
    """Render with list sugar. ``names`` maps Var -> printed name."""
    out: list = []
    _fmt(t, names, out)
    return "".join(out)


def _var_text(v: Var, names) -> str:
    if names is not None:
        return names[v]
    return v.name if v.name != "_" else f"_G{v.id}"


def _fmt(t: Term, names, out: list) -> None:
    if isinstance(t, Var):
        out.append(_var_text(t, names))
    elif isinstance(t, Const):
        out.append(_atom_text(t.name))
    elif t.functor == CONS and len(t.args) == 2:
        out.append("[")
        _fmt(t.args[0], names, out)
        rest = t.args[1]
        while isinstance(rest, Struct) and rest.functor == CONS and len(rest.args) == 2:
            out.append(",")
            _fmt(rest.args[0], names, out)
            rest = rest.args[1]
        if rest != NIL:
            out.append("|")
            _fmt(rest, names, out)
        out.append("]")
    else:
        out.append(_atom_text(t.functor))
        out.append("(")
        for i, a in enumerate(t.args):
            if i:
                out.append(",")
            _fmt(a, names, out)
        out.append(")")


def letter_names(terms: Iterable[Term]) -> dict:
    """A, B, ..., Z, A1, ... in first-occurrence order across ``terms``."""
    names: dict = {}
    for t in terms:
        for v in iter_vars(t):
            if v not in names:
                n = len(names)
                letter = chr(ord("A") + n % 26)
                names[v] = letter if n < 26 else f"{letter}{n // 26}"
    return names
