"""Definite-clause programs: representation, parsing and printing.

Concrete syntax::

    % comment
    :- mode sentence(f,f,b).
    sentence(P0,P,decl(S)) :- s(P0,P,finite,S).
    pn([mary|P],P,mary).
    ?- sentence(P0,[],S).

A ``%@`` comment directly before a clause carries its id and provenance, so
that compiled programs survive a print/parse round trip.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Optional

from .terms import (
    NIL,
    Const,
    Predicate,
    Struct,
    Term,
    Var,
    iter_vars,
    make_list,
    mk,
    new_var,
    predicate_of,
    format_term,
)

BOUND, FREE = "b", "f"


@dataclass(frozen=True)
class Origin:
    """Where a compiled clause came from.

    ``role`` is ``modified`` or ``magic``; ``literal`` is the 1-based body
    position of the source literal a magic rule was built for.
    """

    source: int
    role: str
    literal: Optional[int] = None
    unfolded: tuple = ()


@dataclass(frozen=True)
class Clause:
    id: int
    head: Term
    body: tuple = ()
    origin: Optional[Origin] = None

    @property
    def is_unit(self) -> bool:
        return not self.body

    @property
    def predicate(self) -> Predicate:
        return predicate_of(self.head)

    def rename(self, f: Callable[[Term], Term]) -> "Clause":
        return replace(self, head=f(self.head), body=tuple(f(b) for b in self.body))

    def as_term(self) -> Term:
        """Single term standing for the clause, for variant comparison."""
        return Struct(":-", (self.head, make_list(self.body)))

    def __str__(self):
        return format_clause(self)


@dataclass(frozen=True)
class AbstractQuery:
    predicate: Predicate
    adornment: tuple

    def __post_init__(self):
        if len(self.adornment) != self.predicate.arity:
            raise ValueError(f"adornment length does not match {self.predicate}")
        if any(a not in (BOUND, FREE) for a in self.adornment):
            raise ValueError("adornment markers must be 'b' or 'f'")

    def bound_positions(self) -> tuple:
        return tuple(i for i, a in enumerate(self.adornment) if a == BOUND)

    @classmethod
    def parse(cls, text: str) -> "AbstractQuery":
        """``sentence(f,f,b)`` -> AbstractQuery."""
        atom = parse_term(text)
        args = atom.args if isinstance(atom, Struct) else ()
        marks = []
        for a in args:
            if not isinstance(a, Const) or a.name not in (BOUND, FREE):
                raise ParseError(f"bad adornment {format_term(a)!r}", 1, 1)
            marks.append(a.name)
        return cls(predicate_of(atom), tuple(marks))

    def __str__(self):
        return f"{self.predicate.name}({','.join(self.adornment)})"


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    modes: tuple = ()
    queries: tuple = ()

    @cached_property
    def by_predicate(self) -> dict:
        index: dict = {}
        for c in self.clauses:
            index.setdefault(c.predicate, []).append(c.id)
        return index

    @cached_property
    def _by_id(self) -> dict:
        return {c.id: c for c in self.clauses}

    def clause(self, cid: int) -> Clause:
        return self._by_id[cid]

    def defining(self, pred: Predicate) -> list:
        return [self._by_id[i] for i in self.by_predicate.get(pred, ())]

    def predicates(self) -> list:
        """Every predicate in heads or bodies, first-occurrence order."""
        seen: dict = {}
        for c in self.clauses:
            seen.setdefault(c.predicate, None)
            for b in c.body:
                seen.setdefault(predicate_of(b), None)
        return list(seen)

    def mode_for(self, pred: Predicate) -> Optional[AbstractQuery]:
        for m in self.modes:
            if m.predicate == pred:
                return m
        return None

    def with_clauses(self, clauses) -> "Program":
        return Program(tuple(clauses), self.modes, self.queries)

    def next_id(self) -> int:
        return max((c.id for c in self.clauses), default=0) + 1

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)


def is_lexical(program: Program, pred: Predicate) -> bool:
    """True iff every clause defining ``pred`` is a unit clause."""
    clauses = program.defining(pred)
    if not clauses:
        raise KeyError(f"predicate {pred} has no defining clauses")
    return all(c.is_unit for c in clauses)


# ------------------------------------------------------------------ parsing

class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<annot>%@[^\n]*)
  | (?P<comment>%[^\n]*)
  | (?P<neck>:-)
  | (?P<query>\?-)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<num>-?[0-9]+)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<nil>\[\])
  | (?P<punct>[()\[\],|.])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Tok("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.varmap: dict = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message: str):
        raise ParseError(message, self.tok.line, self.tok.col)

    def take(self, text: Optional[str] = None, kind: Optional[str] = None) -> _Tok:
        tok = self.tok
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = text if text is not None else kind
            self.fail(f"expected {want!r}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "neck", "query") and self.tok.text == text

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.i += 1
            if tok.text == "_":
                return new_var("_")
            v = self.varmap.get(tok.text)
            if v is None:
                v = self.varmap[tok.text] = new_var(tok.text)
            return v
        if tok.kind == "nil":
            self.i += 1
            return NIL
        if tok.kind == "num":
            self.i += 1
            return Const(tok.text)
        if tok.kind in ("atom", "quoted"):
            self.i += 1
            name = tok.text
            if tok.kind == "quoted":
                name = re.sub(r"\\(.)", r"\1", name[1:-1])
            if self.at("("):
                self.i += 1
                args = [self.term()]
                while self.at(","):
                    self.i += 1
                    args.append(self.term())
                self.take(")")
                return Struct(name, tuple(args))
            return Const(name)
        if self.at("["):
            self.i += 1
            items = [self.term()]
            while self.at(","):
                self.i += 1
                items.append(self.term())
            tail = NIL
            if self.at("|"):
                self.i += 1
                tail = self.term()
            self.take("]")
            return make_list(items, tail)
        self.fail(f"unexpected {tok.text or 'end of input'!r}")

    def atom(self) -> Term:
        tok = self.tok
        t = self.term()
        if isinstance(t, Var):
            raise ParseError("a variable cannot be used as an atom", tok.line, tok.col)
        return t

    def program(self) -> Program:
        clauses, modes, queries = [], [], []
        pending: Optional[dict] = None
        while self.tok.kind != "eof":
            self.varmap = {}
            if self.tok.kind == "annot":
                pending = _parse_annotation(self.tok)
                self.i += 1
                continue
            if self.at(":-"):
                self.i += 1
                name = self.take(kind="atom")
                if name.text != "mode":
                    raise ParseError(f"unknown directive {name.text!r}", name.line, name.col)
                mode_atom = self.atom()
                self.take(".")
                modes.append(_mode_from_term(mode_atom, name))
                continue
            if self.at("?-"):
                self.i += 1
                queries.append(self.atom())
                self.take(".")
                continue
            head = self.atom()
            body = []
            if self.at(":-"):
                self.i += 1
                body.append(self.atom())
                while self.at(","):
                    self.i += 1
                    body.append(self.atom())
            self.take(".")
            cid = len(clauses) + 1
            origin = None
            if pending is not None:
                cid = pending.pop("id", cid)
                if pending:
                    origin = Origin(**pending)
                pending = None
            clauses.append(Clause(cid, head, tuple(body), origin))
        _warn_arity(clauses)
        return Program(tuple(clauses), tuple(modes), tuple(queries))


def _mode_from_term(mode_atom: Term, tok: _Tok) -> AbstractQuery:
    marks = []
    for a in mode_atom.args if isinstance(mode_atom, Struct) else ():
        if not isinstance(a, Const) or a.name not in (BOUND, FREE):
            raise ParseError("mode arguments must be b or f", tok.line, tok.col)
        marks.append(a.name)
    return AbstractQuery(predicate_of(mode_atom), tuple(marks))


def _parse_annotation(tok: _Tok) -> dict:
    fields: dict = {}
    for item in tok.text[2:].split():
        key, _, value = item.partition("=")
        try:
            if key in ("id", "src", "lit"):
                fields[{"src": "source", "lit": "literal"}.get(key, key)] = int(value)
            elif key == "role":
                fields["role"] = value
            elif key == "unfolded":
                fields["unfolded"] = tuple(int(x) for x in value.split(",") if x)
            else:
                raise ValueError(key)
        except ValueError:
            raise ParseError(f"bad annotation field {item!r}", tok.line, tok.col) from None
    if ("source" in fields) != ("role" in fields):
        raise ParseError("annotation needs both src and role", tok.line, tok.col)
    return fields


def _warn_arity(clauses) -> None:
    arities: dict = {}
    for c in clauses:
        for atom in (c.head, *c.body):
            p = predicate_of(atom)
            arities.setdefault(p.name, set()).add(p.arity)
    for name, found in arities.items():
        if len(found) > 1:
            warnings.warn(f"{name} used with arities {sorted(found)}", stacklevel=3)


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_term(text: str) -> Term:
    """Parse one term; a trailing period is optional. Variables are fresh."""
    p = _Parser(text)
    t = p.term()
    if p.at("."):
        p.i += 1
    if p.tok.kind != "eof":
        p.fail(f"trailing input {p.tok.text!r}")
    return t


def parse_atom(text: str) -> Term:
    text = text.strip()
    if text.startswith("?-"):
        text = text[2:]
    t = parse_term(text)
    if isinstance(t, Var):
        raise ParseError("a variable cannot be used as an atom", 1, 1)
    return t


# ----------------------------------------------------------------- printing

def clause_names(terms) -> dict:
    """Readable, collision-free names for the variables of one clause."""
    counts: dict = {}
    order: list = []
    for t in terms:
        for v in iter_vars(t):
            if v not in counts:
                order.append(v)
            counts[v] = counts.get(v, 0) + 1
    names: dict = {}
    taken: set = set()
    for v in order:
        base = v.name
        if base == "_":
            if counts[v] == 1:
                names[v] = "_"
                continue
            base = "_G"
        name, n = base, 1
        while name in taken:
            n += 1
            name = f"{base}{n}"
        taken.add(name)
        names[v] = name
    return names


def format_clause(c: Clause, indent: str = "    ") -> str:
    names = clause_names((c.head, *c.body))
    head = format_term(c.head, names)
    if not c.body:
        return head + "."
    body = (",\n" + indent).join(format_term(b, names) for b in c.body)
    return f"{head} :-\n{indent}{body}."


def _annotation(c: Clause, position: int) -> Optional[str]:
    if c.origin is None and c.id == position:
        return None
    parts = [f"id={c.id}"]
    if c.origin is not None:
        o = c.origin
        parts += [f"role={o.role}", f"src={o.source}"]
        if o.literal is not None:
            parts.append(f"lit={o.literal}")
        if o.unfolded:
            parts.append("unfolded=" + ",".join(map(str, o.unfolded)))
    return "%@ " + " ".join(parts)


def print_program(p: Program, annotate: bool = True) -> str:
    lines = [f":- mode {m}." for m in p.modes]
    for pos, c in enumerate(p.clauses, 1):
        note = _annotation(c, pos) if annotate else None
        if note:
            lines.append(note)
        lines.append(format_clause(c))
    for q in p.queries:
        lines.append("?- " + format_term(q, clause_names([q])) + ".")
    return "\n".join(lines) + "\n" if lines else ""


__all__ = [
    "AbstractQuery",
    "BOUND",
    "Clause",
    "FREE",
    "Origin",
    "ParseError",
    "Program",
    "clause_names",
    "format_clause",
    "is_lexical",
    "mk",
    "parse_atom",
    "parse_program",
    "parse_term",
    "print_program",
]
