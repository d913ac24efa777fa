"""Random small programs: ground facts plus range-restricted rules."""

import re

from hypothesis import strategies as st

CONSTANTS = ("a", "b", "c")
VARIABLES = ("X", "Y", "Z", "W")


def ground_terms(max_depth=2):
    leaf = st.sampled_from(CONSTANTS)
    if max_depth <= 0:
        return leaf
    inner = ground_terms(max_depth - 1)
    return st.one_of(leaf, leaf, st.builds(lambda a: f"f({a})", inner))


def _atom(name, args):
    return f"{name}({','.join(args)})"


@st.composite
def body_arg(draw):
    kind = draw(st.integers(0, 9))
    if kind < 7:
        return draw(st.sampled_from(VARIABLES))
    if kind < 9:
        return draw(st.sampled_from(CONSTANTS))
    return f"f({draw(st.sampled_from(VARIABLES))})"


@st.composite
def head_arg(draw, body_vars):
    kind = draw(st.integers(0, 9))
    if kind < 8 and body_vars:
        return draw(st.sampled_from(body_vars))
    if kind < 9 or not body_vars:
        return draw(st.sampled_from(CONSTANTS))
    return f"f({draw(st.sampled_from(body_vars))})"


@st.composite
def programs(draw, max_preds=6, max_arity=3, max_clauses=8):
    """(program text, predicate signature list).

    Facts are ground, rule heads only use variables of their bodies, so
    every derivable fact is ground. Terms stay within depth 3.
    """
    n = draw(st.integers(2, max_preds))
    sig = [(f"p{i}", draw(st.integers(1, max_arity))) for i in range(n)]
    n_clauses = draw(st.integers(2, max_clauses))
    lines = []
    for k in range(n_clauses):
        name, arity = draw(st.sampled_from(sig))
        if k == 0 or draw(st.integers(0, 2)) == 0:
            lines.append(_atom(name, [draw(ground_terms()) for _ in range(arity)]) + ".")
            continue
        body = []
        for _ in range(draw(st.integers(1, 3))):
            bname, barity = draw(st.sampled_from(sig))
            body.append(_atom(bname, [draw(body_arg()) for _ in range(barity)]))
        used = sorted({v for v in VARIABLES if any(v in b for b in body)})
        head = _atom(name, [draw(head_arg(used)) for _ in range(arity)])
        lines.append(f"{head} :- {', '.join(body)}.")
    return "\n".join(lines) + "\n", sig


@st.composite
def programs_with_query(draw):
    """(program text, query text, seed texts) with a defined query predicate."""
    text, sig = draw(programs())
    defined = sorted({line.split("(")[0] for line in text.splitlines()})
    name = draw(st.sampled_from(defined))
    arity = dict(sig)[name]
    args = [draw(st.one_of(st.sampled_from(CONSTANTS), st.sampled_from(("Q1", "Q2", "Q3"))))
            for _ in range(arity)]
    query = _atom(name, args)
    occurring = [(n, a) for n, a in sig if re.search(rf"\b{n}\(", text)]
    seeds = []
    for _ in range(draw(st.integers(0, 2))):
        sname, sarity = draw(st.sampled_from(occurring))
        seeds.append(_atom(sname, [draw(ground_terms(1)) for _ in range(sarity)]))
    return text, query, seeds
