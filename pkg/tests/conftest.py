"""Shared helpers: tiny clause DSL plus independent brute-force oracles.

The oracles here deliberately avoid the library's own matching code.
Subsumption is decided by enumerating every substitution whose range is a
subterm of the target clause, and the constraint-unfolding closure is
recomputed from its one-step definition.
"""

import itertools

from wscan.logic import (
    App,
    Clause,
    Lit,
    Var,
    is_proper_subterm_var,
    subst_lit,
)
from wscan.problems import parse_problem
from wscan.subsumption import subsumes


def problem(text):
    return parse_problem(text, origin="<test>")


def clauses_of(text, header="X/1"):
    prob = parse_problem(f"exists {header}.\n{text}\n", origin="<test>")
    return list(prob.clauses)


def cl(line, header="X/1"):
    (c,) = clauses_of(line, header)
    return c


def _subterms(t):
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from _subterms(a)


def clause_subterms(c):
    out = []
    for l in c.lits:
        for a in l.args:
            for s in _subterms(a):
                if s not in out:
                    out.append(s)
    return out


def clause_vars(c):
    vs = []
    for t in clause_subterms(c):
        if isinstance(t, Var) and t.name not in vs:
            vs.append(t.name)
    return vs


def _s_vars(s):
    vs = []
    for l in s.lits:
        for a in l.args:
            for t in _subterms(a):
                if isinstance(t, Var) and t.name not in vs:
                    vs.append(t.name)
    return vs


def brute_subsumes(s, c, like=None):
    """Exhaustive subsumption check.

    Any substitution that embeds s into c must send each variable of s to a
    subterm of c, so trying exactly those candidates is complete.
    """
    vs = _s_vars(s)
    cands = clause_subterms(c)
    if not cands:
        cands = [Var("u")]
    target = set(c.lits)

    def present(m):
        if m in target:
            return True
        if m.is_eq:
            return Lit(m.pos, m.head, (m.args[1], m.args[0]), m.pvar) in target
        return False

    for combo in itertools.product(cands, repeat=len(vs)):
        sigma = dict(zip(vs, combo))
        image = [subst_lit(l, sigma) for l in s.lits]
        if not all(present(m) for m in image):
            continue
        if like is None:
            return True
        marked = [m for l, m in zip(s.lits, image) if l.same_kind(like)]
        if len(set(marked)) == len(marked):
            return True
    return False


def brute_velim_closure(c):
    """All clauses reachable by eliminating a constraint  v != t  (v a
    variable not occurring properly in t) and substituting v by t."""
    seen = {c}
    stack = [c]
    while stack:
        cur = stack.pop()
        for i, l in enumerate(cur.lits):
            if not l.is_constraint:
                continue
            for v, t in ((l.args[0], l.args[1]), (l.args[1], l.args[0])):
                if not isinstance(v, Var) or is_proper_subterm_var(v.name, t):
                    continue
                rest = [
                    subst_lit(m, {v.name: t})
                    for j, m in enumerate(cur.lits)
                    if j != i
                ]
                nxt = Clause.make(rest)
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    return seen


def brute_subsumes_velim(s, c, like):
    return any(brute_subsumes(s, e, like) for e in brute_velim_closure(c))


def reduction_subsumes_L(s, c, like):
    """Second, structurally different oracle for injective subsumption: give
    every marked literal of the target a fresh predicate name, try each
    injection of the source's marked literals into those names, and fall back
    to plain subsumption."""
    sk = [l for l in s.lits if l.same_kind(like)]
    ck = [l for l in c.lits if l.same_kind(like)]
    if len(sk) > len(ck):
        return False
    s0 = [l for l in s.lits if not l.same_kind(like)]
    c0 = [l for l in c.lits if not l.same_kind(like)]
    cp = Clause.make(
        c0 + [Lit(l.pos, f"_F{i}", l.args, True) for i, l in enumerate(ck)]
    )
    for f in itertools.permutations(range(len(ck)), len(sk)):
        sf = Clause.make(
            s0 + [Lit(l.pos, f"_F{f[i]}", l.args, True) for i, l in enumerate(sk)]
        )
        if subsumes(sf, cp):
            return True
    return False


# -- random clause generation over a fixed small signature -------------------

CONSTS = ("a", "b", "c")
VARS = ("u", "v", "w")


def random_term(rng, depth=2):
    roll = rng.random()
    if depth == 0 or roll < 0.45:
        if roll < 0.25:
            return Var(rng.choice(VARS))
        return App(rng.choice(CONSTS), ())
    return App(rng.choice(("f", "g")), (random_term(rng, depth - 1),))


def random_lit(rng, with_x=True):
    kind = rng.randrange(4 if with_x else 3)
    pos = rng.random() < 0.5
    if kind == 0:
        return Lit(pos, "B", (random_term(rng),), False)
    if kind == 1:
        return Lit(pos, "C", (random_term(rng), random_term(rng)), False)
    if kind == 2:
        return Lit(False, "=", (random_term(rng), random_term(rng)), False)
    return Lit(pos, "X", (random_term(rng),), True)


def random_clause(rng, max_lits=4, with_x=True):
    n = rng.randrange(1, max_lits + 1)
    return Clause.make(random_lit(rng, with_x) for _ in range(n))
