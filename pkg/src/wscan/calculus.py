"""Inference rules on constrained clauses.

Resolution on predicate-variable literals does not unify: the resolvent of
P = X(t1..tn) | C  against  Q = ~X(s1..sn) | C'  carries the disequation
constraints  ti != si  instead.  Unification is recovered piecemeal by the
constraint-elimination and variable-elimination rules.  Paramodulation
handles the equality literals of ordinary (non-variable) predicates.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .logic import (
    EQ,
    App,
    Clause,
    Lit,
    PointedClause,
    Term,
    Var,
    is_proper_subterm_var,
    mgu,
    pointed,
    pointed_make,
    rename_clause_apart,
    subst_lit,
)
from .subsumption import subsumes_L_velim


def constraint_resolve(p: PointedClause, q: PointedClause) -> Clause:
    """Resolvent of two pointed clauses on their designated literals.

    The designated literals must be predicate-variable literals with the same
    head and opposite polarity; their argument tuples turn into disequation
    constraints.  Premises are renamed apart.
    """
    dp, dq = p.designated, q.designated
    if not (dp.pvar and dq.pvar):
        raise ValueError("resolution is on predicate-variable literals")
    if dp.head != dq.head or len(dp.args) != len(dq.args):
        raise ValueError(f"designated literals disagree: {dp} vs {dq}")
    if dp.pos == dq.pos:
        raise ValueError(f"designated literals must have opposite polarity: {dp} vs {dq}")
    qc = rename_clause_apart(q.clause, p.clause.vars)
    dq = qc.lits[q.index]
    rest_q = tuple(l for i, l in enumerate(qc.lits) if i != q.index)
    constraints = tuple(Lit(False, EQ, (a, b)) for a, b in zip(dp.args, dq.args))
    return Clause.make(constraints + p.rest + rest_q)


def constraint_factor(c: Clause, i: int, j: int) -> Clause:
    """Factor literals i and j (same predicate and polarity): drop j and add
    the pairwise disequation constraints between their arguments."""
    if i == j:
        raise ValueError("factoring needs two distinct literals")
    li, lj = c.lits[i], c.lits[j]
    if li.is_eq or lj.is_eq:
        raise ValueError("factoring applies to predicate literals")
    if not li.same_kind(lj):
        raise ValueError(f"literals do not factor: {li} vs {lj}")
    constraints = tuple(Lit(False, EQ, (a, b)) for a, b in zip(li.args, lj.args))
    rest = tuple(l for k, l in enumerate(c.lits) if k != j)
    return Clause.make(constraints + rest)


def constraint_eliminate(c: Clause, selection=None) -> Optional[Clause]:
    """Unify a block of disequation constraints of c and drop them.

    With no selection, takes the longest prefix of the constraint block that
    still has a simultaneous unifier (constraints sort to the front of a
    canonical clause).  A selection is a list of literal indices, all of which
    must be constraints and must unify together.  Returns None when nothing
    can be eliminated.
    """
    if selection is None:
        idxs = [i for i, l in enumerate(c.lits) if l.is_constraint]
        chosen: list[int] = []
        sigma: Optional[dict] = {}
        for i in idxs:
            ext = mgu(
                [(c.lits[j].args[0], c.lits[j].args[1]) for j in chosen + [i]]
            )
            if ext is None:
                break
            chosen.append(i)
            sigma = ext
        if not chosen:
            return None
    else:
        chosen = list(selection)
        if not chosen or any(not c.lits[i].is_constraint for i in chosen):
            return None
        sigma = mgu([(c.lits[i].args[0], c.lits[i].args[1]) for i in chosen])
        if sigma is None:
            return None
    drop = set(chosen)
    return Clause.make(
        subst_lit(l, sigma) for i, l in enumerate(c.lits) if i not in drop
    )


def _velim_pick(lits, skip: Optional[int]) -> Optional[tuple[int, str, Term]]:
    for i, l in enumerate(lits):
        if i == skip or not l.is_constraint:
            continue
        a, b = l.args
        if isinstance(a, Var) and not is_proper_subterm_var(a.name, b):
            return i, a.name, b
        if isinstance(b, Var) and not is_proper_subterm_var(b.name, a):
            return i, b.name, a
    return None


def variable_eliminate(c: Clause) -> tuple[Clause, bool]:
    """Exhaustively rewrite  v != t | C  ~>  C[v <- t]  (v not inside t).

    The leftmost eligible constraint is taken each round, so the result is
    deterministic on canonical clauses.  Returns (result, anything happened).
    """
    lits = list(c.lits)
    changed = False
    while True:
        pick = _velim_pick(lits, None)
        if pick is None:
            break
        i, v, t = pick
        sub = {v: t}
        lits = [subst_lit(l, sub) for j, l in enumerate(lits) if j != i]
        changed = True
    if not changed:
        return c, False
    return Clause.make(lits), True


def variable_eliminate_pointed(p: PointedClause) -> tuple[PointedClause, bool]:
    """Like variable_eliminate but the designated literal survives and is never
    the constraint consumed."""
    lits = list(p.clause.lits)
    desig = p.index
    changed = False
    while True:
        pick = _velim_pick(lits, desig)
        if pick is None:
            break
        i, v, t = pick
        sub = {v: t}
        nxt = []
        for j, l in enumerate(lits):
            if j == i:
                continue
            if j == desig:
                desig = len(nxt)
            nxt.append(subst_lit(l, sub))
        lits = nxt
        changed = True
    if not changed:
        return p, False
    clause, idx = pointed_make(lits, desig)
    assert idx is not None
    return PointedClause(clause, idx), True


# ---------------------------------------------------------------------------
# paramodulation


def _subterm_at(t: Term, path: tuple[int, ...]) -> Optional[Term]:
    for i in path:
        if isinstance(t, Var) or i >= len(t.args):
            return None
        t = t.args[i]
    return t


def _replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    assert isinstance(t, App)
    i = path[0]
    args = list(t.args)
    args[i] = _replace_at(args[i], path[1:], new)
    return App(t.fn, tuple(args))


def paramodulant(
    c1: Clause,
    eq_index: int,
    orient: str,
    c2: Clause,
    lit_index: int,
    path: tuple[int, ...],
    into_vars: bool = False,
) -> Optional[Clause]:
    """Paramodulate the equation literal `eq_index` of c1 (oriented "lr" or
    "rl") into the subterm of c2 at literal `lit_index`, argument path `path`
    (first element selects the argument).  Returns None when the rule does not
    apply at that position.
    """
    if not path:
        return None
    eq = c1.lits[eq_index]
    if not (eq.is_eq and eq.pos):
        return None
    if orient not in ("lr", "rl"):
        raise ValueError(f"bad orientation {orient!r}")
    c1r = rename_clause_apart(c1, c2.vars)
    eq = c1r.lits[eq_index]
    s, t = eq.args if orient == "lr" else (eq.args[1], eq.args[0])
    target = c2.lits[lit_index]
    if path[0] >= len(target.args):
        return None
    r = _subterm_at(target.args[path[0]], path[1:])
    if r is None:
        return None
    if isinstance(r, Var) and not into_vars:
        return None
    sigma = mgu([(s, r)])
    if sigma is None:
        return None
    new_args = list(target.args)
    new_args[path[0]] = _replace_at(target.args[path[0]], path[1:], t)
    new_target = Lit(target.pos, target.head, tuple(new_args), target.pvar)
    lits = [l for k, l in enumerate(c1r.lits) if k != eq_index]
    lits += [new_target if k == lit_index else l for k, l in enumerate(c2.lits)]
    return Clause.make(subst_lit(l, sigma) for l in lits)


def _positions(t: Term, here: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], Term]]:
    yield here, t
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from _positions(a, here + (i,))


def all_paramodulants(
    c1: Clause, c2: Clause, into_vars: bool = False
) -> Iterator[tuple[Clause, int, str, int, tuple[int, ...]]]:
    """Every paramodulant from an equation of c1 into c2, with its descriptor
    (eq literal, orientation, target literal, argument path)."""
    for ei, eq in enumerate(c1.lits):
        if not (eq.is_eq and eq.pos):
            continue
        for orient in ("lr", "rl"):
            for li, lit in enumerate(c2.lits):
                for ai, arg in enumerate(lit.args):
                    for sub, r in _positions(arg, ()):
                        if isinstance(r, Var) and not into_vars:
                            continue
                        got = paramodulant(c1, ei, orient, c2, li, (ai,) + sub, into_vars)
                        if got is not None:
                            yield got, ei, orient, li, (ai,) + sub


# ---------------------------------------------------------------------------
# bounded resolution closure and purity


def dual_kind(l: Lit) -> Lit:
    return l.dual()


def resolution_partners(p: PointedClause, c: Clause) -> Iterator[PointedClause]:
    """Pointed variants of c whose designated literal resolves against p's."""
    want = p.designated.dual()
    for i, l in enumerate(c.lits):
        if l.same_kind(want):
            yield pointed(c, i)


def res_p_bounded(p: PointedClause, n: frozenset[Clause], k: int) -> frozenset[Clause]:
    """The k-fold resolution closure of n under resolving with p."""
    out = set(n)
    frontier = set(n)
    for _ in range(k):
        new = set()
        for c in frontier:
            for q in resolution_partners(p, c):
                r = constraint_resolve(p, q)
                if r not in out:
                    new.add(r)
        if not new:
            break
        out |= new
        frontier = new
    return frozenset(out)


def is_purified(p: PointedClause, n: frozenset[Clause]) -> Optional[dict]:
    """Check that every one-step resolvent of p against n is covered by n
    modulo constraint unfolding (with injective matching on the literals that
    resolve with p's designated one).

    Returns a certificate mapping (partner clause, literal index) to the
    covering clause, or None when some resolvent is uncovered.
    """
    like = p.designated.dual()
    cert: dict[tuple[Clause, int], Clause] = {}
    for c in sorted(n, key=str):
        for q in resolution_partners(p, c):
            r = constraint_resolve(p, q)
            cover = next(
                (s for s in sorted(n, key=str) if subsumes_L_velim(s, r, like)), None
            )
            if cover is None:
                return None
            cert[(c, q.index)] = cover
    return cert


def ext_purity_check(n: frozenset[Clause], x: str) -> Optional[str]:
    """Polarity p such that every clause mentioning predicate variable x has an
    x-literal of polarity p ('+' preferred, and returned when x does not occur
    at all); None when neither polarity qualifies."""
    xclauses = [c for c in n if any(l.pvar and l.head == x for l in c.lits)]
    if not xclauses:
        return "+"
    for pol, want in (("+", True), ("-", False)):
        if all(
            any(l.pvar and l.head == x and l.pos == want for l in c.lits)
            for c in xclauses
        ):
            return pol
    return None
