"""Witness extraction: turning an eliminating derivation into a predicate
substitution under which the input clause set is equivalent to the conclusion.

Three ways to build the per-PurDel predicate:

* bounded local resolution closure (`lres`) -- saturate the deleted literal
  against a fresh-constant copy of its dual, reduced up to redundancy;
* greatest-fixpoint expression over `make_alpha`;
* finite iterates `b_k`, justified by an acyclic analysis of the subsumptions
  that certify purification (`find_acyclic`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .calculus import constraint_resolve, resolution_partners, variable_eliminate
from .logic import (
    EQ,
    App,
    Clause,
    FAtom,
    FGfp,
    FNot,
    Formula,
    Lit,
    PointedClause,
    PredExpr,
    Var,
    canonical_pred_expr,
    clause_to_formula,
    fand,
    for_,
    forall,
    formula_has_gfp,
    fresh_name,
    lit_to_formula,
    pointed,
    pred_false,
    pred_true,
    simplify,
    simplify_pred_expr,
    subst_consts,
    subst_lit,
    compose_pred_subst,
)
from .saturation import Derivation, ExtPurDelStep, PurDelStep
from .subsumption import subsumes, subsumes_L_velim


# ---------------------------------------------------------------------------
# clause sets over fresh handle constants, read as predicate expressions


@dataclass(frozen=True)
class ClausePredicate:
    """A conjunction of (universally closed) clauses over handle constants
    `consts`; abstracting the handles gives a predicate of that arity."""

    consts: tuple[str, ...]
    clauses: frozenset[Clause]

    def _normalized(self) -> frozenset[Clause]:
        m = {c: Var(f"@{i}") for i, c in enumerate(self.consts)}
        return frozenset(
            Clause.make(
                Lit(l.pos, l.head, tuple(subst_consts(a, m) for a in l.args), l.pvar)
                for l in c.lits
            )
            for c in self.clauses
        )

    def same_up_to_consts(self, other: "ClausePredicate") -> bool:
        return len(self.consts) == len(other.consts) and self._normalized() == other._normalized()

    def to_pred_expr(self, negate: bool = False) -> PredExpr:
        params = tuple(fresh_name("u") for _ in self.consts)
        m = {c: Var(p) for c, p in zip(self.consts, params)}
        parts = [
            _formula_subst_consts(clause_to_formula(c), m)
            for c in sorted(self.clauses, key=lambda c: (len(c.lits), str(c)))
        ]
        body = fand(*parts)
        if negate:
            body = FNot(body)
        return simplify_pred_expr(PredExpr(params, body))


def _formula_subst_consts(f: Formula, m: dict[str, Var]) -> Formula:
    from .logic import FAll, FAnd, FEx, FFalse, FIff, FImp, FOr, FTrue

    if isinstance(f, (FTrue, FFalse)):
        return f
    if isinstance(f, FAtom):
        return FAtom(f.head, tuple(subst_consts(a, m) for a in f.args), f.pvar)
    if isinstance(f, FNot):
        return FNot(_formula_subst_consts(f.sub, m))
    if isinstance(f, (FAnd, FOr)):
        return type(f)(tuple(_formula_subst_consts(s, m) for s in f.subs))
    if isinstance(f, (FImp, FIff)):
        return type(f)(_formula_subst_consts(f.lhs, m), _formula_subst_consts(f.rhs, m))
    if isinstance(f, (FAll, FEx)):
        return type(f)(f.var, _formula_subst_consts(f.sub, m))
    if isinstance(f, FGfp):
        return FGfp(
            f.pvar,
            f.params,
            _formula_subst_consts(f.body, m),
            tuple(subst_consts(a, m) for a in f.args),
        )
    raise TypeError(f)


def _start_lit(p: PointedClause, consts: tuple[str, ...]) -> Lit:
    d = p.designated
    return Lit(not d.pos, d.head, tuple(App(c, ()) for c in consts), pvar=True)


def _reduce(clauses: set[Clause]) -> set[Clause]:
    """Inter-reduce by plain subsumption (keeping the canonically first of any
    mutually subsuming pair)."""
    kept: list[Clause] = []
    for c in sorted(clauses, key=lambda c: (len(c.lits), str(c))):
        if not any(subsumes(k, c) for k in kept):
            kept.append(c)
    return set(kept)


class LresBudgetExceeded(Exception):
    def __init__(self, budget: int):
        super().__init__(f"local resolution closure did not stabilize within {budget} inferences")
        self.budget = budget


def lres(p: PointedClause, budget: int = 512) -> ClausePredicate:
    """Close {dual of the designated literal, on fresh handle constants} under
    resolving with p, with eager variable elimination and subsumption
    reduction.  Raises LresBudgetExceeded when the closure does not stabilize."""
    consts = tuple(fresh_name("c") for _ in p.designated.args)
    start = Clause.make([_start_lit(p, consts)])
    out: set[Clause] = {start}
    frontier = [start]
    spent = 0
    while frontier:
        next_frontier: list[Clause] = []
        for c in frontier:
            for q in resolution_partners(p, c):
                spent += 1
                if spent > budget:
                    raise LresBudgetExceeded(budget)
                r, _ = variable_eliminate(constraint_resolve(p, q))
                if any(subsumes(s, r) for s in out):
                    continue
                out = {s for s in out if not subsumes(r, s)}
                out.add(r)
                next_frontier.append(r)
        frontier = next_frontier
    return ClausePredicate(consts, frozenset(_reduce(out)))


# ---------------------------------------------------------------------------
# alpha and the B iterates


def _slots_and_rest(p: PointedClause) -> tuple[list[Lit], list[Lit]]:
    dual = p.designated.dual()
    slots = [l for l in p.rest if l.same_kind(dual)]
    rest = [l for l in p.rest if not l.same_kind(dual)]
    return slots, rest


def make_alpha(p: PointedClause) -> tuple[str, PredExpr]:
    """The single-step unfolding of the deleted literal as a predicate
    expression with a free recursion variable Y: parameters must avoid the
    designated literal, satisfy the rest of the clause, or recurse into Y at
    the positions the clause hands the predicate to."""
    d = p.designated
    y = fresh_name("Y")
    params = tuple(fresh_name("u") for _ in d.args)
    slots, rest = _slots_and_rest(p)
    disj = (
        [FNot(FAtom(EQ, (Var(u), t))) for u, t in zip(params, d.args)]
        + [lit_to_formula(l) for l in rest]
        + [FAtom(y, l.args, pvar=True) for l in slots]
    )
    body = fand(
        lit_to_formula(d.dual()),
        forall(sorted(p.clause.vars), for_(*disj)),
    )
    return y, simplify_pred_expr(PredExpr(params, body))


def gfp_pred_expr(p: PointedClause) -> PredExpr:
    """gfp over make_alpha, as a predicate expression (the gfp node is elided
    by the simplifier when the recursion variable vanishes)."""
    y, alpha = make_alpha(p)
    body = FGfp(y, alpha.params, alpha.body, tuple(Var(u) for u in alpha.params))
    return simplify_pred_expr(PredExpr(alpha.params, body))


def b_k(p: PointedClause, k: int) -> ClausePredicate:
    """The k-th iterate: b_0 is the empty (false) clause, and each further
    level resolves the designated literal away once more, branching over the
    previous level at every recursion slot."""
    consts = tuple(fresh_name("c") for _ in p.designated.args)
    level: set[Clause] = {Clause.make([])}
    if k == 0:
        return ClausePredicate(consts, frozenset(level))
    slots, rest = _slots_and_rest(p)
    constraints = [
        Lit(False, EQ, (App(c, ()), t)) for c, t in zip(consts, p.designated.args)
    ]
    for _ in range(k):
        nxt: set[Clause] = {Clause.make([_start_lit(p, consts)])}
        choices = sorted(level, key=lambda c: (len(c.lits), str(c)))
        for pick in _product(choices, len(slots)):
            lits = list(constraints) + list(rest)
            for slot, r in zip(slots, pick):
                lits.extend(_instantiate(r, consts, slot.args))
            c2, _ = variable_eliminate(Clause.make(lits))
            nxt.add(c2)
        level = _reduce(nxt)
    return ClausePredicate(consts, frozenset(level))


def _product(items: list[Clause], n: int):
    if n == 0:
        yield ()
        return
    for head in items:
        for tail in _product(items, n - 1):
            yield (head,) + tail


def _instantiate(r: Clause, consts: tuple[str, ...], args: tuple) -> list[Lit]:
    ren = {v: Var(fresh_name("z")) for v in r.vars}
    m = dict(zip(consts, args))
    out = []
    for l in r.lits:
        l = subst_lit(l, ren)
        out.append(Lit(l.pos, l.head, tuple(subst_consts(a, m) for a in l.args), l.pvar))
    return out


# ---------------------------------------------------------------------------
# acyclicity analysis of the purification subsumptions


@dataclass(frozen=True)
class Acyclic:
    """A choice of covering clause per resolvable pointed clause whose induced
    graph (partner -> cover) is acyclic, with the minimal longest path."""

    s: tuple[tuple[tuple[Clause, int], Clause], ...]
    edges: tuple[tuple[Clause, Clause], ...]
    k: int


@dataclass(frozen=True)
class ProvenCyclic:
    pass


@dataclass(frozen=True)
class AnalysisBudget:
    pass


_CANDIDATE_CAP = 64
_COMBO_CAP = 100_000


def find_acyclic(
    p: PointedClause, n: frozenset[Clause]
) -> Union[Acyclic, ProvenCyclic, AnalysisBudget]:
    """Search for an acyclic assignment of covering clauses with minimal
    longest-path length; the pointed clause must be purified in n."""
    like = p.designated.dual()
    order = sorted(n, key=str)
    keys: list[tuple[Clause, int]] = []
    cands: list[list[Clause]] = []
    capped = False
    for c in order:
        for q in resolution_partners(p, c):
            r = constraint_resolve(p, q)
            covers = [s for s in order if subsumes_L_velim(s, r, like)]
            if not covers:
                raise ValueError("pointed clause is not purified in n")
            if len(covers) > _CANDIDATE_CAP:
                covers = covers[:_CANDIDATE_CAP]
                capped = True
            keys.append((c, q.index))
            cands.append(covers)
    if not keys:
        return Acyclic((), (), 0)

    best: Optional[tuple[int, tuple[Clause, ...]]] = None
    combos = 0
    budget = False

    def longest(edges: set[tuple[Clause, Clause]]) -> int:
        adj: dict[Clause, set[Clause]] = {}
        for a, b in edges:
            adj.setdefault(a, set()).add(b)
        memo: dict[Clause, int] = {}

        def depth(v: Clause) -> int:
            if v not in memo:
                memo[v] = 1 + max((depth(w) for w in adj.get(v, ())), default=-1)
            return memo[v]

        return max(depth(v) for v in adj)

    def reaches(adj, a, b) -> bool:
        seen, stack = set(), [a]
        while stack:
            v = stack.pop()
            if v == b:
                return True
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj.get(v, ()))
        return False

    def go(i: int, edges: set[tuple[Clause, Clause]], choice: tuple[Clause, ...]):
        nonlocal best, combos, budget
        if budget or (best is not None and best[0] == 1):
            return
        if i == len(keys):
            k = longest(edges)
            if best is None or k < best[0]:
                best = (k, choice)
            return
        src = keys[i][0]
        adj: dict[Clause, set[Clause]] = {}
        for a, b in edges:
            adj.setdefault(a, set()).add(b)
        for cover in cands[i]:
            combos += 1
            if combos > _COMBO_CAP:
                budget = True
                return
            if cover == src or reaches(adj, cover, src):
                continue
            go(i + 1, edges | {(src, cover)}, choice + (cover,))

    go(0, set(), ())
    if best is not None:
        _, choice = best
        s = tuple(zip(keys, choice))
        edges = tuple((k[0], c) for k, c in zip(keys, choice))
        return Acyclic(s, edges, best[0])
    if budget or capped:
        return AnalysisBudget()
    return ProvenCyclic()


# ---------------------------------------------------------------------------
# per-step substitutions and composition


@dataclass(frozen=True)
class Witness:
    """A predicate substitution for the eliminated variables, with a per-step
    record of how each PurDel was handled."""

    psub: dict[str, PredExpr]
    modes: tuple[tuple[int, str], ...]  # (step index, mode note)

    def has_gfp(self) -> bool:
        return any(formula_has_gfp(pe.body) for pe in self.psub.values())


class FirstOrderUnavailable(Exception):
    def __init__(self, step_index: int, reason: str):
        super().__init__(f"no first-order expression for PurDel at step {step_index + 1}: {reason}")
        self.step_index = step_index
        self.reason = reason


def _purdel_pred(
    d: Derivation, i: int, step: PurDelStep, mode: str, k_override: Optional[int], budget: int
) -> tuple[PredExpr, str]:
    p = pointed(d.clauses[step.clause_id], step.lit)
    n = d.alive_clauses(i + 1)
    if mode in ("first-order", "auto"):
        got = find_acyclic(p, n)
        if isinstance(got, Acyclic):
            k = got.k if k_override is None else max(got.k, k_override)
            pe = b_k(p, k).to_pred_expr(negate=p.designated.pos)
            return pe, f"first-order k={k}"
        if mode == "first-order":
            reason = "cyclic" if isinstance(got, ProvenCyclic) else "analysis budget"
            raise FirstOrderUnavailable(i, reason)
        mode = "fixpoint"
    if mode == "fixpoint":
        pe = gfp_pred_expr(p)
        if p.designated.pos:
            pe = simplify_pred_expr(PredExpr(pe.params, FNot(pe.body)))
        return pe, "fixpoint"
    if mode == "resolution":
        pe = lres(p, budget).to_pred_expr(negate=p.designated.pos)
        return pe, "resolution"
    raise ValueError(f"unknown witness mode {mode!r}")


def extract_witness(
    d: Derivation,
    mode: str = "auto",
    k_override: Optional[int] = None,
    lres_budget: int = 512,
) -> Witness:
    """Fold the per-step substitutions over the derivation, last step first;
    only PurDel and ExtPurDel steps contribute, everything else is identity."""
    if not d.eliminating():
        raise ValueError("derivation does not eliminate its predicate variables")
    sigma: dict[str, PredExpr] = {}
    modes: list[tuple[int, str]] = []
    for i in range(len(d.steps) - 1, -1, -1):
        step = d.steps[i]
        if isinstance(step, ExtPurDelStep):
            pe = pred_true(step.arity) if step.polarity == "+" else pred_false(step.arity)
            tau = {step.pvar: pe}
            modes.append((i, f"ext {step.polarity}"))
        elif isinstance(step, PurDelStep):
            pe, note = _purdel_pred(d, i, step, mode, k_override, lres_budget)
            tau = {d.clauses[step.clause_id].lits[step.lit].head: pe}
            modes.append((i, note))
        else:
            continue
        sigma = {
            x: simplify_pred_expr(pe) for x, pe in compose_pred_subst(tau, sigma).items()
        }
    modes.reverse()
    # bound names inside the expressions come from a global counter; renaming
    # them positionally makes repeated extractions print identically
    return Witness({x: canonical_pred_expr(pe) for x, pe in sigma.items()}, tuple(modes))
