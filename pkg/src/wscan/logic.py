"""Core syntax: terms, literals, clauses, formulas and substitutions.

Clauses are kept in a canonical form so that clause equality coincides with
equality up to variable renaming: literals are deduplicated and sorted by a
renaming-invariant shape key, and variables are renamed to ``u0, u1, ...`` in
order of first occurrence.  Equality literals with negative polarity are the
*constraint* literals of the calculus and sort first, so a clause's constraint
block is always a prefix of its literal tuple.

Predicate variables (the second-order variables to be eliminated) are ordinary
literal/atom heads flagged with ``pvar=True``; the equality head is the
reserved name ``"="``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

EQ = "="

# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name})"


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...] = ()

    def __repr__(self) -> str:
        return f"App({self.fn}, {list(self.args)})"


Term = Union[Var, App]


def const(name: str) -> App:
    """A constant is a nullary function application."""
    return App(name, ())


def term_str(t: Term) -> str:
    if isinstance(t, Var):
        return f"?{t.name}"
    if not t.args:
        return t.fn
    return f"{t.fn}({','.join(term_str(a) for a in t.args)})"


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from term_vars(a)


def occurs_in(v: str, t: Term) -> bool:
    return any(name == v for name in term_vars(t))


def is_proper_subterm_var(v: str, t: Term) -> bool:
    """True when the variable v occurs in t and t is not v itself."""
    if isinstance(t, Var) and t.name == v:
        return False
    return occurs_in(v, t)


Subst = Mapping[str, Term]


def subst_term(t: Term, s: Subst) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if not t.args:
        return t
    return App(t.fn, tuple(subst_term(a, s) for a in t.args))


def subst_consts(t: Term, s: Mapping[str, Term]) -> Term:
    """Replace constants (nullary applications) by terms; used when turning a
    parametric clause over placeholder constants into an instance."""
    if isinstance(t, Var):
        return t
    if not t.args:
        return s.get(t.fn, t)
    return App(t.fn, tuple(subst_consts(a, s) for a in t.args))


def compose_subst(s1: Subst, s2: Subst) -> dict[str, Term]:
    """The substitution that first applies s1, then s2."""
    out = {v: subst_term(t, s2) for v, t in s1.items()}
    for v, t in s2.items():
        out.setdefault(v, t)
    return out


def mgu(pairs: Iterable[tuple[Term, Term]]) -> Optional[dict[str, Term]]:
    """Most general unifier of the given pairs, or None."""
    eqs = list(pairs)
    out: dict[str, Term] = {}
    while eqs:
        lhs, rhs = eqs.pop()
        lhs, rhs = subst_term(lhs, out), subst_term(rhs, out)
        if lhs == rhs:
            continue
        if isinstance(lhs, App) and isinstance(rhs, App):
            if lhs.fn != rhs.fn or len(lhs.args) != len(rhs.args):
                return None
            eqs.extend(zip(lhs.args, rhs.args))
            continue
        if isinstance(rhs, Var):
            lhs, rhs = rhs, lhs
        assert isinstance(lhs, Var)
        if occurs_in(lhs.name, rhs):
            return None
        binding = {lhs.name: rhs}
        out = {v: subst_term(t, binding) for v, t in out.items()}
        out[lhs.name] = rhs
    return out


def match_terms(
    pattern: Sequence[Term], target: Sequence[Term], base: Optional[Subst] = None
) -> Optional[dict[str, Term]]:
    """One-sided matching: find sigma extending base with pattern*sigma == target.

    Variables of the target are rigid (they behave like constants).
    """
    if len(pattern) != len(target):
        return None
    out: dict[str, Term] = dict(base or {})
    todo = list(zip(pattern, target))
    while todo:
        p, t = todo.pop()
        if isinstance(p, Var):
            if p.name in out:
                if out[p.name] != t:
                    return None
            else:
                out[p.name] = t
            continue
        if isinstance(t, Var) or p.fn != t.fn or len(p.args) != len(t.args):
            return None
        todo.extend(zip(p.args, t.args))
    return out


_counter = itertools.count()


def fresh_name(prefix: str) -> str:
    """Globally fresh name with the given prefix (``v``, ``c``, ``sk``, ``Y``...)."""
    return f"{prefix}{next(_counter)}"


def fresh_vars(n: int) -> tuple[Var, ...]:
    return tuple(Var(fresh_name("v")) for _ in range(n))


# ---------------------------------------------------------------------------
# literals


@dataclass(frozen=True)
class Lit:
    pos: bool
    head: str
    args: tuple[Term, ...]
    pvar: bool = False

    @property
    def is_eq(self) -> bool:
        return self.head == EQ and not self.pvar

    @property
    def is_constraint(self) -> bool:
        return self.is_eq and not self.pos

    def dual(self) -> "Lit":
        return Lit(not self.pos, self.head, self.args, self.pvar)

    def same_kind(self, other: "Lit") -> bool:
        """Same head and polarity (the 'L-literal' relation)."""
        return (
            self.pos == other.pos
            and self.head == other.head
            and self.pvar == other.pvar
            and len(self.args) == len(other.args)
        )

    def __str__(self) -> str:
        return lit_str(self)


def lit_str(l: Lit) -> str:
    if l.is_eq:
        op = "=" if l.pos else "!="
        return f"{term_str(l.args[0])} {op} {term_str(l.args[1])}"
    core = l.head if not l.args else f"{l.head}({','.join(term_str(a) for a in l.args)})"
    return core if l.pos else f"~{core}"


def subst_lit(l: Lit, s: Subst) -> Lit:
    return Lit(l.pos, l.head, tuple(subst_term(t, s) for t in l.args), l.pvar)


def lit_vars(l: Lit) -> Iterator[str]:
    for t in l.args:
        yield from term_vars(t)


def lit_size(l: Lit) -> int:
    """Number of non-logical symbol occurrences (equality and negation do not
    count; predicate variables do)."""
    n = 0 if l.is_eq else 1
    stack = list(l.args)
    while stack:
        t = stack.pop()
        n += 1
        if isinstance(t, App):
            stack.extend(t.args)
    return n


# ---------------------------------------------------------------------------
# clauses

_KIND_EQ, _KIND_SYM, _KIND_PVAR = 0, 1, 2


def _lit_kind(l: Lit) -> int:
    if l.is_eq:
        return _KIND_EQ
    return _KIND_PVAR if l.pvar else _KIND_SYM


def _term_shape(t: Term):
    if isinstance(t, Var):
        return ("*",)
    return (t.fn, tuple(_term_shape(a) for a in t.args))


def _lit_shape(l: Lit):
    return (_lit_kind(l), l.head, l.pos, tuple(_term_shape(t) for t in l.args))


def _term_key(t: Term):
    if isinstance(t, Var):
        return (0, t.name, ())
    return (1, t.fn, tuple(_term_key(a) for a in t.args))


def _lit_key(l: Lit):
    return (_lit_kind(l), l.head, l.pos, tuple(_term_key(t) for t in l.args))


_PERM_CAP = 40320  # 8!


def _canonical_order(lits: list[Lit]) -> tuple[tuple[Lit, ...], dict[str, Term], tuple[int, ...]]:
    """Order literals canonically and rename variables to u0,u1,...

    Returns the ordered renamed literals, the renaming (old name -> Var) and,
    for each input position, the output position of that literal.
    """
    order = sorted(range(len(lits)), key=lambda i: _lit_shape(lits[i]))
    # group indices with identical shape; permuting inside a group may give a
    # smaller serialization once variables are renamed
    groups: list[list[int]] = []
    for i in order:
        if groups and _lit_shape(lits[groups[-1][-1]]) == _lit_shape(lits[i]):
            groups[-1].append(i)
        else:
            groups.append([i])

    def rename(seq: Sequence[int]):
        ren: dict[str, Term] = {}
        for i in seq:
            for v in lit_vars(lits[i]):
                if v not in ren:
                    ren[v] = Var(f"u{len(ren)}")
        out = tuple(subst_lit(lits[i], ren) for i in seq)
        return out, ren

    n_cands = 1
    for g in groups:
        for k in range(2, len(g) + 1):
            n_cands *= k
        if n_cands > _PERM_CAP:
            break
    if n_cands > _PERM_CAP or n_cands == 1:
        seq = [i for g in groups for i in g]
        out, ren = rename(seq)
        best_seq = seq
    else:
        best = None
        best_seq = None
        for combo in itertools.product(*[itertools.permutations(g) for g in groups]):
            seq = [i for g in combo for i in g]
            cand, ren_c = rename(seq)
            key = tuple(_lit_key(l) for l in cand)
            if best is None or key < best[0]:
                best = (key, cand, ren_c)
                best_seq = seq
        out, ren = best[1], best[2]
    positions = [0] * len(lits)
    for outpos, i in enumerate(best_seq):
        positions[i] = outpos
    return out, ren, tuple(positions)


@dataclass(frozen=True)
class Clause:
    lits: tuple[Lit, ...] = ()

    @staticmethod
    def make(lits: Iterable[Lit]) -> "Clause":
        return pointed_make(lits, None)[0]

    def __len__(self) -> int:
        return len(self.lits)

    def __iter__(self) -> Iterator[Lit]:
        return iter(self.lits)

    @property
    def vars(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for l in self.lits:
            for v in lit_vars(l):
                seen.setdefault(v)
        return tuple(seen)

    @property
    def constraints(self) -> tuple[Lit, ...]:
        return tuple(l for l in self.lits if l.is_constraint)

    @property
    def size(self) -> int:
        return sum(lit_size(l) for l in self.lits)

    def pvar_lits(self, name: Optional[str] = None) -> tuple[tuple[int, Lit], ...]:
        return tuple(
            (i, l)
            for i, l in enumerate(self.lits)
            if l.pvar and (name is None or l.head == name)
        )

    def __str__(self) -> str:
        if not self.lits:
            return "[]"
        return " | ".join(lit_str(l) for l in self.lits)


def _orient_eq(l: Lit) -> Lit:
    """Order the arguments of an equality literal by shape (variables first,
    then smaller terms); equalities are symmetric, so this is harmless and it
    makes syntactic comparisons of clause sets orientation-independent."""
    if not l.is_eq:
        return l
    a, b = l.args
    if _term_shape(b) < _term_shape(a):
        return Lit(l.pos, l.head, (b, a), l.pvar)
    return l


def pointed_make(lits: Iterable[Lit], designated: Optional[int]) -> tuple[Clause, Optional[int]]:
    """Canonicalize, tracking where the literal at input index `designated` lands."""
    raw = [_orient_eq(l) for l in lits]
    uniq: list[Lit] = []
    index_of: dict[Lit, int] = {}
    mapped: Optional[int] = None
    for i, l in enumerate(raw):
        if l not in index_of:
            index_of[l] = len(uniq)
            uniq.append(l)
        if designated is not None and i == designated:
            mapped = index_of[l]
    if not uniq:
        return Clause(()), None
    ordered, _, positions = _canonical_order(uniq)
    out = mapped if mapped is None else positions[mapped]
    return Clause(ordered), out


@dataclass(frozen=True)
class PointedClause:
    """A clause with one designated literal (by index into the canonical tuple)."""

    clause: Clause
    index: int

    @property
    def designated(self) -> Lit:
        return self.clause.lits[self.index]

    @property
    def rest(self) -> tuple[Lit, ...]:
        return tuple(l for i, l in enumerate(self.clause.lits) if i != self.index)

    def __str__(self) -> str:
        parts = [
            (f"[{lit_str(l)}]" if i == self.index else lit_str(l))
            for i, l in enumerate(self.clause.lits)
        ]
        return " | ".join(parts)


def pointed(clause: Clause, index: int) -> PointedClause:
    if not (0 <= index < len(clause.lits)):
        raise IndexError(f"no literal {index} in {clause}")
    return PointedClause(clause, index)


def rename_clause_apart(c: Clause, avoid: Iterable[str]) -> Clause:
    """Rename the clause's variables away from `avoid` (fresh v%d names).

    Note the result is *not* canonical; it is for building inference premises.
    Returns a plain literal tuple wrapped in Clause without re-canonicalizing.
    """
    taken = set(avoid)
    ren: dict[str, Term] = {}
    for v in c.vars:
        if v in taken:
            ren[v] = Var(fresh_name("v"))
    if not ren:
        return c
    return Clause(tuple(subst_lit(l, ren) for l in c.lits))


ClauseSet = frozenset  # of Clause


def clause_set_size(n: Iterable[Clause]) -> int:
    return sum(c.size for c in n)


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class FTrue:
    def __repr__(self):
        return "FTrue()"


@dataclass(frozen=True)
class FFalse:
    def __repr__(self):
        return "FFalse()"


@dataclass(frozen=True)
class FAtom:
    head: str
    args: tuple[Term, ...] = ()
    pvar: bool = False


@dataclass(frozen=True)
class FNot:
    sub: "Formula"


@dataclass(frozen=True)
class FAnd:
    subs: tuple["Formula", ...]


@dataclass(frozen=True)
class FOr:
    subs: tuple["Formula", ...]


@dataclass(frozen=True)
class FImp:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class FIff:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class FAll:
    var: str
    sub: "Formula"


@dataclass(frozen=True)
class FEx:
    var: str
    sub: "Formula"


@dataclass(frozen=True)
class FGfp:
    """(gfp_{pvar} lambda params. body)(args) — a greatest-fixpoint application."""

    pvar: str
    params: tuple[str, ...]
    body: "Formula"
    args: tuple[Term, ...]


Formula = Union[
    FTrue, FFalse, FAtom, FNot, FAnd, FOr, FImp, FIff, FAll, FEx, FGfp
]

TRUE = FTrue()
FALSE = FFalse()


def fand(*subs: Formula) -> Formula:
    flat: list[Formula] = []
    for s in subs:
        if isinstance(s, FAnd):
            flat.extend(s.subs)
        else:
            flat.append(s)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return FAnd(tuple(flat))


def for_(*subs: Formula) -> Formula:
    flat: list[Formula] = []
    for s in subs:
        if isinstance(s, FOr):
            flat.extend(s.subs)
        else:
            flat.append(s)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


def forall(vars_: Iterable[str], sub: Formula) -> Formula:
    out = sub
    for v in reversed(list(vars_)):
        out = FAll(v, out)
    return out


def exists(vars_: Iterable[str], sub: Formula) -> Formula:
    out = sub
    for v in reversed(list(vars_)):
        out = FEx(v, out)
    return out


def lit_to_formula(l: Lit) -> Formula:
    atom = FAtom(l.head, l.args, l.pvar)
    return atom if l.pos else FNot(atom)


def clause_to_formula(c: Clause) -> Formula:
    return forall(c.vars, for_(*[lit_to_formula(l) for l in c.lits]))


def clauses_to_formula(n: Iterable[Clause]) -> Formula:
    return fand(*[clause_to_formula(c) for c in sorted(n, key=lambda c: tuple(map(_lit_key, c.lits)))])


def formula_free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (FTrue, FFalse)):
        return frozenset()
    if isinstance(f, FAtom):
        return frozenset(v for t in f.args for v in term_vars(t))
    if isinstance(f, FNot):
        return formula_free_vars(f.sub)
    if isinstance(f, (FAnd, FOr)):
        return frozenset().union(*[formula_free_vars(s) for s in f.subs]) if f.subs else frozenset()
    if isinstance(f, (FImp, FIff)):
        return formula_free_vars(f.lhs) | formula_free_vars(f.rhs)
    if isinstance(f, (FAll, FEx)):
        return formula_free_vars(f.sub) - {f.var}
    if isinstance(f, FGfp):
        body = formula_free_vars(f.body) - set(f.params)
        return body | frozenset(v for t in f.args for v in term_vars(t))
    raise TypeError(f)


def formula_free_pvars(f: Formula) -> frozenset[str]:
    if isinstance(f, FAtom):
        return frozenset([f.head]) if f.pvar else frozenset()
    if isinstance(f, FNot):
        return formula_free_pvars(f.sub)
    if isinstance(f, (FAnd, FOr)):
        return frozenset().union(*[formula_free_pvars(s) for s in f.subs]) if f.subs else frozenset()
    if isinstance(f, (FImp, FIff)):
        return formula_free_pvars(f.lhs) | formula_free_pvars(f.rhs)
    if isinstance(f, (FAll, FEx)):
        return formula_free_pvars(f.sub)
    if isinstance(f, FGfp):
        return formula_free_pvars(f.body) - {f.pvar}
    return frozenset()


def subst_formula(f: Formula, s: Subst) -> Formula:
    """Capture-avoiding first-order substitution."""
    if not s:
        return f
    if isinstance(f, (FTrue, FFalse)):
        return f
    if isinstance(f, FAtom):
        return FAtom(f.head, tuple(subst_term(t, s) for t in f.args), f.pvar)
    if isinstance(f, FNot):
        return FNot(subst_formula(f.sub, s))
    if isinstance(f, FAnd):
        return FAnd(tuple(subst_formula(x, s) for x in f.subs))
    if isinstance(f, FOr):
        return FOr(tuple(subst_formula(x, s) for x in f.subs))
    if isinstance(f, FImp):
        return FImp(subst_formula(f.lhs, s), subst_formula(f.rhs, s))
    if isinstance(f, FIff):
        return FIff(subst_formula(f.lhs, s), subst_formula(f.rhs, s))
    if isinstance(f, (FAll, FEx)):
        cls = type(f)
        inner = {k: v for k, v in s.items() if k != f.var}
        if not inner:
            return f
        clash = any(occurs_in(f.var, t) for t in inner.values())
        var, sub = f.var, f.sub
        if clash:
            new = fresh_name("v")
            sub = subst_formula(sub, {var: Var(new)})
            var = new
        return cls(var, subst_formula(sub, inner))
    if isinstance(f, FGfp):
        args = tuple(subst_term(t, s) for t in f.args)
        inner = {k: v for k, v in s.items() if k not in f.params}
        body = f.body
        params = f.params
        if inner:
            clash = [p for p in params if any(occurs_in(p, t) for t in inner.values())]
            if clash:
                ren = {p: Var(fresh_name("v")) for p in clash}
                body = subst_formula(body, ren)
                params = tuple(ren[p].name if p in ren else p for p in params)
            body = subst_formula(body, inner)
        return FGfp(f.pvar, params, body, args)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# predicate expressions and predicate substitutions


@dataclass(frozen=True)
class PredExpr:
    """lambda params. body"""

    params: tuple[str, ...]
    body: Formula

    @property
    def arity(self) -> int:
        return len(self.params)

    def apply(self, args: Sequence[Term]) -> Formula:
        if len(args) != len(self.params):
            raise ValueError(f"arity mismatch applying {self} to {args}")
        return subst_formula(self.body, dict(zip(self.params, args)))


def pred_true(arity: int) -> PredExpr:
    return PredExpr(tuple(fresh_name("v") for _ in range(arity)), TRUE)


def pred_false(arity: int) -> PredExpr:
    return PredExpr(tuple(fresh_name("v") for _ in range(arity)), FALSE)


PredSubst = Mapping[str, PredExpr]


def apply_pred_subst(f: Formula, ps: PredSubst) -> Formula:
    """Replace predicate-variable atoms by beta-reduced instances of ps."""
    if not ps:
        return f
    if isinstance(f, FAtom):
        if f.pvar and f.head in ps:
            return ps[f.head].apply(f.args)
        return f
    if isinstance(f, (FTrue, FFalse)):
        return f
    if isinstance(f, FNot):
        return FNot(apply_pred_subst(f.sub, ps))
    if isinstance(f, FAnd):
        return FAnd(tuple(apply_pred_subst(x, ps) for x in f.subs))
    if isinstance(f, FOr):
        return FOr(tuple(apply_pred_subst(x, ps) for x in f.subs))
    if isinstance(f, FImp):
        return FImp(apply_pred_subst(f.lhs, ps), apply_pred_subst(f.rhs, ps))
    if isinstance(f, FIff):
        return FIff(apply_pred_subst(f.lhs, ps), apply_pred_subst(f.rhs, ps))
    if isinstance(f, (FAll, FEx)):
        return type(f)(f.var, apply_pred_subst(f.sub, ps))
    if isinstance(f, FGfp):
        inner = {k: v for k, v in ps.items() if k != f.pvar}
        return FGfp(f.pvar, f.params, apply_pred_subst(f.body, inner), f.args)
    raise TypeError(f)


def apply_pred_subst_clause(c: Clause, ps: PredSubst) -> Formula:
    """Clauses are promoted to universally closed disjunctions."""
    return apply_pred_subst(clause_to_formula(c), ps)


def compose_pred_subst(tau: PredSubst, sigma: PredSubst) -> dict[str, PredExpr]:
    """The predicate substitution that first applies tau, then sigma."""
    out: dict[str, PredExpr] = {}
    for x, pe in tau.items():
        out[x] = PredExpr(pe.params, apply_pred_subst(pe.body, sigma))
    for x, pe in sigma.items():
        out.setdefault(x, pe)
    return out


# ---------------------------------------------------------------------------
# polarity


def pvar_polarities(f: Formula, sign: int = 1) -> dict[str, set[int]]:
    """Map each free predicate variable to the set of polarities (+1/-1) of its
    occurrences; implication and equivalence are unfolded."""
    out: dict[str, set[int]] = {}

    def merge(d: dict[str, set[int]]):
        for k, v in d.items():
            out.setdefault(k, set()).update(v)

    if isinstance(f, FAtom):
        if f.pvar:
            out[f.head] = {sign}
    elif isinstance(f, FNot):
        merge(pvar_polarities(f.sub, -sign))
    elif isinstance(f, (FAnd, FOr)):
        for s in f.subs:
            merge(pvar_polarities(s, sign))
    elif isinstance(f, FImp):
        merge(pvar_polarities(f.lhs, -sign))
        merge(pvar_polarities(f.rhs, sign))
    elif isinstance(f, FIff):
        merge(pvar_polarities(f.lhs, sign))
        merge(pvar_polarities(f.lhs, -sign))
        merge(pvar_polarities(f.rhs, sign))
        merge(pvar_polarities(f.rhs, -sign))
    elif isinstance(f, (FAll, FEx)):
        merge(pvar_polarities(f.sub, sign))
    elif isinstance(f, FGfp):
        body = pvar_polarities(f.body, sign)
        body.pop(f.pvar, None)
        merge(body)
    return out


# ---------------------------------------------------------------------------
# simplification


def _one_point_all(var: str, disjuncts: list[Formula]) -> Optional[Formula]:
    # forall v. (v != t | rest)  ~>  rest[v <- t]   (v not a proper subterm of t)
    for i, d in enumerate(disjuncts):
        if isinstance(d, FNot) and isinstance(d.sub, FAtom) and d.sub.head == EQ and not d.sub.pvar:
            a, b = d.sub.args
            for v, t in ((a, b), (b, a)):
                if isinstance(v, Var) and v.name == var and not is_proper_subterm_var(var, t):
                    rest = disjuncts[:i] + disjuncts[i + 1:]
                    return subst_formula(for_(*rest), {var: t})
    return None


def _one_point_ex(var: str, conjuncts: list[Formula]) -> Optional[Formula]:
    for i, d in enumerate(conjuncts):
        if isinstance(d, FAtom) and d.head == EQ and not d.pvar:
            a, b = d.args
            for v, t in ((a, b), (b, a)):
                if isinstance(v, Var) and v.name == var and not is_proper_subterm_var(var, t):
                    rest = conjuncts[:i] + conjuncts[i + 1:]
                    return subst_formula(fand(*rest), {var: t})
    return None


def simplify(f: Formula) -> Formula:
    """Equivalence-preserving cleanup: double negation, t=t, top/bottom
    absorption, vacuous quantifiers and the one-point rule."""
    for _ in range(64):
        g = _simplify1(f)
        if g == f:
            return g
        f = g
    return f


def _simplify1(f: Formula) -> Formula:
    if isinstance(f, (FTrue, FFalse)):
        return f
    if isinstance(f, FAtom):
        if f.head == EQ and not f.pvar and f.args[0] == f.args[1]:
            return TRUE
        return f
    if isinstance(f, FNot):
        s = _simplify1(f.sub)
        if isinstance(s, FNot):
            return s.sub
        if isinstance(s, FTrue):
            return FALSE
        if isinstance(s, FFalse):
            return TRUE
        # Negation-normal form: push the negation through the propositional
        # and quantifier structure.  Gfp applications stay opaque.
        if isinstance(s, FAnd):
            return FOr(tuple(FNot(x) for x in s.subs))
        if isinstance(s, FOr):
            return FAnd(tuple(FNot(x) for x in s.subs))
        if isinstance(s, FImp):
            return FAnd((s.lhs, FNot(s.rhs)))
        if isinstance(s, FAll):
            return FEx(s.var, FNot(s.sub))
        if isinstance(s, FEx):
            return FAll(s.var, FNot(s.sub))
        return FNot(s)
    if isinstance(f, FAnd):
        subs: list[Formula] = []
        for x in f.subs:
            x = _simplify1(x)
            if isinstance(x, FFalse):
                return FALSE
            if isinstance(x, FTrue):
                continue
            if isinstance(x, FAnd):
                subs.extend(x.subs)
            else:
                subs.append(x)
        dedup = list(dict.fromkeys(subs))
        return fand(*dedup)
    if isinstance(f, FOr):
        subs = []
        for x in f.subs:
            x = _simplify1(x)
            if isinstance(x, FTrue):
                return TRUE
            if isinstance(x, FFalse):
                continue
            if isinstance(x, FOr):
                subs.extend(x.subs)
            else:
                subs.append(x)
        dedup = list(dict.fromkeys(subs))
        return for_(*dedup)
    if isinstance(f, FImp):
        a, b = _simplify1(f.lhs), _simplify1(f.rhs)
        if isinstance(a, FTrue):
            return b
        if isinstance(a, FFalse) or isinstance(b, FTrue):
            return TRUE
        if isinstance(b, FFalse):
            return _simplify1(FNot(a))
        return FImp(a, b)
    if isinstance(f, FIff):
        a, b = _simplify1(f.lhs), _simplify1(f.rhs)
        if a == b:
            return TRUE
        if isinstance(a, FTrue):
            return b
        if isinstance(b, FTrue):
            return a
        if isinstance(a, FFalse):
            return _simplify1(FNot(b))
        if isinstance(b, FFalse):
            return _simplify1(FNot(a))
        return FIff(a, b)
    if isinstance(f, (FAll, FEx)):
        sub = _simplify1(f.sub)
        if isinstance(sub, (FTrue, FFalse)):
            return sub
        if f.var not in formula_free_vars(sub):
            return sub
        if isinstance(f, FAll):
            disjuncts = list(sub.subs) if isinstance(sub, FOr) else [sub]
            got = _one_point_all(f.var, disjuncts)
        else:
            conjuncts = list(sub.subs) if isinstance(sub, FAnd) else [sub]
            got = _one_point_ex(f.var, conjuncts)
        if got is not None:
            return _simplify1(got)
        return type(f)(f.var, sub)
    if isinstance(f, FGfp):
        body = _simplify1(f.body)
        if f.pvar not in formula_free_pvars(body):
            # the fixpoint variable is gone: the gfp is the body itself
            return _simplify1(subst_formula(body, dict(zip(f.params, f.args))))
        return FGfp(f.pvar, f.params, body, f.args)
    raise TypeError(f)


def simplify_pred_expr(pe: PredExpr) -> PredExpr:
    return PredExpr(pe.params, simplify(pe.body))


def canonical_pred_expr(pe: PredExpr) -> PredExpr:
    """Rename every bound name to a position-determined one (u0, u1, ... for
    first-order binders, Y0, Y1, ... for fixpoint relations).

    Witness construction mints globally fresh names, so two extractions of the
    same witness would otherwise print differently; output must depend only on
    the expression's structure."""
    counter = 0
    pcounter = 0

    def rename_term(t: Term, env: Mapping[str, str]) -> Term:
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        return App(t.fn, tuple(rename_term(a, env) for a in t.args))

    def fresh(env: dict) -> str:
        nonlocal counter
        name = f"u{counter}"
        counter += 1
        return name

    def walk(f: Formula, env: dict, penv: dict) -> Formula:
        nonlocal counter, pcounter
        if isinstance(f, (FTrue, FFalse)):
            return f
        if isinstance(f, FAtom):
            head = penv.get(f.head, f.head) if f.pvar else f.head
            return FAtom(head, tuple(rename_term(a, env) for a in f.args), f.pvar)
        if isinstance(f, FNot):
            return FNot(walk(f.sub, env, penv))
        if isinstance(f, (FAnd, FOr)):
            return type(f)(tuple(walk(s, env, penv) for s in f.subs))
        if isinstance(f, (FImp, FIff)):
            return type(f)(walk(f.lhs, env, penv), walk(f.rhs, env, penv))
        if isinstance(f, (FAll, FEx)):
            new = fresh(env)
            return type(f)(new, walk(f.sub, {**env, f.var: new}, penv))
        if isinstance(f, FGfp):
            args = tuple(rename_term(a, env) for a in f.args)
            newp = f"Y{pcounter}"
            pcounter += 1
            inner_env = dict(env)
            newparams = []
            for p in f.params:
                n = fresh(inner_env)
                inner_env[p] = n
                newparams.append(n)
            body = walk(f.body, inner_env, {**penv, f.pvar: newp})
            return FGfp(newp, tuple(newparams), body, args)
        raise TypeError(f)

    env: dict[str, str] = {}
    params = []
    for p in pe.params:
        n = f"u{counter}"
        counter += 1
        env[p] = n
        params.append(n)
    return PredExpr(tuple(params), walk(pe.body, env, {}))


# ---------------------------------------------------------------------------
# alpha-equality


def alpha_eq(f: Formula, g: Formula) -> bool:
    return _alpha_eq(f, g, {}, {})


def _alpha_eq(f: Formula, g: Formula, lm: dict, rm: dict) -> bool:
    if type(f) is not type(g):
        return False
    if isinstance(f, (FTrue, FFalse)):
        return True
    if isinstance(f, FAtom):
        return (
            f.head == g.head
            and f.pvar == g.pvar
            and len(f.args) == len(g.args)
            and all(_alpha_eq_term(a, b, lm, rm) for a, b in zip(f.args, g.args))
        )
    if isinstance(f, FNot):
        return _alpha_eq(f.sub, g.sub, lm, rm)
    if isinstance(f, (FAnd, FOr)):
        return len(f.subs) == len(g.subs) and all(
            _alpha_eq(a, b, lm, rm) for a, b in zip(f.subs, g.subs)
        )
    if isinstance(f, (FImp, FIff)):
        return _alpha_eq(f.lhs, g.lhs, lm, rm) and _alpha_eq(f.rhs, g.rhs, lm, rm)
    if isinstance(f, (FAll, FEx)):
        tag = f"b{len(lm)}"
        return _alpha_eq(f.sub, g.sub, {**lm, f.var: tag}, {**rm, g.var: tag})
    if isinstance(f, FGfp):
        if f.pvar != g.pvar or len(f.params) != len(g.params) or len(f.args) != len(g.args):
            return False
        if not all(_alpha_eq_term(a, b, lm, rm) for a, b in zip(f.args, g.args)):
            return False
        lm2, rm2 = dict(lm), dict(rm)
        for i, (p, q) in enumerate(zip(f.params, g.params)):
            lm2[p] = rm2[q] = f"p{len(lm)}_{i}"
        return _alpha_eq(f.body, g.body, lm2, rm2)
    raise TypeError(f)


def _alpha_eq_term(s: Term, t: Term, lm: dict, rm: dict) -> bool:
    if isinstance(s, Var) and isinstance(t, Var):
        return lm.get(s.name, s.name) == rm.get(t.name, t.name)
    if isinstance(s, App) and isinstance(t, App):
        return (
            s.fn == t.fn
            and len(s.args) == len(t.args)
            and all(_alpha_eq_term(a, b, lm, rm) for a, b in zip(s.args, t.args))
        )
    return False


def pred_expr_alpha_eq(p: PredExpr, q: PredExpr) -> bool:
    if p.arity != q.arity:
        return False
    fresh = [Var(fresh_name("v")) for _ in p.params]
    return alpha_eq(p.apply(fresh), q.apply(fresh))


# ---------------------------------------------------------------------------
def formula_has_gfp(f: Formula) -> bool:
    if isinstance(f, FGfp):
        return True
    if isinstance(f, FNot):
        return formula_has_gfp(f.sub)
    if isinstance(f, (FAnd, FOr)):
        return any(formula_has_gfp(s) for s in f.subs)
    if isinstance(f, (FImp, FIff)):
        return formula_has_gfp(f.lhs) or formula_has_gfp(f.rhs)
    if isinstance(f, (FAll, FEx)):
        return formula_has_gfp(f.sub)
    return False


# ---------------------------------------------------------------------------
# formula size and printing


def formula_size(f: Formula) -> int:
    """Every connective, quantifier, lambda/gfp binder and every predicate,
    function, constant and variable occurrence counts once."""
    if isinstance(f, (FTrue, FFalse)):
        return 1
    if isinstance(f, FAtom):
        return 1 + sum(_term_size(t) for t in f.args)
    if isinstance(f, FNot):
        return 1 + formula_size(f.sub)
    if isinstance(f, (FAnd, FOr)):
        if not f.subs:
            return 1
        return (len(f.subs) - 1) + sum(formula_size(s) for s in f.subs)
    if isinstance(f, (FImp, FIff)):
        return 1 + formula_size(f.lhs) + formula_size(f.rhs)
    if isinstance(f, (FAll, FEx)):
        return 2 + formula_size(f.sub)
    if isinstance(f, FGfp):
        return 2 + len(f.params) + formula_size(f.body) + sum(_term_size(t) for t in f.args)
    raise TypeError(f)


def _term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(_term_size(a) for a in t.args)


def pred_expr_size(pe: PredExpr) -> int:
    return 1 + len(pe.params) + formula_size(pe.body)


def formula_str(f: Formula) -> str:
    return _fstr(f, 0)


_PREC_IFF, _PREC_IMP, _PREC_OR, _PREC_AND, _PREC_UNIT = 0, 1, 2, 3, 4


def _paren(s: str, outer: int, inner: int) -> str:
    return f"({s})" if inner < outer else s


def _fstr(f: Formula, outer: int) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, FFalse):
        return "false"
    if isinstance(f, FAtom):
        if f.head == EQ and not f.pvar:
            return f"({term_str(f.args[0])} = {term_str(f.args[1])})"
        if not f.args:
            return f.head
        return f"{f.head}({','.join(term_str(a) for a in f.args)})"
    if isinstance(f, FNot):
        if isinstance(f.sub, FAtom) and f.sub.head == EQ and not f.sub.pvar:
            return f"({term_str(f.sub.args[0])} != {term_str(f.sub.args[1])})"
        return f"~{_fstr(f.sub, _PREC_UNIT)}"
    if isinstance(f, FAnd):
        return _paren(" /\\ ".join(_fstr(s, _PREC_AND) for s in f.subs), outer, _PREC_AND - 1)
    if isinstance(f, FOr):
        return _paren(" \\/ ".join(_fstr(s, _PREC_OR) for s in f.subs), outer, _PREC_OR - 1)
    if isinstance(f, FImp):
        return _paren(f"{_fstr(f.lhs, _PREC_IMP + 1)} -> {_fstr(f.rhs, _PREC_IMP)}", outer, _PREC_IMP)
    if isinstance(f, FIff):
        return _paren(f"{_fstr(f.lhs, _PREC_IFF + 1)} <-> {_fstr(f.rhs, _PREC_IFF + 1)}", outer, _PREC_IFF)
    if isinstance(f, FAll):
        return _paren(f"forall {f.var}. {_fstr(f.sub, _PREC_IFF)}", outer, _PREC_IFF)
    if isinstance(f, FEx):
        return _paren(f"exists {f.var}. {_fstr(f.sub, _PREC_IFF)}", outer, _PREC_IFF)
    if isinstance(f, FGfp):
        body = _fstr(f.body, _PREC_IFF)
        args = ",".join(term_str(t) for t in f.args)
        return f"(gfp {f.pvar} {' '.join(f.params)}. {body}) @ ({args})"
    raise TypeError(f)


def pred_expr_str(pe: PredExpr) -> str:
    params = " ".join(pe.params) if pe.params else "_"
    return f"lambda {params}. {_fstr(pe.body, _PREC_IFF)}"
