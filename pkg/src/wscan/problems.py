"""Problem files, graph encodings, witness files, and the Ackermann fast path.

File format (line-oriented, `#` comments):

    exists X/1, Y/2.          predicate variables to eliminate
    theory B(a, ?v)           background-theory clause
    X(a) | ~B(?u, c)          ordinary clause; `|` separates literals
    a != c.                   equality/disequality atoms; trailing `.` optional

Variables are `?`-prefixed; identifiers are `[A-Za-z_][A-Za-z0-9_]*`.  The
signature is inferred from use and arity conflicts are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .logic import (
    EQ,
    App,
    Clause,
    FAll,
    FAnd,
    FAtom,
    FEx,
    FFalse,
    FGfp,
    FIff,
    FImp,
    FNot,
    FOr,
    FTrue,
    Formula,
    Lit,
    PredExpr,
    Term,
    Var,
    canonical_pred_expr,
    forall,
    for_,
    lit_to_formula,
    simplify_pred_expr,
)
from .witness import Witness


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# tokens


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'ident' | 'var' | 'num' | 'sym' | 'eof'
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\#[^\n]*)
      | (?P<nl>\n)
      | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<num>\d+)
      | (?P<sym><->|->|!=|:=|/\\|\\/|[=~|(),./@])
    """,
    re.X,
)


def _tokens(text: str, keep_newlines: bool = False) -> list[_Tok]:
    out: list[_Tok] = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            if keep_newlines:
                out.append(_Tok("nl", "\n", line, pos - start + 1))
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(_Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: Optional[str] = None) -> _Tok:
        t = self.peek()
        if not self.at(kind, text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)


# ---------------------------------------------------------------------------
# problems


@dataclass
class Problem:
    """Clauses in file order (ids in traces are 1-based positions), the
    predicate variables to eliminate with their arities, indices of
    background-theory clauses, and the inferred signature."""

    clauses: tuple[Clause, ...]
    xvars: dict[str, int]
    theory: frozenset[int] = frozenset()
    funcs: dict[str, int] = field(default_factory=dict)
    preds: dict[str, int] = field(default_factory=dict)
    origin: str = "text"

    def __post_init__(self):
        for i in self.theory:
            c = self.clauses[i]
            if any(l.pvar for l in c.lits):
                raise ValueError(f"theory clause {i + 1} contains a predicate variable: {c}")


class _SigCheck:
    """Arity bookkeeping shared by the clause and formula parsers."""

    def __init__(self, xvars: Mapping[str, int]):
        self.xvars = dict(xvars)
        self.funcs: dict[str, int] = {}
        self.preds: dict[str, int] = {}

    def func(self, name: str, arity: int, tok: _Tok) -> None:
        if name in self.xvars:
            raise ParseError(f"predicate variable {name} used as a function symbol", tok.line, tok.col)
        if name in self.preds:
            raise ParseError(f"{name} used both as predicate and function", tok.line, tok.col)
        old = self.funcs.setdefault(name, arity)
        if old != arity:
            raise ParseError(f"arity conflict for {name}: {old} vs {arity}", tok.line, tok.col)

    def pred(self, name: str, arity: int, tok: _Tok) -> bool:
        """Returns True when the head is a declared predicate variable."""
        if name in self.xvars:
            if self.xvars[name] != arity:
                raise ParseError(
                    f"arity conflict for {name}: declared /{self.xvars[name]}, used /{arity}",
                    tok.line,
                    tok.col,
                )
            return True
        if name in self.funcs:
            raise ParseError(f"{name} used both as function and predicate", tok.line, tok.col)
        old = self.preds.setdefault(name, arity)
        if old != arity:
            raise ParseError(f"arity conflict for {name}: {old} vs {arity}", tok.line, tok.col)
        return False


def _parse_term(p: _Parser, sig: _SigCheck) -> Term:
    t = p.peek()
    if t.kind == "var":
        p.next()
        return Var(t.text[1:])
    if t.kind == "ident":
        p.next()
        args: list[Term] = []
        if p.at("sym", "("):
            p.next()
            args.append(_parse_term(p, sig))
            while p.at("sym", ","):
                p.next()
                args.append(_parse_term(p, sig))
            p.expect("sym", ")")
        sig.func(t.text, len(args), t)
        return App(t.text, tuple(args))
    raise p.error(f"expected a term, found {t.text!r}")


def _parse_literal(p: _Parser, sig: _SigCheck) -> Lit:
    pos = True
    if p.at("sym", "~"):
        p.next()
        pos = False
    t = p.peek()
    # an atom is either  head(args)  /  head  with an uppercase-or-any ident,
    # or  term (= | !=) term; disambiguate by looking past the first term.
    if t.kind == "ident":
        save = p.i
        name_tok = p.next()
        args: list[Term] = []
        if p.at("sym", "("):
            p.next()
            # could still be a term followed by = ; parse args tentatively
            args.append(_parse_term(p, sig))
            while p.at("sym", ","):
                p.next()
                args.append(_parse_term(p, sig))
            p.expect("sym", ")")
        if p.at("sym", "=") or p.at("sym", "!="):
            p.i = save  # it was the left-hand term of an equation
        else:
            pvar = sig.pred(name_tok.text, len(args), name_tok)
            return Lit(pos, name_tok.text, tuple(args), pvar)
    lhs = _parse_term(p, sig)
    if p.at("sym", "="):
        p.next()
        rhs = _parse_term(p, sig)
        return Lit(pos, EQ, (lhs, rhs))
    if p.at("sym", "!="):
        if not pos:
            raise p.error("~ cannot negate a disequation; write =")
        p.next()
        rhs = _parse_term(p, sig)
        return Lit(False, EQ, (lhs, rhs))
    raise p.error("expected = or != after a term")


def _parse_clause_line(p: _Parser, sig: _SigCheck) -> Clause:
    lits = [_parse_literal(p, sig)]
    while p.at("sym", "|"):
        p.next()
        lits.append(_parse_literal(p, sig))
    if p.at("sym", "."):
        p.next()
    return Clause.make(lits)


def parse_problem(text: str, origin: str = "text") -> Problem:
    """Parse the clause file format; raises ParseError with line/column."""
    lines = text.split("\n")
    xvars: dict[str, int] = {}
    # first pass: `exists` directives, so declarations may follow uses
    for ln, raw in enumerate(lines, start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped.startswith("exists"):
            continue
        p = _Parser(_tokens(raw.split("#", 1)[0]))
        for t in p.toks:
            object.__setattr__(t, "line", ln)
        p.expect("ident", "exists")
        while True:
            name = p.expect("ident")
            p.expect("sym", "/")
            arity = int(p.expect("num").text)
            if name.text in xvars and xvars[name.text] != arity:
                raise ParseError(
                    f"arity conflict for {name.text}: declared /{xvars[name.text]} and /{arity}",
                    ln,
                    name.col,
                )
            xvars[name.text] = arity
            if p.at("sym", ","):
                p.next()
                continue
            break
        if p.at("sym", "."):
            p.next()
        if not p.at("eof"):
            raise ParseError(f"trailing input after exists directive", ln, p.peek().col)
    sig = _SigCheck(xvars)
    clauses: list[Clause] = []
    theory: set[int] = set()
    for ln, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        if not body.strip() or body.strip().startswith("exists"):
            continue
        p = _Parser(_tokens(body))
        for t in p.toks:
            object.__setattr__(t, "line", ln)
        is_theory = False
        if p.at("ident", "theory"):
            p.next()
            is_theory = True
        c = _parse_clause_line(p, sig)
        if not p.at("eof"):
            raise ParseError(f"trailing input after clause", ln, p.peek().col)
        if is_theory:
            if any(l.pvar for l in c.lits):
                raise ParseError("theory clause contains a predicate variable", ln, 1)
            theory.add(len(clauses))
        clauses.append(c)
    return Problem(tuple(clauses), xvars, frozenset(theory), sig.funcs, sig.preds, origin)


def print_problem(p: Problem) -> str:
    out = []
    if p.xvars:
        decls = ", ".join(f"{x}/{k}" for x, k in p.xvars.items())
        out.append(f"exists {decls}.")
    for i, c in enumerate(p.clauses):
        prefix = "theory " if i in p.theory else ""
        out.append(prefix + _clause_text(c))
    return "\n".join(out) + "\n"


def _term_text(t: Term) -> str:
    if isinstance(t, Var):
        return f"?{t.name}"
    if not t.args:
        return t.fn
    return f"{t.fn}({', '.join(_term_text(a) for a in t.args)})"


def _lit_text(l: Lit) -> str:
    if l.is_eq:
        op = "=" if l.pos else "!="
        return f"{_term_text(l.args[0])} {op} {_term_text(l.args[1])}"
    neg = "" if l.pos else "~"
    if not l.args:
        return f"{neg}{l.head}"
    return f"{neg}{l.head}({', '.join(_term_text(a) for a in l.args)})"


def _clause_text(c: Clause) -> str:
    if not c.lits:
        return "false"  # the empty clause has no literal syntax; never printed in problems
    return " | ".join(_lit_text(l) for l in c.lits)


def merge_theory(p: Problem) -> Problem:
    """Fold the background theory into the ordinary clause set.  Ids are
    positional, so this only clears the theory marking."""
    for i in p.theory:
        if any(l.pvar for l in p.clauses[i].lits):
            raise ValueError("theory clause contains a predicate variable")
    return replace(p, theory=frozenset())


# ---------------------------------------------------------------------------
# graph reachability encoding


@dataclass(frozen=True)
class GraphSpec:
    nodes: int
    edges: tuple[tuple[int, int], ...]
    init: tuple[int, ...]
    fail: tuple[int, ...]

    def __post_init__(self):
        ok = range(1, self.nodes + 1)
        for i, j in self.edges:
            if i not in ok or j not in ok:
                raise ValueError(f"edge ({i},{j}) out of range 1..{self.nodes}")
        for i in self.init + self.fail:
            if i not in ok:
                raise ValueError(f"node {i} out of range 1..{self.nodes}")


def parse_graph(text: str) -> GraphSpec:
    nodes = None
    edges: list[tuple[int, int]] = []
    init: list[int] = []
    fail: list[int] = []
    for ln, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        try:
            nums = [int(x) for x in parts[1:]]
        except ValueError:
            raise ParseError(f"expected numbers after {parts[0]!r}", ln, 1)
        if parts[0] == "nodes" and len(nums) == 1:
            nodes = nums[0]
        elif parts[0] == "edge" and len(nums) == 2:
            edges.append((nums[0], nums[1]))
        elif parts[0] == "init":
            init.extend(nums)
        elif parts[0] == "fail":
            fail.extend(nums)
        else:
            raise ParseError(f"unknown graph directive {body!r}", ln, 1)
    if nodes is None:
        raise ParseError("missing `nodes <n>` line", 1, 1)
    try:
        return GraphSpec(nodes, tuple(edges), tuple(init), tuple(fail))
    except ValueError as e:
        raise ParseError(str(e), 1, 1)


def encode_graph(g: GraphSpec) -> Problem:
    """Axiomatize the graph (node distinctness, full positive/negative edge
    diagram, domain closure) as theory clauses, plus the reachability clauses:
    X holds at initial nodes, fails at fail nodes, and propagates along edges."""
    a = {i: App(f"a{i}", ()) for i in range(1, g.nodes + 1)}
    u, v = Var("u"), Var("v")
    clauses: list[Clause] = []
    for i in range(1, g.nodes + 1):
        for j in range(i + 1, g.nodes + 1):
            clauses.append(Clause.make([Lit(False, EQ, (a[i], a[j]))]))
    edges = set(g.edges)
    for (i, j) in sorted(edges):
        clauses.append(Clause.make([Lit(True, "E", (a[i], a[j]))]))
    for i in range(1, g.nodes + 1):
        for j in range(1, g.nodes + 1):
            if (i, j) not in edges:
                clauses.append(Clause.make([Lit(False, "E", (a[i], a[j]))]))
    clauses.append(Clause.make([Lit(True, EQ, (u, a[i])) for i in range(1, g.nodes + 1)]))
    theory = frozenset(range(len(clauses)))
    for i in sorted(set(g.init)):
        clauses.append(Clause.make([Lit(True, "X", (a[i],), pvar=True)]))
    for i in sorted(set(g.fail)):
        clauses.append(Clause.make([Lit(False, "X", (a[i],), pvar=True)]))
    clauses.append(
        Clause.make(
            [
                Lit(False, "X", (u,), pvar=True),
                Lit(False, "E", (u, v)),
                Lit(True, "X", (v,), pvar=True),
            ]
        )
    )
    funcs = {f"a{i}": 0 for i in range(1, g.nodes + 1)}
    return Problem(tuple(clauses), {"X": 1}, theory, funcs, {"E": 2}, origin="graph")


# ---------------------------------------------------------------------------
# Ackermann fast path


def ackermann_witness(p: Problem, x: str) -> Optional[Witness]:
    """When exactly one clause hosts x with a single negative occurrence over
    pairwise-distinct variable arguments and every other occurrence of x is
    positive, the direct substitution [x <- lambda u-bar. C] is a witness (dual
    for the flipped polarities).  Returns None when the pattern does not apply."""
    if x not in p.xvars:
        return None
    for wanted in (False, True):
        host: Optional[Clause] = None
        ok = True
        for c in p.clauses:
            xlits = [l for l in c.lits if l.pvar and l.head == x]
            bad = [l for l in xlits if l.pos == wanted]
            if not bad:
                continue
            if host is not None or len(bad) > 1 or len(xlits) > 1:
                ok = False
                break
            host = c
        if not ok or host is None:
            continue
        xlit = next(l for l in host.lits if l.pvar and l.head == x)
        if not all(isinstance(t, Var) for t in xlit.args):
            continue
        if len({t.name for t in xlit.args}) != len(xlit.args):
            continue
        rest = [l for l in host.lits if l != xlit]
        if any(l.pvar and l.head == x for l in rest):
            continue
        params = tuple(t.name for t in xlit.args)
        extra = sorted(set().union(*[{v for v in _lit_vars(l)} for l in rest]) - set(params)) if rest else []
        body: Formula = forall(extra, for_(*[lit_to_formula(l) for l in rest]))
        if wanted:  # single positive occurrence: the least admissible relation
            body = FNot(body)
        return Witness({x: canonical_pred_expr(simplify_pred_expr(PredExpr(params, body)))}, ())
    return None


def _lit_vars(l: Lit) -> set[str]:
    out: set[str] = set()
    stack = list(l.args)
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t.name)
        else:
            stack.extend(t.args)
    return out


# ---------------------------------------------------------------------------
# witness files and formula text


def _parse_formula(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Formula:
    return _parse_iff(p, sig, bound)


def _parse_iff(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Formula:
    lhs = _parse_imp(p, sig, bound)
    while p.at("sym", "<->"):
        p.next()
        lhs = FIff(lhs, _parse_imp(p, sig, bound))
    return lhs


def _parse_imp(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Formula:
    lhs = _parse_or(p, sig, bound)
    if p.at("sym", "->"):
        p.next()
        return FImp(lhs, _parse_imp(p, sig, bound))
    return lhs


def _parse_or(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Formula:
    subs = [_parse_and(p, sig, bound)]
    while p.at("sym", "\\/"):
        p.next()
        subs.append(_parse_and(p, sig, bound))
    return subs[0] if len(subs) == 1 else FOr(tuple(subs))


def _parse_and(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Formula:
    subs = [_parse_unary(p, sig, bound)]
    while p.at("sym", "/\\"):
        p.next()
        subs.append(_parse_unary(p, sig, bound))
    return subs[0] if len(subs) == 1 else FAnd(tuple(subs))


def _parse_unary(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Formula:
    if p.at("sym", "~"):
        p.next()
        return FNot(_parse_unary(p, sig, bound))
    if p.at("ident", "forall") or p.at("ident", "exists"):
        ctor = FAll if p.next().text == "forall" else FEx
        names = []
        while p.at("var") or (p.at("ident") and not p.at("sym", ".")):
            t = p.next()
            names.append(t.text[1:] if t.kind == "var" else t.text)
        p.expect("sym", ".")
        body = _parse_formula(p, sig, bound + tuple(names))
        for n in reversed(names):
            body = ctor(n, body)
        return body
    if p.at("ident", "gfp"):
        return _parse_gfp(p, sig, bound)
    if p.at("ident", "true"):
        p.next()
        return FTrue()
    if p.at("ident", "false"):
        p.next()
        return FFalse()
    if p.at("sym", "("):
        save = p.i
        p.next()
        if p.at("ident", "gfp"):
            g = _parse_gfp(p, sig, bound)
            p.expect("sym", ")")
            if p.at("sym", "@"):  # application args follow the closing paren
                p.next()
                p.expect("sym", "(")
                args: list[Term] = []
                if not p.at("sym", ")"):
                    args.append(_parse_term_b(p, sig, bound))
                    while p.at("sym", ","):
                        p.next()
                        args.append(_parse_term_b(p, sig, bound))
                p.expect("sym", ")")
                return FGfp(g.pvar, g.params, g.body, tuple(args))
            return g
        f = _parse_formula(p, sig, bound)
        # `(term ...` is also possible: fall back to atom parsing on failure paths
        p.expect("sym", ")")
        return f
    return _parse_atom(p, sig, bound)


def _parse_gfp(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> FGfp:
    p.expect("ident", "gfp")
    yname = p.expect("ident").text
    params = []
    while p.at("var") or (p.at("ident") and not p.at("sym", ".")):
        t = p.next()
        params.append(t.text[1:] if t.kind == "var" else t.text)
    p.expect("sym", ".")
    inner = _SigCheck(dict(sig.xvars, **{yname: len(params)}))
    inner.funcs, inner.preds = sig.funcs, sig.preds  # share tables
    body = _parse_formula(p, inner, bound + tuple(params))
    return FGfp(yname, tuple(params), body, ())


def _parse_term_b(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Term:
    """Terms in formula position: bare identifiers that are lambda/quantifier
    bound count as variables, so hand-written files need no `?` marks."""
    t = p.peek()
    if t.kind == "var":
        p.next()
        return Var(t.text[1:])
    if t.kind == "ident":
        p.next()
        if not p.at("sym", "(") and t.text in bound:
            return Var(t.text)
        args: list[Term] = []
        if p.at("sym", "("):
            p.next()
            args.append(_parse_term_b(p, sig, bound))
            while p.at("sym", ","):
                p.next()
                args.append(_parse_term_b(p, sig, bound))
            p.expect("sym", ")")
        sig.func(t.text, len(args), t)
        return App(t.text, tuple(args))
    raise p.error(f"expected a term, found {t.text!r}")


def _parse_atom(p: _Parser, sig: _SigCheck, bound: tuple[str, ...]) -> Formula:
    t = p.peek()
    if t.kind == "ident" and t.text not in bound:
        save = p.i
        name_tok = p.next()
        args: list[Term] = []
        if p.at("sym", "("):
            p.next()
            args.append(_parse_term_b(p, sig, bound))
            while p.at("sym", ","):
                p.next()
                args.append(_parse_term_b(p, sig, bound))
            p.expect("sym", ")")
        if p.at("sym", "=") or p.at("sym", "!="):
            p.i = save
        else:
            pvar = sig.pred(name_tok.text, len(args), name_tok)
            return FAtom(name_tok.text, tuple(args), pvar)
    lhs = _parse_term_b(p, sig, bound)
    if p.at("sym", "="):
        p.next()
        return FAtom(EQ, (lhs, _parse_term_b(p, sig, bound)))
    if p.at("sym", "!="):
        p.next()
        return FNot(FAtom(EQ, (lhs, _parse_term_b(p, sig, bound))))
    raise p.error("expected = or != after a term")


def parse_formula(text: str, xvars: Optional[Mapping[str, int]] = None) -> Formula:
    """A single formula (used for prover goals); `#` comments allowed."""
    p = _Parser(_tokens(text))
    sig = _SigCheck(xvars or {})
    f = _parse_formula(p, sig, ())
    if p.at("sym", "."):
        p.next()
    if not p.at("eof"):
        raise p.error("trailing input after formula")
    return f


def parse_witness(text: str, xvars: Optional[Mapping[str, int]] = None) -> dict[str, PredExpr]:
    """Witness files:  one `X := lambda u v. <formula>` binding per line
    (0-ary bodies write `lambda _.`)."""
    out: dict[str, PredExpr] = {}
    sig = _SigCheck(xvars or {})
    for ln, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        p = _Parser(_tokens(body))
        for t in p.toks:
            object.__setattr__(t, "line", ln)
        name = p.expect("ident").text
        p.expect("sym", ":=")
        p.expect("ident", "lambda")
        params: list[str] = []
        while p.at("var") or (p.at("ident") and p.peek().text != "_"):
            t = p.next()
            params.append(t.text[1:] if t.kind == "var" else t.text)
        if p.at("ident", "_"):
            p.next()
        p.expect("sym", ".")
        f = _parse_formula(p, sig, tuple(params))
        if p.at("sym", "."):
            p.next()
        if not p.at("eof"):
            raise p.error("trailing input after witness binding")
        if xvars is not None and name in xvars and xvars[name] != len(params):
            raise ParseError(
                f"witness for {name} has {len(params)} parameters, expected {xvars[name]}",
                ln,
                1,
            )
        out[name] = PredExpr(tuple(params), f)
    return out
