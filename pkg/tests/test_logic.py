"""Terms, literals, clause canonicalization, and formula printing."""

import pytest
from hypothesis import given, strategies as st

from wscan.logic import (
    App,
    Clause,
    FAll,
    FAtom,
    FIff,
    FNot,
    Lit,
    PredExpr,
    Var,
    apply_pred_subst_clause,
    compose_pred_subst,
    const,
    formula_size,
    formula_str,
    fresh_vars,
    lit_size,
    lit_str,
    match_terms,
    mgu,
    pointed_make,
    pred_expr_str,
    rename_clause_apart,
    simplify,
    subst_term,
    term_str,
)

from conftest import cl

a, b, c = const("a"), const("b"), const("c")
u, v = Var("u"), Var("v")


def f(*args):
    return App("f", args)


def g(*args):
    return App("g", args)


def test_mgu_basic():
    assert mgu([(u, a)]) == {"u": a}
    assert mgu([(f(u), f(a))]) == {"u": a}
    assert mgu([(f(u), g(a))]) is None
    assert mgu([(u, f(u))]) is None  # occurs check
    s = mgu([(f(u, v), f(v, a))])
    assert subst_term(f(u, v), s) == subst_term(f(v, a), s)


def test_mgu_is_idempotent_on_chain():
    s = mgu([(u, v), (v, a)])
    assert subst_term(u, s) == a
    assert subst_term(v, s) == a


def test_match_is_one_way():
    assert match_terms((u,), (f(a),), {}) == {"u": f(a)}
    assert match_terms((f(a),), (u,), {}) is None
    assert match_terms((u, u), (a, b), {}) is None


@given(st.integers(0, 3))
def test_fresh_vars_are_distinct(n):
    vs = fresh_vars(n)
    assert len(set(vs)) == n


def test_clause_canonical_order():
    c1 = cl("X(?u) | B(?u) | ~X(?u) | a != b")
    kinds = [(l.is_eq, l.pvar) for l in c1.lits]
    # constraints first, then plain symbols, then the second-order literals
    assert kinds == [(True, False), (False, False), (False, True), (False, True)]
    neg_x, pos_x = c1.lits[2], c1.lits[3]
    assert not neg_x.pos and pos_x.pos


def test_clause_deduplicates():
    c1 = Clause.make([Lit(True, "B", (a,), False), Lit(True, "B", (a,), False)])
    assert len(c1.lits) == 1


def test_clause_renames_variables_canonically():
    c1 = cl("B(?x, ?y)")
    c2 = cl("B(?p, ?q)")
    assert c1 == c2
    assert [t.name for t in c1.lits[0].args] == ["u0", "u1"]


def test_equality_argument_orientation():
    # variables sort before compound terms; ground arguments keep name order
    c1 = cl("f(?u) != ?u")
    l = c1.lits[0]
    assert isinstance(l.args[0], Var)
    c2 = cl("c != a")
    assert term_str(c2.lits[0].args[0]) == "a"


def test_pointed_make_tracks_designated_literal():
    lits = [
        Lit(True, "X", (b,), True),
        Lit(False, "X", (u,), True),
        Lit(True, "B", (u,), False),
    ]
    clause, idx = pointed_make(lits, 1)
    assert clause.lits[idx] == Lit(False, "X", (Var("u0"),), True)


def test_rename_apart_preserves_literal_positions():
    c1 = cl("B(?u) | X(f(?u)) | ~X(?u)")
    r = rename_clause_apart(c1, avoid={"u0"})
    assert len(r.lits) == len(c1.lits)
    for old, new in zip(c1.lits, r.lits):
        assert old.pos == new.pos and old.head == new.head
    names = {t.name for l in r.lits for t in l.args if isinstance(t, Var)}
    assert "u0" not in names


def test_lit_size_ignores_equality_head():
    assert lit_size(Lit(False, "=", (a, b), False)) == 2
    assert lit_size(Lit(True, "B", (f(a),), False)) == 3


def test_lit_str_forms():
    assert lit_str(Lit(False, "=", (a, c), False)) == "a != c"
    assert lit_str(Lit(False, "X", (Var("u0"),), True)) == "~X(?u0)"


def test_formula_str_precedence():
    from wscan.logic import FAnd, FOr

    ba = FAtom("B", (a,))
    cb = FAtom("B", (b,))
    dc = FAtom("B", (c,))
    assert formula_str(FOr((FAnd((ba, cb)), dc))) == "B(a) /\\ B(b) \\/ B(c)"
    assert formula_str(FAnd((FOr((ba, cb)), dc))) == "(B(a) \\/ B(b)) /\\ B(c)"
    assert formula_str(FNot(FAnd((ba, cb)))) == "~(B(a) /\\ B(b))"
    # equality atoms always take parentheses so the infix never dangles
    eq = FAtom("=", (a, b))
    assert formula_str(FAnd((eq, dc))) == "(a = b) /\\ B(c)"


@pytest.mark.parametrize(
    "expr,expected",
    [
        (PredExpr(("u",), FAtom("=", (a, Var("u")))), "lambda u. (a = ?u)"),
        (PredExpr((), FAtom("B", (a,))), "lambda _. B(a)"),
    ],
)
def test_pred_expr_str(expr, expected):
    assert pred_expr_str(expr) == expected


def test_simplify_drops_constants():
    from wscan.logic import FAnd, FOr, FTrue, FFalse

    fm = FAnd((FTrue(), FAtom("B", (a,))))
    s = simplify(fm)
    assert s == FAtom("B", (a,))
    fm2 = FOr((FFalse(), FFalse()))
    assert simplify(fm2) == FFalse()


def test_apply_pred_subst_clause():
    w = {"X": PredExpr(("z",), FAtom("=", (a, Var("z"))))}
    c1 = cl("~X(c) | B(c)")
    fm = simplify(apply_pred_subst_clause(c1, w))
    text = formula_str(fm)
    assert "B(c)" in text and "a" in text and "c" in text


def test_compose_pred_subst_applies_later_bindings():
    inner = {"X": PredExpr(("z",), FAtom("X", (App("f", (Var("z"),)),), True))}
    outer = {"X": PredExpr(("y",), FAtom("B", (Var("y"),)))}
    combined = compose_pred_subst(inner, outer)
    body = combined["X"].body
    assert "B" in formula_str(body)
    assert "X" not in formula_str(body)


def test_formula_size_counts_connectives():
    fm = FAll("u", FIff(FAtom("B", (u,)), FAtom("C", (u, u))))
    # forall+bound var(2) + iff(1) + B-atom(1+1) + C-atom(1+2) = 8
    assert formula_size(fm) == 8
