"""Problem text format, graph encoding, and the direct single-occurrence
substitution shortcut."""

import pathlib

import pytest

from wscan.logic import pred_expr_str
from wscan.problems import (
    GraphSpec,
    ParseError,
    ackermann_witness,
    encode_graph,
    merge_theory,
    parse_formula,
    parse_graph,
    parse_problem,
    parse_witness,
    print_problem,
)
from wscan.verify import FiniteModel, check_witness, soqe_holds

from conftest import cl

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "src" / "wscan" / "corpus"


def test_parse_round_trip_is_identity():
    for f in sorted(CORPUS.glob("*.wscan")):
        text = print_problem(parse_problem(f.read_text(), origin=f.name))
        again = print_problem(parse_problem(text, origin=f.name))
        assert text == again


def test_parse_collects_declarations():
    p = parse_problem("exists X/1, Y/2.\nX(a) | Y(a, b)\n", origin="t")
    assert p.xvars == {"X": 1, "Y": 2}
    assert p.funcs == {"a": 0, "b": 0}


def test_parse_rejects_arity_conflict():
    with pytest.raises(ParseError) as e:
        parse_problem("exists X/1.\nB(?u)\nB(?u, ?v)\n", origin="t")
    assert "line 3" in str(e.value)


def test_parse_rejects_undeclared_position_mixing():
    with pytest.raises(ParseError):
        parse_problem("exists X/1.\nB(X(a))\n", origin="t")


def test_parse_error_locations():
    with pytest.raises(ParseError) as e:
        parse_problem("exists X/1.\nB(a) |\n", origin="t")
    msg = str(e.value)
    assert "line 2" in msg


def test_parse_theory_marking():
    p = parse_problem("exists X/1.\ntheory B(a)\nX(a)\n", origin="t")
    assert p.theory == frozenset({0})
    merged = merge_theory(p)
    assert merged.theory == frozenset()
    assert set(merged.clauses) == set(p.clauses)


def test_theory_clause_may_not_use_second_order_variables():
    with pytest.raises(ParseError):
        parse_problem("exists X/1.\ntheory X(a)\n", origin="t")


def test_trailing_dot_optional():
    p1 = parse_problem("exists X/1.\nX(a).\n", origin="t")
    p2 = parse_problem("exists X/1.\nX(a)\n", origin="t")
    assert p1.clauses == p2.clauses


def test_declarations_may_follow_uses():
    text = "X(a)\nexists X/1.\n"
    p = parse_problem(text, origin="t")
    assert p.xvars == {"X": 1}


# -- graphs -------------------------------------------------------------------


def test_parse_graph_and_validation():
    g = parse_graph("nodes 3\nedge 1 2\ninit 1\nfail 3\n")
    assert g.nodes == 3 and g.edges == ((1, 2),)
    with pytest.raises(ParseError):
        parse_graph("nodes 2\nedge 1 5\n")
    with pytest.raises(ParseError):
        parse_graph("edge 1 2\n")


def test_encode_single_node_graph():
    p = encode_graph(GraphSpec(1, (), (1,), ()))
    body = print_problem(p)
    assert "~E(a1, a1)" in body
    assert "?u0 = a1" in body
    assert "X(a1)" in body
    assert "~X(?u1) | ~E(?u0, ?u1)" in body or "~E(?u0, ?u1) | ~X(?u0)" in body


def test_encode_overlapping_init_and_fail_still_encodes():
    p = encode_graph(GraphSpec(2, ((1, 2),), (1,), (1, 2)))
    body = print_problem(p)
    assert "X(a1)" in body and "~X(a1)" in body


def brute_reachable(g):
    reach = set(g.init)
    changed = True
    while changed:
        changed = False
        for (i, j) in g.edges:
            if i in reach and j not in reach:
                reach.add(j)
                changed = True
    return reach


def intended_model(g):
    funcs = {(f"a{i}", 0): {(): i - 1} for i in range(1, g.nodes + 1)}
    rels = {("E", 2): frozenset({(i - 1, j - 1) for (i, j) in g.edges})}
    return FiniteModel(g.nodes, funcs, rels)


@pytest.mark.parametrize("nodes", [1, 2, 3])
def test_graph_encoding_matches_reachability(nodes):
    """The encoded clause set is second-order satisfiable on the intended
    model exactly when no failure node is reachable from the initial ones."""
    import random

    rng = random.Random(nodes * 17)
    for _ in range(12):
        pairs = [(i, j) for i in range(1, nodes + 1) for j in range(1, nodes + 1)]
        edges = tuple(sorted(rng.sample(pairs, rng.randrange(0, len(pairs) + 1))))
        init = tuple(sorted(rng.sample(range(1, nodes + 1), rng.randrange(1, nodes + 1))))
        fail = tuple(sorted(rng.sample(range(1, nodes + 1), rng.randrange(1, nodes + 1))))
        g = GraphSpec(nodes, edges, init, fail)
        prob = merge_theory(encode_graph(g))
        m = intended_model(g)
        expected = not (brute_reachable(g) & set(g.fail))
        assert soqe_holds(m, list(prob.clauses), prob.xvars) == expected


# -- the single-occurrence shortcut -------------------------------------------


def test_ackermann_unary():
    p = merge_theory(parse_problem("exists X/1.\nX(a)\n~X(?u) | B(?u)\n", origin="t"))
    w = ackermann_witness(p, "X")
    assert w is not None
    assert pred_expr_str(w.psub["X"]).startswith("lambda ")
    assert "B(" in pred_expr_str(w.psub["X"])


def test_ackermann_not_applicable_when_recursive():
    p = merge_theory(parse_problem("exists X/1.\n~X(?u) | X(f(?u))\n", origin="t"))
    assert ackermann_witness(p, "X") is None


def test_ackermann_not_applicable_on_main_example():
    p = merge_theory(
        parse_problem(
            "exists X/1.\nB(a, ?v)\nX(a)\nB(?u, ?v) | ~X(?u) | X(?v)\n~X(c)\n",
            origin="t",
        )
    )
    assert ackermann_witness(p, "X") is None


def test_ackermann_witness_verifies():
    from wscan.saturation import SearchLimits, search

    text = "exists X/1.\nX(a)\n~X(?u) | B(?u)\n"
    p = merge_theory(parse_problem(text, origin="t"))
    w = ackermann_witness(p, "X")
    d = next(search(list(p.clauses), p.xvars, SearchLimits()), None)
    assert d is not None
    rep = check_witness(list(p.clauses), p.xvars, d.conclusion(), w, timeout=20.0)
    assert rep.passed


# -- formulas and witness files ----------------------------------------------


def test_parse_formula_precedence_and_quantifiers():
    f = parse_formula("forall u v. B(u) /\\ B(v) -> exists w. C(u, w)")
    from wscan.logic import FAll

    assert isinstance(f, FAll)


def test_parse_formula_gfp_application():
    f = parse_formula("(gfp Y u. Y(f(u))) @ (a)")
    from wscan.logic import FGfp

    assert isinstance(f, FGfp)


def test_parse_witness_binding():
    w = parse_witness("X := lambda u. u = a\n", xvars={"X": 1})
    assert set(w) == {"X"}
    assert pred_expr_str(w["X"]) == "lambda u. (?u = a)"


def test_parse_witness_rejects_wrong_arity():
    with pytest.raises(ParseError):
        parse_witness("X := lambda u v. B(u, v)\n", xvars={"X": 1})


def test_parse_witness_nullary():
    w = parse_witness("X := lambda _. false\n", xvars={"X": 0})
    assert pred_expr_str(w["X"]) == "lambda _. false"
