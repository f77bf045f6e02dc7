"""Derivation search, trace replay, and the deletion side conditions."""

import pytest

from wscan.saturation import ReplayError, SearchLimits, replay, search

from conftest import cl, clauses_of

MAIN = "B(a, ?v)\nX(a)\nB(?u, ?v) | ~X(?u) | X(?v)\n~X(c)"


def solve(text, header="X/1", **kw):
    clauses = clauses_of(text, header)
    xar = {}
    for part in header.split(","):
        name, ar = part.strip().split("/")
        xar[name] = int(ar)
    return next(search(clauses, xar, SearchLimits(**kw)), None)


def test_search_solves_the_reachability_set():
    d = solve(MAIN)
    assert d is not None and d.eliminating()
    concl = set(d.conclusion())
    assert concl == {cl("B(a, ?v)"), cl("a != c")}


def test_search_trace_replays_to_the_same_derivation():
    d = solve(MAIN)
    text = "\n".join(d.trace_lines())
    clauses = clauses_of(MAIN)
    d2 = replay(clauses, {"X": 1}, text)
    assert d2.conclusion() == d.conclusion()
    assert d2.trace_lines() == d.trace_lines()


def test_search_is_deterministic_across_runs():
    t1 = "\n".join(solve(MAIN).trace_lines())
    t2 = "\n".join(solve(MAIN).trace_lines())
    assert t1 == t2


def test_search_returns_multiple_distinct_derivations():
    clauses = clauses_of(MAIN)
    gen = search(clauses, {"X": 1}, SearchLimits())
    seen = []
    for d in gen:
        seen.append(tuple(d.trace_lines()))
        if len(seen) == 3:
            break
    assert len(seen) == len(set(seen)) >= 2


def test_search_handles_two_second_order_variables():
    d = solve("X(a)\n~X(?u) | Y(?u)\n~Y(c)", header="X/1, Y/1")
    assert d is not None
    assert set(d.conclusion()) == {cl("a != c")}


def test_search_gives_up_on_unsolvable_instances():
    # X is forced to keep growing along f; with no deletions applicable the
    # search must terminate empty rather than loop
    d = solve("X(a)\n~X(?u) | X(f(?u))\n~X(?v) | B(?v)", timeout=3.0, max_steps=12)
    assert d is None or d.eliminating()


def test_replay_checks_resolution_indices():
    clauses = clauses_of(MAIN)
    with pytest.raises(ReplayError) as e:
        replay(clauses, {"X": 1}, "res 2.1 3.1 -> 5")
    assert "step 1" in str(e.value)


def test_replay_rejects_wrong_result_id():
    clauses = clauses_of(MAIN)
    with pytest.raises(ReplayError):
        replay(clauses, {"X": 1}, "res 2.1 4.1 -> 9")


def test_replay_rejects_unpurified_deletion():
    clauses = clauses_of(MAIN)
    # clause 3's negative X-literal is not purified before the resolvent exists
    with pytest.raises(ReplayError):
        replay(clauses, {"X": 1}, "purdel 2.1")


def test_replay_rejects_malformed_lines():
    clauses = clauses_of(MAIN)
    for bad in ("res 2.1 -> 5", "nonsense 1", "purdel 0.1", "res 2.9 4.1 -> 5"):
        with pytest.raises(ReplayError):
            replay(clauses, {"X": 1}, bad)


def test_replay_accepts_comments_and_blanks():
    clauses = clauses_of(MAIN)
    text = "# comment\n\n  res 2.1 4.1 -> 5\npurdel 2.1\nextpurdel X -\n"
    d = replay(clauses, {"X": 1}, text)
    assert d.eliminating()


def test_replay_extpurdel_needs_uniform_polarity():
    clauses = clauses_of(MAIN)
    with pytest.raises(ReplayError):
        replay(clauses, {"X": 1}, "extpurdel X -")
    with pytest.raises(ReplayError):
        replay(clauses, {"X": 1}, "extpurdel X +")


def test_replay_tautology_deletion():
    text = "X(?u) | ~X(?u)\nB(a)"
    clauses = clauses_of(text)
    d = replay(clauses, {"X": 1}, "redel 1 tautology\nextpurdel X -")
    assert d.eliminating()
    assert set(d.conclusion()) == {cl("B(a)")}
    with pytest.raises(ReplayError):
        replay(clauses, {"X": 1}, "redel 2 tautology")


def test_replay_subsumption_deletion():
    text = "B(a) | B(?u)\nB(?v)"
    clauses = clauses_of(text)
    d = replay(clauses, {"X": 1}, "redel 1 subsumed-by 2")
    assert set(d.conclusion()) == {cl("B(?v)")}
    with pytest.raises(ReplayError):
        replay(clauses, {"X": 1}, "redel 2 subsumed-by 1")


def test_purdel_blocked_when_only_cover_is_a_tautology():
    # the designated literal resolves against clause 1 into a tautology, and
    # tautologies do not count as covered, so the deletion must be refused
    text = (
        "X(a) | ~X(f(a))\n"
        "X(b)\n"
        "~X(c)\n"
        "B(b)\n"
        "~X(?v) | X(f(?v)) | B(?v)"
    )
    clauses = clauses_of(text)
    c5 = clauses[4]
    neg = next(i for i, l in enumerate(c5.lits) if l.pvar and not l.pos)
    with pytest.raises(ReplayError):
        replay(clauses, {"X": 1}, f"purdel 5.{neg + 1}")


def test_derivation_records_alive_sets():
    d = solve(MAIN)
    initial = d.alive_clauses(0)
    assert len(initial) == 4
    final = set(d.conclusion())
    assert final <= set(d.clauses.values())
