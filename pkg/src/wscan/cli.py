"""Command-line front end: solve / check / encode-graph / replay / bench /
prove, with text and JSON output.

Exit codes for the pipeline commands: 0 solved and verified (or verification
not requested), 1 verification failed, 2 no derivation within the limits,
3 input error.  `prove`: 0 proved, 1 disproved, 2 unknown, 3 input error.
The WSCAN_TIMEOUT environment variable sets the default --timeout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional

from .logic import (
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
    lit_size,
    pred_expr_size,
    pred_expr_str,
)
from .problems import (
    ParseError,
    Problem,
    _clause_text,
    encode_graph,
    merge_theory,
    parse_formula,
    parse_graph,
    parse_problem,
    parse_witness,
    print_problem,
)
from .saturation import Derivation, ReplayError, SearchLimits, replay, search
from .verify import CheckReport, Disproved, Proved, Unknown, check_witness, prove
from .witness import FirstOrderUnavailable, LresBudgetExceeded, Witness, extract_witness


# ---------------------------------------------------------------------------
# JSON encoding of the syntax (constructor-shaped, parse-back equal)


def term_to_json(t: Term):
    if isinstance(t, Var):
        return {"type": "var", "name": t.name}
    return {"type": "app", "fn": t.fn, "args": [term_to_json(a) for a in t.args]}


def term_from_json(o) -> Term:
    if o["type"] == "var":
        return Var(o["name"])
    return App(o["fn"], tuple(term_from_json(a) for a in o["args"]))


def lit_to_json(l: Lit):
    return {
        "type": "lit",
        "pos": l.pos,
        "head": l.head,
        "args": [term_to_json(a) for a in l.args],
        "pvar": l.pvar,
    }


def lit_from_json(o) -> Lit:
    return Lit(o["pos"], o["head"], tuple(term_from_json(a) for a in o["args"]), o["pvar"])


def clause_to_json(c: Clause):
    return {"type": "clause", "lits": [lit_to_json(l) for l in c.lits]}


def clause_from_json(o) -> Clause:
    return Clause.make([lit_from_json(l) for l in o["lits"]])


def formula_to_json(f: Formula):
    if isinstance(f, FTrue):
        return {"type": "true"}
    if isinstance(f, FFalse):
        return {"type": "false"}
    if isinstance(f, FAtom):
        return {
            "type": "atom",
            "head": f.head,
            "args": [term_to_json(a) for a in f.args],
            "pvar": f.pvar,
        }
    if isinstance(f, FNot):
        return {"type": "not", "sub": formula_to_json(f.sub)}
    if isinstance(f, FAnd):
        return {"type": "and", "subs": [formula_to_json(s) for s in f.subs]}
    if isinstance(f, FOr):
        return {"type": "or", "subs": [formula_to_json(s) for s in f.subs]}
    if isinstance(f, FImp):
        return {"type": "imp", "lhs": formula_to_json(f.lhs), "rhs": formula_to_json(f.rhs)}
    if isinstance(f, FIff):
        return {"type": "iff", "lhs": formula_to_json(f.lhs), "rhs": formula_to_json(f.rhs)}
    if isinstance(f, FAll):
        return {"type": "all", "var": f.var, "sub": formula_to_json(f.sub)}
    if isinstance(f, FEx):
        return {"type": "ex", "var": f.var, "sub": formula_to_json(f.sub)}
    if isinstance(f, FGfp):
        return {
            "type": "gfp",
            "pvar": f.pvar,
            "params": list(f.params),
            "body": formula_to_json(f.body),
            "args": [term_to_json(a) for a in f.args],
        }
    raise TypeError(f)


def formula_from_json(o) -> Formula:
    k = o["type"]
    if k == "true":
        return FTrue()
    if k == "false":
        return FFalse()
    if k == "atom":
        return FAtom(o["head"], tuple(term_from_json(a) for a in o["args"]), o["pvar"])
    if k == "not":
        return FNot(formula_from_json(o["sub"]))
    if k == "and":
        return FAnd(tuple(formula_from_json(s) for s in o["subs"]))
    if k == "or":
        return FOr(tuple(formula_from_json(s) for s in o["subs"]))
    if k == "imp":
        return FImp(formula_from_json(o["lhs"]), formula_from_json(o["rhs"]))
    if k == "iff":
        return FIff(formula_from_json(o["lhs"]), formula_from_json(o["rhs"]))
    if k == "all":
        return FAll(o["var"], formula_from_json(o["sub"]))
    if k == "ex":
        return FEx(o["var"], formula_from_json(o["sub"]))
    if k == "gfp":
        return FGfp(
            o["pvar"],
            tuple(o["params"]),
            formula_from_json(o["body"]),
            tuple(term_from_json(a) for a in o["args"]),
        )
    raise ValueError(f"unknown formula tag {k!r}")


def pred_expr_to_json(pe: PredExpr):
    return {"type": "lambda", "params": list(pe.params), "body": formula_to_json(pe.body)}


def pred_expr_from_json(o) -> PredExpr:
    return PredExpr(tuple(o["params"]), formula_from_json(o["body"]))


def witness_to_json(w: Witness):
    return {
        "bindings": {x: pred_expr_to_json(pe) for x, pe in sorted(w.psub.items())},
        "modes": [{"step": i, "note": note} for i, note in w.modes],
    }


def report_to_json(rep: CheckReport):
    return {
        "passed": rep.passed,
        "prover": [{"clause": i + 1, "result": r} for i, r in rep.prover],
        "models_checked": rep.models_checked,
        "failures": list(rep.failures),
        "notes": list(rep.notes),
    }


# ---------------------------------------------------------------------------
# output helpers


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _witness_lines(w: Witness) -> list[str]:
    return [f"{x} := {pred_expr_str(pe)}" for x, pe in sorted(w.psub.items())]


def _report_lines(rep: CheckReport) -> list[str]:
    status = "PASS" if rep.passed else "FAIL"
    proved = sum(1 for _, r in rep.prover if r == "proved")
    out = [
        f"verification: {status} (prover {proved}/{len(rep.prover)} clauses,"
        f" {rep.models_checked} models checked)"
    ]
    out.extend(f"  failure: {s}" for s in rep.failures)
    out.extend(f"  note: {s}" for s in rep.notes)
    return out


def _derivation_block(
    d: Derivation, w: Optional[Witness], rep: Optional[CheckReport], show_trace: bool
) -> tuple[list[str], dict]:
    lines: list[str] = []
    blob: dict = {}
    lines.append("conclusion:")
    for c in d.conclusion():
        lines.append(_clause_text(c))
    blob["conclusion"] = [clause_to_json(c) for c in d.conclusion()]
    blob["conclusion_text"] = [_clause_text(c) for c in d.conclusion()]
    if w is not None:
        lines.append("witness:")
        lines.extend(_witness_lines(w))
        blob["witness"] = witness_to_json(w)
        blob["witness_text"] = _witness_lines(w)
        if w.modes:
            lines.append("modes:")
            lines.extend(f"  step {i + 1}: {note}" for i, note in w.modes)
    if show_trace:
        lines.append("trace:")
        lines.extend(d.trace_lines())
        blob["trace"] = d.trace_lines()
    if rep is not None:
        lines.extend(_report_lines(rep))
        blob["verification"] = report_to_json(rep)
    else:
        lines.append("verification: skipped")
        blob["verification"] = None
    return lines, blob


def _emit(args, text_lines: list[str], blob) -> None:
    if args.format == "json":
        print(json.dumps(blob, indent=2, sort_keys=True))
    else:
        print("\n".join(text_lines))


# ---------------------------------------------------------------------------
# commands


def _load_problem(path: str) -> Problem:
    return merge_theory(parse_problem(Path(path).read_text(), origin=path))


def _limits(args) -> SearchLimits:
    return SearchLimits(max_steps=args.max_steps, timeout=args.timeout)


def _extract(args, d: Derivation) -> Witness:
    return extract_witness(
        d, mode=args.witness_mode, k_override=args.fo_k, lres_budget=args.lres_budget
    )


def cmd_solve(args) -> int:
    try:
        prob = _load_problem(args.problem)
        limits = _limits(args)
    except (ParseError, OSError, ValueError) as e:
        _err(str(e))
        return 3
    found: list[Derivation] = []
    for d in search(prob.clauses, prob.xvars, limits, seed=args.seed):
        found.append(d)
        if len(found) >= args.all:
            break
    if not found:
        _emit(args, ["no derivation within limits"], {"solved": False, "derivations": []})
        return 2
    code = 0
    lines: list[str] = []
    blocks = []
    for idx, d in enumerate(found, start=1):
        if len(found) > 1:
            lines.append(f"derivation {idx}:")
        try:
            w = _extract(args, d)
        except (FirstOrderUnavailable, LresBudgetExceeded) as e:
            lines.append(f"witness extraction failed: {e}")
            blocks.append({"error": str(e)})
            code = max(code, 2)
            continue
        rep = (
            check_witness(prob.clauses, prob.xvars, d.conclusion(), w, timeout=args.verify_timeout)
            if args.verify
            else None
        )
        if rep is not None and not rep.passed:
            code = max(code, 1)
        block_lines, blob = _derivation_block(d, w, rep, args.trace)
        lines.extend(block_lines)
        blocks.append(blob)
    _emit(args, lines, {"solved": True, "derivations": blocks})
    return code


def cmd_replay(args) -> int:
    try:
        prob = _load_problem(args.problem)
        trace = Path(args.trace_file).read_text()
    except (ParseError, OSError, ValueError) as e:
        _err(str(e))
        return 3
    try:
        d = replay(prob.clauses, prob.xvars, trace)
    except ReplayError as e:
        _err(f"invalid trace: {e}")
        return 3
    try:
        w = _extract(args, d)
    except (FirstOrderUnavailable, LresBudgetExceeded, ValueError) as e:
        _err(str(e))
        return 2
    rep = (
        check_witness(prob.clauses, prob.xvars, d.conclusion(), w, timeout=args.verify_timeout)
        if args.verify
        else None
    )
    lines, blob = _derivation_block(d, w, rep, args.trace)
    _emit(args, lines, blob)
    return 1 if rep is not None and not rep.passed else 0


def cmd_check(args) -> int:
    try:
        prob = _load_problem(args.problem)
        psub = parse_witness(Path(args.witness_file).read_text(), prob.xvars)
        missing = [x for x in prob.xvars if x not in psub]
        if missing:
            raise ParseError(f"witness has no binding for {', '.join(missing)}", 1, 1)
        conclusion = None
        if args.conclusion:
            conclusion = parse_problem(Path(args.conclusion).read_text()).clauses
    except (ParseError, OSError, ValueError) as e:
        _err(str(e))
        return 3
    if conclusion is None:
        d = next(iter(search(prob.clauses, prob.xvars, _limits(args), seed=args.seed)), None)
        if d is None:
            _emit(args, ["no derivation within limits"], {"solved": False})
            return 2
        conclusion = d.conclusion()
    w = Witness(dict(psub), ())
    rep = check_witness(prob.clauses, prob.xvars, conclusion, w, timeout=args.verify_timeout)
    lines = ["conclusion:"] + [_clause_text(c) for c in conclusion] + _report_lines(rep)
    blob = {
        "conclusion": [clause_to_json(c) for c in conclusion],
        "witness": witness_to_json(w),
        "verification": report_to_json(rep),
    }
    _emit(args, lines, blob)
    return 0 if rep.passed else 1


def cmd_encode_graph(args) -> int:
    try:
        g = parse_graph(Path(args.graph).read_text())
    except (ParseError, OSError) as e:
        _err(str(e))
        return 3
    sys.stdout.write(print_problem(encode_graph(g)))
    return 0


def cmd_prove(args) -> int:
    try:
        prob = parse_problem(Path(args.premises).read_text())
        goal = parse_formula(Path(args.goal).read_text(), prob.xvars)
    except (ParseError, OSError) as e:
        _err(str(e))
        return 3
    got = prove(prob.clauses, goal, timeout=args.timeout)
    if isinstance(got, Proved):
        lines = ["proved"]
        for r in got.steps:
            src = r.rule if r.rule == "input" else f"{r.rule} {' '.join(map(str, r.premises))}"
            lines.append(f"{r.id}. {_clause_text(r.clause)}  [{src}]")
        blob = {
            "result": "proved",
            "steps": [
                {
                    "id": r.id,
                    "rule": r.rule,
                    "premises": list(r.premises),
                    "clause": clause_to_json(r.clause),
                }
                for r in got.steps
            ],
        }
        _emit(args, lines, blob)
        return 0
    if isinstance(got, Disproved):
        _emit(
            args,
            [f"disproved: countermodel {got.model.describe()}"],
            {"result": "disproved", "model": got.model.describe()},
        )
        return 1
    assert isinstance(got, Unknown)
    _emit(args, [f"unknown: {got.note}"], {"result": "unknown", "note": got.note})
    return 2


def _input_size(prob: Problem) -> int:
    return sum(lit_size(l) for c in prob.clauses for l in c.lits)


def _bench_one(path: str, args) -> dict:
    row = {
        "problem": Path(path).name,
        "input_size": "",
        "solved": "no",
        "derivation_len": "",
        "scan_ms": "",
        "witness_ms": "",
        "witness_size": "",
        "verification": "",
    }
    try:
        prob = _load_problem(path)
    except (ParseError, OSError, ValueError) as e:
        row["verification"] = f"input error: {e}"
        return row
    row["input_size"] = _input_size(prob)
    t0 = time.perf_counter()
    try:
        d = next(iter(search(prob.clauses, prob.xvars, _limits(args), seed=args.seed)), None)
    except Exception as e:  # a bench row must never kill the run
        row["verification"] = f"search error: {e}"
        return row
    scan_ms = (time.perf_counter() - t0) * 1000.0
    if d is None:
        row["scan_ms"] = round(scan_ms, 1)
        return row
    row["solved"] = "yes"
    row["derivation_len"] = len(d.steps)
    row["scan_ms"] = round(scan_ms, 1)
    t1 = time.perf_counter()
    try:
        w = _extract(args, d)
    except (FirstOrderUnavailable, LresBudgetExceeded) as e:
        row["verification"] = f"witness error: {e}"
        return row
    row["witness_ms"] = round((time.perf_counter() - t1) * 1000.0, 1)
    row["witness_size"] = sum(pred_expr_size(pe) for pe in w.psub.values())
    if args.verify:
        rep = check_witness(prob.clauses, prob.xvars, d.conclusion(), w, timeout=args.verify_timeout)
        row["verification"] = "PASS" if rep.passed else "FAIL"
    else:
        row["verification"] = "skipped"
    return row


_BENCH_COLS = [
    "problem",
    "input_size",
    "solved",
    "derivation_len",
    "scan_ms",
    "witness_ms",
    "witness_size",
    "verification",
]


def _aggregate(rows: list[dict]) -> list[dict]:
    num_cols = ["input_size", "derivation_len", "scan_ms", "witness_ms", "witness_size"]
    out = []
    for name, fn in (("min", min), ("max", max), ("mean", None)):
        agg = {c: "" for c in _BENCH_COLS}
        agg["problem"] = name
        for col in num_cols:
            vals = [r[col] for r in rows if isinstance(r[col], (int, float))]
            if not vals:
                continue
            agg[col] = round(sum(vals) / len(vals), 1) if fn is None else fn(vals)
        agg["solved"] = sum(1 for r in rows if r["solved"] == "yes") if name == "max" else ""
        out.append(agg)
    return out


def cmd_bench(args) -> int:
    paths = sorted(str(p) for p in Path(args.directory).glob("*.wscan"))
    if args.jobs > 1 and paths:
        import concurrent.futures

        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_bench_one, paths, [args] * len(paths)))
    else:
        rows = [_bench_one(p, args) for p in paths]
    aggs = _aggregate(rows) if rows else []
    if args.format == "json":
        print(json.dumps({"rows": rows, "aggregates": aggs}, indent=2, sort_keys=True))
    else:
        import csv

        wtr = csv.DictWriter(sys.stdout, fieldnames=_BENCH_COLS)
        wtr.writeheader()
        for r in rows + aggs:
            wtr.writerow(r)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sp, verify_default: bool = False) -> None:
    env_timeout = float(os.environ.get("WSCAN_TIMEOUT", "10"))
    sp.add_argument("--max-steps", type=int, default=50)
    sp.add_argument("--timeout", type=float, default=env_timeout)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument(
        "--witness-mode",
        choices=["auto", "first-order", "fixpoint", "resolution"],
        default="auto",
    )
    sp.add_argument("--fo-k", type=int, default=None)
    sp.add_argument("--lres-budget", type=int, default=512)
    sp.add_argument("--verify", action="store_true", default=verify_default)
    sp.add_argument("--verify-timeout", type=float, default=30.0)
    sp.add_argument("--format", choices=["text", "json"], default="text")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wscan", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="eliminate the declared predicate variables")
    sp.add_argument("problem")
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--all", type=int, default=1, metavar="N")
    _add_common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("replay", help="replay a recorded trace and extract its witness")
    sp.add_argument("problem")
    sp.add_argument("trace_file")
    sp.add_argument("--trace", action="store_true")
    _add_common(sp)
    sp.set_defaults(fn=cmd_replay)

    sp = sub.add_parser("check", help="check a witness file against a problem")
    sp.add_argument("problem")
    sp.add_argument("witness_file")
    sp.add_argument("conclusion", nargs="?", default=None)
    _add_common(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("encode-graph", help="encode a graph reachability spec as a problem")
    sp.add_argument("graph")
    sp.set_defaults(fn=cmd_encode_graph)

    sp = sub.add_parser("prove", help="run the refutation prover on premises and a goal")
    sp.add_argument("premises")
    sp.add_argument("goal")
    sp.add_argument("--timeout", type=float, default=float(os.environ.get("WSCAN_TIMEOUT", "10")))
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.set_defaults(fn=cmd_prove)

    sp = sub.add_parser("bench", help="run every *.wscan problem in a directory")
    sp.add_argument("directory")
    sp.add_argument("--jobs", type=int, default=1)
    _add_common(sp, verify_default=False)
    sp.set_defaults(fn=cmd_bench)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
