"""Command line entry point ``lks``.

Exit status is 0 on success, 1 when a verification finds a counterexample
(or a round trip fails), and 2 for usage, parse and semantic errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import linalg as la
from .chain import (
    PreparedChain,
    Transformation,
    inverse_chain,
    markov_chain,
)
from .dsl import Evaluator, Parser, parse_query, parse_system, roundtrip, serialize
from .errors import LinkError, ParseError, SemanticError
from .measurement import Probe, ProbePlan, probe, records, selection
from .process import Is, marginal
from .verify import SUITES, jsonable, run_suite


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data[: e.start].count(b"\n") + 1
        col = e.start - (data.rfind(b"\n", 0, e.start) + 1) + 1
        raise ParseError("input is not valid UTF-8", line, col) from None


_PLAIN = {"query", "variables", "flags", "shape"}


def _floatify(obj, key=None):
    """Replace rational strings by decimal ones, for display only."""
    if key in _PLAIN:
        return obj
    if isinstance(obj, dict):
        return {k: _floatify(v, k) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_floatify(v) for v in obj]
    if isinstance(obj, str):
        try:
            return repr(float(Fraction(obj)))
        except (ValueError, ZeroDivisionError):
            return obj
    return obj


def _show(x, as_float: bool) -> str:
    return repr(float(x)) if as_float else str(x)


def _emit(obj, as_json: bool, text: str):
    if as_json:
        print(json.dumps(jsonable(obj), indent=2))
    else:
        print(text)


def _literal(text: str):
    """A rational vector or matrix, as JSON or in the document notation."""
    try:
        data = json.loads(text)
    except ValueError:
        p = Parser(text)
        data = p.rows() if _nested(p) else tuple(p.seq(p.rational))
        if p.tok.kind != "EOF":
            p.error(["end of input"])
        return data
    try:
        if data and isinstance(data[0], list):
            return la.matrix(data)
        return la.vector(data)
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad literal: {e}") from None


def _nested(p: Parser) -> bool:
    toks = p.tokens
    return len(toks) > 1 and toks[0].text == "[" and toks[1].text == "["


def _fmt_value(value) -> str:
    if isinstance(value, list) and value and isinstance(value[0], list):
        return "\n".join("  " + "  ".join(row) for row in value)
    if isinstance(value, list):
        return " ".join(value)
    return str(value)


def _fmt_result(r: dict) -> str:
    flags = f" [{', '.join(r['flags'])}]" if r["flags"] else ""
    value = _fmt_value(r["value"]) if r["value"] is not None else "undefined"
    sep = "\n" if "\n" in value else " "
    return f"{r['query']}:{sep}{value}  (total {r['total']}){flags}"


# -- commands -----------------------------------------------------------------


def cmd_eval(args) -> int:
    system = parse_system(_read(args.file))
    ev = Evaluator(system)
    if args.query:
        results = [ev.evaluate(parse_query(q)) for q in args.query]
    else:
        results = [ev.evaluate(q) for q in system.meta.get("queries", ())]
    if args.float:
        results = [_floatify(r) for r in results]
    payload = results[0] if len(results) == 1 else results
    _emit(payload, args.json, "\n".join(_fmt_result(r) for r in results))
    return 0


def cmd_chain(args) -> int:
    g = _literal(_read(args.gen))
    v = _literal(_read(args.init))
    if not g or not isinstance(g[0], tuple):
        raise UsageError("the generator must be a matrix")
    if args.steps < 0:
        raise UsageError("--steps must be nonnegative")
    if args.kind == "quantum":
        chain = PreparedChain((g,) * args.steps, v)
        dists = [chain.stage_distribution(t) for t in range(args.steps + 1)]
        states = [chain.stage_state(t).matrix for t in range(args.steps + 1)]
        out = {"query": "chain quantum", "value": [[str(x) for x in d] for d in dists],
               "states": [la.format_matrix(s) for s in states],
               "total": str(chain.process().total), "flags": []}
        text = "\n".join(f"x{t}: {' '.join(_show(x, args.float) for x in d)}" for t, d in enumerate(dists))
    else:
        w = markov_chain(g, v, args.steps) if args.kind == "markov" else inverse_chain(g, v, args.steps)
        dists = [marginal(w, [n]).table for n in w.names]
        flags = [] if w.classical else ["negative-weights"]
        out = {"query": f"chain {args.kind}",
               "variables": list(w.names), "shape": list(w.shape),
               "value": [str(x) for x in w.table],
               "marginals": {n: [str(x) for x in d] for n, d in zip(w.names, dists)},
               "total": str(w.total), "flags": flags}
        text = "\n".join(f"{n}: {' '.join(_show(x, args.float) for x in d)}" for n, d in zip(w.names, dists))
    _emit(_floatify(out) if args.float else out, args.json, text)
    return 0


def chain_from_system(system) -> PreparedChain:
    """Read a prepared chain ``V -> G1 -> G2 ...`` off a link system.

    ``V`` is the only box without inputs; without one, the chain is unprepared
    and starts at the box that no link feeds.
    """
    boxes = {b.name: b for b in system.boxes}
    feeds = {l.first: l.second for l in system.links}
    starts = [b for b in system.boxes if b.n_inputs == 0]
    if len(starts) > 1:
        raise SemanticError("a chain has at most one box without inputs")
    if starts:
        v_box = starts[0]
        if len(v_box.process.variables) != 1:
            raise SemanticError(f"initial box {v_box.name} must have a single variable")
        initial = v_box.process.table
        head = v_box.process.names[0]
    else:
        fed = set(feeds.values())
        firsts = [b for b in system.boxes if b.inputs[0] not in fed]
        if len(firsts) != 1:
            raise SemanticError("cannot find the start of the chain")
        initial, head = None, None
    gens, used = [], set()
    current = feeds.get(head) if head else firsts[0].inputs[0]
    while current is not None:
        owner = next((b for b in system.boxes if current in b.inputs), None)
        if owner is None or owner.name in used:
            raise SemanticError(f"{current} does not lead into a chain step")
        if len(owner.process.variables) != 2 or owner.n_inputs != 1:
            raise SemanticError(f"chain step {owner.name} must have one input and one output")
        used.add(owner.name)
        gens.append(Transformation.from_process(owner.process, owner.inputs[0], owner.outputs[0]).table)
        current = feeds.get(owner.outputs[0])
    if len(used) + (1 if starts else 0) != len(boxes):
        raise SemanticError("some boxes are not on the chain")
    return PreparedChain(tuple(gens), initial)


def _parse_probe(text: str) -> Probe:
    stage, _, fmap = text.partition(":")
    try:
        t = int(stage)
        f = tuple(int(x) for x in fmap.split(",")) if fmap else None
    except ValueError:
        raise UsageError(f"bad probe {text!r}; expected t or t:f0,f1,...") from None
    return Probe(t, f)


def cmd_measure(args) -> int:
    chain = chain_from_system(parse_system(_read(args.file)))
    try:
        plan = ProbePlan(chain, [_parse_probe(p) for p in args.probe])
    except ValueError as e:
        raise UsageError(str(e)) from None
    w = records(probe(plan), plan)
    names = list(plan.record_names)
    for sel in args.select or ():
        var, _, val = sel.partition("=")
        if var not in names or not val.isdigit():
            raise UsageError(f"bad selection {sel!r}; expected one of {names}=VALUE")
        w = selection(w, Is(var, int(val)))
    tot = w.total
    flags = []
    if tot == 0:
        flags.append("null-normalizer")
    if not w.classical:
        flags.append("negative-weights")
    table = [str(x / tot) if tot else None for x in w.table]
    out = {"query": "measure " + " ".join(args.probe), "variables": names,
           "shape": list(w.shape), "value": table, "total": str(tot), "flags": flags}
    text = "\n".join(f"{dict(zip(names, case))}: {_show(x / tot, args.float) if tot else 'undefined'}"
                     for case, x in w.cases())
    _emit(_floatify(out) if args.float else out, args.json, text)
    return 0


def cmd_verify(args) -> int:
    if args.trials < 0:
        raise UsageError("--trials must be nonnegative")
    report = run_suite(args.suite, args.trials, args.seed, args.dims_max, args.workers)
    d = report.as_dict()
    if args.json or not report.ok:
        print(json.dumps(d, indent=2))
    else:
        print(f"{report.suite}: {report.passed} passed, {report.skipped} skipped, "
              f"{report.failed} failed of {report.trials}")
    return 0 if report.ok else 1


def cmd_parse(args) -> int:
    text = _read(args.file)
    if args.roundtrip:
        out, ok = roundtrip(text)
        sys.stdout.write(out)
        if not ok:
            print("round trip changed the system", file=sys.stderr)
            return 1
        return 0
    sys.stdout.write(serialize(parse_system(text)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lks", description="Exact link-system calculations.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate queries against a system file")
    p.add_argument("file")
    p.add_argument("--query", action="append", help="query text; repeatable")
    p.add_argument("--json", action="store_true")
    p.add_argument("--float", action="store_true", help="show numbers as decimals (display only)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("chain", help="build a Markov, inverse or prepared quantum chain")
    p.add_argument("--gen", required=True, help="file with the generator matrix")
    p.add_argument("--init", required=True, help="file with the initial vector")
    p.add_argument("--steps", required=True, type=int)
    p.add_argument("--kind", required=True, choices=["markov", "quantum", "inverse"])
    p.add_argument("--json", action="store_true")
    p.add_argument("--float", action="store_true", help="show numbers as decimals (display only)")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("measure", help="probe a prepared chain described in a system file")
    p.add_argument("file")
    p.add_argument("--probe", action="append", required=True, help="t or t:f0,f1,...; repeatable")
    p.add_argument("--select", action="append", help="rT=VALUE; repeatable")
    p.add_argument("--json", action="store_true")
    p.add_argument("--float", action="store_true", help="show numbers as decimals (display only)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("verify", help="run a randomized verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dims-max", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("parse", help="print the canonical form of a system file")
    p.add_argument("file")
    p.add_argument("--roundtrip", action="store_true")
    p.set_defaults(func=cmd_parse)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SemanticError, UsageError) as e:
        print(f"lks: {e}", file=sys.stderr)
        return 2
    except LinkError as e:
        print(f"lks: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
