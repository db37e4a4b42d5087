"""Command-line interface.

Exit status is 0 on success, 1 when a query is not identified (the structured
result is still printed) and 2 on input or usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import estimation as est
from .dsl import Query, graph_to_dsl, parse_graph_dsl, parse_intervention_dsl, query_to_dsl
from .errors import CausalIdError, ConditionsFail
from .functional import evaluate, render
from .graph import CausalGraph, d_separated
from .identify import Verdict, dag_dagger, edge_g_formula, g_functional_admg, identify
from .interventions import NodeIntervention, PathIntervention, build_shatter, build_swig
from .joint import DiscreteJoint
from .oracle import StructuralModel, observational_joint, random_model, response_distribution
from .paths import format_path
from .targets import ett_intervention, pse_avg, pse_fixed

EXIT_OK, EXIT_NOT_IDENTIFIED, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _graph(args) -> CausalGraph:
    return parse_graph_dsl(_read(args.graph))


def _query(args, g: CausalGraph) -> Query:
    q = parse_intervention_dsl(_read(args.query), g)
    if getattr(args, "outcome", None):
        g.require(*args.outcome)
        q.outcomes = g.sort(args.outcome)
    if not q.outcomes:
        raise UsageError("no outcome: add an 'outcome' statement or pass --outcome")
    return q


def _emit(args, payload: Any, text: str | None = None) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "json" or text is None:
        body = json.dumps(payload, indent=2) + "\n"
    else:
        body = text if text.endswith("\n") else text + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _assignments(items: Sequence[str] | None, flag: str) -> dict[str, int]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not value.isdigit():
            raise UsageError(f"{flag} expects NAME=STATE, got {item!r}")
        out[name] = int(value)
    return out


def _parse_path(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split("->"))


# ---------------------------------------------------------------------------
# verbs


def cmd_identify(args) -> int:
    g = _graph(args)
    q = _query(args, g)
    if args.admg:
        return _identify_admg(args, g, q)
    res = identify(g, q.outcomes, q.most_specific, history=args.history)
    payload = res.to_json(args.outcome_style)
    text = None
    if res.functional is not None:
        text = render(res.functional, "latex" if args.format == "latex" else "text",
                      args.outcome_style)
    elif args.format != "json":
        text = f"{res.verdict.value}: {json.dumps(res.reason.get('failure'))}"
    _emit(args, payload, text)
    return EXIT_OK if res.identified else EXIT_NOT_IDENTIFIED


def _identify_admg(args, g: CausalGraph, q: Query) -> int:
    if q.node is None:
        raise UsageError("--admg queries must consist of 'do' statements")
    try:
        f = g_functional_admg(g, q.node, q.outcomes)
    except ConditionsFail as exc:
        _emit(args, {"verdict": "CONDITIONS_FAIL", "functional_text": None,
                     "functional_latex": None, "evidence": exc.evidence},
              f"CONDITIONS_FAIL: {exc}")
        return EXIT_NOT_IDENTIFIED
    dag, eta = dag_dagger(g, q.node, q.outcomes)
    payload = {
        "verdict": "IDENTIFIED_G_FUNCTIONAL",
        "functional_text": render(f, "text", args.outcome_style),
        "functional_latex": render(f, "latex", args.outcome_style),
        "evidence": {
            "dag": graph_to_dsl(dag, "dagger"),
            "edge_intervention": {format_path(e): v for e, v in eta.items},
            "edge_functional_text": render(edge_g_formula(dag, eta, q.outcomes), "text",
                                           args.outcome_style),
        },
    }
    _emit(args, payload, render(f, "latex" if args.format == "latex" else "text",
                                args.outcome_style))
    return EXIT_OK


def cmd_translate(args) -> int:
    g = _graph(args)
    A = list(_assignments(args.treat, "--treat"))
    a = _assignments(args.treat, "--treat")
    Y = args.outcome
    g.require(*A, *Y)
    beta = [_parse_path(p) for p in args.beta or []]
    kind = args.kind
    outcomes = g.sort(Y)
    if kind == "ace":
        iv = NodeIntervention(a).validate(g)
    elif kind == "ett":
        iv = ett_intervention(g, A, Y, a)
        outcomes = g.sort(set(Y) | set(A))
    elif kind == "pse-fixed":
        iv = pse_fixed(g, A, Y, a, _assignments(args.baseline, "--baseline"), beta)
    else:
        iv = pse_avg(g, A, Y, a, beta)
    text = query_to_dsl(g, iv, outcomes)
    payload = {"kind": kind, "outcomes": list(outcomes),
               "paths": (iv.to_json(g) if isinstance(iv, PathIntervention)
                         else [{"vertex": v, "value": x} for v, x in iv.values.items()]),
               "dsl": text}
    _emit(args, payload, text)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    g = _graph(args)
    q = _query(args, g)
    if not (args.dist or args.scm):
        raise UsageError("evaluate needs --dist or --scm")
    res = identify(g, q.outcomes, q.most_specific, history=args.history)
    payload = res.to_json(args.outcome_style)
    if res.functional is None:
        _emit(args, payload, f"{res.verdict.value}")
        return EXIT_NOT_IDENTIFIED
    model = None
    if args.scm:
        model = StructuralModel.from_json(_read(args.scm))
        joint = observational_joint(model)
    else:
        joint = DiscreteJoint.from_json(_read(args.dist))
    value = evaluate(res.functional, joint)
    payload["distribution"] = value.to_json()
    if model is not None:
        truth = response_distribution(model, q.outcomes, q.most_specific)
        payload["oracle_max_abs_diff"] = value.max_abs_diff(truth)
    lines = [f"{','.join(f'{n}={s}' for n, s in zip(value.names, idx))}\t{value.table[idx]!r}"
             for idx in np.ndindex(*value.states)]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def run_oracle_check(g: CausalGraph, outcomes: Sequence[str], iv, seeds: int, start: int = 0,
                     semantics: str = "auto", history: bool = False) -> dict[str, Any]:
    """Compare the identified functional with the oracle on seeded random models."""
    res = identify(g, outcomes, iv, history=history)
    out: dict[str, Any] = {"verdict": res.verdict.value, "rows": []}
    if res.functional is None:
        return out
    if semantics == "auto":
        sems = ["MWM", "SHARED"] if res.verdict == Verdict.IDENTIFIED_SWM else ["MWM"]
    else:
        sems = [semantics]
    for sem in sems:
        for seed in range(start, start + seeds):
            m = random_model(g, seed, sem)
            got = evaluate(res.functional, observational_joint(m))
            want = response_distribution(m, outcomes, iv)
            out["rows"].append({"semantics": sem, "seed": seed,
                                "max_abs_diff": got.max_abs_diff(want)})
    out["max_abs_diff"] = max(r["max_abs_diff"] for r in out["rows"])
    out["functional_text"] = render(res.functional)
    return out


def cmd_oracle_check(args) -> int:
    g = _graph(args)
    q = _query(args, g)
    rep = run_oracle_check(g, q.outcomes, q.most_specific, args.seeds, args.seed,
                           args.semantics, args.history)
    if args.report and rep["rows"]:
        from .report import oracle_report

        rep["report_files"] = oracle_report(args.report, rep["rows"])
    if rep["verdict"] == Verdict.NOT_IDENTIFIED_MWM.value:
        _emit(args, rep, "NOT_IDENTIFIED_MWM")
        return EXIT_NOT_IDENTIFIED
    summary = {k: v for k, v in rep.items() if k != "rows"}
    summary["models"] = len(rep["rows"])
    lines = [f"{r['semantics']}\t{r['seed']}\t{r['max_abs_diff']!r}" for r in rep["rows"]]
    lines.append(f"max\t{rep['max_abs_diff']!r}")
    _emit(args, summary if args.format == "json" else rep, "\n".join(lines))
    return EXIT_OK


def cmd_witness(args) -> int:
    from .witness import witness_pair

    pair = witness_pair(args.shape, args.chain)
    files = []
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for i, m in enumerate((pair.m1, pair.m2), 1):
            path = os.path.join(args.out_dir, f"model_{i}.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(m.to_json(), fh, indent=2)
                fh.write("\n")
            files.append(path)
    if args.report:
        from .report import witness_report

        files += witness_report(args.report, *pair.target_tables())
    payload = dict(pair.report)
    payload["files"] = files
    t1, t2 = pair.target_tables()
    payload["target_tables"] = [t1.to_json(), t2.to_json()]
    _emit(args, payload, json.dumps(pair.report, indent=2))
    return EXIT_OK


def cmd_swig(args) -> int:
    g = _graph(args)
    q = parse_intervention_dsl(_read(args.query), g)
    if q.node is not None:
        split = build_swig(g, q.node)
    elif q.edge is not None:
        split = build_shatter(g, q.edge)
    else:
        raise UsageError("swig needs a query of only 'do' or only 'edge' statements")
    payload: dict[str, Any] = {
        "graph": graph_to_dsl(split.graph, "split"),
        "fixed": dict(split.fixed),
        "origin": dict(split.origin),
    }
    if args.x or args.y:
        if not (args.x and args.y):
            raise UsageError("--x and --y go together")
        payload["d_separated"] = d_separated(split, args.x, args.y, args.given or [])
    text = payload["graph"]
    if "d_separated" in payload:
        text += f"d_separated: {str(payload['d_separated']).lower()}\n"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_estimate(args) -> int:
    yv = [float(x) for x in args.y_values.split(",")] if args.y_values else None
    payload: dict[str, Any] = {"a": args.a, "a_prime": args.a_prime}
    if args.dist:
        law = est.MediationLaw.from_joint(DiscreteJoint.from_json(_read(args.dist)), yv)
        payload["phi"] = est.phi(law, args.a, args.a_prime)
        payload["eif_mean"] = est.eif_mean(law, args.a, args.a_prime)
    if args.data:
        data = est.load_csv(args.data)
        payload["n"] = int(len(data))
        payload["estimate"] = est.empirical_estimate(data, args.a, args.a_prime, y_values=yv)
    if len(payload) == 2:
        raise UsageError("estimate needs --data or --dist")
    text = "\n".join(f"{k}\t{v}" for k, v in payload.items())
    _emit(args, payload, text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalid", description=(
        "Identify node, edge and path interventions on causal graphs and check the "
        "answers against exact structural models."))
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, query=True, fmt=("json", "latex", "text")):
        sp.add_argument("--graph", required=True, help="graph DSL file")
        if query:
            sp.add_argument("--query", required=True, help="intervention DSL file")
            sp.add_argument("--outcome", nargs="+", help="override the query's outcome set")
        sp.add_argument("--format", choices=fmt, default="json")
        sp.add_argument("--out", help="write output to FILE instead of stdout")

    sp = sub.add_parser("identify", help="decide identifiability and emit the functional")
    common(sp)
    sp.add_argument("--admg", action="store_true", help="treat the graph as an ADMG")
    sp.add_argument("--history", action="store_true",
                    help="condition node-intervention factors on all predecessors")
    sp.add_argument("--outcome-style", choices=("value", "variable"), default="value")
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("translate", help="build a path intervention for a named target")
    sp.add_argument("kind", choices=("ace", "ett", "pse-fixed", "pse-avg"))
    sp.add_argument("--graph", required=True)
    sp.add_argument("--treat", nargs="+", required=True, metavar="A=STATE")
    sp.add_argument("--baseline", nargs="+", metavar="A=STATE")
    sp.add_argument("--outcome", nargs="+", required=True)
    sp.add_argument("--beta", nargs="+", metavar="PATH", help="paths like W->A->Y")
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_translate)

    sp = sub.add_parser("evaluate", help="evaluate the identified functional on a distribution")
    common(sp, fmt=("json", "text"))
    sp.add_argument("--dist", help="DiscreteJoint JSON")
    sp.add_argument("--scm", help="structural model JSON; also reports the oracle gap")
    sp.add_argument("--history", action="store_true")
    sp.add_argument("--outcome-style", choices=("value", "variable"), default="value")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("oracle-check", help="compare functional and oracle on random models")
    common(sp, fmt=("json", "text"))
    sp.add_argument("--seeds", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0, help="first seed")
    sp.add_argument("--semantics", choices=("auto", "MWM", "SHARED"), default="auto")
    sp.add_argument("--history", action="store_true")
    sp.add_argument("--report", metavar="DIR", help="write CSV and PNG to DIR")
    sp.set_defaults(func=cmd_oracle_check)

    sp = sub.add_parser("witness", help="build and verify a non-identification witness pair")
    sp.add_argument("shape", choices=("SINGLE_EDGE", "FORK"))
    sp.add_argument("--chain", nargs="+", type=int, metavar="LEN")
    sp.add_argument("--out-dir", metavar="DIR", help="write model_1.json and model_2.json")
    sp.add_argument("--report", metavar="DIR", help="write CSV and PNG to DIR")
    sp.add_argument("--format", choices=("json", "text"), default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("swig", help="build the split graph and test d-separation")
    common(sp, query=False, fmt=("json", "text"))
    sp.add_argument("--query", required=True)
    sp.add_argument("--x", nargs="+")
    sp.add_argument("--y", nargs="+")
    sp.add_argument("--given", nargs="*")
    sp.set_defaults(func=cmd_swig)

    sp = sub.add_parser("estimate", help="mediation functional and its estimating equation")
    sp.add_argument("--data", help="CSV with columns C,A,M,Y")
    sp.add_argument("--dist", help="DiscreteJoint JSON over C,A,M,Y")
    sp.add_argument("--a", type=int, required=True, help="mediator arm")
    sp.add_argument("--a-prime", type=int, required=True, help="outcome arm")
    sp.add_argument("--y-values", help="comma-separated numeric value of each Y state")
    sp.add_argument("--format", choices=("json", "text"), default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_estimate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CausalIdError, UsageError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
