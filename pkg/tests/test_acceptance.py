"""End-to-end acceptance checks, one per criterion.

Each check prints a single PASS/FAIL line with its runtime.  Run directly with
``python tests/test_acceptance.py`` or through pytest.
"""

import itertools
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from causalid.errors import ConditionsFail  # noqa: E402
from causalid.estimation import eif_mean, misspecify, phi, random_law, robust_solve  # noqa: E402
from causalid.functional import evaluate, render  # noqa: E402
from causalid.graph import CausalGraph, d_separated  # noqa: E402
from causalid.identify import (  # noqa: E402
    Verdict,
    dag_dagger,
    edge_g_formula,
    extended_g_formula,
    g_functional_admg,
    identify,
)
from causalid.interventions import (  # noqa: E402
    EdgeIntervention,
    NodeIntervention,
    PathIntervention,
    build_swig,
    check_edge_consistency,
    check_node_consistency,
    induce_edge_intervention,
    induce_node_intervention,
    is_natural_for,
    live_intervention,
    reduce_natural,
)
from causalid.joint import random_joint  # noqa: E402
from causalid.oracle import (  # noqa: E402
    ModelClass,
    check_model_class,
    counterfactual_joint,
    observational_joint,
    random_model,
    response_distribution,
)
from causalid.paths import funnel, is_proper, live_subset, relevant_paths  # noqa: E402
from causalid.targets import ett_intervention, pse_fixed  # noqa: E402
from causalid.witness import witness_pair  # noqa: E402

from conftest import (  # noqa: E402
    confounded_mediation,
    front_door_admg,
    mediation_dag,
    random_dag,
    random_outcomes,
    random_path_intervention,
    random_proper_paths,
    two_step,
)

TOL = 1e-9


def _report(number: int, title: str, ok: bool, seconds: float, detail: str = "") -> str:
    status = "PASS" if ok else "FAIL"
    extra = f" [{detail}]" if detail else ""
    return f"{status} criterion {number}: {title} ({seconds:.2f} s){extra}"


# ---------------------------------------------------------------------------
# 1. golden functionals


def criterion_1() -> tuple[bool, str]:
    g = confounded_mediation()
    got = {
        "back-door": render(extended_g_formula(g, {"M": 0}, ["Y"], history=True),
                            outcome_style="variable"),
        "mediation": render(identify(g, ["Y"], PathIntervention(
            {("A", "Y"): 1, ("A", "M", "Y"): 0})).functional),
        "front-door": render(g_functional_admg(front_door_admg(), {"A": 1}, ["Y"]),
                             outcome_style="variable"),
        "g-computation": render(extended_g_formula(two_step(), {"A1": 1, "A2": 1}, ["Y2"],
                                                   history=True)),
    }
    want = {
        "back-door": "sum_{a,w} p(Y|m,a,w) p(a,w)",
        "mediation": "sum_{m,w} p(y|m,a) p(m|a',w) p(w)",
        "front-door": "sum_{m,a'} p(Y|m,a') p(m|a) p(a')",
        "g-computation": "sum_{y1,c1,w1,c0} p(y2|a2,y1,c1,w1,a1,c0) p(y1,c1,w1|a1,c0) p(c0)",
    }
    bad = [k for k in want if got[k] != want[k]]
    return not bad, ", ".join(f"{k}: {got[k]}" for k in bad)


# ---------------------------------------------------------------------------
# 2. flowchart verdicts


def flowchart_queries():
    g = confounded_mediation()
    return [
        ("mediation", ["Y"], PathIntervention({("A", "Y"): 1, ("A", "M", "Y"): 0}),
         Verdict.IDENTIFIED_MWM_ONLY),
        ("total effect", ["Y"], NodeIntervention({"A": 1}), Verdict.IDENTIFIED_SWM),
        ("PSE along W->A->Y", ["Y"],
         pse_fixed(g, ["W"], ["Y"], {"W": 1}, {"W": 0}, [("W", "A", "Y")]),
         Verdict.NOT_IDENTIFIED_MWM),
        ("two-treatment ETT", ["Y", "M", "W"],
         ett_intervention(g, ["W", "M"], ["Y"], {"W": 1, "M": 1}), Verdict.NOT_IDENTIFIED_MWM),
        ("ETIT", ["Y", "M", "W"], EdgeIntervention({("M", "Y"): 1, ("W", "A"): 1}),
         Verdict.IDENTIFIED_MWM_ONLY),
        ("p(Y(a,m) | A, M)", ["Y", "A", "M"],
         ett_intervention(g, ["A", "M"], ["Y"], {"A": 1, "M": 1}), Verdict.IDENTIFIED_MWM_ONLY),
    ]


def criterion_2() -> tuple[bool, str]:
    g = confounded_mediation()
    bad = []
    for name, Y, iv, want in flowchart_queries():
        got = identify(g, Y, iv).verdict
        if got != want:
            bad.append(f"{name}: {got.value}")
    return not bad, "; ".join(bad)


# ---------------------------------------------------------------------------
# 3. oracle agreement for identified queries


def _has_fork(g: CausalGraph) -> bool:
    return any(len(g.children(v)) >= 2 for v in g.vertices)


def oracle_queries(n_random: int = 16):
    g = confounded_mediation()
    out = [(g, Y, iv) for _, Y, iv, v in flowchart_queries() if v != Verdict.NOT_IDENTIFIED_MWM]
    seed = 0
    while len(out) < 4 + n_random:
        seed += 1
        rng = np.random.default_rng(seed)
        h = random_dag(seed, max_n=5, min_n=3)
        Y = random_outcomes(h, rng)
        iv = random_path_intervention(h, rng, p_natural=0.25)
        res = identify(h, Y, iv)
        if not res.identified:
            continue
        if res.verdict == Verdict.IDENTIFIED_SWM and not _has_fork(h):
            continue
        out.append((h, Y, iv))
    return out


def criterion_3(models: int = 100) -> tuple[bool, str]:
    worst, swm_models, queries = 0.0, 0, oracle_queries()
    for g, Y, iv in queries:
        res = identify(g, Y, iv)
        sems = ["MWM", "SHARED"] if res.verdict == Verdict.IDENTIFIED_SWM else ["MWM"]
        for sem in sems:
            for seed in range(models):
                m = random_model(g, seed, sem)
                if sem == "SHARED":
                    if check_model_class(m) != ModelClass.SWM_ONLY:
                        return False, f"SHARED model {seed} is not SWM_ONLY"
                    swm_models += 1
                got = evaluate(res.functional, observational_joint(m))
                worst = max(worst, got.max_abs_diff(response_distribution(m, Y, iv)))
    return worst <= TOL, (f"{len(queries)} queries, {swm_models} SWM_ONLY models, "
                          f"max diff {worst:.1e}")


# ---------------------------------------------------------------------------
# 4. witnesses


def criterion_4() -> tuple[bool, str]:
    single = witness_pair("SINGLE_EDGE").report
    fork = witness_pair("FORK").report
    chain = witness_pair("FORK", [2, 2]).report
    ok = (single["observational_max_abs_diff"] <= 1e-12
          and single["target_total_variation"] >= 0.1
          and fork["observational_max_abs_diff"] <= 1e-12
          and fork["node_intervention_max_abs_diff"] <= 1e-12
          and fork["target_total_variation"] >= 0.05
          and chain["observational_max_abs_diff"] <= 1e-12
          and chain["node_intervention_max_abs_diff"] <= 1e-12
          and chain["target_total_variation"] >= 0.01)
    return ok, (f"TV single {single['target_total_variation']:.4f}, "
                f"fork {fork['target_total_variation']:.4f}, "
                f"chain {chain['target_total_variation']:.5f}")


# ---------------------------------------------------------------------------
# 5. path rule properties


def _same(m, Y, iv1, iv2) -> bool:
    return response_distribution(m, Y, iv1).max_abs_diff(
        response_distribution(m, Y, iv2)) <= 1e-12


def rule_violations(seed: int) -> list[str]:
    rng = np.random.default_rng(seed)
    g = random_dag(seed, max_n=6)
    Y = random_outcomes(g, rng)
    m = random_model(g, seed)
    bad = []
    alpha = random_proper_paths(g, rng, 4)
    for e in g.directed_edges:
        if not is_proper(funnel(alpha, e)):
            bad.append("funnel properness")
    rel = set(relevant_paths(g, Y, alpha))
    if any(r[i:] not in rel for r in rel for i in range(1, len(r) - 1)):
        bad.append("suffix closure")
    if not rel <= set(relevant_paths(g, Y, alpha[: len(alpha) // 2])):
        bad.append("subset monotonicity")
    live = live_subset(g, Y, alpha)
    if live_subset(g, Y, live) != live:
        bad.append("live idempotence")

    iv = random_path_intervention(g, rng, p_natural=0.3)
    liv = live_intervention(g, Y, iv)
    if not _same(m, Y, iv, liv):
        bad.append("live oracle equality")
    if is_natural_for(g, Y, liv):
        const = reduce_natural(g, Y, liv)
        if not _same(m, Y, liv, const):
            bad.append("natural reduction")
        const = live_intervention(g, Y, const)
        if check_edge_consistency(g, Y, const):
            eta = induce_edge_intervention(g, Y, const)
            if not _same(m, Y, const, eta):
                bad.append("edge consistency")
            live_eta = EdgeIntervention(dict(live_intervention(g, Y, eta.as_paths()).items))
            if check_node_consistency(g, Y, live_eta):
                nu = induce_node_intervention(g, Y, live_eta)
                if not _same(m, Y, live_eta, nu):
                    bad.append("node consistency")
    return bad


def criterion_5(n: int = 200) -> tuple[bool, str]:
    bad = {}
    for seed in range(n):
        for name in rule_violations(seed):
            bad[name] = bad.get(name, 0) + 1
    return not bad, ", ".join(f"{k}: {v}" for k, v in bad.items()) or f"{n} DAGs"


# ---------------------------------------------------------------------------
# 6. ADMG pipeline


def criterion_6(n: int = 50) -> tuple[bool, str]:
    g = front_door_admg()
    f = g_functional_admg(g, {"A": 1}, ["Y"])
    ok = render(f, outcome_style="variable") == "sum_{m,a'} p(Y|m,a') p(m|a) p(a')"
    dag, eta = dag_dagger(g, {"A": 1}, ["Y"])
    ok &= dag == CausalGraph(["A", "M", "Y"], [("A", "M"), ("A", "Y"), ("M", "Y")])
    ok &= eta == EdgeIntervention({("A", "M"): 1})
    fd = edge_g_formula(dag, eta, ["Y"])
    worst = 0.0
    for seed in range(n):
        j = random_joint([("A", 2), ("M", 2), ("Y", 2)], seed)
        worst = max(worst, evaluate(f, j).max_abs_diff(evaluate(fd, j)))
    ok &= worst <= 1e-12
    try:
        g_functional_admg(CausalGraph(["A", "Y"], [("A", "Y")], [("A", "Y")]), {"A": 1}, ["Y"])
        ok = False
    except ConditionsFail:
        pass
    return bool(ok), f"max diff {worst:.1e}"


# ---------------------------------------------------------------------------
# 7. SWIG independence


def criterion_7(n: int = 20) -> tuple[bool, str]:
    g = confounded_mediation()
    nu = NodeIntervention({"A": 1})
    ok = d_separated(build_swig(g, nu), ["Y"], ["A"], ["W"])
    worst = 0.0
    for seed in range(n):
        m = random_model(g, seed)
        p = counterfactual_joint(m, [("Y(a)", "Y", nu), ("A", "A", None), ("W", "W", None)])
        t = p.table
        pw = t.sum(axis=(0, 1), keepdims=True)
        gap = t * pw - t.sum(axis=1, keepdims=True) * t.sum(axis=0, keepdims=True)
        worst = max(worst, float(np.abs(gap).max()))
    return ok and worst <= 1e-12, f"max gap {worst:.1e}"


# ---------------------------------------------------------------------------
# 8. estimation


def criterion_8() -> tuple[bool, str]:
    arms = list(itertools.product(range(2), repeat=2))
    eif_worst = max(abs(eif_mean(random_law(s), a, ay)) for s in range(50) for a, ay in arms)
    robust_worst = 0.0
    for wrong in (["outcome"], ["mediator"], ["propensity"]):
        for s in range(20):
            law = random_law(s)
            bad = misspecify(law.components(), wrong, s + 1000)
            robust_worst = max(robust_worst, abs(robust_solve(law, bad, 0, 1) - phi(law, 0, 1)))
    two_wrong = min(
        abs(robust_solve(law, misspecify(law.components(), wrong, s + 1000), 0, 1)
            - phi(law, 0, 1))
        for wrong in (["outcome", "mediator"], ["outcome", "propensity"],
                      ["mediator", "propensity"])
        for s in range(20) for law in [random_law(s)])
    diag_worst = 0.0
    g = mediation_dag()
    for s in range(20):
        law = random_law(s)
        for a in range(2):
            f = extended_g_formula(g, {"A": a}, ["Y"])
            mean = float(evaluate(f, law.joint).table @ law.y_values)
            diag_worst = max(diag_worst, abs(mean - phi(law, a, a)))
    ok = eif_worst <= TOL and robust_worst <= TOL and two_wrong > 1e-3 and diag_worst <= 1e-12
    return ok, (f"eif {eif_worst:.1e}, robust {robust_worst:.1e}, two-wrong min {two_wrong:.4f}, "
                f"diagonal {diag_worst:.1e}")


CRITERIA = [
    (1, "formula reproduction", criterion_1, 1.0),
    (2, "flowchart classification", criterion_2, None),
    (3, "oracle equivalence", criterion_3, 60.0),
    (4, "oracle witnesses", criterion_4, None),
    (5, "path rule properties", criterion_5, None),
    (6, "ADMG pipeline", criterion_6, None),
    (7, "SWIG independence", criterion_7, None),
    (8, "estimation", criterion_8, 30.0),
]


def run_criterion(number: int) -> tuple[bool, str]:
    _, title, fn, budget = CRITERIA[number - 1]
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        ok, detail = False, f"{detail}; over the {budget:g} s budget"
    return ok, _report(number, title, ok, dt, detail)


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_acceptance(number, capsys):
    ok, line = run_criterion(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def main() -> int:
    results = [run_criterion(n) for n, *_ in CRITERIA]
    for _, line in results:
        print(line)
    return 0 if all(ok for ok, _ in results) else 1


if __name__ == "__main__":
    sys.exit(main())
