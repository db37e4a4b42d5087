"""Identification: the decision pipeline and the functionals it emits."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import ConditionsFail, InputRestrictionViolated, InvalidIntervention
from .functional import Functional, Sym, Term, const, marginalize, out, render, simplify, summed
from .graph import (
    CausalGraph,
    ancestors,
    district_of,
    districts,
    vertex_subgraph,
)
from .interventions import (
    AnyIntervention,
    EdgeIntervention,
    NodeIntervention,
    PathIntervention,
    as_path_intervention,
    check_edge_consistency,
    check_node_consistency,
    is_natural_for,
    live_intervention,
    reduce_natural,
)
from .paths import format_path

LINEAR_NOTE = ("NOT_IDENTIFIED_MWM is relative to the nonparametric multiple-worlds model; "
               "identifiability under linear structural equation models is not assessed.")


class Verdict(str, enum.Enum):
    IDENTIFIED_SWM = "IDENTIFIED_SWM"
    IDENTIFIED_MWM_ONLY = "IDENTIFIED_MWM_ONLY"
    NOT_IDENTIFIED_MWM = "NOT_IDENTIFIED_MWM"


@dataclass
class IdentificationResult:
    verdict: Verdict
    functional: Functional | None
    reason: dict[str, Any] = field(default_factory=dict)
    note: str = LINEAR_NOTE

    def __post_init__(self):
        if (self.functional is None) != (self.verdict == Verdict.NOT_IDENTIFIED_MWM):
            raise ValueError("a functional is present exactly when the query is identified")

    @property
    def identified(self) -> bool:
        return self.functional is not None

    def to_json(self, outcome_style: str = "value") -> dict[str, Any]:
        f = self.functional
        return {
            "verdict": self.verdict.value,
            "functional_text": render(f, "text", outcome_style) if f else None,
            "functional_latex": render(f, "latex", outcome_style) if f else None,
            "evidence": self.reason,
            "note": self.note,
        }


# ---------------------------------------------------------------------------
# functionals on DAGs


def _natural_symbols(g: CausalGraph, Y: Iterable[str]) -> dict[str, Sym]:
    Y = set(Y)
    g.require(*Y)
    return {v: out(v) if v in Y else summed(v) for v in g.vertices}


def extended_g_formula(g: CausalGraph, A: Mapping[str, int] | NodeIntervention,
                       Y: Iterable[str], history: bool = False) -> Functional:
    """``sum_{V minus Y} prod_V p(v_V | a_{pa in A}, v_{pa not in A})``.

    ``A`` and ``Y`` may overlap; a treated outcome keeps its own natural value
    while its children see the intervened one.  With ``history=True`` every
    factor conditions on all earlier vertices in topological order instead of
    on the parents (the g-computation layout).
    """
    values = A.values if isinstance(A, NodeIntervention) else dict(A)
    NodeIntervention(values).validate(g)
    nat = _natural_symbols(g, Y)
    order = g.topological_order()
    terms = []
    for i, v in enumerate(order):
        cond = order[:i] if history else g.parents(v)
        ctx = tuple(const(p, values[p]) if p in values else nat[p] for p in cond)
        terms.append(Term((nat[v],), ctx))
    f = Functional(order, terms, [s for s in nat.values() if s.role == "sum"],
                   [s for s in nat.values() if s.role == "out"])
    return simplify(f)


def edge_g_formula(g: CausalGraph, eta: EdgeIntervention, Y: Iterable[str] | None = None
                   ) -> Functional:
    """``prod_V p(v_V | v_{free parents}, intervened values on edges into V)``.

    Without ``Y`` this is the full joint of every response; otherwise it is
    marginalized to ``Y``.
    """
    eta = eta.validate(g)
    assigned = eta.assignment
    nat = {v: out(v) for v in g.vertices}
    terms = []
    for v in g.vertices:
        ctx = tuple(const(p, assigned[(p, v)]) if (p, v) in assigned else nat[p]
                    for p in g.parents(v))
        terms.append(Term((nat[v],), ctx))
    f = Functional(g.topological_order(), terms, [], nat.values())
    if Y is None:
        return simplify(f)
    return marginalize(f, Y)


# ---------------------------------------------------------------------------
# ADMG g-functional


@dataclass(frozen=True)
class GFunctionalContext:
    """Ingredients of the district factorization for an ADMG query."""

    order: tuple[str, ...]
    districts: tuple[frozenset[str], ...]
    district_of_s: Mapping[frozenset[str], frozenset[str]]
    fixed_treatments: frozenset[str]

    def pre(self, v: str) -> tuple[str, ...]:
        return self.order[:self.order.index(v)]

    def d_of(self, v: str) -> frozenset[str]:
        for d in self.district_of_s.values():
            if v in d:
                return d
        return frozenset()


def g_functional_context(g: CausalGraph, A: Iterable[str], Y: Iterable[str]
                         ) -> GFunctionalContext:
    """Check the input restriction and both district conditions.

    Raises :class:`InputRestrictionViolated` or :class:`ConditionsFail`.
    """
    A, Y = set(A), set(Y)
    g.require(*A, *Y)
    V = set(g.vertices)
    an_y = ancestors(g, Y)
    if V - an_y:
        raise InputRestrictionViolated(
            f"vertices {sorted(V - an_y)} are not ancestors of the outcome")
    g_rest = vertex_subgraph(g, V - A)
    an_rest = ancestors(g_rest, Y - A)
    if not (V - an_rest) <= A:
        raise InputRestrictionViolated(
            f"vertices {sorted((V - an_rest) - A)} reach the outcome only through treatments")

    blocks = districts(g_rest)
    d_s: dict[frozenset[str], frozenset[str]] = {}
    for S in blocks:
        sub = vertex_subgraph(g, ancestors(g, S))
        first = next(iter(g.sort(S)))
        d_s[S] = next(d for d in districts(sub) if first in d)

    for S in blocks:
        pa = {p for s in S for p in g.parents(s)} - S
        bad = pa & d_s[S]
        if bad:
            raise ConditionsFail(
                f"parents {sorted(bad)} of {sorted(S)} fall inside its district",
                {"condition": 1, "S": g.sort(S), "D_S": g.sort(d_s[S]),
                 "parents_in_district": g.sort(bad)})
    for i, S in enumerate(blocks):
        for T in blocks[i + 1:]:
            if d_s[S] & d_s[T]:
                raise ConditionsFail(
                    f"districts of {sorted(S)} and {sorted(T)} overlap",
                    {"condition": 2, "S": g.sort(S), "T": g.sort(T),
                     "D_S": g.sort(d_s[S]), "D_T": g.sort(d_s[T])})
    covered = set().union(*d_s.values()) if d_s else set()
    return GFunctionalContext(g.topological_order(), tuple(blocks), d_s,
                              frozenset(A - covered))


def g_functional_admg(g: CausalGraph, A: Mapping[str, int] | NodeIntervention,
                      Y: Iterable[str]) -> Functional:
    """District-factorized functional for ``p(Y(a))`` on an ADMG.

    Each vertex outside the fixed treatments contributes
    ``p(v_V | a on earlier treatments outside V's district, v on the other earlier vertices)``
    and everything except ``Y`` and the fixed treatments is summed.
    """
    values = A.values if isinstance(A, NodeIntervention) else dict(A)
    NodeIntervention(values).validate(g)
    Y = set(Y)
    if Y & set(values):
        raise InvalidIntervention("treatments and outcomes must be disjoint")
    ctx = g_functional_context(g, values, Y)
    nat = _natural_symbols(g, Y)
    terms = []
    for v in ctx.order:
        if v in ctx.fixed_treatments:
            continue
        fixed_here = set(values) - ctx.d_of(v)
        cond = tuple(const(p, values[p]) if p in fixed_here else nat[p] for p in ctx.pre(v))
        terms.append(Term((nat[v],), cond))
    sums = [nat[v] for v in ctx.order if v not in Y and v not in ctx.fixed_treatments]
    outs = [nat[v] for v in ctx.order if v in Y]
    return simplify(Functional(ctx.order, terms, sums, outs))


def dag_dagger(g: CausalGraph, A: Mapping[str, int] | NodeIntervention, Y: Iterable[str]
               ) -> tuple[CausalGraph, EdgeIntervention]:
    """A DAG and edge intervention whose edge g-formula matches the g-functional.

    Each vertex V receives as parents its district within the subgraph on V
    and its predecessors, together with the parents of that district.  On a
    DAG this returns the input graph.  An edge (T, V) out of a treatment T is
    intervened exactly when T lies outside the district assigned to V.
    """
    values = A.values if isinstance(A, NodeIntervention) else dict(A)
    ctx = g_functional_context(g, values, Y)
    edges = set(g.directed_edges)
    for v in ctx.order:
        upto = set(ctx.pre(v)) | {v}
        block = district_of(vertex_subgraph(g, upto), v)
        blanket = (block | {p for b in block for p in g.parents(b)}) - {v}
        edges |= {(u, v) for u in blanket}
    dag = CausalGraph(g.vertices, sorted(edges, key=g.edge_key), (), g.cardinality)
    eta = {}
    for t in values:
        for v in dag.children(t):
            if v in ctx.fixed_treatments or t not in ctx.d_of(v):
                eta[(t, v)] = values[t]
    return dag, EdgeIntervention(eta)


# ---------------------------------------------------------------------------
# the decision pipeline


def _paths_json(iv: PathIntervention, g: CausalGraph) -> list[dict[str, Any]]:
    return iv.to_json(g)


def identify(g: CausalGraph, Y: Iterable[str], iv: AnyIntervention,
             history: bool = False) -> IdentificationResult:
    """Decide identifiability of the response of ``Y`` to ``iv`` from p(V).

    Steps: keep live paths; check that natural-valued paths can be dropped
    and drop them; check edge consistency and pass to the induced edge
    intervention (identified under the multiple-worlds model by the edge
    g-formula); if that edge intervention is node consistent, the induced
    node intervention is identified under the single-world model by the
    extended g-formula.
    """
    if not g.is_dag:
        raise InvalidIntervention("identify expects a DAG; use g_functional_admg for ADMGs")
    Y = g.sort(Y)
    piv = as_path_intervention(g, iv)
    reason: dict[str, Any] = {"input": _paths_json(piv, g)}

    live = live_intervention(g, Y, piv)
    dropped = [format_path(p) for p in piv.paths if p not in live.assignment]
    reason["dead_paths"] = dropped

    chk = is_natural_for(g, Y, live)
    if not chk:
        reason.update(gate="natural", failure=chk.evidence)
        return IdentificationResult(Verdict.NOT_IDENTIFIED_MWM, None, reason)
    reduced = live_intervention(g, Y, reduce_natural(g, Y, live))
    reason["constant_paths"] = _paths_json(reduced, g)

    chk = check_edge_consistency(g, Y, reduced)
    if not chk:
        reason.update(gate="edge_consistency", failure=chk.evidence)
        return IdentificationResult(Verdict.NOT_IDENTIFIED_MWM, None, reason)
    eta = EdgeIntervention({p[:2]: v for p, v in reduced.items})
    reason["edge_intervention"] = {format_path(e): v for e, v in eta.items}
    f_edge = edge_g_formula(g, eta, Y)

    live_eta = EdgeIntervention(
        {p: v for p, v in live_intervention(g, Y, eta.as_paths()).items})
    chk = check_node_consistency(g, Y, live_eta)
    if not chk:
        reason.update(gate="node_consistency", failure=chk.evidence)
        return IdentificationResult(Verdict.IDENTIFIED_MWM_ONLY, f_edge, reason)
    nu = {u: v for (u, _), v in live_eta.items}
    reason["node_intervention"] = nu
    reason["gate"] = "identified"
    f_node = extended_g_formula(g, nu, Y, history=history)
    return IdentificationResult(Verdict.IDENTIFIED_SWM, f_node, reason)
