import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalid.errors import InvalidIntervention, NotEdgeConsistent, NotNatural
from causalid.graph import d_separated
from causalid.interventions import (
    NATURAL,
    EdgeIntervention,
    NodeIntervention,
    PathIntervention,
    build_shatter,
    build_swig,
    check_edge_consistency,
    check_node_consistency,
    defined_response,
    embed_edge_as_path,
    embed_node_as_path,
    induce_edge_intervention,
    induce_node_intervention,
    is_natural_for,
    live_intervention,
    reduce_natural,
    render_expr,
    response_mentions,
)
from causalid.oracle import expr_distribution, random_model, response_distribution

from conftest import confounded_mediation, random_dag, random_outcomes, random_path_intervention


def _render(g, Y, iv):
    return render_expr(defined_response(g, [Y], iv)[Y])


def test_responses_confounded_mediation():
    g = confounded_mediation()
    assert _render(g, "Y", NodeIntervention({"A": 1})) == "Y(a, M(W, a))"
    assert _render(g, "Y", PathIntervention({("A", "Y"): 1, ("A", "M", "Y"): 0})) \
        == "Y(a, M(W, a'))"
    assert _render(g, "Y", PathIntervention({("W", "A", "Y"): 1})) == "Y(A(w), M)"
    assert _render(g, "Y", PathIntervention()) == "Y"
    assert _render(g, "Y", PathIntervention({("W", "A"): 1, ("A", "Y"): NATURAL})) \
        == "Y(A, M(W, A(w)))"


def test_response_mentions():
    mentions, leaves = response_mentions(confounded_mediation(), ["Y"], NodeIntervention({"A": 1}))
    assert set(mentions) == {("A", "Y"), ("M", "Y"), ("W", "M", "Y"), ("A", "M", "Y")}
    assert set(leaves) == {("A", "Y"), ("W", "M", "Y"), ("A", "M", "Y")}


def test_intervention_validation():
    g = confounded_mediation()
    with pytest.raises(InvalidIntervention):
        PathIntervention({("A", "M"): 1, ("A", "M", "Y"): 0})
    with pytest.raises(InvalidIntervention):
        NodeIntervention({"A": 2}).validate(g)
    with pytest.raises(InvalidIntervention):
        EdgeIntervention({("A", "M"): NATURAL})
    with pytest.raises(InvalidIntervention):
        embed_node_as_path(g, {"Y": 1}, ["Y"])


def test_naturalness_examples():
    g = confounded_mediation()
    ok = PathIntervention({("A", "Y"): 1, ("A", "M", "Y"): NATURAL})
    assert is_natural_for(g, ["Y"], ok)
    assert reduce_natural(g, ["Y"], ok) == PathIntervention({("A", "Y"): 1})
    bad = PathIntervention({("W", "A"): 1, ("A", "Y"): NATURAL})
    chk = is_natural_for(g, ["Y"], bad)
    assert not chk and chk.evidence["relevant_path"] == "W->A->Y"
    with pytest.raises(NotNatural):
        reduce_natural(g, ["Y"], bad)


def test_edge_consistency_examples():
    g = confounded_mediation()
    mediation = PathIntervention({("A", "Y"): 1, ("A", "M", "Y"): 0})
    assert check_edge_consistency(g, ["Y"], mediation)
    assert induce_edge_intervention(g, ["Y"], mediation) == EdgeIntervention(
        {("A", "Y"): 1, ("A", "M"): 0})
    conflict = PathIntervention({("W", "A", "Y"): 1, ("W", "A", "M", "Y"): 0})
    chk = check_edge_consistency(g, ["Y"], conflict)
    assert not chk and chk.evidence["kind"] == "value_conflict"
    # A->M fixed along W->A->M->Y but reached freely along A->M->Y
    inner = PathIntervention({("W", "A", "M", "Y"): 1})
    chk = check_edge_consistency(g, ["Y"], inner)
    assert not chk and chk.evidence["kind"] == "inconsistent_set"
    with pytest.raises(NotEdgeConsistent):
        induce_edge_intervention(g, ["Y"], inner)


def test_node_consistency_examples():
    g = confounded_mediation()
    assert not check_node_consistency(g, ["Y"], EdgeIntervention({("A", "Y"): 1, ("A", "M"): 0}))
    assert not check_node_consistency(g, ["Y"], EdgeIntervention({("A", "Y"): 1}))
    both = EdgeIntervention({("A", "Y"): 1, ("A", "M"): 1})
    assert check_node_consistency(g, ["Y"], both)
    assert induce_node_intervention(g, ["Y"], both) == NodeIntervention({"A": 1})
    # the free edge W->A is dead for outcome M when only W->M matters
    assert check_node_consistency(g, ["M"], EdgeIntervention({("W", "M"): 0, ("W", "A"): 0}))


def test_swig_confounded_mediation():
    sw = build_swig(confounded_mediation(), NodeIntervention({"A": 1}))
    assert sw.graph.vertices == ("W", "A", "a", "M", "Y")
    assert set(sw.graph.directed_edges) == {("W", "A"), ("W", "M"), ("a", "M"), ("a", "Y"),
                                            ("M", "Y")}
    assert sw.fixed == {"a": 1} and sw.copies("A") == ("A", "a")
    assert sw.random_vertices == ("W", "A", "M", "Y")


def test_shatter_two_values_on_one_vertex():
    sh = build_shatter(confounded_mediation(), EdgeIntervention({("A", "M"): 0, ("A", "Y"): 1}))
    assert sh.fixed == {"a": 0, "a'": 1}
    assert ("a", "M") in sh.graph.directed_edges and ("a'", "Y") in sh.graph.directed_edges
    assert not sh.graph.children("A")


def test_shatter_of_node_edges_is_swig():
    g = confounded_mediation()
    nu = NodeIntervention({"A": 1})
    assert build_shatter(g, nu.as_edges(g)) == build_swig(g, nu)


# -- oracle equalities on random models --------------------------------------


def _same(m, Y, iv1, iv2):
    return response_distribution(m, Y, iv1).max_abs_diff(response_distribution(m, Y, iv2))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_expression_trees_match_funnel_recursion(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(seed, max_n=5)
    Y = random_outcomes(g, rng)
    iv = random_path_intervention(g, rng, p_natural=0.3)
    m = random_model(g, seed, "SHARED" if seed % 2 else "MWM")
    trees = defined_response(g, Y, iv)
    got = expr_distribution(m, trees)
    want = response_distribution(m, Y, iv)
    assert got.max_abs_diff(want) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_live_and_natural_reductions_preserve_response(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(seed, max_n=5)
    Y = random_outcomes(g, rng)
    iv = random_path_intervention(g, rng, p_natural=0.4)
    m = random_model(g, seed)
    live = live_intervention(g, Y, iv)
    assert _same(m, Y, iv, live) <= 1e-12
    if is_natural_for(g, Y, live):
        assert _same(m, Y, iv, reduce_natural(g, Y, live)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_consistency_reductions_preserve_response(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(seed, max_n=5)
    Y = random_outcomes(g, rng)
    iv = live_intervention(g, Y, random_path_intervention(g, rng))
    m = random_model(g, seed, "SHARED" if seed % 2 else "MWM")
    if not check_edge_consistency(g, Y, iv):
        return
    eta = induce_edge_intervention(g, Y, iv)
    assert _same(m, Y, iv, eta) <= 1e-12
    live_eta = EdgeIntervention(dict(live_intervention(g, Y, eta.as_paths()).items))
    if check_node_consistency(g, Y, live_eta):
        assert _same(m, Y, eta, induce_node_intervention(g, Y, live_eta)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_embeddings_preserve_response(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(seed, max_n=5, min_n=3)
    vs = list(g.vertices)
    k = int(rng.integers(1, 3))
    A = {str(a): int(rng.integers(0, 2)) for a in rng.choice(vs, size=k, replace=False)}
    Y = [v for v in vs if v not in A][:2]
    m = random_model(g, seed)
    nu = NodeIntervention(A)
    assert _same(m, Y, nu, embed_node_as_path(g, A, Y)) <= 1e-12
    edges = [e for e in g.directed_edges if rng.random() < 0.5]
    eta = EdgeIntervention({e: int(rng.integers(0, 2)) for e in edges})
    assert _same(m, Y, eta, embed_edge_as_path(g, eta, Y)) <= 1e-12


def test_swig_separation_implies_independence_of_responses():
    checked = 0
    for seed in range(40):
        g = random_dag(seed, max_n=5, min_n=3)
        rng = np.random.default_rng(seed)
        a = str(rng.choice(list(g.vertices)))
        nu = NodeIntervention({a: 1})
        sw = build_swig(g, nu)
        m = random_model(g, seed)
        p = response_distribution(m, g.vertices, nu)
        vs = list(g.vertices)
        for _ in range(6):
            x, y, *rest = rng.permutation(vs)
            z = list(rest[: int(rng.integers(0, len(rest) + 1))])
            if not d_separated(sw, [x], [y], z):
                continue
            t = p.marginal([x, y] + z).table
            pxz = t.sum(axis=1, keepdims=True)
            pyz = t.sum(axis=0, keepdims=True)
            pz = t.sum(axis=(0, 1), keepdims=True)
            assert np.max(np.abs(t * pz - pxz * pyz)) <= 1e-12
            checked += 1
    assert checked > 20
