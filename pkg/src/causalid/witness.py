"""Pairs of structural models that agree on p(V) but not on a target response.

Two base shapes are built explicitly and can be extended by directed chains
hanging off the children.  Every pair is verified by exhaustive enumeration
before it is returned.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import SearchFailed
from .graph import CausalGraph
from .interventions import EdgeIntervention, NodeIntervention
from .joint import DiscreteJoint
from .oracle import (
    Equation,
    ModelClass,
    Noise,
    StructuralModel,
    check_model_class,
    counterfactual_joint,
    observational_joint,
    response_distribution,
)

AGREEMENT_TOL = 1e-12
MIN_DISAGREEMENT = 0.01

# column-stochastic map [[0.9, 0.2], [0.1, 0.8]] realised by a 4-state noise
# over response functions (f(0), f(1)) = 00, 01, 10, 11
CHAIN_NOISE_PROBS = (0.18, 0.72, 0.02, 0.08)
CHAIN_MAP = np.array([[0.9, 0.2], [0.1, 0.8]])


class Shape(str, enum.Enum):
    SINGLE_EDGE = "SINGLE_EDGE"
    FORK = "FORK"


Item = tuple[str, str, Any]


@dataclass
class WitnessPair:
    shape: Shape
    m1: StructuralModel
    m2: StructuralModel
    target: list[Item]
    responses: tuple[str, ...]
    report: dict[str, Any] = field(default_factory=dict)

    def target_tables(self) -> tuple[DiscreteJoint, DiscreteJoint]:
        return counterfactual_joint(self.m1, self.target), counterfactual_joint(self.m2, self.target)


def _table(fn: Callable[..., int], shape: Sequence[int]) -> np.ndarray:
    out = np.empty(tuple(shape), dtype=np.int64)
    for idx in itertools.product(*[range(k) for k in shape]):
        out[idx] = fn(*idx)
    return out


def _uniform(name: str, k: int) -> Noise:
    return Noise(name, k, tuple([1.0 / k] * k))


def _chain_names(root: str, length: int) -> list[str]:
    return [f"{root}{i}" for i in range(1, length + 1)]


def _extend(vertices: list[str], edges: list[tuple[str, str]], roots: Sequence[str],
            lengths: Sequence[int]) -> tuple[dict[str, str], list[str]]:
    """Append a chain below each root; returns chain parent map and the sinks."""
    parent: dict[str, str] = {}
    sinks = []
    for root, k in zip(roots, lengths):
        prev = root
        for v in _chain_names(root, k):
            vertices.append(v)
            edges.append((prev, v))
            parent[v] = prev
            prev = v
        sinks.append(prev)
    return parent, sinks


def _chain_parts(parent: dict[str, str]) -> tuple[list[Noise], dict[str, Equation]]:
    noises, eqs = [], {}
    for v, p in parent.items():
        name = f"U_{v}"
        noises.append(Noise(name, 4, CHAIN_NOISE_PROBS))
        # noise state s encodes (f(0), f(1)) = (s >> 1, s & 1)
        eqs[v] = Equation((p,), (name,),
                          _table(lambda x, s: (s >> 1) & 1 if x == 0 else s & 1, (2, 4)))
    return noises, eqs


def _single_edge(chain: Sequence[int]) -> WitnessPair:
    vertices, edges = ["A", "B"], [("A", "B")]
    parent, sinks = _extend(vertices, edges, ["B"], chain or [0])
    g = CausalGraph(vertices, edges)
    chain_noises, chain_eqs = _chain_parts(parent)
    noises = [_uniform("U_A", 2), _uniform("U_B", 3)] + chain_noises
    eq_a = Equation((), ("U_A",), np.arange(2))
    c1 = Equation(("A",), ("U_B",), _table(lambda a, u: int(u != 0) ^ a, (2, 3)))
    c2 = Equation(("A",), ("U_B",),
                  _table(lambda a, u: int(u == 0 or (u == 1 and a == 0)), (2, 3)))
    m1 = StructuralModel(g, noises, {"A": eq_a, "B": c1, **chain_eqs})
    m2 = StructuralModel(g, noises, {"A": eq_a, "B": c2, **chain_eqs})
    sink = sinks[0]
    target = [(f"{sink}(a=1)", sink, NodeIntervention({"A": 1})),
              (f"{sink}(a=0)", sink, NodeIntervention({"A": 0}))]
    return WitnessPair(Shape.SINGLE_EDGE, m1, m2, target, (sink,))


def _fork(chain: Sequence[int]) -> WitnessPair:
    vertices, edges = ["A", "B", "C"], [("A", "B"), ("A", "C")]
    parent, sinks = _extend(vertices, edges, ["B", "C"], chain or [0, 0])
    g = CausalGraph(vertices, edges)
    chain_noises, chain_eqs = _chain_parts(parent)
    noises = [_uniform("U_A", 2), _uniform("U_B", 2), _uniform("U_C", 2)] + chain_noises
    eq_a = Equation((), ("U_A",), np.arange(2))
    eqs1 = {
        "A": eq_a,
        "B": Equation(("A",), ("U_B",), _table(lambda a, u: a ^ u, (2, 2))),
        "C": Equation(("A",), ("U_C",), _table(lambda a, u: a ^ u, (2, 2))),
        **chain_eqs,
    }
    # B reads U_B when A = 1 and U_C otherwise; C does the opposite
    eqs2 = {
        "A": eq_a,
        "B": Equation(("A",), ("U_B", "U_C"), _table(lambda a, ub, uc: ub if a else uc, (2, 2, 2))),
        "C": Equation(("A",), ("U_B", "U_C"), _table(lambda a, ub, uc: uc if a else ub, (2, 2, 2))),
        **chain_eqs,
    }
    m1 = StructuralModel(g, noises, eqs1)
    m2 = StructuralModel(g, noises, eqs2)
    eta = EdgeIntervention({("A", "B"): 0, ("A", "C"): 1})
    target = [(s, s, eta) for s in sinks]
    return WitnessPair(Shape.FORK, m1, m2, target, tuple(sinks))


def node_interventions(g: CausalGraph):
    """Every node intervention on every nonempty vertex subset, in a fixed order."""
    for r in range(1, len(g.vertices) + 1):
        for subset in itertools.combinations(g.vertices, r):
            for vals in itertools.product(*[range(g.cardinality[v]) for v in subset]):
                yield NodeIntervention(dict(zip(subset, vals)))


def verify(pair: WitnessPair) -> dict[str, Any]:
    """Exhaustive agreement and disagreement measurements for a pair."""
    m1, m2 = pair.m1, pair.m2
    g = m1.graph
    obs = observational_joint(m1).max_abs_diff(observational_joint(m2))
    node = 0.0
    for iv in node_interventions(g):
        rest = [v for v in g.vertices if v not in iv.values]
        d1 = response_distribution(m1, rest, iv) if rest else None
        if d1 is not None:
            node = max(node, d1.max_abs_diff(response_distribution(m2, rest, iv)))
    t1, t2 = pair.target_tables()
    rep = {
        "shape": pair.shape.value,
        "vertices": list(g.vertices),
        "observational_max_abs_diff": obs,
        "node_intervention_max_abs_diff": node,
        "target_total_variation": t1.total_variation(t2),
        "target": [label for label, _, _ in pair.target],
        "model_classes": [check_model_class(m1).value, check_model_class(m2).value],
    }
    if pair.shape == Shape.SINGLE_EDGE:
        # the response to a = 1 jointly with the natural value
        label, sink, iv = pair.target[0]
        items = [(label, sink, iv), (sink, sink, None)]
        rep["natural_joint_total_variation"] = counterfactual_joint(m1, items).total_variation(
            counterfactual_joint(m2, items))
    return rep


def witness_pair(shape: Shape | str, extension_chain: Sequence[int] | None = None
                 ) -> WitnessPair:
    """Build and verify a witness pair, optionally extended by directed chains.

    ``extension_chain`` gives one chain length per child (one for
    ``SINGLE_EDGE``, two for ``FORK``).  Raises :class:`SearchFailed` when the
    verification does not hold.
    """
    shape = Shape(shape)
    chain = list(extension_chain or [])
    need = 1 if shape == Shape.SINGLE_EDGE else 2
    if chain and len(chain) != need:
        raise ValueError(f"{shape.value} takes {need} chain length(s), got {len(chain)}")
    if any(k < 0 for k in chain):
        raise ValueError("chain lengths must be nonnegative")
    pair = _single_edge(chain) if shape == Shape.SINGLE_EDGE else _fork(chain)
    rep = verify(pair)
    pair.report = rep
    if rep["observational_max_abs_diff"] > AGREEMENT_TOL:
        raise SearchFailed(f"models disagree on p(V) by {rep['observational_max_abs_diff']}")
    if rep["node_intervention_max_abs_diff"] > AGREEMENT_TOL:
        raise SearchFailed("models disagree on a node intervention")
    if rep["target_total_variation"] < MIN_DISAGREEMENT:
        raise SearchFailed(f"target disagreement {rep['target_total_variation']} too small")
    expected = {Shape.SINGLE_EDGE: [ModelClass.MWM.value] * 2,
                Shape.FORK: [ModelClass.MWM.value, ModelClass.SWM_ONLY.value]}[shape]
    if rep["model_classes"] != expected:
        raise SearchFailed(f"model classes {rep['model_classes']}, expected {expected}")
    return pair
