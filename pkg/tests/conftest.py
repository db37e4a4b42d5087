import itertools

import numpy as np
import pytest

from causalid.graph import CausalGraph
from causalid.interventions import NATURAL, PathIntervention
from causalid.paths import enumerate_paths, is_prefix

CONFOUNDED_MEDIATION_EDGES = [("W", "A"), ("W", "M"), ("A", "M"), ("A", "Y"), ("M", "Y")]
TWO_STEP = ["C0", "A1", "W1", "C1", "Y1", "A2", "W2", "C2", "Y2"]


def confounded_mediation() -> CausalGraph:
    return CausalGraph(["W", "A", "M", "Y"], CONFOUNDED_MEDIATION_EDGES)


def two_step() -> CausalGraph:
    """Complete DAG over the observed two-time-point variables."""
    return CausalGraph(TWO_STEP, [(u, v) for i, v in enumerate(TWO_STEP) for u in TWO_STEP[:i]])


def front_door_admg() -> CausalGraph:
    return CausalGraph(["A", "M", "Y"], [("A", "M"), ("M", "Y")], [("A", "Y")])


def front_door_hidden() -> CausalGraph:
    return CausalGraph(["H", "A", "M", "Y"], [("H", "A"), ("H", "Y"), ("A", "M"), ("M", "Y")])


def mediation_dag() -> CausalGraph:
    return CausalGraph(["C", "A", "M", "Y"],
                       [("C", "A"), ("C", "M"), ("C", "Y"), ("A", "M"), ("A", "Y"), ("M", "Y")])


def random_dag(seed: int, max_n: int = 6, min_n: int = 2, p_edge: float | None = None
               ) -> CausalGraph:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(min_n, max_n + 1))
    names = [f"V{i}" for i in range(n)]
    order = rng.permutation(n)
    p = rng.uniform(0.3, 0.8) if p_edge is None else p_edge
    edges = [(names[order[i]], names[order[j]])
             for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    return CausalGraph(names, edges)


def random_outcomes(g: CausalGraph, rng: np.random.Generator) -> list[str]:
    k = int(rng.integers(1, min(3, len(g.vertices)) + 1))
    return list(rng.choice(list(g.vertices), size=k, replace=False))


def random_proper_paths(g: CausalGraph, rng: np.random.Generator, max_paths: int = 4
                        ) -> list[tuple[str, ...]]:
    allp = enumerate_paths(g, g.vertices, g.vertices)
    if not allp:
        return []
    idx = rng.permutation(len(allp))[:max_paths * 2]
    out: list[tuple[str, ...]] = []
    for i in idx:
        p = allp[i]
        if any(is_prefix(p, q) or is_prefix(q, p) for q in out):
            continue
        out.append(p)
        if len(out) >= max_paths:
            break
    return out


def random_path_intervention(g: CausalGraph, rng: np.random.Generator, p_natural: float = 0.0,
                             max_paths: int = 4) -> PathIntervention:
    paths = random_proper_paths(g, rng, max_paths)
    vals = {}
    for p in paths:
        if rng.random() < p_natural:
            vals[p] = NATURAL
        else:
            vals[p] = int(rng.integers(0, g.cardinality[p[0]]))
    return PathIntervention(vals)


@pytest.fixture
def cm_graph() -> CausalGraph:
    return confounded_mediation()
