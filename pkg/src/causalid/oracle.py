"""Exact finite structural causal models.

Every distribution is computed by enumerating the full product space of the
noise variables with numpy broadcasting: each noise gets an axis, and each
response is an integer array over that grid.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, InvalidModel
from .graph import CausalGraph
from .interventions import (
    NATURAL,
    AnyIntervention,
    EdgeIntervention,
    NodeIntervention,
    PathIntervention,
)
from .joint import DiscreteJoint
from .paths import funnel

MAX_NOISE_ASSIGNMENTS = 2 ** 24
PROB_TOL = 1e-12


class ModelClass(str, enum.Enum):
    MWM = "MWM"
    SWM_ONLY = "SWM_ONLY"
    NEITHER = "NEITHER"


@dataclass(frozen=True)
class Noise:
    name: str
    states: int
    probs: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.states,) or np.any(p < 0) or abs(p.sum() - 1.0) > PROB_TOL:
            raise InvalidModel(f"noise {self.name}: invalid probability vector {self.probs}")


@dataclass(frozen=True)
class Equation:
    """Response table of one vertex, indexed by (parents..., noises...)."""

    parents: tuple[str, ...]
    noises: tuple[str, ...]
    table: np.ndarray

    def __hash__(self) -> int:
        return hash((self.parents, self.noises, self.table.tobytes()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Equation):
            return NotImplemented
        return (self.parents == other.parents and self.noises == other.noises
                and np.array_equal(self.table, other.table))


class StructuralModel:
    """A DAG with one response table per vertex and independent finite noises."""

    def __init__(self, graph: CausalGraph, noises: Sequence[Noise],
                 equations: Mapping[str, Equation]):
        if not graph.is_dag:
            raise InvalidModel("structural models live on DAGs")
        self.graph = graph
        self.noises = tuple(noises)
        self._noise_axis = {n.name: i for i, n in enumerate(self.noises)}
        if len(self._noise_axis) != len(self.noises):
            raise InvalidModel("duplicate noise names")
        self.equations = {v: equations[v] for v in graph.vertices if v in equations}
        missing = [v for v in graph.vertices if v not in self.equations]
        if missing:
            raise InvalidModel(f"no equation for {missing}")
        for v, eq in self.equations.items():
            if tuple(eq.parents) != graph.parents(v):
                raise InvalidModel(
                    f"equation of {v} reads {eq.parents}, graph parents are {graph.parents(v)}")
            shape = tuple(graph.cardinality[p] for p in eq.parents) + tuple(
                self.noises[self._axis(n)].states for n in eq.noises)
            if eq.table.shape != shape:
                raise InvalidModel(f"table of {v} has shape {eq.table.shape}, expected {shape}")
            if eq.table.size and (eq.table.min() < 0 or eq.table.max() >= graph.cardinality[v]):
                raise InvalidModel(f"table of {v} maps outside its states")
        self.grid_shape = tuple(n.states for n in self.noises)
        size = int(np.prod(self.grid_shape, dtype=object)) if self.noises else 1
        if size > MAX_NOISE_ASSIGNMENTS:
            raise CapacityError(f"{size} noise assignments exceed {MAX_NOISE_ASSIGNMENTS}")
        self._weights = None
        self._factual = None

    def _axis(self, name: str) -> int:
        try:
            return self._noise_axis[name]
        except KeyError:
            raise InvalidModel(f"unknown noise {name!r}") from None

    @property
    def weights(self) -> np.ndarray:
        """Probability of every noise assignment, shaped like the grid."""
        if self._weights is None:
            w = np.ones(self.grid_shape)
            for i, n in enumerate(self.noises):
                shape = [1] * len(self.noises)
                shape[i] = n.states
                w = w * np.asarray(n.probs).reshape(shape)
            self._weights = w
        return self._weights

    def noise_index(self, name: str) -> np.ndarray:
        i = self._axis(name)
        shape = [1] * len(self.noises)
        shape[i] = self.noises[i].states
        return np.arange(self.noises[i].states).reshape(shape)

    def apply(self, v: str, parent_values: Sequence[Any]) -> np.ndarray:
        """Evaluate the response table of ``v`` given parent states or arrays."""
        eq = self.equations[v]
        idx = tuple(parent_values) + tuple(self.noise_index(n) for n in eq.noises)
        if not idx:
            return np.asarray(eq.table)
        return eq.table[idx]

    def factual(self) -> dict[str, np.ndarray]:
        """Natural value of every vertex over the noise grid."""
        if self._factual is None:
            vals: dict[str, np.ndarray] = {}
            for v in self.graph.topological_order():
                vals[v] = self.apply(v, [vals[p] for p in self.graph.parents(v)])
            self._factual = vals
        return self._factual

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        g = self.graph
        return {
            "graph": {
                "vertices": list(g.vertices),
                "edges": [list(e) for e in g.directed_edges],
                "cardinality": dict(g.cardinality),
            },
            "noises": [{"name": n.name, "states": n.states, "probs": list(n.probs)}
                       for n in self.noises],
            "equations": {
                v: {"parents": list(eq.parents), "noises": list(eq.noises),
                    "table": [int(x) for x in eq.table.ravel()]}
                for v, eq in self.equations.items()
            },
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any] | str) -> StructuralModel:
        if isinstance(data, str):
            data = json.loads(data)
        gd = data["graph"]
        if isinstance(gd, str):
            from .dsl import parse_graph_dsl

            g = parse_graph_dsl(gd)
        else:
            g = CausalGraph(gd["vertices"], [tuple(e) for e in gd.get("edges", [])], (),
                            gd.get("cardinality"))
        noises = [Noise(n["name"], int(n["states"]), tuple(float(p) for p in n["probs"]))
                  for n in data["noises"]]
        sizes = {n.name: n.states for n in noises}
        eqs = {}
        for v, e in data["equations"].items():
            parents = tuple(e["parents"])
            ns = tuple(e["noises"])
            shape = tuple(g.cardinality[p] for p in parents) + tuple(sizes[n] for n in ns)
            eqs[v] = Equation(parents, ns, np.asarray(e["table"], dtype=np.int64).reshape(shape))
        return cls(g, noises, eqs)


# ---------------------------------------------------------------------------
# distributions


def _distribution(m: StructuralModel, labels: Sequence[str], cards: Sequence[int],
                  arrays: Sequence[np.ndarray]) -> DiscreteJoint:
    w = m.weights
    if not arrays:
        return DiscreteJoint([], np.array(float(w.sum())), check=False)
    full = [np.broadcast_to(np.asarray(a), w.shape).ravel() for a in arrays]
    codes = np.ravel_multi_index(full, cards) if len(full) > 1 else full[0]
    table = np.bincount(codes, weights=w.ravel(), minlength=int(np.prod(cards)))
    return DiscreteJoint(list(zip(labels, cards)), table.reshape(cards))


def observational_joint(m: StructuralModel, vertices: Iterable[str] | None = None
                        ) -> DiscreteJoint:
    """Exact p(V), or its marginal over ``vertices``."""
    vs = m.graph.vertices if vertices is None else m.graph.sort(vertices)
    f = m.factual()
    return _distribution(m, vs, [m.graph.cardinality[v] for v in vs], [f[v] for v in vs])


def _edge_response(m: StructuralModel, assigned: Mapping[tuple[str, str], int]):
    g = m.graph
    memo: dict[str, np.ndarray] = {}

    def resp(v: str) -> np.ndarray:
        if v not in memo:
            args = [assigned[(p, v)] if (p, v) in assigned else resp(p) for p in g.parents(v)]
            memo[v] = m.apply(v, args)
        return memo[v]

    return resp


def _path_response(m: StructuralModel, alpha: Mapping[tuple[str, ...], Any]):
    """Responses to a path intervention, by literal funnel recursion."""
    g = m.graph
    fact = m.factual()
    memo: dict[tuple, np.ndarray] = {}

    def resp(v: str, a: Mapping) -> np.ndarray:
        key = (v, frozenset(a.items()))
        if key in memo:
            return memo[key]
        args = []
        for p in g.parents(v):
            e = (p, v)
            if e in a:
                args.append(fact[p] if a[e] is NATURAL else a[e])
            else:
                args.append(resp(p, funnel(a, e)))
        memo[key] = r = m.apply(v, args)
        return r

    return lambda v: resp(v, dict(alpha))


def responder(m: StructuralModel, iv: AnyIntervention | None):
    """Function mapping a vertex to its response array under ``iv``."""
    g = m.graph
    if iv is None or len(iv) == 0:
        fact = m.factual()
        return fact.__getitem__
    if isinstance(iv, NodeIntervention):
        iv.validate(g)
        return _edge_response(m, iv.as_edges(g).assignment)
    if isinstance(iv, EdgeIntervention):
        iv.validate(g)
        return _edge_response(m, iv.assignment)
    if isinstance(iv, PathIntervention):
        iv.validate(g)
        return _path_response(m, iv.assignment)
    raise TypeError(f"not an intervention: {iv!r}")


def counterfactual_joint(m: StructuralModel,
                         items: Sequence[tuple[str, str, AnyIntervention | None]]
                         ) -> DiscreteJoint:
    """Joint law of several responses, possibly under different interventions.

    ``items`` holds ``(label, vertex, intervention)`` triples; ``None`` means
    the natural value.
    """
    labels, cards, arrays = [], [], []
    cache: dict[int, Any] = {}
    for label, v, iv in items:
        m.graph.require(v)
        key = id(iv)
        if key not in cache:
            cache[key] = responder(m, iv)
        labels.append(label)
        cards.append(m.graph.cardinality[v])
        arrays.append(cache[key](v))
    return _distribution(m, labels, cards, arrays)


def response_distribution(m: StructuralModel, Y: Iterable[str], iv: AnyIntervention | None,
                          joint_with: Iterable[str] = ()) -> DiscreteJoint:
    """Exact law of the responses of ``Y`` to ``iv``, jointly with natural ``joint_with``."""
    Y = m.graph.sort(Y)
    extra = m.graph.sort(joint_with)
    if set(Y) & set(extra):
        raise ValueError("joint_with must be disjoint from Y")
    items = [(y, y, iv) for y in Y] + [(v, v, None) for v in extra]
    return counterfactual_joint(m, items)


def evaluate_expr(m: StructuralModel, expr) -> np.ndarray:
    """Value of a counterfactual expression tree over the noise grid."""
    from .interventions import Const, CounterfactualExpr, NaturalValue

    fact = m.factual()
    memo: dict[int, np.ndarray] = {}

    def go(e):
        if isinstance(e, Const):
            return e.value
        if isinstance(e, NaturalValue):
            return fact[e.vertex]
        assert isinstance(e, CounterfactualExpr)
        if id(e) not in memo:
            memo[id(e)] = m.apply(e.vertex, [go(a) for _, a in e.args])
        return memo[id(e)]

    return go(expr)


def expr_distribution(m: StructuralModel, exprs: Mapping[str, Any]) -> DiscreteJoint:
    labels = list(exprs)
    arrays = [evaluate_expr(m, exprs[k]) for k in labels]
    cards = [m.graph.cardinality[exprs[k].vertex] for k in labels]
    return _distribution(m, labels, cards, arrays)


# ---------------------------------------------------------------------------
# model classes


def _mutually_independent(arrays: Sequence[np.ndarray], w: np.ndarray,
                          tol: float = PROB_TOL) -> bool:
    if len(arrays) < 2:
        return True
    flat_w = w.ravel()
    cols = [np.broadcast_to(a, w.shape).ravel() for a in arrays]
    stacked = np.stack(cols, axis=1)
    combos, inv = np.unique(stacked, axis=0, return_inverse=True)
    inv = inv.ravel()
    joint = np.bincount(inv, weights=flat_w, minlength=len(combos))
    margs = []
    for i, c in enumerate(cols):
        vals, vinv = np.unique(c, return_inverse=True)
        probs = np.bincount(vinv.ravel(), weights=flat_w, minlength=len(vals))
        margs.append(dict(zip(vals.tolist(), probs)))
    prod = np.ones(len(combos))
    for i in range(len(cols)):
        prod *= np.array([margs[i][x] for x in combos[:, i].tolist()])
    if np.max(np.abs(joint - prod)) > tol:
        return False
    return abs(prod.sum() - 1.0) <= tol * 10


def _noise_components(m: StructuralModel) -> list[list[str]]:
    parent = {v: v for v in m.graph.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    readers: dict[str, list[str]] = {}
    for v, eq in m.equations.items():
        for n in eq.noises:
            readers.setdefault(n, []).append(v)
    for vs in readers.values():
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])
    comps: dict[str, list[str]] = {}
    for v in m.graph.vertices:
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def _parent_configs(m: StructuralModel, v: str):
    cards = [m.graph.cardinality[p] for p in m.graph.parents(v)]
    return list(itertools.product(*[range(k) for k in cards]))


def check_model_class(m: StructuralModel) -> ModelClass:
    """Classify as MWM, SWM only, or neither by exhaustive independence checks."""
    comps = [c for c in _noise_components(m) if len(c) > 1]
    if not comps:
        return ModelClass.MWM
    w = m.weights
    g = m.graph

    def outcomes(v: str) -> list[np.ndarray]:
        return [m.apply(v, list(cfg)) for cfg in _parent_configs(m, v)]

    # multiple-worlds: whole response families independent across vertices
    mwm = True
    for comp in comps:
        codes = []
        for v in comp:
            k = g.cardinality[v]
            code = np.zeros(w.shape, dtype=np.int64)
            for arr in outcomes(v):
                code = code * k + np.broadcast_to(arr, w.shape)
            codes.append(code)
        if not _mutually_independent(codes, w):
            mwm = False
            break
    if mwm:
        return ModelClass.MWM

    # single world: for each joint parent assignment, one outcome per vertex
    for comp in comps:
        pas = sorted({p for v in comp for p in g.parents(v)}, key=g.index)
        cards = [g.cardinality[p] for p in pas]
        for cfg in itertools.product(*[range(k) for k in cards]):
            val = dict(zip(pas, cfg))
            arrays = [m.apply(v, [val[p] for p in g.parents(v)]) for v in comp]
            if not _mutually_independent(arrays, w):
                return ModelClass.NEITHER
    return ModelClass.SWM_ONLY


# ---------------------------------------------------------------------------
# random models


def _surjective_table(rng: np.random.Generator, lead_shape: tuple[int, ...], k: int,
                      card: int) -> np.ndarray:
    """Random table over (lead..., k) hitting every state for each lead index."""
    rows = []
    for _ in range(int(np.prod(lead_shape, dtype=int)) if lead_shape else 1):
        col = np.concatenate([rng.permutation(card), rng.integers(0, card, size=k - card)])
        rows.append(rng.permutation(col))
    return np.asarray(rows, dtype=np.int64).reshape(lead_shape + (k,))


def _depends_on_all_parents(table: np.ndarray, n_parents: int) -> bool:
    for ax in range(n_parents):
        if table.shape[ax] > 1 and np.all(np.diff(table, axis=ax) == 0):
            return False
    return True


def _noise_probs(rng: np.random.Generator, k: int) -> tuple[float, ...]:
    p = rng.dirichlet(np.ones(k)) + 0.05
    p /= p.sum()
    return tuple(float(x) for x in p)


def random_model(g: CausalGraph, seed: int, semantics: str = "MWM",
                 noise_states: int | None = None) -> StructuralModel:
    """Seeded random model with strictly positive conditionals.

    ``MWM``: one private noise per vertex.  ``SHARED``: additionally, pairs of
    children of a common parent read a pair of shared noises with swapped
    roles depending on that parent's state, so within any single world they
    read different noises.  Shared models are resampled until the
    single-world check passes.
    """
    if semantics not in ("MWM", "SHARED"):
        raise ValueError(f"unknown semantics {semantics!r}")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        m = _random_model_once(g, rng, semantics, noise_states)
        if semantics == "MWM" or check_model_class(m) != ModelClass.NEITHER:
            return m
    raise InvalidModel("could not sample a single-world model")  # pragma: no cover


def _pairs(g: CausalGraph) -> list[tuple[str, str, str]]:
    used: set[str] = set()
    out = []
    for a in g.topological_order():
        free = [c for c in g.children(a) if c not in used]
        for b, c in zip(free[0::2], free[1::2]):
            out.append((a, b, c))
            used |= {b, c}
    return out


def _random_model_once(g: CausalGraph, rng: np.random.Generator, semantics: str,
                       noise_states: int | None) -> StructuralModel:
    noises: list[Noise] = []
    eqs: dict[str, Equation] = {}
    pair_of: dict[str, tuple[str, str, str, int, frozenset[int]]] = {}
    if semantics == "SHARED":
        for a, b, c in _pairs(g):
            ka = g.cardinality[a]
            subset = frozenset(int(x) for x in rng.choice(ka, size=max(1, ka // 2), replace=False))
            ks = max(g.cardinality[b], g.cardinality[c])
            s1, s2 = f"S_{b}{c}_1", f"S_{b}{c}_2"
            noises.append(Noise(s1, ks, _noise_probs(rng, ks)))
            noises.append(Noise(s2, ks, _noise_probs(rng, ks)))
            pair_of[b] = (a, s1, s2, 0, subset)
            pair_of[c] = (a, s1, s2, 1, subset)
    for v in g.vertices:
        pa = g.parents(v)
        card = g.cardinality[v]
        k = noise_states or card + 1
        k = max(k, card)
        name = f"U_{v}"
        noises.append(Noise(name, k, _noise_probs(rng, k)))
        pa_shape = tuple(g.cardinality[p] for p in pa)
        if v not in pair_of:
            while True:
                table = _surjective_table(rng, pa_shape, k, card)
                if _depends_on_all_parents(table, len(pa)):
                    break
            eqs[v] = Equation(pa, (name,), table)
            continue
        a, s1, s2, role, subset = pair_of[v]
        ks = next(n.states for n in noises if n.name == s1)
        while True:
            h = _surjective_table(rng, pa_shape + (k,), ks, card)
            if _depends_on_all_parents(h, len(pa)) and not np.all(np.diff(h, axis=-1) == 0):
                break
        # table over (parents..., U, S1, S2): read S1 or S2 depending on the shared parent
        ai = pa.index(a)
        full = np.empty(pa_shape + (k, ks, ks), dtype=np.int64)
        for idx in itertools.product(*[range(n) for n in pa_shape + (k, ks, ks)]):
            *pcfg, u, x1, x2 = idx
            first = (pcfg[ai] in subset) != bool(role)
            full[idx] = h[tuple(pcfg) + (u, x1 if first else x2)]
        eqs[v] = Equation(pa, (name, s1, s2), full)
    return StructuralModel(g, noises, eqs)
