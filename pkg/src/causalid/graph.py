"""Directed and mixed causal graphs.

A :class:`CausalGraph` holds an ordered vertex list, directed edges,
bidirected edges and per-vertex cardinalities.  Everything iterates in
vertex declaration order so that downstream output is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    CycleError,
    DuplicateVertex,
    UnknownEdge,
    UnknownEndpoint,
    UnknownVertex,
)

Edge = tuple[str, str]


class CausalGraph:
    """An acyclic directed mixed graph; a DAG when it has no bidirected edges.

    Instances are immutable after construction.
    """

    __slots__ = ("vertices", "directed_edges", "bidirected_edges", "cardinality",
                 "_index", "_parents", "_children", "_siblings", "_topo")

    def __init__(self, vertices: Iterable[str], directed_edges: Iterable[Edge] = (),
                 bidirected_edges: Iterable[Edge] = (),
                 cardinality: Mapping[str, int] | None = None):
        verts = tuple(vertices)
        index: dict[str, int] = {}
        for v in verts:
            if v in index:
                raise DuplicateVertex(f"vertex {v!r} declared twice")
            index[v] = len(index)
        self._index = index
        self.vertices = verts

        directed = set()
        for u, v in directed_edges:
            self._check_endpoints(u, v)
            directed.add((u, v))
        bidirected = set()
        for u, v in bidirected_edges:
            self._check_endpoints(u, v)
            bidirected.add(self._bi_key(u, v))
        self.directed_edges = tuple(sorted(directed, key=self.edge_key))
        self.bidirected_edges = tuple(sorted(bidirected, key=self.edge_key))

        card = dict(cardinality or {})
        for v in card:
            if v not in index:
                raise UnknownVertex(f"cardinality given for unknown vertex {v!r}")
        for v, k in card.items():
            if int(k) < 2:
                raise ValueError(f"cardinality of {v!r} must be at least 2, got {k}")
        self.cardinality = {v: int(card.get(v, 2)) for v in verts}

        self._parents: dict[str, tuple[str, ...]] = {}
        self._children: dict[str, tuple[str, ...]] = {}
        self._siblings: dict[str, tuple[str, ...]] = {}
        pa = {v: [] for v in verts}
        ch = {v: [] for v in verts}
        sib = {v: [] for v in verts}
        for u, v in self.directed_edges:
            pa[v].append(u)
            ch[u].append(v)
        for u, v in self.bidirected_edges:
            sib[u].append(v)
            sib[v].append(u)
        for v in verts:
            self._parents[v] = tuple(sorted(pa[v], key=index.__getitem__))
            self._children[v] = tuple(sorted(ch[v], key=index.__getitem__))
            self._siblings[v] = tuple(sorted(sib[v], key=index.__getitem__))
        self._topo = self._compute_topological_order()

    def _check_endpoints(self, u: str, v: str) -> None:
        for x in (u, v):
            if x not in self._index:
                raise UnknownEndpoint(f"edge ({u}, {v}) has undeclared endpoint {x!r}")
        if u == v:
            raise ValueError(f"self-loop on {u!r}")

    def _bi_key(self, u: str, v: str) -> Edge:
        return (u, v) if self._index[u] < self._index[v] else (v, u)

    def _compute_topological_order(self) -> tuple[str, ...]:
        indeg = {v: len(self._parents[v]) for v in self.vertices}
        order: list[str] = []
        ready = [v for v in self.vertices if indeg[v] == 0]
        while ready:
            ready.sort(key=self._index.__getitem__)
            v = ready.pop(0)
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self.vertices):
            raise CycleError(self._find_cycle(set(self.vertices) - set(order)))
        return tuple(order)

    def _find_cycle(self, candidates: set[str]) -> list[str]:
        # every vertex left over lies on or behind a cycle; walk parents until one repeats
        v = min(candidates, key=self._index.__getitem__)
        seen: list[str] = []
        while v not in seen:
            seen.append(v)
            v = next(p for p in self._parents[v] if p in candidates)
        cycle = seen[seen.index(v):]
        cycle.reverse()
        return cycle + [cycle[0]]

    # -- basic queries -------------------------------------------------

    def edge_key(self, e: Edge) -> tuple[int, int]:
        return (self._index[e[0]], self._index[e[1]])

    def index(self, v: str) -> int:
        self.require(v)
        return self._index[v]

    def require(self, *vs: str) -> None:
        for v in vs:
            if v not in self._index:
                raise UnknownVertex(f"unknown vertex {v!r}")

    def sort(self, vs: Iterable[str]) -> tuple[str, ...]:
        """Return ``vs`` in declaration order."""
        vs = set(vs)
        self.require(*vs)
        return tuple(sorted(vs, key=self._index.__getitem__))

    def parents(self, v: str) -> tuple[str, ...]:
        self.require(v)
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        self.require(v)
        return self._children[v]

    def siblings(self, v: str) -> tuple[str, ...]:
        self.require(v)
        return self._siblings[v]

    def has_edge(self, u: str, v: str) -> bool:
        return u in self._index and v in self._parents and u in self._parents[v]

    def has_bidirected(self, u: str, v: str) -> bool:
        return u in self._index and v in self._siblings and u in self._siblings[v]

    @property
    def is_dag(self) -> bool:
        return not self.bidirected_edges

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def with_cardinality(self, cardinality: Mapping[str, int]) -> CausalGraph:
        card = dict(self.cardinality)
        card.update(cardinality)
        return CausalGraph(self.vertices, self.directed_edges, self.bidirected_edges, card)

    def __contains__(self, v: object) -> bool:
        return v in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return (set(self.vertices) == set(other.vertices)
                and set(self.directed_edges) == set(other.directed_edges)
                and {frozenset(e) for e in self.bidirected_edges}
                == {frozenset(e) for e in other.bidirected_edges}
                and self.cardinality == other.cardinality)

    def __hash__(self) -> int:
        return hash((frozenset(self.vertices), frozenset(self.directed_edges)))

    def __repr__(self) -> str:
        parts = [f"{u}->{v}" for u, v in self.directed_edges]
        parts += [f"{u}<->{v}" for u, v in self.bidirected_edges]
        return f"CausalGraph({' '.join(self.vertices)}; {', '.join(parts)})"


def build_graph(vertices: Iterable[str], directed_edges: Iterable[Edge] = (),
                bidirected_edges: Iterable[Edge] = (),
                cardinalities: Mapping[str, int] | None = None) -> CausalGraph:
    """Validate the inputs and return a :class:`CausalGraph`."""
    return CausalGraph(vertices, directed_edges, bidirected_edges, cardinalities)


def topological_order(g: CausalGraph) -> tuple[str, ...]:
    """Topological order with ties broken by declaration order."""
    return g.topological_order()


def ancestors(g: CausalGraph, S: Iterable[str]) -> frozenset[str]:
    """Reflexive ancestors of ``S`` along directed edges."""
    stack = list(S)
    g.require(*stack)
    seen = set(stack)
    while stack:
        v = stack.pop()
        for p in g.parents(v):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def descendants(g: CausalGraph, S: Iterable[str]) -> frozenset[str]:
    """Reflexive descendants of ``S`` along directed edges."""
    stack = list(S)
    g.require(*stack)
    seen = set(stack)
    while stack:
        v = stack.pop()
        for c in g.children(v):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def districts(g: CausalGraph) -> list[frozenset[str]]:
    """Connected components of the bidirected part, ordered by first member."""
    seen: set[str] = set()
    out = []
    for v in g.vertices:
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for s in g.siblings(x):
                if s not in comp:
                    comp.add(s)
                    stack.append(s)
        seen |= comp
        out.append(frozenset(comp))
    return out


def district_of(g: CausalGraph, v: str) -> frozenset[str]:
    for d in districts(g):
        if v in d:
            return d
    raise UnknownVertex(f"unknown vertex {v!r}")


def vertex_subgraph(g: CausalGraph, keep: Iterable[str]) -> CausalGraph:
    """Induced subgraph on ``keep``."""
    keep = set(keep)
    g.require(*keep)
    verts = [v for v in g.vertices if v in keep]
    return CausalGraph(
        verts,
        [e for e in g.directed_edges if e[0] in keep and e[1] in keep],
        [e for e in g.bidirected_edges if e[0] in keep and e[1] in keep],
        {v: g.cardinality[v] for v in verts},
    )


def edge_subgraph(g: CausalGraph, keep_edges: Iterable[Edge],
                  keep_bidirected: Iterable[Edge] | None = None) -> CausalGraph:
    """Same vertices, only the listed edges.

    Bidirected edges are kept unless ``keep_bidirected`` is given.
    """
    keep = set(keep_edges)
    for u, v in keep:
        if not g.has_edge(u, v):
            raise UnknownEdge(f"edge {u}->{v} not in graph")
    if keep_bidirected is None:
        bi = list(g.bidirected_edges)
    else:
        bi = list(keep_bidirected)
        for u, v in bi:
            if not g.has_bidirected(u, v):
                raise UnknownEdge(f"edge {u}<->{v} not in graph")
    return CausalGraph(g.vertices, [e for e in g.directed_edges if e in keep], bi,
                       g.cardinality)


def _adjacent(g: CausalGraph, x: str):
    """(neighbour, arrowhead at x, arrowhead at neighbour) for every edge at x."""
    for p in g.parents(x):
        yield p, True, False
    for c in g.children(x):
        yield c, False, True
    for s in g.siblings(x):
        yield s, True, True


def latent_project(g: CausalGraph, observed: Iterable[str]) -> CausalGraph:
    """Project out the vertices not in ``observed``.

    V -> W when a directed path from V to W has only hidden intermediates;
    V <-> W when some path between them has only hidden non-collider
    intermediates and arrowheads at both ends.  Works on ADMG input as well,
    so projections can be composed.
    """
    obs = set(observed)
    g.require(*obs)
    directed: set[Edge] = set()
    bidirected: set[frozenset[str]] = set()

    for v in g.vertices:
        if v not in obs:
            continue
        # directed: walk children through hidden vertices
        stack = list(g.children(v))
        seen = set()
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            if x in obs:
                directed.add((v, x))
            else:
                stack.extend(g.children(x))

        # bidirected: simple paths starting with an arrowhead into v
        def walk(x: str, head_at_x: bool, on_path: set[str]) -> None:
            for n, head_here, head_there in _adjacent(g, x):
                if n in on_path:
                    continue
                if head_at_x and head_here:
                    continue  # x would be a collider
                if n in obs:
                    if head_there and n != v:
                        bidirected.add(frozenset((v, n)))
                    continue
                on_path.add(n)
                walk(n, head_there, on_path)
                on_path.discard(n)

        for n, head_at_v, head_at_n in _adjacent(g, v):
            if not head_at_v:
                continue
            if n in obs:
                if head_at_n:
                    bidirected.add(frozenset((v, n)))
                continue
            walk(n, head_at_n, {v, n})

    verts = [v for v in g.vertices if v in obs]
    return CausalGraph(verts, directed, [tuple(sorted(b)) for b in bidirected],
                       {v: g.cardinality[v] for v in verts})


@dataclass(frozen=True)
class SplitGraph:
    """A graph whose vertices are random or fixed copies of original vertices.

    ``fixed`` maps each fixed vertex to its assigned state; ``origin`` maps every
    split vertex back to the vertex it was copied from.
    """

    graph: CausalGraph
    fixed: Mapping[str, int] = field(default_factory=dict)
    origin: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for f in self.fixed:
            if self.graph.parents(f):
                raise ValueError(f"fixed vertex {f!r} has incoming edges")

    @property
    def random_vertices(self) -> tuple[str, ...]:
        return tuple(v for v in self.graph.vertices if v not in self.fixed)

    def copies(self, original: str) -> tuple[str, ...]:
        return tuple(v for v in self.graph.vertices if self.origin.get(v, v) == original)


def d_separated(g: CausalGraph | SplitGraph, X: Iterable[str], Y: Iterable[str],
                Z: Iterable[str] = ()) -> bool:
    """True iff every path between ``X`` and ``Y`` is blocked by ``Z``.

    Colliders are open when they are ancestors of ``Z``.  Works for ADMGs
    (m-separation).  Fixed vertices of a split graph are constants and block
    every path through them.
    """
    fixed: set[str] = set()
    if isinstance(g, SplitGraph):
        fixed = set(g.fixed)
        g = g.graph
    X, Y, Z = set(X), set(Y), set(Z)
    g.require(*X, *Y, *Z)
    if (X & Y) or (X & Z) or (Y & Z):
        raise ValueError("X, Y and Z must be disjoint")
    an_z = ancestors(g, Z)

    # states: (vertex, entered with an arrowhead)
    frontier = []
    seen = set()
    for x in X:
        for n, _, head_at_n in _adjacent(g, x):
            frontier.append((n, head_at_n))
    while frontier:
        state = frontier.pop()
        if state in seen:
            continue
        seen.add(state)
        v, head_in = state
        if v in Y:
            return False
        if v in X:
            continue
        for n, head_here, head_at_n in _adjacent(g, v):
            if head_in and head_here:
                ok = v in an_z
            else:
                ok = v not in Z and v not in fixed
            if ok:
                frontier.append((n, head_at_n))
    return True
