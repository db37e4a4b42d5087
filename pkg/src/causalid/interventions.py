"""Node, edge and path interventions and the responses they define.

Every intervention is ultimately a :class:`PathIntervention`: a node
intervention assigns its value to every edge leaving the treated vertex, and
an edge intervention is a set of length-1 paths.  Responses are built by
recursive substitution into :class:`CounterfactualExpr` trees.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Union

from .errors import (
    CapacityError,
    EdgeNotInGraph,
    InvalidIntervention,
    NotEdgeConsistent,
    NotNatural,
    NotNodeConsistent,
)
from .graph import CausalGraph, SplitGraph
from .paths import (
    Path,
    check_path,
    format_path,
    live_subset,
    max_paths,
    prefix_violations,
    relevant_paths,
    sort_paths,
)


class _Natural(enum.Enum):
    NATURAL = "natural"

    def __repr__(self) -> str:
        return "NATURAL"


NATURAL = _Natural.NATURAL
Value = Union[int, _Natural]


def format_value(v: Value) -> str:
    return "natural" if v is NATURAL else str(v)


def _check_value(g: CausalGraph, source: str, value: Value) -> None:
    if value is NATURAL:
        return
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidIntervention(f"value {value!r} for {source} is not a state index")
    if not 0 <= value < g.cardinality[source]:
        raise InvalidIntervention(
            f"value {value} out of range for {source} (cardinality {g.cardinality[source]})")


# ---------------------------------------------------------------------------
# intervention types


@dataclass(frozen=True)
class PathIntervention:
    """A proper set of directed paths, each mapped to a state or ``NATURAL``."""

    items: tuple[tuple[Path, Value], ...]

    def __init__(self, assignment: Mapping[Path, Value] | Iterable[tuple[Path, Value]] = ()):
        pairs = dict(assignment.items() if isinstance(assignment, Mapping) else assignment)
        pairs = {tuple(p): v for p, v in pairs.items()}
        bad = prefix_violations(pairs)
        if bad:
            p, q = bad[0]
            raise InvalidIntervention(
                f"improper path set: {format_path(p)} is a prefix of {format_path(q)}")
        object.__setattr__(self, "items", tuple(sorted(pairs.items(), key=lambda kv: kv[0])))

    @property
    def assignment(self) -> dict[Path, Value]:
        return dict(self.items)

    @property
    def paths(self) -> tuple[Path, ...]:
        return tuple(p for p, _ in self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    def is_constant(self) -> bool:
        return all(v is not NATURAL for _, v in self.items)

    def validate(self, g: CausalGraph) -> PathIntervention:
        for p, v in self.items:
            check_path(g, p)
            _check_value(g, p[0], v)
        return self

    def sorted_items(self, g: CausalGraph) -> list[tuple[Path, Value]]:
        a = self.assignment
        return [(p, a[p]) for p in sort_paths(g, a)]

    def as_paths(self, g: CausalGraph | None = None) -> PathIntervention:
        return self

    def to_json(self, g: CausalGraph | None = None) -> list[dict[str, Any]]:
        items = self.sorted_items(g) if g is not None else list(self.items)
        return [{"path": format_path(p), "value": format_value(v)} for p, v in items]

    def __repr__(self) -> str:
        body = ", ".join(f"{format_path(p)}={format_value(v)}" for p, v in self.items)
        return f"PathIntervention({body})"


@dataclass(frozen=True)
class EdgeIntervention:
    """Constant assignments to individual edges."""

    items: tuple[tuple[tuple[str, str], int], ...]

    def __init__(self, assignment: Mapping[tuple[str, str], int] | Iterable = ()):
        pairs = dict(assignment.items() if isinstance(assignment, Mapping) else assignment)
        for e, v in pairs.items():
            if v is NATURAL:
                raise InvalidIntervention("edge interventions take constant values only")
        object.__setattr__(self, "items",
                           tuple(sorted(((tuple(e), v) for e, v in pairs.items()))))

    @property
    def assignment(self) -> dict[tuple[str, str], int]:
        return dict(self.items)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(e for e, _ in self.items)

    def __len__(self) -> int:
        return len(self.items)

    def validate(self, g: CausalGraph) -> EdgeIntervention:
        for (u, v), val in self.items:
            if not g.has_edge(u, v):
                raise EdgeNotInGraph(f"{u}->{v} is not an edge")
            _check_value(g, u, val)
        return self

    def as_paths(self, g: CausalGraph | None = None) -> PathIntervention:
        return PathIntervention({e: v for e, v in self.items})

    def __repr__(self) -> str:
        body = ", ".join(f"{u}->{v}={val}" for (u, v), val in self.items)
        return f"EdgeIntervention({body})"


@dataclass(frozen=True)
class NodeIntervention:
    """Constant assignments to vertices, as in ``do(A=a)``."""

    items: tuple[tuple[str, int], ...]

    def __init__(self, assignment: Mapping[str, int] | Iterable = ()):
        pairs = dict(assignment.items() if isinstance(assignment, Mapping) else assignment)
        for v in pairs.values():
            if v is NATURAL:
                raise InvalidIntervention("node interventions take constant values only")
        object.__setattr__(self, "items", tuple(sorted(pairs.items())))

    @property
    def values(self) -> dict[str, int]:
        return dict(self.items)

    @property
    def treated(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.items)

    def __len__(self) -> int:
        return len(self.items)

    def validate(self, g: CausalGraph) -> NodeIntervention:
        for v, val in self.items:
            g.require(v)
            _check_value(g, v, val)
        return self

    def as_edges(self, g: CausalGraph) -> EdgeIntervention:
        return EdgeIntervention({(a, c): val for a, val in self.items for c in g.children(a)})

    def as_paths(self, g: CausalGraph | None = None) -> PathIntervention:
        if g is None:
            raise TypeError("a graph is needed to turn a node intervention into paths")
        return self.as_edges(g).as_paths()

    def __repr__(self) -> str:
        body = ", ".join(f"{v}={val}" for v, val in self.items)
        return f"NodeIntervention({body})"


AnyIntervention = Union[PathIntervention, EdgeIntervention, NodeIntervention]


def as_path_intervention(g: CausalGraph, iv: AnyIntervention) -> PathIntervention:
    return iv.as_paths(g).validate(g)


class Check(NamedTuple):
    """Outcome of a graphical check together with its evidence payload."""

    ok: bool
    evidence: dict[str, Any] | None = None

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# counterfactual expressions


@dataclass(frozen=True)
class Const:
    vertex: str
    value: int


@dataclass(frozen=True)
class NaturalValue:
    """The value ``vertex`` takes with no intervention at all."""

    vertex: str


class CounterfactualExpr:
    """A vertex applied to one argument per graph parent.

    Arguments are :class:`Const`, :class:`NaturalValue`, or nested
    expressions.  Construct through :func:`make_expr` so that structurally
    equal trees share one object.
    """

    __slots__ = ("vertex", "args", "natural", "_hash")

    def __init__(self, vertex: str, args: tuple[tuple[str, Any], ...]):
        self.vertex = vertex
        self.args = args
        self.natural = all(
            isinstance(a, NaturalValue) or (isinstance(a, CounterfactualExpr) and a.natural)
            for _, a in args)
        self._hash = hash((vertex, args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, CounterfactualExpr):
            return NotImplemented
        return (self._hash == other._hash and self.vertex == other.vertex
                and self.args == other.args)

    def __repr__(self) -> str:
        return render_expr(self)

    def walk(self) -> Iterator[CounterfactualExpr]:
        """Distinct subexpressions, including this one."""
        seen: set[int] = set()
        stack = [self]
        while stack:
            e = stack.pop()
            if id(e) in seen:
                continue
            seen.add(id(e))
            yield e
            stack.extend(a for _, a in e.args if isinstance(a, CounterfactualExpr))


_INTERN: dict[tuple, CounterfactualExpr] = {}


def make_expr(vertex: str, args: Iterable[tuple[str, Any]] = ()) -> CounterfactualExpr:
    args = tuple(args)
    key = (vertex, args)
    e = _INTERN.get(key)
    if e is None:
        if len(_INTERN) > 1_000_000:
            _INTERN.clear()
        e = CounterfactualExpr(vertex, args)
        _INTERN[key] = e
    return e


def defined_response(g: CausalGraph, Y: Iterable[str], iv: AnyIntervention
                     ) -> dict[str, CounterfactualExpr]:
    """Expand the response of each vertex in ``Y`` by recursive substitution.

    A parent W of a vertex reached along the path q (from W to the outcome) is
    fixed by the intervention exactly when some intervened path is a prefix of
    q; otherwise W is expanded in turn, or left at its natural value when it
    has no parents.
    """
    alpha = as_path_intervention(g, iv).assignment
    max_len = max((len(p) for p in alpha), default=0)
    cap = max_paths()
    count = 0

    def build(v: str, ctx: Path) -> CounterfactualExpr:
        nonlocal count
        args = []
        for p in g.parents(v):
            q = (p,) + ctx
            count += 1
            if count > cap:
                raise CapacityError(f"response expression exceeds {cap} mentions")
            hit = None
            for k in range(2, min(len(q), max_len) + 1):
                if q[:k] in alpha:
                    hit = alpha[q[:k]]
                    break
            if hit is None:
                args.append((p, build(p, q)))
            elif hit is NATURAL:
                args.append((p, NaturalValue(p)))
            else:
                args.append((p, Const(p, hit)))
        return make_expr(v, args)

    return {y: build(y, (y,)) for y in g.sort(Y)}


def response_mentions(g: CausalGraph, Y: Iterable[str], iv: AnyIntervention
                      ) -> tuple[list[Path], list[Path]]:
    """Paths labelling every mention in the response trees, and the leaves among them.

    Each mention of a parent W inside the tree for outcome Y is labelled by the
    path from W to Y along which it was reached.
    """
    alpha = as_path_intervention(g, iv).assignment
    mentions: list[Path] = []
    leaves: list[Path] = []

    def visit(v: str, ctx: Path) -> None:
        for p in g.parents(v):
            q = (p,) + ctx
            mentions.append(q)
            if any(q[:k] in alpha for k in range(2, len(q) + 1)) or not g.parents(p):
                leaves.append(q)
            else:
                visit(p, q)

    for y in g.sort(Y):
        visit(y, (y,))
    return mentions, leaves


def render_expr(expr: CounterfactualExpr, omit_natural: bool = False) -> str:
    """Text form such as ``Y(A, M(A(w), W))``.

    Subtrees with no intervened value print as the bare vertex name; constants
    print as the lower-cased vertex name, primed for each further distinct
    value of the same vertex.
    """
    names: dict[tuple[str, int], str] = {}
    counts: dict[str, int] = {}

    def const_name(c: Const) -> str:
        key = (c.vertex, c.value)
        if key not in names:
            k = counts.get(c.vertex, 0)
            counts[c.vertex] = k + 1
            names[key] = c.vertex.lower() + "'" * k
        return names[key]

    def go(e) -> str:
        if isinstance(e, Const):
            return const_name(e)
        if isinstance(e, NaturalValue):
            return e.vertex
        if e.natural:
            return e.vertex
        parts = [go(a) for _, a in e.args
                 if not (omit_natural and (isinstance(a, NaturalValue)
                                           or (isinstance(a, CounterfactualExpr) and a.natural)))]
        return f"{e.vertex}({', '.join(parts)})"

    return go(expr)


# ---------------------------------------------------------------------------
# natural values


def _split_natural(iv: PathIntervention) -> tuple[dict[Path, Value], dict[Path, Value]]:
    const = {p: v for p, v in iv.items if v is not NATURAL}
    nat = {p: v for p, v in iv.items if v is NATURAL}
    return const, nat


def is_natural_for(g: CausalGraph, Y: Iterable[str], iv: PathIntervention) -> Check:
    """Whether the paths assigned natural values can be dropped.

    Fails when a relevant path (with respect to the constant-valued paths)
    that starts with a constant-valued path also contains a natural-valued
    path.
    """
    iv = as_path_intervention(g, iv)
    const, nat = _split_natural(iv)
    if not nat:
        return Check(True)
    for r in relevant_paths(g, Y, const):
        head = next((r[:k] for k in range(2, len(r) + 1) if r[:k] in const), None)
        if head is None:
            continue
        for n in sort_paths(g, nat):
            for i in range(len(r) - len(n) + 1):
                if r[i:i + len(n)] == n:
                    return Check(False, {
                        "gate": "natural",
                        "relevant_path": format_path(r),
                        "constant_path": format_path(head),
                        "natural_path": format_path(n),
                    })
    return Check(True)


def reduce_natural(g: CausalGraph, Y: Iterable[str], iv: PathIntervention) -> PathIntervention:
    """Drop natural-valued paths; raises :class:`NotNatural` when that changes the response."""
    iv = as_path_intervention(g, iv)
    chk = is_natural_for(g, Y, iv)
    if not chk:
        raise NotNatural(f"intervention is not natural: {chk.evidence}")
    const, _ = _split_natural(iv)
    return PathIntervention(const)


def live_intervention(g: CausalGraph, Y: Iterable[str], iv: AnyIntervention) -> PathIntervention:
    """Restrict an intervention to its live paths."""
    return PathIntervention(live_subset(g, Y, as_path_intervention(g, iv).assignment))


# ---------------------------------------------------------------------------
# consistency


def check_edge_consistency(g: CausalGraph, Y: Iterable[str], iv: PathIntervention) -> Check:
    """Whether a live, constant-valued path intervention acts like an edge intervention.

    Set consistency: whenever a relevant path uses the first edge of some
    intervened path, it must start with that edge and have an intervened
    prefix.  Value consistency: paths sharing a first edge share a value.
    """
    iv = as_path_intervention(g, iv)
    alpha = iv.assignment
    if any(v is NATURAL for v in alpha.values()):
        raise InvalidIntervention("edge consistency is defined for constant values only")
    firsts: dict[tuple[str, str], list[Path]] = {}
    for p in sort_paths(g, alpha):
        firsts.setdefault(p[:2], []).append(p)
    Y = tuple(Y)
    for r in relevant_paths(g, Y, alpha):
        for i in range(len(r) - 1):
            e = r[i:i + 2]
            if e not in firsts:
                continue
            has_prefix = any(r[:k] in alpha for k in range(2, len(r) + 1))
            if i != 0 or not has_prefix:
                return Check(False, {
                    "gate": "edge_consistency",
                    "kind": "inconsistent_set",
                    "edge": format_path(e),
                    "relevant_path": format_path(r),
                    "intervened_paths": [format_path(p) for p in firsts[e]],
                })
    for e, ps in firsts.items():
        vals = {alpha[p] for p in ps}
        if len(vals) > 1:
            return Check(False, {
                "gate": "edge_consistency",
                "kind": "value_conflict",
                "edge": format_path(e),
                "recanting_edge": format_path(e),
                "paths": {format_path(p): alpha[p] for p in ps},
            })
    return Check(True)


def induce_edge_intervention(g: CausalGraph, Y: Iterable[str], iv: PathIntervention
                             ) -> EdgeIntervention:
    """Replace each path by its first edge, keeping the shared value."""
    iv = as_path_intervention(g, iv)
    chk = check_edge_consistency(g, Y, iv)
    if not chk:
        raise NotEdgeConsistent(f"not edge consistent: {chk.evidence}")
    return EdgeIntervention({p[:2]: v for p, v in iv.items})


def check_node_consistency(g: CausalGraph, Y: Iterable[str], eta: EdgeIntervention) -> Check:
    """Whether a live edge intervention acts like a node intervention.

    For every vertex A, the first edges of relevant paths leaving A must be
    all intervened or none, and intervened edges leaving A share a value.
    """
    eta = eta.validate(g)
    alpha = eta.as_paths().assignment
    first_edges: dict[str, set[tuple[str, str]]] = {}
    for r in relevant_paths(g, Y, alpha):
        first_edges.setdefault(r[0], set()).add(r[:2])
    assigned = eta.assignment
    for a in g.vertices:
        out = first_edges.get(a, set())
        hit = {e for e in out if e in assigned}
        if hit and hit != out:
            missing = sorted(out - hit, key=g.edge_key)
            return Check(False, {
                "gate": "node_consistency",
                "kind": "inconsistent_set",
                "vertex": a,
                "intervened_edges": [format_path(e) for e in sorted(hit, key=g.edge_key)],
                "free_edges": [format_path(e) for e in missing],
            })
        vals = {assigned[e] for e in assigned if e[0] == a}
        if len(vals) > 1:
            return Check(False, {
                "gate": "node_consistency",
                "kind": "value_conflict",
                "vertex": a,
                "edges": {format_path(e): assigned[e]
                          for e in sorted(assigned, key=g.edge_key) if e[0] == a},
            })
    return Check(True)


def induce_node_intervention(g: CausalGraph, Y: Iterable[str], eta: EdgeIntervention
                             ) -> NodeIntervention:
    chk = check_node_consistency(g, Y, eta)
    if not chk:
        raise NotNodeConsistent(f"not node consistent: {chk.evidence}")
    return NodeIntervention({u: v for (u, _), v in eta.items})


# ---------------------------------------------------------------------------
# embeddings


def treatment_paths(g: CausalGraph, A: Iterable[str], Y: Iterable[str]) -> list[Path]:
    """Directed paths from ``A`` to ``A | Y`` touching ``A | Y`` only at their ends."""
    from .paths import enumerate_paths

    A, Y = set(A), set(Y)
    return enumerate_paths(g, A, A | Y, forbidden_interior=A | Y)


def embed_node_as_path(g: CausalGraph, A: Mapping[str, int] | NodeIntervention,
                       Y: Iterable[str]) -> PathIntervention:
    """Node intervention rewritten over the treatment-to-outcome paths."""
    values = A.values if isinstance(A, NodeIntervention) else dict(A)
    NodeIntervention(values).validate(g)
    Y = set(Y)
    if Y & set(values):
        raise InvalidIntervention("treatments and outcomes must be disjoint")
    paths = treatment_paths(g, values, Y)
    return PathIntervention({p: values[p[0]] for p in paths})


def embed_edge_as_path(g: CausalGraph, eta: EdgeIntervention, Y: Iterable[str]
                       ) -> PathIntervention:
    """Edge intervention rewritten over treatment paths that start with an intervened edge."""
    eta = eta.validate(g)
    assigned = eta.assignment
    sources = {u for u, _ in assigned}
    paths = treatment_paths(g, sources, Y)
    return PathIntervention({p: assigned[p[:2]] for p in paths if p[:2] in assigned})


# ---------------------------------------------------------------------------
# split graphs


def _fixed_name(taken: set[str], vertex: str, k: int) -> str:
    base = vertex.lower() + "'" * k
    while base in taken:
        base += "_"
    return base


def build_swig(g: CausalGraph, nu: NodeIntervention) -> SplitGraph:
    """Split each treated vertex into a random copy and a fixed copy."""
    nu = nu.validate(g)
    values = nu.values
    eta = {(a, c): values[a] for a in values for c in g.children(a)}
    return _split(g, eta, {a: [values[a]] for a in values})


def build_shatter(g: CausalGraph, eta: EdgeIntervention) -> SplitGraph:
    """One fixed copy per distinct value on a vertex's intervened edges."""
    eta = eta.validate(g)
    vals: dict[str, list[int]] = {}
    for (u, _), v in eta.items:
        vals.setdefault(u, [])
        if v not in vals[u]:
            vals[u].append(v)
    return _split(g, eta.assignment, {u: sorted(vs) for u, vs in vals.items()})


def _split(g: CausalGraph, eta: Mapping[tuple[str, str], int],
           values: Mapping[str, list[int]]) -> SplitGraph:
    taken = set(g.vertices)
    copy_of: dict[tuple[str, int], str] = {}
    verts: list[str] = []
    card: dict[str, int] = {}
    origin: dict[str, str] = {}
    fixed: dict[str, int] = {}
    for v in g.vertices:
        verts.append(v)
        card[v] = g.cardinality[v]
        origin[v] = v
        for k, val in enumerate(values.get(v, [])):
            name = _fixed_name(taken, v, k)
            taken.add(name)
            copy_of[(v, val)] = name
            verts.append(name)
            card[name] = g.cardinality[v]
            origin[name] = v
            fixed[name] = val
    edges = []
    for u, v in g.directed_edges:
        if (u, v) in eta:
            edges.append((copy_of[(u, eta[(u, v)])], v))
        else:
            edges.append((u, v))
    sg = CausalGraph(verts, edges, g.bidirected_edges, card)
    return SplitGraph(sg, fixed, origin)
