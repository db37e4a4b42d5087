"""Text formats for graphs and interventions.

Graph::

    graph fig { nodes: W A M Y; card: M=3; W -> A; A -> M -> Y; A <-> Y; }

Query::

    do A=1;                      # node intervention, several with commas
    edge A->Y = 0;
    path W->A->M->Y = natural;
    outcome Y;

Everything after ``#`` on a line is a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import CausalIdError, ParseError, SemanticError
from .graph import CausalGraph
from .interventions import (
    NATURAL,
    EdgeIntervention,
    NodeIntervention,
    PathIntervention,
    Value,
    format_value,
)
from .paths import Path, format_path, prefix_violations

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<bi><->) | (?P<arrow>->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*) | (?P<int>[0-9]+)
  | (?P<punct>[{};:=,])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    out, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character", line, pos - start + 1, text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind if kind != "punct" else m.group(), m.group(), line,
                             pos - start + 1))
        pos = m.end()
    out.append(Token("eof", "<end of input>", line, pos - start + 1))
    return out


class _Stream:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {what or kind!r}", t.line, t.column, t.text)
        return t

    def accept(self, kind: str) -> Token | None:
        if self.peek.kind == kind:
            return self.next()
        return None


# ---------------------------------------------------------------------------
# graphs


def _sem(msg: str, tok: Token) -> SemanticError:
    return SemanticError(msg, tok.line, tok.column, tok.text)


def parse_graph_dsl(text: str) -> CausalGraph:
    """Parse one ``graph`` block into a validated :class:`CausalGraph`."""
    s = _Stream(text)
    kw = s.expect("ident", "graph")
    if kw.text != "graph":
        raise ParseError("expected 'graph'", kw.line, kw.column, kw.text)
    s.expect("ident", "graph name")
    s.expect("{")
    nodes: list[str] = []
    node_tok: dict[str, Token] = {}
    cards: dict[str, int] = {}
    card_tok: dict[str, Token] = {}
    directed: list[tuple[Token, Token]] = []
    bidirected: list[tuple[Token, Token]] = []
    while not s.accept("}"):
        head = s.expect("ident", "statement")
        if head.text == "nodes" and s.accept(":"):
            while s.peek.kind == "ident":
                t = s.next()
                if t.text in node_tok:
                    raise _sem(f"duplicate vertex {t.text!r}", t)
                nodes.append(t.text)
                node_tok[t.text] = t
                s.accept(",")
            s.expect(";")
        elif head.text == "card" and s.accept(":"):
            while s.peek.kind == "ident":
                t = s.next()
                s.expect("=")
                k = s.expect("int", "cardinality")
                cards[t.text] = int(k.text)
                card_tok[t.text] = t
                s.accept(",")
            s.expect(";")
        else:
            prev = head
            seen = False
            while s.peek.kind in ("arrow", "bi"):
                op = s.next()
                nxt = s.expect("ident", "vertex")
                (directed if op.kind == "arrow" else bidirected).append((prev, nxt))
                prev = nxt
                seen = True
            if not seen:
                raise ParseError("expected '->' or '<->'", s.peek.line, s.peek.column,
                                 s.peek.text)
            s.expect(";")
    end = s.peek
    if end.kind != "eof":
        raise ParseError("trailing input after graph block", end.line, end.column, end.text)
    for pair in directed + bidirected:
        for tok in pair:
            if tok.text not in node_tok:
                raise _sem(f"edge endpoint {tok.text!r} is not a declared vertex", tok)
    for x, tok in card_tok.items():
        if x not in node_tok:
            raise _sem(f"cardinality given for undeclared vertex {x!r}", tok)
        if cards[x] < 2:
            raise _sem(f"cardinality of {x!r} must be at least 2", tok)
    try:
        return CausalGraph(nodes, [(u.text, v.text) for u, v in directed],
                           [(u.text, v.text) for u, v in bidirected], cards)
    except CausalIdError as exc:
        raise SemanticError(str(exc)) from exc


def graph_to_dsl(g: CausalGraph, name: str = "g") -> str:
    lines = [f"graph {name} {{", f"  nodes: {' '.join(g.vertices)};"]
    nonbinary = [f"{v}={k}" for v, k in g.cardinality.items() if k != 2]
    if nonbinary:
        lines.append(f"  card: {' '.join(nonbinary)};")
    lines += [f"  {u} -> {v};" for u, v in g.directed_edges]
    lines += [f"  {u} <-> {v};" for u, v in g.bidirected_edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# queries


@dataclass
class Query:
    """A parsed intervention file.

    ``intervention`` is the union of all statements as a path intervention;
    ``node`` and ``edge`` are set when every statement is of that kind.
    """

    intervention: PathIntervention
    outcomes: tuple[str, ...]
    node: NodeIntervention | None = None
    edge: EdgeIntervention | None = None
    statements: list[str] = field(default_factory=list)

    @property
    def most_specific(self):
        return self.node or self.edge or self.intervention


def _path(s: _Stream, g: CausalGraph) -> tuple[Path, Token]:
    first = s.expect("ident", "vertex")
    verts = [first]
    while s.accept("arrow"):
        verts.append(s.expect("ident", "vertex"))
    for t in verts:
        if t.text not in g:
            raise _sem(f"unknown vertex {t.text!r}", t)
    for a, b in zip(verts, verts[1:]):
        if not g.has_edge(a.text, b.text):
            raise _sem(f"{a.text}->{b.text} is not an edge of the graph", b)
    if len(verts) < 2:
        raise _sem("a path needs at least one edge", first)
    if len({t.text for t in verts}) != len(verts):
        raise _sem("a path may not repeat a vertex", first)
    return tuple(t.text for t in verts), first


def _value(s: _Stream, g: CausalGraph, source: str, natural_ok: bool) -> tuple[Value, Token]:
    t = s.next()
    if t.kind == "ident" and t.text == "natural":
        if not natural_ok:
            raise _sem("only path statements may use 'natural'", t)
        return NATURAL, t
    if t.kind != "int":
        raise ParseError("expected a state index or 'natural'", t.line, t.column, t.text)
    v = int(t.text)
    if v >= g.cardinality[source]:
        raise _sem(f"state {v} out of range for {source} (cardinality {g.cardinality[source]})", t)
    return v, t


def parse_intervention_dsl(text: str, g: CausalGraph) -> Query:
    """Parse ``do``/``edge``/``path``/``outcome`` statements against ``g``."""
    s = _Stream(text)
    paths: dict[Path, tuple[Value | None, Token]] = {}
    kinds: set[str] = set()
    node_vals: dict[str, int] = {}
    edge_vals: dict[tuple[str, str], int] = {}
    outcomes: list[str] = []
    statements: list[str] = []

    def add(p: Path, v: Value | None, tok: Token) -> None:
        if p in paths:
            raise _sem(f"{format_path(p)} is assigned twice", tok)
        paths[p] = (v, tok)

    while s.peek.kind != "eof":
        head = s.expect("ident", "statement keyword")
        if head.text == "do":
            while True:
                t = s.expect("ident", "vertex")
                if t.text not in g:
                    raise _sem(f"unknown vertex {t.text!r}", t)
                if t.text in node_vals:
                    raise _sem(f"{t.text} is assigned twice", t)
                s.expect("=")
                v, _ = _value(s, g, t.text, natural_ok=False)
                node_vals[t.text] = v
                for c in g.children(t.text):
                    add((t.text, c), v, t)
                statements.append(f"do {t.text}={v}")
                if not s.accept(","):
                    break
            kinds.add("node")
        elif head.text in ("edge", "path"):
            p, tok = _path(s, g)
            if head.text == "edge" and len(p) != 2:
                raise _sem("an edge statement takes exactly one edge", tok)
            v = None
            if s.accept("="):
                v, _ = _value(s, g, p[0], natural_ok=head.text == "path")
            add(p, v, tok)
            if head.text == "edge" and v is not None:
                edge_vals[p] = v
            kinds.add(head.text)
            statements.append(f"{head.text} {format_path(p)} = "
                              f"{'?' if v is None else format_value(v)}")
        elif head.text == "outcome":
            while s.peek.kind == "ident":
                t = s.next()
                if t.text not in g:
                    raise _sem(f"unknown vertex {t.text!r}", t)
                if t.text not in outcomes:
                    outcomes.append(t.text)
                s.accept(",")
        else:
            raise ParseError("expected 'do', 'edge', 'path' or 'outcome'", head.line,
                             head.column, head.text)
        s.expect(";")

    bad = prefix_violations(paths)
    if bad:
        p, q = bad[0]
        tok = paths[q][1]
        raise _sem(f"improper path set: {format_path(p)} is a prefix of {format_path(q)}", tok)
    for p, (v, tok) in paths.items():
        if v is None:
            raise _sem(f"no value assigned to {format_path(p)}", tok)
    iv = PathIntervention({p: v for p, (v, _) in paths.items()}).validate(g)
    node = NodeIntervention(node_vals) if kinds == {"node"} else None
    edge = EdgeIntervention(edge_vals) if kinds == {"edge"} else None
    return Query(iv, g.sort(outcomes), node, edge, statements)


def query_to_dsl(g: CausalGraph, iv, outcomes=()) -> str:
    """Serialize any intervention kind; node interventions use ``do``."""
    lines = []
    if isinstance(iv, NodeIntervention):
        lines += [f"do {v}={iv.values[v]};" for v in g.sort(iv.values)]
    elif isinstance(iv, EdgeIntervention):
        assigned = iv.validate(g).assignment
        lines += [f"edge {u}->{v} = {assigned[(u, v)]};"
                  for u, v in sorted(assigned, key=g.edge_key)]
    else:
        lines += [f"path {format_path(p)} = {format_value(val)};"
                  for p, val in iv.sorted_items(g)]
    if outcomes:
        lines.append(f"outcome {' '.join(g.sort(outcomes))};")
    return "\n".join(lines) + "\n"

