"""Symbolic sums of products of conditional probabilities.

A :class:`Functional` is ``sum_{s} prod_t p(children_t | context_t)``.  Each
slot holds a :class:`Sym`: a summation index, an output (the value whose
probability is being expressed), or a constant bound to a state.  Several
symbols may refer to the same variable, e.g. the intervened value ``a`` and
the summed natural value ``a'``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, VariableMismatch
from .joint import DiscreteJoint

SUM, OUT, CONST = "sum", "out", "const"
_ROLE_RANK = {CONST: 0, OUT: 1, SUM: 2}


@dataclass(frozen=True)
class Sym:
    var: str
    role: str
    value: int | None = None
    tag: int = 0

    def __post_init__(self):
        if self.role not in _ROLE_RANK:
            raise ValueError(f"unknown role {self.role!r}")
        if (self.role == CONST) != (self.value is not None):
            raise ValueError("constants, and only constants, carry a value")


def const(var: str, value: int) -> Sym:
    return Sym(var, CONST, int(value))


def out(var: str) -> Sym:
    return Sym(var, OUT)


def summed(var: str, tag: int = 0) -> Sym:
    return Sym(var, SUM, None, tag)


@dataclass(frozen=True)
class Term:
    """``p(children | context)``; a joint when there are several children."""

    children: tuple[Sym, ...]
    context: tuple[Sym, ...] = ()

    def __post_init__(self):
        if not self.children:
            raise ValueError("a term needs at least one child")
        vars_ = [s.var for s in self.children + self.context]
        if len(set(vars_)) != len(vars_):
            raise ValueError(f"a variable appears twice in term {self}")
        if any(s.role == CONST for s in self.children):
            raise ValueError("constants cannot be children")

    @property
    def symbols(self) -> tuple[Sym, ...]:
        return self.children + self.context


class Functional:
    """Canonically ordered sum-of-products expression.

    ``order`` is a topological order of the variables; sums, term factors and
    conditioning sets are laid out latest-variable-first.
    """

    __slots__ = ("order", "sum_vars", "outputs", "terms", "_rank")

    def __init__(self, order: Sequence[str], terms: Iterable[Term],
                 sum_vars: Iterable[Sym] = (), outputs: Iterable[Sym] = ()):
        self.order = tuple(order)
        self._rank = {v: i for i, v in enumerate(self.order)}
        sum_vars = list(sum_vars)
        if len(set(sum_vars)) != len(sum_vars):
            raise ValueError("duplicate summation variables")
        for s in sum_vars:
            if s.role != SUM:
                raise ValueError(f"{s} is not a summation symbol")
        outputs = list(outputs)
        for s in outputs:
            if s.role != OUT:
                raise ValueError(f"{s} is not an output symbol")
        terms = [Term(tuple(sorted(t.children, key=self.sym_key)),
                      tuple(sorted(t.context, key=self.sym_key))) for t in terms]
        known = set(sum_vars) | set(outputs)
        for t in terms:
            for s in t.symbols:
                if s.var not in self._rank:
                    raise VariableMismatch(f"variable {s.var!r} not in the variable order")
                if s.role != CONST and s not in known:
                    raise ValueError(f"symbol {s} is neither summed nor an output")
        self.terms = tuple(sorted(terms, key=self.term_key))
        self.sum_vars = tuple(sorted(sum_vars, key=self.sym_key))
        self.outputs = tuple(sorted(outputs, key=lambda s: self._rank[s.var]))

    def sym_key(self, s: Sym):
        return (-self._rank[s.var], _ROLE_RANK[s.role],
                -1 if s.value is None else s.value, s.tag)

    def term_key(self, t: Term):
        return tuple(self.sym_key(s) for s in t.children) + ((9,),) + tuple(
            self.sym_key(s) for s in t.context)

    @property
    def variables(self) -> tuple[str, ...]:
        vs = {s.var for t in self.terms for s in t.symbols}
        return tuple(v for v in self.order if v in vs)

    def constants(self) -> dict[str, list[int]]:
        found: dict[str, list[int]] = {}
        for t in self.terms:
            for s in t.context:
                if s.role == CONST:
                    vals = found.setdefault(s.var, [])
                    if s.value not in vals:
                        vals.append(s.value)
        return found

    def _key(self):
        return (self.order, self.sum_vars, self.outputs, self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Functional):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"Functional({render(self)})"


# ---------------------------------------------------------------------------
# simplification


def _sum_out_once(terms: list[Term], sums: list[Sym]) -> bool:
    for s in sums:
        occ = [t for t in terms if s in t.symbols]
        if len(occ) == 1 and s in occ[0].children:
            t = occ[0]
            rest = tuple(c for c in t.children if c != s)
            i = terms.index(t)
            if rest:
                terms[i] = Term(rest, t.context)
            else:
                del terms[i]
            sums.remove(s)
            return True
    return False


def _merge_once(terms: list[Term]) -> bool:
    for i, t1 in enumerate(terms):
        ctx1 = set(t1.context)
        for j, t2 in enumerate(terms):
            if i == j:
                continue
            if ctx1 == set(t2.children) | set(t2.context):
                merged = Term(t1.children + t2.children, t2.context)
                lo, hi = sorted((i, j))
                del terms[hi]
                del terms[lo]
                terms.insert(lo, merged)
                return True
    return False


def simplify(f: Functional) -> Functional:
    """Sum out variables that only occur as a child, and merge chain-rule factors.

    ``sum_v p(v, S | C)`` becomes ``p(S | C)`` (or 1) when ``v`` occurs
    nowhere else, and ``p(X | Z, C) p(Z | C)`` becomes ``p(X, Z | C)``.
    Repeats until neither rule applies.
    """
    terms = list(f.terms)
    sums = list(f.sum_vars)
    while True:
        if _sum_out_once(terms, sums):
            continue
        terms = list(Functional(f.order, terms, sums, f.outputs).terms)
        if _merge_once(terms):
            continue
        break
    return Functional(f.order, terms, sums, f.outputs)


def marginalize(f: Functional, keep: Iterable[str]) -> Functional:
    """Turn outputs outside ``keep`` into summation indices and simplify."""
    keep = set(keep)
    taken = {(s.var, s.tag) for s in f.sum_vars}
    rename: dict[Sym, Sym] = {}
    for o in f.outputs:
        if o.var in keep:
            continue
        tag = 0
        while (o.var, tag) in taken:
            tag += 1
        taken.add((o.var, tag))
        rename[o] = summed(o.var, tag)

    def sub(s: Sym) -> Sym:
        return rename.get(s, s)

    terms = [Term(tuple(map(sub, t.children)), tuple(map(sub, t.context))) for t in f.terms]
    return simplify(Functional(f.order, terms, list(f.sum_vars) + list(rename.values()),
                               [o for o in f.outputs if o.var in keep]))


# ---------------------------------------------------------------------------
# evaluation


def _term_array(t: Term, joint: DiscreteJoint) -> tuple[np.ndarray, list[Sym]]:
    names = [s.var for s in t.symbols]
    for n in names:
        joint.axis(n)
    m = joint.marginal_array(names)
    idx = tuple(s.value if s.role == CONST else slice(None) for s in t.symbols)
    for s in t.symbols:
        if s.role == CONST and not 0 <= s.value < joint.cardinality(s.var):
            raise VariableMismatch(f"state {s.value} out of range for {s.var}")
    num = m[idx]
    free = [s for s in t.symbols if s.role != CONST]
    n_child = len(t.children)
    den = num.sum(axis=tuple(range(n_child)), keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return cond, free


def evaluate(f: Functional, joint: DiscreteJoint,
             outputs: Mapping[str, int] | None = None):
    """Evaluate on ``joint``.

    Returns a float when ``outputs`` fixes every output variable, otherwise a
    :class:`DiscreteJoint` (unchecked) over the output variables.  Conditionals
    with a zero-probability context evaluate to 0.
    """
    for v in f.variables:
        joint.axis(v)
    ids: dict[Sym, int] = {}

    def sid(s: Sym) -> int:
        if s not in ids:
            ids[s] = len(ids)
        return ids[s]

    operands: list = []
    for t in f.terms:
        arr, free = _term_array(t, joint)
        operands += [arr, [sid(s) for s in free]]
    for o in f.outputs:
        if o not in ids:
            operands += [np.ones(joint.cardinality(o.var)), [sid(o)]]
    out_ids = [sid(o) for o in f.outputs]
    if operands:
        res = np.einsum(*operands, out_ids, optimize=True)
    else:
        res = np.array(1.0)
    res = np.asarray(res, dtype=float)
    if outputs is not None:
        missing = [o.var for o in f.outputs if o.var not in outputs]
        if missing:
            raise VariableMismatch(f"no value given for outputs {missing}")
        return float(res[tuple(outputs[o.var] for o in f.outputs)])
    return DiscreteJoint([(o.var, joint.cardinality(o.var)) for o in f.outputs], res,
                         check=False)


# ---------------------------------------------------------------------------
# rendering


def symbol_names(f: Functional, outcome_style: str = "value") -> dict[Sym, str]:
    """Printable names: lower-cased variable, primed per extra symbol.

    Constants are named first (in order of appearance), then outputs, then
    summation indices.  With ``outcome_style="variable"`` outputs print as the
    upper-case variable name instead.
    """
    seen: list[Sym] = []
    for t in f.terms:
        for s in t.symbols:
            if s not in seen:
                seen.append(s)
    for s in f.sum_vars:
        if s not in seen:
            seen.append(s)
    by_var: dict[str, list[Sym]] = {}
    for s in seen:
        by_var.setdefault(s.var, []).append(s)
    names: dict[Sym, str] = {}
    for var, syms in by_var.items():
        syms = sorted(syms, key=lambda s: _ROLE_RANK[s.role])  # stable: keeps appearance order
        k = 0
        for s in syms:
            if s.role == OUT and outcome_style == "variable":
                names[s] = var
                continue
            names[s] = var.lower() + "'" * k
            k += 1
    return names


_LATEX_NAME = re.compile(r"^([A-Za-z_]*?[A-Za-z])_?(\d+)$")


def _latex_name(name: str) -> str:
    base = name.rstrip("'")
    primes = name[len(base):]
    m = _LATEX_NAME.match(base)
    if m:
        base = f"{m.group(1)}_{{{m.group(2)}}}"
    return base + primes


def render(f: Functional, fmt: str = "text", outcome_style: str = "value") -> str:
    """Render as ``sum_{m,w} p(y|m,a) p(m|a',w) p(w)`` or the LaTeX equivalent."""
    names = symbol_names(f, outcome_style)
    if fmt == "text":
        nm = names.__getitem__
        sep, bar, sum_head, one = ",", "|", "sum_{{{}}} ", "1"
    elif fmt == "latex":
        def nm(s: Sym) -> str:
            return _latex_name(names[s])
        sep, bar, sum_head, one = ",", " \\mid ", "\\sum_{{{}}} ", "1"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    parts = []
    for t in f.terms:
        body = sep.join(nm(s) for s in t.children)
        if t.context:
            body += bar + sep.join(nm(s) for s in t.context)
        parts.append(f"p({body})")
    text = " ".join(parts) if parts else one
    if f.sum_vars:
        text = sum_head.format(sep.join(nm(s) for s in f.sum_vars)) + text
    return text


# ---------------------------------------------------------------------------
# parsing the text form

_TOKEN = re.compile(r"\s*(?:(sum_\{)|(\})|(p\()|(\))|(\|)|(,)|([A-Za-z_][A-Za-z0-9_]*'*)|(1)|(\S))")


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        kinds = ("SUM", "RBRACE", "P", "RPAREN", "BAR", "COMMA", "NAME", "ONE", "BAD")
        for kind, val in zip(kinds, m.groups()):
            if val is not None:
                yield kind, val, m.start(m.lastindex)
                break
        pos = m.end()
    yield "END", "", len(text)


def parse_functional(text: str, order: Sequence[str],
                     bindings: Mapping[str, int] | None = None) -> Functional:
    """Parse the text rendering back into a :class:`Functional`.

    ``order`` lists the variables topologically.  Constant values come from
    ``bindings`` (keyed by printed name); without them, constants of a
    variable get distinct placeholder states in order of appearance.
    """
    toks = list(_tokens(text))
    i = 0

    def fail(msg: str):
        kind, val, col = toks[i]
        raise ParseError(msg, 1, col + 1, val or "<end>")

    def expect(kind: str):
        nonlocal i
        if toks[i][0] != kind:
            fail(f"expected {kind}")
        i += 1
        return toks[i - 1][1]

    def names_list(stop: set[str]) -> list[str]:
        nonlocal i
        out_names = [expect("NAME")]
        while toks[i][0] == "COMMA":
            i += 1
            out_names.append(expect("NAME"))
        if toks[i][0] not in stop:
            fail("unexpected token")
        return out_names

    sum_names: list[str] = []
    if toks[i][0] == "SUM":
        i += 1
        sum_names = names_list({"RBRACE"})
        i += 1
    raw_terms: list[tuple[list[str], list[str]]] = []
    if toks[i][0] == "ONE":
        i += 1
    else:
        while toks[i][0] == "P":
            i += 1
            ch = names_list({"BAR", "RPAREN"})
            ctx: list[str] = []
            if toks[i][0] == "BAR":
                i += 1
                ctx = names_list({"RPAREN"})
            expect("RPAREN")
            raw_terms.append((ch, ctx))
        if not raw_terms:
            fail("expected a term")
    if toks[i][0] != "END":
        fail("trailing input")

    exact = set(order)
    lower: dict[str, str] = {}
    for v in order:
        lower.setdefault(v.lower(), v)

    def resolve(name: str) -> tuple[str, bool]:
        base = name.rstrip("'")
        if base in exact and base != base.lower() and base == name:
            return base, True
        if base.lower() in lower and base == base.lower():
            return lower[base.lower()], False
        if base in exact:
            return base, False
        raise VariableMismatch(f"name {name!r} matches no variable")

    child_names = {n for ch, _ in raw_terms for n in ch}
    syms: dict[str, Sym] = {}
    sum_tags: dict[str, int] = {}
    const_count: dict[str, int] = {}
    bindings = dict(bindings or {})
    for n in sum_names:
        var, _ = resolve(n)
        tag = sum_tags.get(var, 0)
        sum_tags[var] = tag + 1
        syms[n] = summed(var, tag)
    for ch, ctx in raw_terms:
        for n in ch + ctx:
            if n in syms:
                continue
            var, upper = resolve(n)
            if upper or n in child_names:
                syms[n] = out(var)
            else:
                k = const_count.get(var, 0)
                const_count[var] = k + 1
                syms[n] = const(var, bindings.get(n, k))
    terms = [Term(tuple(syms[n] for n in ch), tuple(syms[n] for n in ctx))
             for ch, ctx in raw_terms]
    outputs = sorted({s for s in syms.values() if s.role == OUT}, key=lambda s: s.var)
    return Functional(order, terms, [syms[n] for n in sum_names], outputs)
