"""Directed paths: enumeration, properness, funnels, relevant and live paths.

A path is a tuple of vertex names with at least two entries.  Path sets are
ordered lexicographically by the declaration indices of their vertices.
"""

from __future__ import annotations

import os
from typing import Collection, Iterable, Mapping, TypeVar

from .errors import CapacityError, EdgeNotInGraph, UnknownVertex
from .graph import CausalGraph

Path = tuple[str, ...]
T = TypeVar("T")

DEFAULT_MAX_PATHS = 10_000


def max_paths() -> int:
    """Path-enumeration cap, overridable through ``CAUSALID_MAX_PATHS``."""
    raw = os.environ.get("CAUSALID_MAX_PATHS")
    if raw:
        return int(raw)
    return DEFAULT_MAX_PATHS


def format_path(p: Path) -> str:
    return "->".join(p)


def path_key(g: CausalGraph, p: Path) -> tuple[int, ...]:
    return tuple(g.index(v) for v in p)


def sort_paths(g: CausalGraph, paths: Iterable[Path]) -> list[Path]:
    return sorted(set(paths), key=lambda p: path_key(g, p))


def check_path(g: CausalGraph, p: Path) -> None:
    """Raise unless ``p`` is a simple directed path of ``g`` with length >= 1."""
    if len(p) < 2:
        raise ValueError(f"path {p!r} needs at least one edge")
    g.require(*p)
    if len(set(p)) != len(p):
        raise ValueError(f"path {format_path(p)} repeats a vertex")
    for u, v in zip(p, p[1:]):
        if not g.has_edge(u, v):
            raise EdgeNotInGraph(f"{u}->{v} is not an edge (in path {format_path(p)})")


def enumerate_paths(g: CausalGraph, sources: Iterable[str], sinks: Iterable[str],
                    forbidden_interior: Iterable[str] = ()) -> list[Path]:
    """All directed paths from ``sources`` to ``sinks`` avoiding ``forbidden_interior``.

    Paths may pass through other sinks unless those are forbidden.
    """
    sources, sinks, forbidden = set(sources), set(sinks), set(forbidden_interior)
    g.require(*sources, *sinks, *forbidden)
    cap = max_paths()
    out: list[Path] = []

    def extend(path: list[str]) -> None:
        for c in g.children(path[-1]):
            if c in path:
                continue
            if c in sinks:
                out.append(tuple(path) + (c,))
                if len(out) > cap:
                    raise CapacityError(f"more than {cap} paths")
            if c not in forbidden:
                path.append(c)
                extend(path)
                path.pop()

    for s in g.sort(sources):
        extend([s])
    return sort_paths(g, out)


def is_prefix(p: Path, q: Path) -> bool:
    return len(p) <= len(q) and q[:len(p)] == p


def is_proper(paths: Iterable[Path]) -> bool:
    """True iff no path is a prefix of another distinct path."""
    ps = set(paths)
    for q in ps:
        for k in range(2, len(q)):
            if q[:k] in ps:
                return False
    return True


def prefix_violations(paths: Iterable[Path]) -> list[tuple[Path, Path]]:
    """Pairs (p, q) with p a proper prefix of q."""
    ps = set(paths)
    out = []
    for q in sorted(ps):
        for k in range(2, len(q)):
            if q[:k] in ps:
                out.append((q[:k], q))
    return out


def contains_subpath(p: Path, q: Path) -> int:
    """Start index of ``q`` inside ``p`` as a contiguous block, or -1."""
    n = len(q)
    for i in range(len(p) - n + 1):
        if p[i:i + n] == q:
            return i
    return -1


def funnel(paths: Mapping[Path, T] | Iterable[Path], edge: tuple[str, str],
           g: CausalGraph | None = None):
    """Apply the funnel operator for ``edge = (W, Y)``.

    Paths ending in (W, Y) lose their last vertex, paths that visit W other
    than as their sink without ending in (W, Y) are dropped, and every other
    path is kept.  Accepts a plain path collection or a mapping from paths to
    values, and returns the same kind of object.
    """
    w, y = edge
    if g is not None and not g.has_edge(w, y):
        raise EdgeNotInGraph(f"{w}->{y} is not an edge")
    is_map = isinstance(paths, Mapping)
    items = paths.items() if is_map else ((p, None) for p in paths)
    out: dict[Path, T] = {}
    for p, val in items:
        if p[-2:] == (w, y):
            if len(p) > 2:
                out[p[:-1]] = val
            # a bare edge (W, Y) would become a length-0 path; it is consumed
        elif w in p[:-1]:
            continue
        else:
            out[p] = val
    if is_map:
        return out
    return set(out)


def _relevant(g: CausalGraph, Y: Iterable[str], alpha: Collection[Path]) -> list[Path]:
    """Enumerate rel(Y | alpha) by extending suffixes backwards."""
    Y = set(Y)
    g.require(*Y)
    members = set(alpha)
    max_len = max((len(p) for p in members), default=0)
    cap = max_paths()
    out: list[Path] = []

    def grow(suffix: tuple[str, ...]) -> None:
        for p in g.parents(suffix[0]):
            if p in suffix:
                continue
            path = (p,) + suffix
            out.append(path)
            if len(out) > cap:
                raise CapacityError(f"more than {cap} relevant paths")
            # a member sitting at the front may stay there, but not inside
            if any(path[:k] in members for k in range(2, min(len(path), max_len) + 1)):
                continue
            grow(path)

    for y in g.sort(Y):
        grow((y,))
    return out


def relevant_paths(g: CausalGraph, Y: Iterable[str], alpha: Iterable[Path]) -> list[Path]:
    """Directed paths into ``Y`` that contain no member of ``alpha`` except as a prefix."""
    return sort_paths(g, _relevant(g, Y, set(alpha)))


def live_subset(g: CausalGraph, Y: Iterable[str], alpha: Mapping[Path, T] | Iterable[Path]):
    """Members of ``alpha`` that are a prefix of some relevant path.

    Returns the same kind of object that was passed (mapping or collection).
    """
    is_map = isinstance(alpha, Mapping)
    members = set(alpha.keys() if is_map else alpha)
    for p in members:
        for v in p:
            if v not in g:
                raise UnknownVertex(f"unknown vertex {v!r}")
    live = set()
    for r in _relevant(g, Y, members):
        for k in range(2, len(r) + 1):
            if r[:k] in members:
                live.add(r[:k])
                break
    if is_map:
        return {p: alpha[p] for p in sort_paths(g, live)}
    return sort_paths(g, live)
