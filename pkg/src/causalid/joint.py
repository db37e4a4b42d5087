"""Finite joint distributions stored as dense numpy tables."""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import VariableMismatch

TOL = 1e-9


class DiscreteJoint:
    """A probability table over named discrete variables.

    ``table`` has one axis per variable, in the order of ``names``.
    """

    __slots__ = ("names", "states", "table")

    def __init__(self, variables: Sequence[tuple[str, int]], table, check: bool = True):
        self.names = tuple(name for name, _ in variables)
        self.states = tuple(int(k) for _, k in variables)
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        arr = np.asarray(table, dtype=float).reshape(self.states)
        if check:
            if np.any(arr < -TOL):
                raise ValueError("negative probability in joint table")
            total = float(arr.sum())
            if abs(total - 1.0) > TOL:
                raise ValueError(f"joint table sums to {total!r}, expected 1")
        self.table = arr

    @property
    def variables(self) -> list[tuple[str, int]]:
        return list(zip(self.names, self.states))

    def cardinality(self, name: str) -> int:
        return self.states[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise VariableMismatch(f"variable {name!r} not in joint over {self.names}") from None

    def marginal(self, names: Iterable[str]) -> DiscreteJoint:
        """Marginal over ``names``, with axes in the order given."""
        names = tuple(names)
        axes = [self.axis(n) for n in names]
        drop = tuple(i for i in range(len(self.names)) if i not in axes)
        arr = self.table.sum(axis=drop) if drop else self.table
        kept = [i for i in range(len(self.names)) if i in axes]
        perm = [kept.index(a) for a in axes]
        arr = np.transpose(arr, perm) if perm else arr
        return DiscreteJoint([(n, self.states[a]) for n, a in zip(names, axes)], arr,
                             check=False)

    def marginal_array(self, names: Sequence[str]) -> np.ndarray:
        return self.marginal(names).table

    def prob(self, assignment: Mapping[str, int]) -> float:
        m = self.marginal(list(assignment))
        return float(m.table[tuple(assignment[n] for n in m.names)])

    def renamed(self, mapping: Mapping[str, str]) -> DiscreteJoint:
        return DiscreteJoint([(mapping.get(n, n), k) for n, k in self.variables], self.table,
                             check=False)

    def is_close(self, other: DiscreteJoint, tol: float = 1e-12) -> bool:
        return self.max_abs_diff(other) <= tol

    def max_abs_diff(self, other: DiscreteJoint) -> float:
        if set(self.names) != set(other.names):
            raise VariableMismatch(f"{self.names} vs {other.names}")
        o = other.marginal(self.names)
        if o.states != self.states:
            raise VariableMismatch("cardinalities differ")
        return float(np.max(np.abs(self.table - o.table))) if self.table.size else 0.0

    def total_variation(self, other: DiscreteJoint) -> float:
        o = other.marginal(self.names)
        return 0.5 * float(np.abs(self.table - o.table).sum())

    def to_json(self) -> dict[str, Any]:
        return {
            "variables": [{"name": n, "states": k} for n, k in self.variables],
            "table": [float(x) for x in self.table.ravel()],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any] | str) -> DiscreteJoint:
        if isinstance(data, str):
            data = json.loads(data)
        variables = [(v["name"], int(v["states"])) for v in data["variables"]]
        return cls(variables, np.asarray(data["table"], dtype=float))

    def __repr__(self) -> str:
        return f"DiscreteJoint({', '.join(f'{n}:{k}' for n, k in self.variables)})"


def random_joint(variables: Sequence[tuple[str, int]], seed: int,
                 positive: bool = True) -> DiscreteJoint:
    """Dirichlet(1) draw over the full table; strictly positive with probability one."""
    rng = np.random.default_rng(seed)
    size = int(np.prod([k for _, k in variables]))
    p = rng.dirichlet(np.ones(size))
    if positive:
        p = np.maximum(p, 1e-6)
        p /= p.sum()
    return DiscreteJoint(variables, p)
