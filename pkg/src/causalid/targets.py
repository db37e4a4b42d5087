"""Named causal targets expressed as path interventions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import BetaNotSubset, InvalidIntervention
from .graph import CausalGraph
from .interventions import NATURAL, NodeIntervention, PathIntervention, treatment_paths
from .paths import Path, check_path, format_path


class TargetKind(str, enum.Enum):
    ACE = "ACE"
    ETT = "ETT"
    PSE_FIXED = "PSE_FIXED"
    PSE_AVG = "PSE_AVG"
    CUSTOM = "CUSTOM"


def alpha_set(g: CausalGraph, A: Iterable[str], Y: Iterable[str]) -> list[Path]:
    """Directed paths from ``A`` to ``A | Y`` that meet ``A | Y`` only at their ends."""
    return treatment_paths(g, A, Y)


def _check_values(g: CausalGraph, values: Mapping[str, int], A: Iterable[str]) -> dict[str, int]:
    A = list(A)
    missing = [x for x in A if x not in values]
    if missing:
        raise InvalidIntervention(f"no value for treatments {missing}")
    NodeIntervention({x: values[x] for x in A}).validate(g)
    return {x: int(values[x]) for x in A}


def ett_intervention(g: CausalGraph, A: Iterable[str], Y: Iterable[str],
                     a: Mapping[str, int]) -> PathIntervention:
    """Paths into the outcome get the active values, paths between treatments stay natural.

    The response of ``Y | A`` to this intervention is ``p(Y(a), A)`` whenever
    the treatments keep their natural values under it.  A path whose sink is
    itself a treatment is treated as a treatment-to-treatment path even when
    that sink is also listed as an outcome.
    """
    A = g.sort(A)
    a = _check_values(g, a, A)
    out = {}
    for p in alpha_set(g, A, Y):
        out[p] = NATURAL if p[-1] in A else a[p[0]]
    return PathIntervention(out).validate(g)


def _beta(g: CausalGraph, A, Y, beta: Iterable[Path]) -> tuple[list[Path], set[Path]]:
    full = alpha_set(g, A, Y)
    chosen = {tuple(p) for p in beta}
    for p in chosen:
        check_path(g, p)
    extra = chosen - set(full)
    if extra:
        raise BetaNotSubset(
            f"paths {[format_path(p) for p in sorted(extra)]} are not treatment paths")
    return full, chosen


def pse_fixed(g: CausalGraph, A: Iterable[str], Y: Iterable[str], a: Mapping[str, int],
              a_base: Mapping[str, int], beta: Iterable[Path]) -> PathIntervention:
    """Active values on ``beta``, baseline values on the remaining treatment paths."""
    A = g.sort(A)
    a, a_base = _check_values(g, a, A), _check_values(g, a_base, A)
    full, chosen = _beta(g, A, Y, beta)
    return PathIntervention({p: a[p[0]] if p in chosen else a_base[p[0]] for p in full})


def pse_avg(g: CausalGraph, A: Iterable[str], Y: Iterable[str], a: Mapping[str, int],
            beta: Iterable[Path]) -> PathIntervention:
    """Active values on ``beta``, natural values on the remaining treatment paths."""
    A = g.sort(A)
    a = _check_values(g, a, A)
    full, chosen = _beta(g, A, Y, beta)
    return PathIntervention({p: a[p[0]] if p in chosen else NATURAL for p in full})


@dataclass(frozen=True)
class TargetSpec:
    """A named target.  ``build`` returns the intervention and the response set."""

    kind: TargetKind
    treatments: tuple[str, ...] = ()
    outcomes: tuple[str, ...] = ()
    active: Mapping[str, int] = field(default_factory=dict)
    baseline: Mapping[str, int] = field(default_factory=dict)
    beta: tuple[Path, ...] = ()
    custom: PathIntervention | None = None

    def build(self, g: CausalGraph) -> tuple[PathIntervention, tuple[str, ...]]:
        A, Y = self.treatments, self.outcomes
        g.require(*A, *Y)
        if self.kind == TargetKind.ACE:
            iv = NodeIntervention(_check_values(g, self.active, A)).validate(g)
            return iv.as_paths(g), g.sort(Y)
        if self.kind == TargetKind.ETT:
            return ett_intervention(g, A, Y, self.active), g.sort(set(Y) | set(A))
        if self.kind == TargetKind.PSE_FIXED:
            return pse_fixed(g, A, Y, self.active, self.baseline, self.beta), g.sort(Y)
        if self.kind == TargetKind.PSE_AVG:
            return pse_avg(g, A, Y, self.active, self.beta), g.sort(Y)
        if self.custom is None:
            raise InvalidIntervention("a custom target needs an explicit path intervention")
        return self.custom.validate(g), g.sort(Y)
