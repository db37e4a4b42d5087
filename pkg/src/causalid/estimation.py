"""Mediation functionals and their influence function on discrete laws.

Variables are a baseline covariate C, treatment A, mediator M and outcome Y.
Component arrays are indexed ``[c, a, m]`` (outcome regression and mediator
law) and ``[c, a]`` (propensity).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyData, PositivityViolation, VariableMismatch
from .joint import DiscreteJoint, random_joint

NAMES = ("C", "A", "M", "Y")
POSITIVITY_TOL = 1e-15


@dataclass(frozen=True)
class Components:
    """Outcome regression E(Y|a,m,c), mediator law p(m|a,c) and propensity p(a|c)."""

    outcome: np.ndarray
    mediator: np.ndarray
    propensity: np.ndarray

    def __post_init__(self):
        if np.any(self.mediator < 0) or np.any(np.abs(self.mediator.sum(axis=2) - 1) > 1e-9):
            raise ValueError("mediator law must be a conditional distribution over m")
        if np.any(self.propensity < 0) or np.any(np.abs(self.propensity.sum(axis=1) - 1) > 1e-9):
            raise ValueError("propensity must be a conditional distribution over a")


@dataclass(frozen=True)
class MediationLaw:
    joint: DiscreteJoint
    y_values: np.ndarray

    @classmethod
    def from_joint(cls, joint: DiscreteJoint, y_values: Sequence[float] | None = None
                   ) -> MediationLaw:
        if set(joint.names) != set(NAMES):
            raise VariableMismatch(f"a mediation law needs variables {NAMES}, got {joint.names}")
        joint = joint.marginal(NAMES)
        k = joint.cardinality("Y")
        y = np.arange(k, dtype=float) if y_values is None else np.asarray(y_values, dtype=float)
        if y.shape != (k,):
            raise ValueError(f"need {k} outcome values, got {y.shape}")
        return cls(joint, y)

    @property
    def table(self) -> np.ndarray:
        return self.joint.table

    @property
    def p_c(self) -> np.ndarray:
        return self.table.sum(axis=(1, 2, 3))

    def components(self) -> Components:
        """The true components, with positivity checked."""
        t = self.table
        p_cam = t.sum(axis=3)
        p_ca = p_cam.sum(axis=2)
        p_c = p_ca.sum(axis=1)
        if np.any(p_cam <= POSITIVITY_TOL):
            c, a, m = np.argwhere(p_cam <= POSITIVITY_TOL)[0]
            raise PositivityViolation(f"p(C={c}, A={a}, M={m}) = 0")
        outcome = (t * self.y_values).sum(axis=3) / p_cam
        mediator = p_cam / p_ca[:, :, None]
        propensity = p_ca / p_c[:, None]
        return Components(outcome, mediator, propensity)


def random_law(seed: int, cards: Sequence[int] = (2, 2, 2, 2),
               y_values: Sequence[float] | None = None) -> MediationLaw:
    """A seeded, strictly positive law over (C, A, M, Y)."""
    return MediationLaw.from_joint(random_joint(list(zip(NAMES, cards)), seed), y_values)


def upsilon(law: MediationLaw | Components, a: int, a_y: int, c: int) -> float:
    """``sum_m E(Y | a_y, m, c) p(m | a, c)``: mediator at arm ``a``, outcome at arm ``a_y``."""
    comp = law.components() if isinstance(law, MediationLaw) else law
    return float(comp.outcome[c, a_y] @ comp.mediator[c, a])


def _upsilon_vec(comp: Components, a: int, a_y: int) -> np.ndarray:
    return np.einsum("cm,cm->c", comp.outcome[:, a_y], comp.mediator[:, a])


def phi(law: MediationLaw, a: int, a_y: int) -> float:
    """``sum_c upsilon(a, a_y, c) p(c)``; the diagonal uses ``E(Y | a, c)`` directly."""
    if a == a_y:
        t = law.table
        p_ca = t.sum(axis=(2, 3))
        if np.any(p_ca[:, a] <= POSITIVITY_TOL):
            raise PositivityViolation(f"p(A={a} | C) = 0 for some c")
        ey = (t[:, a] * law.y_values).sum(axis=(1, 2)) / p_ca[:, a]
        return float(ey @ law.p_c)
    comp = law.components()
    return float(_upsilon_vec(comp, a, a_y) @ law.p_c)


def _terms(comp: Components, c, a_obs, m, y, a: int, a_y: int):
    """Both weighted residual terms and the plug-in upsilon, vectorized over units."""
    pi_y = comp.propensity[c, a_y]
    pi_m = comp.propensity[c, a]
    f_a = comp.mediator[c, a, m]
    f_ay = comp.mediator[c, a_y, m]
    if np.any(pi_y <= POSITIVITY_TOL) or np.any(pi_m <= POSITIVITY_TOL) or np.any(
            f_ay <= POSITIVITY_TOL):
        raise PositivityViolation("a weighted propensity or mediator probability is zero")
    q = comp.outcome[c, a_y, m]
    ups = _upsilon_vec(comp, a, a_y)[c]
    t1 = (a_obs == a_y) / pi_y * (f_a / f_ay) * (y - q)
    t2 = (a_obs == a) / pi_m * (q - ups)
    return t1, t2, ups


def eif(law: MediationLaw, unit: tuple[int, int, int, float], a: int, a_y: int,
        components: Components | None = None, phi_value: float | None = None) -> float:
    """Influence function of ``phi(a, a_y)`` at one unit ``(c, a_obs, m, y)``.

    ``y`` is the numeric outcome value.  The residual term is weighted by
    ``I(A = a_y) / p(a_y | C) * p(M | a, C) / p(M | a_y, C)`` and the bridge term
    by ``I(A = a) / p(a | C)``.
    """
    comp = components or law.components()
    c, a_obs, m, y = unit
    t1, t2, ups = _terms(comp, np.asarray(c), np.asarray(a_obs), np.asarray(m), float(y), a, a_y)
    ph = phi(law, a, a_y) if phi_value is None else phi_value
    return float(t1 + t2 + ups - ph)


def _support(law: MediationLaw):
    idx = np.indices(law.table.shape).reshape(4, -1)
    c, a_obs, m, ys = idx
    return c, a_obs, m, law.y_values[ys], law.table.ravel()


def eif_mean(law: MediationLaw, a: int, a_y: int, components: Components | None = None
             ) -> float:
    """``E[eif]`` under the law by enumeration of every cell."""
    comp = components or law.components()
    c, a_obs, m, y, w = _support(law)
    t1, t2, ups = _terms(comp, c, a_obs, m, y, a, a_y)
    return float(((t1 + t2 + ups) * w).sum() - phi(law, a, a_y))


def robust_solve(law: MediationLaw, components: Components, a: int, a_y: int) -> float:
    """Population root of the estimating equation with plugged components.

    The equation is linear in the parameter, so the root is
    ``E[residual + bridge + upsilon_hat(C)]`` with the expectation taken
    under the true law.
    """
    c, a_obs, m, y, w = _support(law)
    t1, t2, ups = _terms(components, c, a_obs, m, y, a, a_y)
    return float(((t1 + t2 + ups) * w).sum())


def misspecify(true: Components, wrong: Iterable[str], seed: int) -> Components:
    """Replace the named components by valid but different conditional laws."""
    rng = np.random.default_rng(seed)
    out = true
    for name in wrong:
        if name == "outcome":
            new = true.outcome + rng.uniform(0.5, 1.5, size=true.outcome.shape)
        elif name == "mediator":
            new = rng.dirichlet(np.ones(true.mediator.shape[2]), size=true.mediator.shape[:2])
        elif name == "propensity":
            new = rng.dirichlet(np.ones(true.propensity.shape[1]), size=true.propensity.shape[0])
        else:
            raise ValueError(f"unknown component {name!r}")
        out = replace(out, **{name: new})
    return out


# ---------------------------------------------------------------------------
# data


def load_csv(path: str) -> np.ndarray:
    """Integer unit table with columns C, A, M, Y."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [n for n in NAMES if n not in (reader.fieldnames or [])]
        if missing:
            raise VariableMismatch(f"CSV lacks columns {missing}")
        rows = [[int(r[n]) for n in NAMES] for r in reader]
    if not rows:
        raise EmptyData(f"{path} has no rows")
    return np.asarray(rows, dtype=np.int64)


def tabulate(data: np.ndarray, cards: Sequence[int], y_values: Sequence[float] | None = None
             ) -> MediationLaw:
    """Saturated fit: the empirical joint of the units."""
    data = np.asarray(data, dtype=np.int64)
    if data.size == 0:
        raise EmptyData("no units")
    counts = np.zeros(tuple(cards))
    np.add.at(counts, tuple(data.T), 1.0)
    joint = DiscreteJoint(list(zip(NAMES, cards)), counts / counts.sum(), check=False)
    return MediationLaw(joint, np.arange(cards[3], dtype=float) if y_values is None
                        else np.asarray(y_values, dtype=float))


def empirical_estimate(data: np.ndarray, a: int, a_y: int, components: Components | None = None,
                       cards: Sequence[int] | None = None,
                       y_values: Sequence[float] | None = None,
                       weights: np.ndarray | None = None) -> float:
    """Solve the empirical estimating equation.

    Without ``components`` they are fitted by saturated tabulation of the
    data, which needs every (c, a, m) cell observed.  With a single unit and
    supplied components the result is that unit's plug-in value.
    """
    data = np.asarray(data, dtype=np.int64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise EmptyData("no units")
    if cards is None:
        cards = tuple(int(k) for k in data.max(axis=0) + 1)
    yv = np.arange(cards[3], dtype=float) if y_values is None else np.asarray(y_values, float)
    if components is None:
        components = tabulate(data, cards, yv).components()
    c, a_obs, m, ys = data.T
    t1, t2, ups = _terms(components, c, a_obs, m, yv[ys], a, a_y)
    w = np.ones(len(data)) if weights is None else np.asarray(weights, dtype=float)
    return float(((t1 + t2 + ups) * w).sum() / w.sum())


def sample(law: MediationLaw, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. units from the law."""
    rng = np.random.default_rng(seed)
    flat = rng.choice(law.table.size, size=n, p=law.table.ravel() / law.table.sum())
    return np.stack(np.unravel_index(flat, law.table.shape), axis=1).astype(np.int64)
