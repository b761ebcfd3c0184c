"""Probabilities of causation, average effects and their composition rules.

Point formulas take plain probabilities so they serve sampled and exact
inputs alike. :class:`ExactOracle` supplies the exact inputs (and
brute-force counterfactual values to check the formulas against) by
enumerating a Boolean SCM's exogenous space once and reusing it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ccr.errors import DomainError, NumericalError, UndefinedEstimandError
from ccr.graph import Dag
from ccr.scm import BoolScm, LinearScm, SampleBatch, exogenous_table

KINDS = ("PNS", "PN", "PS", "ATE")


class Checked(NamedTuple):
    """A value clipped to [0, 1] together with the unclipped ``raw`` value."""

    value: float
    raw: float
    clamped: bool


def _clip(raw: float) -> Checked:
    value = min(1.0, max(0.0, raw))
    return Checked(value, raw, value != raw)


_ROUNDOFF = 1e-9


def _prob(name, p):
    # exact sums of many masses can overshoot [0, 1] by a few ulps
    if math.isnan(p) or not (-_ROUNDOFF <= p <= 1.0 + _ROUNDOFF):
        raise DomainError(f"{name}={p} is not a probability")
    return min(1.0, max(0.0, float(p)))


@dataclass(frozen=True)
class PairEstimand:
    cause: str
    effect: str
    kind: str
    value: float
    provenance: str = "exact"
    n: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown estimand kind {self.kind!r}")
        if self.kind in ("PNS", "PN", "PS") and not 0.0 <= self.value <= 1.0:
            raise DomainError(f"{self.kind} value {self.value} outside [0,1]")

    def to_dict(self) -> dict:
        return {"cause": self.cause, "effect": self.effect, "kind": self.kind,
                "value": self.value, "provenance": self.provenance,
                "n": self.n, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "PairEstimand":
        return cls(d["cause"], d["effect"], d["kind"], d["value"],
                   d.get("provenance", "exact"), d.get("n"), d.get("seed"))


# ---------------------------------------------------------------------------
# point formulas


def pns_point(p_y_do_x: float, p_y_do_xprime: float) -> Checked:
    """PNS of a monotone pair, ``P(y | do(x)) - P(y | do(x'))``."""
    return _clip(_prob("p_y_do_x", p_y_do_x) - _prob("p_y_do_xprime", p_y_do_xprime))


def ate_binary(p_y_do_x: float, p_y_do_xprime: float) -> float:
    return _prob("p_y_do_x", p_y_do_x) - _prob("p_y_do_xprime", p_y_do_xprime)


def pn_point(p_y: float, p_y_do_xprime: float, p_xy: float) -> Checked:
    """PN under monotonicity: ``(P(y) - P(y | do(x'))) / P(x, y)``."""
    p_y, p_y_do_xprime, p_xy = (_prob("p_y", p_y), _prob("p_y_do_xprime", p_y_do_xprime),
                                _prob("p_xy", p_xy))
    if p_xy == 0:
        raise UndefinedEstimandError("PN undefined: P(x, y) = 0")
    return _clip((p_y - p_y_do_xprime) / p_xy)


def ps_point(p_y_do_x: float, p_y: float, p_xprime_yprime: float) -> Checked:
    """PS under monotonicity: ``(P(y | do(x)) - P(y)) / P(x', y')``."""
    p_y_do_x, p_y, q = (_prob("p_y_do_x", p_y_do_x), _prob("p_y", p_y),
                        _prob("p_xprime_yprime", p_xprime_yprime))
    if q == 0:
        raise UndefinedEstimandError("PS undefined: P(x', y') = 0")
    return _clip((p_y_do_x - p_y) / q)


def compose_product(values: Sequence[float]) -> float:
    values = list(values)
    if not values:
        raise DomainError("cannot compose an empty path")
    for v in values:
        _prob("local PNS", v)
    return float(np.prod(values))


def deduce_local(global_pns: float, other_locals: Sequence[float]) -> Checked:
    """Recover the one missing factor of a product composition."""
    denom = float(np.prod(list(other_locals))) if len(other_locals) else 1.0
    if denom == 0:
        raise UndefinedEstimandError("cannot deduce a local value: known factors multiply to 0")
    return _clip(global_pns / denom)


def _recip(name, v):
    if v <= 0:
        raise UndefinedEstimandError(f"{name}={v}: reciprocal undefined")
    if v > 1:
        raise DomainError(f"{name}={v} outside (0,1]")
    return 1.0 / v


def compose_pn_chain(pn_xy: float, ps_xy: float, pn_yz: float) -> float:
    """PN of X on Z through a monotone chain X -> Y -> Z.

    Unlike PNS, PN does not compose as a plain product: the sufficiency of
    the first link enters as a correction term.
    """
    a, b, c = _recip("pn_xy", pn_xy), _recip("ps_xy", ps_xy), _recip("pn_yz", pn_yz)
    return 1.0 / (a * c + (b - 1.0) * (c - 1.0))


def compose_ps_chain(ps_xy: float, pn_xy: float, ps_yz: float) -> float:
    """PS of X on Z through a monotone chain X -> Y -> Z (mirror of the PN form)."""
    a, b, c = _recip("ps_xy", ps_xy), _recip("pn_xy", pn_xy), _recip("ps_yz", ps_yz)
    return 1.0 / (a * c + (b - 1.0) * (c - 1.0))


# ---------------------------------------------------------------------------
# exact values from enumeration


class ExactOracle:
    """Exact observational, interventional and counterfactual probabilities.

    The exogenous table is enumerated once; each distinct intervention is
    evaluated once and cached. All worlds share the same exogenous
    assignments, so joint counterfactual events (e.g. ``y_x`` and ``y'_x'``)
    are read off directly.
    """

    def __init__(self, scm: BoolScm):
        self.scm = scm
        self.table = exogenous_table(scm)
        self._worlds = {}

    def world(self, intervention: dict | None = None) -> dict:
        key = tuple(sorted((intervention or {}).items()))
        if key not in self._worlds:
            (self._worlds[key],) = self.table.worlds(dict(key))
        return self._worlds[key]

    def p(self, mask) -> float:
        return float(self.table.weights[mask].sum())

    def p_y(self, effect) -> float:
        return self.p(self.world()[effect])

    def p_y_do(self, cause, value, effect) -> float:
        return self.p(self.world({cause: bool(value)})[effect])

    def pns(self, cause, effect) -> float:
        """Identified PNS (interventional contrast)."""
        return pns_point(self.p_y_do(cause, True, effect), self.p_y_do(cause, False, effect)).value

    def ate(self, cause, effect) -> float:
        return ate_binary(self.p_y_do(cause, True, effect), self.p_y_do(cause, False, effect))

    def pn(self, cause, effect) -> float:
        obs = self.world()
        return pn_point(self.p_y(effect), self.p_y_do(cause, False, effect),
                        self.p(obs[cause] & obs[effect])).value

    def ps(self, cause, effect) -> float:
        obs = self.world()
        return ps_point(self.p_y_do(cause, True, effect), self.p_y(effect),
                        self.p(~obs[cause] & ~obs[effect])).value

    # potential-outcome definitions, no identification formula involved

    def pns_brute(self, cause, effect) -> float:
        """P(y_x, y'_x')."""
        on, off = self.world({cause: True}), self.world({cause: False})
        return self.p(on[effect] & ~off[effect])

    def pn_brute(self, cause, effect) -> float:
        """P(y'_x' | x, y)."""
        obs, off = self.world(), self.world({cause: False})
        cond = obs[cause] & obs[effect]
        denom = self.p(cond)
        if denom == 0:
            raise UndefinedEstimandError("PN undefined: P(x, y) = 0")
        return self.p(cond & ~off[effect]) / denom

    def ps_brute(self, cause, effect) -> float:
        """P(y_x | x', y')."""
        obs, on = self.world(), self.world({cause: True})
        cond = ~obs[cause] & ~obs[effect]
        denom = self.p(cond)
        if denom == 0:
            raise UndefinedEstimandError("PS undefined: P(x', y') = 0")
        return self.p(cond & on[effect]) / denom

    def truths(self, pairs: Iterable[tuple[str, str]]) -> dict:
        return {tuple(pair): self.pns(*pair) for pair in pairs}


def exact_pns(scm: BoolScm, cause: str, effect: str) -> float:
    return ExactOracle(scm).pns(cause, effect)


def sampled_pns(on: SampleBatch, off: SampleBatch, effect: str) -> Checked:
    """PNS from two interventional sample batches."""
    return pns_point(on.mean(effect), off.mean(effect))


# ---------------------------------------------------------------------------
# linear models


def linear_ate_paths(scm: LinearScm, cause: str, effect: str) -> float:
    """Sum over directed paths of the product of edge coefficients."""
    dag = scm.dag
    for n in (cause, effect):
        if n not in dag.nodes:
            raise DomainError(f"unknown node {n!r}")
    # total effect of cause on every node, accumulated in topological order
    total = {cause: 1.0}
    for node in dag.topological_order():
        if node == cause:
            continue
        acc = sum(scm.coef[(p, node)] * total[p] for p in dag.parents(node) if p in total)
        if any(p in total for p in dag.parents(node)):
            total[node] = acc
    return float(total.get(effect, 0.0)) if effect != cause else 1.0


class RegressionFit(NamedTuple):
    ate: float
    se: float


def linear_ate_regress(samples: SampleBatch, cause: str, effect: str,
                       adjustment: Iterable[str] = (), with_se: bool = False):
    """Coefficient of ``cause`` in an OLS of ``effect`` on cause + adjustment.

    Solved through the normal equations with an intercept column.
    """
    adjustment = [a for a in adjustment if a != cause]
    n = samples.n
    if n < 100:
        raise DomainError("regression needs at least 100 samples")
    cols = [np.ones(n), np.asarray(samples[cause], float)]
    cols += [np.asarray(samples[a], float) for a in adjustment]
    design = np.column_stack(cols)
    y = np.asarray(samples[effect], float)
    gram = design.T @ design
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(f"design matrix is singular or ill-conditioned (cond={cond:.3g})")
    beta = np.linalg.solve(gram, design.T @ y)
    if not with_se:
        return float(beta[1])
    resid = y - design @ beta
    dof = max(n - design.shape[1], 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(gram)
    return RegressionFit(float(beta[1]), float(np.sqrt(cov[1, 1])))


def parents_adjustment(dag: Dag, cause: str) -> tuple[str, ...]:
    """Parents of the cause, a valid adjustment set for Markovian models."""
    return dag.parents(cause)
