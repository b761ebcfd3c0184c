"""Boolean and linear structural causal models.

Boolean nodes follow a leaky-gate mechanism::

    v = (f(parents) and not I_v) or U_v

where ``f`` is OR or AND (XOR exists only to build non-monotone test
fixtures), ``U_v ~ Bernoulli(noise_p[v])`` is the leak and ``I_v ~
Bernoulli(inhibit_p[v])`` is an optional inhibitor, off by default. The
root has no parents, so its value is ``U_root``.

Random numbers are drawn per exogenous variable in fixed-size chunks,
each chunk seeded by ``(seed, variable index, chunk index)``. A sample's
draws therefore depend only on its index, so batches can be generated in
shards and concatenated.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ccr.errors import DomainError, ResourceError
from ccr.graph import Dag

FUNCS = ("OR", "AND", "XOR")
MAX_EXOGENOUS_BITS = 24
CHUNK = 4096


# ---------------------------------------------------------------------------
# random streams


def _chunk_rng(seed, stream, chunk):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, chunk])))


def _draw(seed, stream, start, count, kind):
    if seed < 0:
        raise DomainError("seed must be non-negative")
    out = np.empty(count, dtype=float)
    pos = 0
    while pos < count:
        i = start + pos
        chunk, offset = divmod(i, CHUNK)
        take = min(CHUNK - offset, count - pos)
        rng = _chunk_rng(seed, stream, chunk)
        block = rng.random(CHUNK) if kind == "uniform" else rng.standard_normal(CHUNK)
        out[pos:pos + take] = block[offset:offset + take]
        pos += take
    return out


def uniforms(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """Uniform(0,1) draws for samples ``start .. start+count-1`` of one stream."""
    return _draw(seed, stream, start, count, "uniform")


def normals(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    return _draw(seed, stream, start, count, "normal")


# ---------------------------------------------------------------------------
# shared containers


@dataclass(frozen=True)
class Intervention:
    """do() assignments, node -> value (bool for Boolean SCMs, float for linear)."""

    assignments: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def check(self, dag: Dag):
        for node in self.assignments:
            if node not in dag.nodes:
                raise DomainError(f"intervention on unknown node {node!r}")

    def __contains__(self, node):
        return node in self.assignments

    def __getitem__(self, node):
        return self.assignments[node]

    def to_dict(self):
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
                for k, v in self.assignments.items()}


def _as_intervention(intervention):
    if intervention is None:
        return Intervention()
    if isinstance(intervention, Intervention):
        return intervention
    return Intervention(intervention)


@dataclass
class SampleBatch:
    columns: dict
    n: int
    seed: int
    intervention: Intervention | None = None

    def __post_init__(self):
        for name, col in self.columns.items():
            if len(col) != self.n:
                raise DomainError(f"column {name} has length {len(col)}, expected {self.n}")

    def __getitem__(self, node):
        return self.columns[node]

    def mean(self, node) -> float:
        return float(np.mean(self.columns[node]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(names)
        cols = [self.columns[n] for n in names]
        for row in zip(*cols):
            writer.writerow([int(v) if isinstance(v, (bool, np.bool_)) else repr(float(v))
                             for v in row])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Boolean SCM


@dataclass(frozen=True)
class BoolScm:
    dag: Dag
    func: Mapping[str, str]
    noise_p: Mapping[str, float]
    inhibit_p: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        func = {n: str(self.func.get(n, "OR")).upper() for n in self.dag.nodes}
        for n, f in func.items():
            if f not in FUNCS:
                raise DomainError(f"unknown function {f!r} on node {n}")
        noise = {}
        for n in self.dag.nodes:
            if n not in self.noise_p:
                raise DomainError(f"missing noise_p for node {n}")
            p = float(self.noise_p[n])
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"noise_p[{n}]={p} outside [0,1]")
            noise[n] = p
        inhibit = {}
        for n, p in dict(self.inhibit_p).items():
            if n not in func:
                raise DomainError(f"inhibit_p on unknown node {n!r}")
            p = float(p)
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"inhibit_p[{n}]={p} outside [0,1]")
            if p > 0 and self.dag.parents(n):
                inhibit[n] = p
        object.__setattr__(self, "func", func)
        object.__setattr__(self, "noise_p", noise)
        object.__setattr__(self, "inhibit_p", inhibit)

    @classmethod
    def uniform(cls, dag: Dag, p: float, func: str = "OR", root_p: float | None = None):
        noise = {n: p for n in dag.nodes}
        if root_p is not None:
            noise[dag.root] = root_p
        return cls(dag, {n: func for n in dag.nodes}, noise)

    @property
    def is_positive(self) -> bool:
        """Root leak strictly inside (0,1), the positivity condition for realizations."""
        return 0.0 < self.noise_p[self.dag.root] < 1.0

    def exogenous(self) -> list[tuple[str, str, float]]:
        """Exogenous variables as (kind, node, p), kind 'U' (leak) or 'I' (inhibitor)."""
        out = []
        for n in self.dag.nodes:
            out.append(("U", n, self.noise_p[n]))
            if n in self.inhibit_p:
                out.append(("I", n, self.inhibit_p[n]))
        return out

    def shifted(self, delta: float) -> "BoolScm":
        """Same structure with every leak probability moved by ``delta`` (clipped)."""
        noise = {n: min(1.0, max(0.0, p + delta)) for n, p in self.noise_p.items()}
        return BoolScm(self.dag, self.func, noise, self.inhibit_p)

    def with_noise(self, noise_p: Mapping[str, float]) -> "BoolScm":
        return BoolScm(self.dag, self.func, dict(noise_p), self.inhibit_p)

    def evaluate(self, leak: Mapping[str, np.ndarray], inhibit: Mapping[str, np.ndarray] | None = None,
                 intervention=None) -> dict:
        """Propagate exogenous bit vectors through the mechanisms."""
        intervention = _as_intervention(intervention)
        inhibit = inhibit or {}
        values = {}
        for n in self.dag.topological_order():
            u = np.asarray(leak[n], dtype=bool)
            if n in intervention:
                values[n] = np.full(u.shape, bool(intervention[n]))
                continue
            parents = self.dag.parents(n)
            if not parents:
                values[n] = u
                continue
            stacked = [values[p] for p in parents]
            f = self.func[n]
            if f == "OR":
                v = np.logical_or.reduce(stacked)
            elif f == "AND":
                v = np.logical_and.reduce(stacked)
            else:
                v = np.logical_xor.reduce(stacked)
            if n in inhibit:
                v = v & ~np.asarray(inhibit[n], dtype=bool)
            values[n] = v | u
        return values

    def to_dict(self) -> dict:
        out = {"dag": self.dag.to_dict(), "func": dict(self.func), "noise_p": dict(self.noise_p)}
        if self.inhibit_p:
            out["inhibit_p"] = dict(self.inhibit_p)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "BoolScm":
        return cls(Dag.from_dict(data["dag"]), data["func"], data["noise_p"],
                   data.get("inhibit_p", {}))


def exogenous_uniforms(scm: BoolScm, start: int, count: int, seed: int) -> dict:
    """Raw uniforms keyed by (kind, node); the bit is ``w < p``."""
    return {(kind, n): uniforms(seed, idx, start, count)
            for idx, (kind, n, _) in enumerate(scm.exogenous())}


def bits_from_uniforms(scm: BoolScm, draws: Mapping) -> tuple[dict, dict]:
    leak, inhibit = {}, {}
    for kind, n, p in scm.exogenous():
        bits = draws[(kind, n)] < p
        (leak if kind == "U" else inhibit)[n] = bits
    return leak, inhibit


def _sample_bool(scm, intervention, n, seed, start):
    leak, inhibit = bits_from_uniforms(scm, exogenous_uniforms(scm, start, n, seed))
    return scm.evaluate(leak, inhibit, intervention)


# ---------------------------------------------------------------------------
# linear SCM


@dataclass(frozen=True)
class LinearScm:
    """``v = sum(coef[(p, v)] * p for p in parents) + noise_sd[v] * N(0, 1)``."""

    dag: Dag
    coef: Mapping[tuple[str, str], float]
    noise_sd: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        coef = {}
        for e in self.dag.edges:
            c = float(self.coef.get(e, np.nan))
            if not np.isfinite(c):
                raise DomainError(f"missing or non-finite coefficient for edge {e}")
            coef[e] = c
        sd = {n: float(self.noise_sd.get(n, 1.0)) for n in self.dag.nodes}
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "noise_sd", sd)

    @classmethod
    def uniform(cls, dag: Dag, coefficient: float):
        return cls(dag, {e: coefficient for e in dag.edges})

    def to_dict(self) -> dict:
        return {"dag": self.dag.to_dict(),
                "coef": [[a, b, c] for (a, b), c in self.coef.items()],
                "noise_sd": dict(self.noise_sd)}

    @classmethod
    def from_dict(cls, data: dict) -> "LinearScm":
        return cls(Dag.from_dict(data["dag"]), {(a, b): c for a, b, c in data["coef"]},
                   data.get("noise_sd", {}))


def _sample_linear(scm, intervention, n, seed, start):
    values = {}
    for idx, node in enumerate(scm.dag.nodes):
        eps = normals(seed, idx, start, n) * scm.noise_sd[node]
        values[node] = eps
    out = {}
    for node in scm.dag.topological_order():
        if node in intervention:
            out[node] = np.full(n, float(intervention[node]))
            continue
        v = values[node].copy()
        for p in scm.dag.parents(node):
            v += scm.coef[(p, node)] * out[p]
        out[node] = v
    return out


def sample(scm, intervention=None, n: int = 1000, seed: int = 0, start: int = 0) -> SampleBatch:
    """Ancestral sampling; ``start`` selects a shard of the sample index space."""
    if n < 1:
        raise DomainError("n must be at least 1")
    intervention = _as_intervention(intervention)
    intervention.check(scm.dag)
    if isinstance(scm, BoolScm):
        values = _sample_bool(scm, intervention, n, seed, start)
    elif isinstance(scm, LinearScm):
        values = _sample_linear(scm, intervention, n, seed, start)
    else:
        raise DomainError(f"unsupported model type {type(scm).__name__}")
    cols = {node: values[node] for node in scm.dag.nodes}
    return SampleBatch(cols, n, seed, intervention if intervention.assignments else None)


# ---------------------------------------------------------------------------
# exhaustive enumeration


@dataclass
class ExogenousTable:
    """All joint assignments of the non-degenerate exogenous bits with their masses.

    Bits whose probability is exactly 0 or 1 are held constant, so they do not
    count against the enumeration bound.
    """

    scm: BoolScm
    weights: np.ndarray
    leak: dict
    inhibit: dict

    def worlds(self, *interventions) -> list[dict]:
        return [self.scm.evaluate(self.leak, self.inhibit, iv) for iv in interventions]


def exogenous_table(scm: BoolScm, max_bits: int = MAX_EXOGENOUS_BITS) -> ExogenousTable:
    free = [(k, n, p) for k, n, p in scm.exogenous() if 0.0 < p < 1.0]
    m = len(free)
    if m > max_bits:
        raise ResourceError(
            f"{m} exogenous bits exceed the enumeration bound of {max_bits}; use sample() instead")
    size = 1 << m
    idx = np.arange(size, dtype=np.uint32)
    weights = np.ones(size)
    leak, inhibit = {}, {}
    bit_of = {(k, n): j for j, (k, n, _) in enumerate(free)}
    for k, n, p in scm.exogenous():
        key = (k, n)
        if key in bit_of:
            b = ((idx >> bit_of[key]) & 1).astype(bool)
            weights *= np.where(b, p, 1.0 - p)
        else:
            b = np.full(size, p >= 1.0)
        (leak if k == "U" else inhibit)[n] = b
    return ExogenousTable(scm, weights, leak, inhibit)


@dataclass
class ExactDistribution:
    weights: np.ndarray
    values: dict
    intervention: Intervention | None = None

    def prob(self, event: Mapping[str, bool] | None = None) -> float:
        """P(all nodes in ``event`` take the given values)."""
        mask = np.ones(self.weights.shape, dtype=bool)
        for node, val in (event or {}).items():
            mask &= self.values[node] == bool(val)
        return float(self.weights[mask].sum())

    def marginal(self, node: str) -> float:
        return self.prob({node: True})

    def support(self) -> dict:
        """Joint distribution over endogenous realizations, keyed by value tuples."""
        nodes = list(self.values)
        mat = np.stack([self.values[n] for n in nodes], axis=1)
        out = {}
        for row, w in zip(map(tuple, mat.astype(int)), self.weights):
            if w > 0:
                out[row] = out.get(row, 0.0) + float(w)
        return out


def enumerate_exact(scm: BoolScm, intervention=None) -> ExactDistribution:
    intervention = _as_intervention(intervention)
    intervention.check(scm.dag)
    table = exogenous_table(scm)
    (values,) = table.worlds(intervention)
    return ExactDistribution(table.weights, values,
                             intervention if intervention.assignments else None)


def check_monotonic(scm: BoolScm, cause: str, effect: str) -> bool:
    """True iff no exogenous assignment with positive mass has y'_x and y_x'."""
    dag = scm.dag
    for n in (cause, effect):
        if n not in dag.nodes:
            raise DomainError(f"unknown node {n!r}")
    if dag.index(cause) >= dag.index(effect):
        raise DomainError(f"{cause} does not precede {effect}")
    table = exogenous_table(scm)
    on, off = table.worlds({cause: True}, {cause: False})
    bad = (~on[effect]) & off[effect] & (table.weights > 0)
    return not bool(bad.any())
