"""Estimate distributions, composition errors and the reasoner taxonomy.

The evaluation works on a response store holding, for every cause-effect
pair, factual and counterfactual answers over the same exogenous samples
with several replicates each. Each subsampling round picks one replicate
per (sample, question kind) and turns the answers into one PNS estimate
per pair. Round ``r`` uses the same replicate choices for every pair.

Errors per round:

* eta     relative error of each pair's estimate against its true PNS
* epsilon relative error of each composed path against the true global PNS
* gamma   relative error of each composed path against the same round's
          direct global estimate (internal consistency)
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ccr.errors import CoverageError, DataQualityError, DomainError, UndefinedRAEError
from ccr.graph import Dag, QuantityPlan, path_stats
from ccr.reasoner import ResponseStore, pair_key



@dataclass(frozen=True)
class EvalConfig:
    n_exogenous_sets: int = 1000
    replicates: int = 5
    n_subsamples: int = 1000
    rae_threshold: float = 0.1
    validity_fraction: float = 0.90
    near_valid_fraction: float = 0.75
    min_truth: float = 0.01
    max_unknown_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.rae_threshold <= 0:
            raise DomainError("rae_threshold must be positive")
        for name in ("validity_fraction", "near_valid_fraction"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise DomainError(f"{name} must lie in (0, 1]")
        if self.near_valid_fraction > self.validity_fraction:
            raise DomainError("near_valid_fraction cannot exceed validity_fraction")
        for name in ("n_exogenous_sets", "replicates", "n_subsamples"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be at least 1")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def path_id(path: Sequence) -> str:
    """``X>C>Y`` for a path given as nodes or as consecutive pairs."""
    if path and isinstance(path[0], (tuple, list)):
        nodes = [path[0][0]] + [p[1] for p in path]
    else:
        nodes = list(path)
    return ">".join(nodes)


# ---------------------------------------------------------------------------
# relative error


def rae(estimate: float, reference: float) -> float:
    """``|reference - estimate| / reference``."""
    if reference == 0:
        raise UndefinedRAEError(abs(estimate))
    return abs(reference - estimate) / abs(reference)


def rae_array(estimates, reference) -> np.ndarray:
    """Elementwise RAE; a zero reference gives ``inf`` (or 0 for a zero error)."""
    est = np.asarray(estimates, float)
    ref = np.broadcast_to(np.asarray(reference, float), est.shape)
    err = np.abs(ref - est)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = err / np.abs(ref)
    out[(ref == 0) & (err == 0)] = 0.0
    out[(ref == 0) & (err > 0)] = np.inf
    return out


# ---------------------------------------------------------------------------
# subsampling


def replicate_choices(config: EvalConfig, n_samples: int, n_replicates: int) -> np.ndarray:
    """Replicate index per (round, sample, question kind), shared by all pairs."""
    out = np.empty((config.n_subsamples, n_samples, 2), dtype=np.int16)
    for r in range(config.n_subsamples):
        rng = np.random.default_rng([config.seed, r])
        out[r] = rng.integers(n_replicates, size=(n_samples, 2))
    return out


def subsample_pns(store: ResponseStore, pair, config: EvalConfig,
                  choices: np.ndarray | None = None) -> np.ndarray:
    """``config.n_subsamples`` raw PNS estimates for one pair (may be negative)."""
    tab = store.table(pair)
    n_samples = len(tab["sample_ids"])
    if n_samples == 0:
        raise CoverageError([pair_key(pair)])
    fact, cf = tab["factual"], tab["counterfactual"]
    reps = fact.shape[1]
    missing = (np.sum(fact < 0) + np.sum(cf < 0)) / (2.0 * fact.size)
    if missing > config.max_unknown_rate:
        raise DataQualityError(
            f"{pair_key(pair)}: {missing:.1%} of answers are missing or UNKNOWN "
            f"(limit {config.max_unknown_rate:.0%})")
    if choices is None or choices.shape[1] != n_samples:
        choices = replicate_choices(config, n_samples, reps)
    choices = choices % reps
    rows = np.arange(n_samples)[None, :]
    f = fact[rows, choices[:, :, 0]].astype(float)
    c = cf[rows, choices[:, :, 1]].astype(float)
    do = tab["do_value"][None, :]
    # the counterfactual sets the cause to do_value, the factual has the opposite
    y1 = np.where(do, c, f)
    y0 = np.where(do, f, c)
    v1, v0 = y1 >= 0, y0 >= 0
    with np.errstate(invalid="ignore", divide="ignore"):
        p1 = np.where(v1, y1, 0).sum(1) / v1.sum(1)
        p0 = np.where(v0, y0, 0).sum(1) / v0.sum(1)
    return p1 - p0


@dataclass
class EstimateSet:
    """Raw estimate distributions and exact values per pair."""

    estimates: dict
    truths: dict = field(default_factory=dict)
    unknown_rates: dict = field(default_factory=dict)

    def pairs(self):
        return list(self.estimates)


def estimate_all(store: ResponseStore, pairs: Sequence, config: EvalConfig,
                 truths: Mapping | None = None) -> EstimateSet:
    tabs_n = {tuple(p): len(store.table(p)["sample_ids"]) for p in pairs}
    missing = [pair_key(p) for p, n in tabs_n.items() if n == 0]
    if missing:
        raise CoverageError(missing)
    n_samples = max(tabs_n.values())
    reps = max(store.table(p)["factual"].shape[1] for p in pairs)
    choices = replicate_choices(config, n_samples, reps)
    est = {tuple(p): subsample_pns(store, p, config, choices) for p in pairs}
    unknown = {tuple(p): store.unknown_rate(p) for p in pairs}
    return EstimateSet(est, dict(truths or {}), unknown)


# ---------------------------------------------------------------------------
# quantity-wise and composition errors


@dataclass
class ErrorRecord:
    target: str
    kind: str  # "pair" or "path"
    truth: float | None = None
    estimates: np.ndarray | None = None
    eta: np.ndarray | None = None
    epsilon: np.ndarray | None = None
    gamma: np.ndarray | None = None


@dataclass
class ErrorSet:
    pairs: dict
    paths: dict
    excluded: dict
    global_pair: tuple

    def records(self):
        return list(self.pairs.values()) + list(self.paths.values())


def run_algorithm1(plan: QuantityPlan, estimates: Mapping, truths: Mapping | None = None,
                   config: EvalConfig = EvalConfig()) -> ErrorSet:
    """Errors for every CCT pair (eta) and every composed path (epsilon, gamma).

    ``estimates`` maps pairs to equal-length arrays of per-round estimates
    (a scalar is treated as a single round). Without ``truths`` only gamma
    is computed. Pairs whose true value is below ``config.min_truth`` are
    listed in ``excluded`` and skipped for eta.
    """
    est = {tuple(k): np.atleast_1d(np.asarray(v, float)) for k, v in estimates.items()}
    needed = list(plan.pairs)
    missing = [pair_key(p) for p in needed if p not in est]
    if missing:
        raise CoverageError(missing)
    truths = {tuple(k): float(v) for k, v in (truths or {}).items()}
    if truths:
        absent = [pair_key(p) for p in needed if p not in truths]
        if absent:
            raise CoverageError(absent)
    gx = plan.global_pair
    direct = est[gx]
    pairs, paths, excluded = {}, {}, {}
    for p in needed:
        rec = ErrorRecord(pair_key(p), "pair", truths.get(p), est[p])
        if truths:
            if truths[p] < config.min_truth:
                excluded[pair_key(p)] = truths[p]
            else:
                rec.eta = rae_array(est[p], truths[p])
        pairs[pair_key(p)] = rec
    global_ok = bool(truths) and truths[gx] >= config.min_truth
    for comp in plan.compositions:
        composed = np.prod(np.stack([est[p] for p in comp]), axis=0)
        rec = ErrorRecord(path_id(comp), "path", truths.get(gx), composed)
        if global_ok:
            rec.epsilon = rae_array(composed, truths[gx])
        rec.gamma = rae_array(composed, direct)
        paths[rec.target] = rec
    return ErrorSet(pairs, paths, excluded, gx)


# ---------------------------------------------------------------------------
# taxonomy


@dataclass
class TaxonomyLabel:
    label: str
    validity_status: str | None
    consistency_status: str
    validity: dict
    consistency: dict

    def to_dict(self):
        return asdict(self)


def _fraction(errors, delta):
    return float(np.mean(np.asarray(errors) <= delta)) if errors is not None else None


def _status(fracs, config):
    if not fracs:
        return "valid"
    low = min(fracs)
    if low >= config.validity_fraction:
        return "valid"
    if low >= config.near_valid_fraction:
        return "near"
    return "invalid"


def classify(result: ErrorSet, config: EvalConfig = EvalConfig()) -> TaxonomyLabel:
    """Valid/consistent label from the share of rounds within ``rae_threshold``.

    Validity covers every non-excluded pair (eta) and every composition
    (epsilon); consistency covers every composition (gamma). A group is
    valid when every member reaches ``validity_fraction``, near-valid when
    every member reaches ``near_valid_fraction``.
    """
    d = config.rae_threshold
    validity = {}
    for k, rec in result.pairs.items():
        if rec.eta is not None:
            validity[k] = _fraction(rec.eta, d)
    for k, rec in result.paths.items():
        if rec.epsilon is not None:
            validity[k] = _fraction(rec.epsilon, d)
    consistency = {k: _fraction(rec.gamma, d) for k, rec in result.paths.items()}
    c = _status(list(consistency.values()), config)
    has_truth = any(rec.truth is not None for rec in result.pairs.values())
    if not has_truth:
        label = {"valid": "C", "near": "near-C", "invalid": "I"}[c]
        return TaxonomyLabel(label, None, c, validity, consistency)
    v = _status(list(validity.values()), config)
    if v == "valid" and c == "valid":
        label = "VC"
    elif v != "invalid" and c != "invalid":
        label = "near-VC"
    elif v == "valid":
        label = "VI"
    elif v == "near":
        label = "near-VI"
    elif c != "invalid":
        label = "IC"
    else:
        label = "II"
    return TaxonomyLabel(label, v, c, validity, consistency)


# ---------------------------------------------------------------------------
# mediation analysis


def mediation_curve(result: ErrorSet, dag: Dag) -> list[dict]:
    """Mean and std of pair-level eta grouped by hop distance and by mediator count."""
    rows = []
    groups = {"distance": {}, "mediators": {}}
    for key, rec in result.pairs.items():
        if rec.eta is None:
            continue
        cause, effect = key.split(">")
        st = path_stats(dag, cause, effect)
        groups["distance"].setdefault(st.shortest_path_length, []).append(rec.eta)
        groups["mediators"].setdefault(st.mediator_count, []).append(rec.eta)
    for by, buckets in groups.items():
        for value in sorted(buckets):
            vals = np.concatenate(buckets[value])
            finite = vals[np.isfinite(vals)]
            rows.append({"by": by, "value": int(value), "n_pairs": len(buckets[value]),
                         "mean_rae": float(np.mean(finite)) if finite.size else float("inf"),
                         "std_rae": float(np.std(finite)) if finite.size else float("nan")})
    return rows


# ---------------------------------------------------------------------------
# report assembly


def summarize(values) -> dict | None:
    if values is None:
        return None
    v = np.asarray(values, float)
    finite = v[np.isfinite(v)]
    if finite.size == 0:
        return {"n": int(v.size), "mean": None, "median": None, "std": None,
                "q05": None, "q95": None}
    return {"n": int(v.size), "mean": float(finite.mean()), "median": float(np.median(finite)),
            "std": float(finite.std()), "q05": float(np.quantile(finite, 0.05)),
            "q95": float(np.quantile(finite, 0.95))}


@dataclass
class EvalReport:
    task_id: str | None
    config: EvalConfig
    result: ErrorSet
    label: TaxonomyLabel
    mediation: list
    unknown_rates: dict = field(default_factory=dict)
    chain: tuple = ()

    def to_dict(self) -> dict:
        d = self.config.rae_threshold
        quantities = {}
        for k, rec in self.result.pairs.items():
            clamped = np.clip(rec.estimates, 0, 1)
            quantities[k] = {
                "truth": rec.truth,
                "estimates": summarize(rec.estimates),
                "clamped_mean": float(clamped.mean()),
                "eta": summarize(rec.eta),
                "validity": _fraction(rec.eta, d),
                "excluded": k in self.result.excluded,
                "unknown_rate": self.unknown_rates.get(k),
            }
        compositions = {}
        for k, rec in self.result.paths.items():
            compositions[k] = {
                "composed": summarize(rec.estimates),
                "epsilon": summarize(rec.epsilon),
                "gamma": summarize(rec.gamma),
                "validity": _fraction(rec.epsilon, d),
                "consistency": _fraction(rec.gamma, d),
            }
        return {
            "task_id": self.task_id,
            "chain": list(self.chain),
            "global": pair_key(self.result.global_pair),
            "config": self.config.to_dict(),
            "label": self.label.label,
            "validity_status": self.label.validity_status,
            "consistency_status": self.label.consistency_status,
            "quantities": quantities,
            "compositions": compositions,
            "excluded": self.result.excluded,
            "mediation": self.mediation,
        }


def evaluate(store: ResponseStore, plan: QuantityPlan, dag: Dag, truths: Mapping | None = None,
             config: EvalConfig = EvalConfig(), task_id: str | None = None,
             chain: Sequence = ()) -> EvalReport:
    """Subsample, run the error computation, classify and build the report."""
    est = estimate_all(store, plan.pairs, config, truths)
    result = run_algorithm1(plan, est.estimates, truths, config)
    label = classify(result, config)
    med = mediation_curve(result, dag) if truths else []
    return EvalReport(task_id, config, result, label, med,
                      {pair_key(k): v for k, v in est.unknown_rates.items()}, tuple(chain))
