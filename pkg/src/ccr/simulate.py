"""Finite-sample convergence studies for composed effects.

* :func:`linear_ate_convergence` regresses the linear fixture at growing
  sample sizes and compares the direct effect with the product of the two
  block effects.
* :func:`inductive_pns` samples every CCT pair of a Boolean SCM and composes
  the estimates along every root-to-leaf path.
* :func:`deductive_pns` recovers each local PNS from the global estimate and
  the other locals on the longest path.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ccr import fixtures
from ccr.errors import UndefinedEstimandError
from ccr.estimands import ExactOracle, deduce_local, linear_ate_paths, linear_ate_regress
from ccr.graph import build_cct, enumerate_paths, path_pairs
from ccr.scm import BoolScm, sample

DEFAULT_NS = (100, 300, 1000, 3000, 10000)


def linear_ate_convergence(edge_x5x6: bool = False, ns: Sequence[int] = DEFAULT_NS,
                           seed: int = 0) -> list[dict]:
    """Regression estimates of the block and end-to-end effects per sample size.

    With the X5 -> X6 edge the X3 -> Y effect is estimated with X5 in the
    adjustment set, since X5 then opens a back-door path through X6.
    """
    scm = fixtures.linear_scm(edge_x5x6)
    adj = ["X5"] if edge_x5x6 else []
    true = {"x1x3": linear_ate_paths(scm, "X1", "X3"),
            "x3y": linear_ate_paths(scm, "X3", "Y"),
            "x1y": linear_ate_paths(scm, "X1", "Y")}
    rows = []
    for n in ns:
        batch = sample(scm, None, int(n), seed)
        a13 = linear_ate_regress(batch, "X1", "X3")
        a3y = linear_ate_regress(batch, "X3", "Y", adj)
        a1y = linear_ate_regress(batch, "X1", "Y")
        rows.append({"n": int(n), "ate_x1x3": a13, "ate_x3y": a3y, "ate_x1y": a1y,
                     "composed": a13 * a3y, "true_x1x3": true["x1x3"],
                     "true_x3y": true["x3y"], "true_x1y": true["x1y"]})
    return rows


def sampled_pair_pns(scm: BoolScm, pairs, n: int, seed: int) -> dict:
    """PNS per pair from ``n`` interventional samples per arm.

    Both arms of a cause reuse the same exogenous draws (common random
    numbers), so the contrast reflects the intervention rather than two
    independent sampling errors.
    """
    out = {}
    causes = {}
    for c, e in pairs:
        causes.setdefault(c, []).append(e)
    for c, effects in causes.items():
        on = sample(scm, {c: True}, n, seed)
        off = sample(scm, {c: False}, n, seed)
        for e in effects:
            out[(c, e)] = on.mean(e) - off.mean(e)
    return out


def inductive_pns(scm: BoolScm | None = None, ns: Sequence[int] = (1000, 10000, 100000),
                  seed: int = 0) -> list[dict]:
    """Composed PNS along every CCT path at each sample size.

    Each row carries one column per path (``X>Y`` is the direct estimate),
    the exact global value and ``max_gap``, the largest difference between
    any two path values.
    """
    scm = scm or fixtures.party_scm(0.7)
    cct = build_cct(scm.dag)
    paths = enumerate_paths(cct)
    truth = ExactOracle(scm).pns(cct.root, cct.leaf)
    rows = []
    for n in ns:
        est = sampled_pair_pns(scm, cct.edges, int(n), seed)
        vals = {">".join(p): float(np.prod([est[q] for q in path_pairs(p)])) for p in paths}
        v = np.array(list(vals.values()))
        rows.append({"n": int(n), **vals, "truth": truth,
                     "max_gap": float(v.max() - v.min())})
    return rows


def deductive_pns(scm: BoolScm | None = None, ns: Sequence[int] = (1000, 10000, 100000),
                  seed: int = 0) -> list[dict]:
    """Each factor of the longest path deduced from the global and the others."""
    if scm is None:
        dag = fixtures.party_dag()
        scm = BoolScm(dag, {n: "AND" for n in dag.nodes}, {n: 0.3 for n in dag.nodes})
    cct = build_cct(scm.dag)
    longest = path_pairs(cct.chain)
    oracle = ExactOracle(scm)
    rows = []
    for n in ns:
        est = sampled_pair_pns(scm, cct.edges, int(n), seed)
        g = est[(cct.root, cct.leaf)]
        for target in longest:
            others = [est[p] for p in longest if p != target]
            try:
                deduced = deduce_local(g, others).raw
            except UndefinedEstimandError:
                deduced = float("nan")
            rows.append({"n": int(n), "pair": f"{target[0]}>{target[1]}",
                         "deduced": deduced, "sampled": est[target],
                         "truth": oracle.pns(*target)})
    return rows
