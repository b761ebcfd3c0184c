import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ccr.estimands import ExactOracle
from ccr.evaluator import EvalConfig, evaluate
from ccr.graph import Dag
from ccr.reasoner import run_batch
from ccr.taskgen import GenConfig, gen_dag, gen_task, make_corpus

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_admissible_task(seed: int, max_bccs: int = 4, sizes=(2, 5), bcc_type=None):
    """Random admissible task: 2..max_bccs blocks of 2..5 nodes, mixed OR/AND.

    A single block has no cutpoint, so at least two blocks are drawn.
    """
    rng = np.random.default_rng([seed, 7])
    k = int(rng.integers(2, max_bccs + 1))
    nodes = [int(rng.integers(sizes[0], sizes[1] + 1)) for _ in range(k)]
    kind = bcc_type or ("cycle", "wheel")[int(rng.integers(2))]
    dag = gen_dag(GenConfig(k, nodes, kind, "CandyParty", seed))
    return gen_task(dag, "CandyParty", seed)


def random_dag(rng, n, density=0.4):
    """Random DAG on n nodes, edges only from lower to higher index."""
    nodes = [f"N{i}" for i in range(n)]
    edges = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)
             if rng.random() < density]
    return Dag.from_edges(edges, nodes, root=nodes[0], leaf=nodes[-1])


def exact_truths(task):
    o = ExactOracle(task.scm)
    return {p: o.pns(*p) for p in task.plan.pairs}


def evaluate_reasoner(task, reasoner, seed=0, n=1000, replicates=5, with_truths=True,
                      config=None):
    """Corpus, batch run and evaluation in one call; returns the report."""
    store = run_batch(reasoner, make_corpus(task, n, seed=seed), replicates, seed=seed).store
    cfg = config or EvalConfig(n_exogenous_sets=n, replicates=replicates, seed=seed)
    truths = exact_truths(task) if with_truths else None
    return evaluate(store, task.plan, task.dag, truths, cfg, task.task_id, task.cct.chain)


@pytest.fixture
def data_dir():
    return DATA


# ---------------------------------------------------------------------------
# acceptance summary: one pass/fail line per criterion

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    number, title = marker.args
    ok, _ = _CRITERIA.get(number, (True, title))
    _CRITERIA[number] = (ok and rep.passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
