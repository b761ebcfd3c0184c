import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccr.errors import DomainError, NumericalError, UndefinedEstimandError
from ccr.estimands import (Checked, ExactOracle, PairEstimand, ate_binary, compose_pn_chain,
                           compose_product, compose_ps_chain, deduce_local, exact_pns,
                           linear_ate_paths, linear_ate_regress, parents_adjustment, pn_point,
                           pns_point, ps_point, sampled_pns)
from ccr.fixtures import linear_scm, party_scm
from ccr.graph import Dag, enumerate_paths, path_pairs
from ccr.scm import BoolScm, LinearScm, sample

from conftest import random_admissible_task


def xy(p_x=0.7, p_y=0.7):
    return BoolScm(Dag.from_edges([("X", "Y")]), {}, {"X": p_x, "Y": p_y})


def xyz(p=0.7):
    return BoolScm(Dag.from_edges([("X", "Y"), ("Y", "Z")]), {}, {"X": p, "Y": p, "Z": p})


# ---------------------------------------------------------------------------
# point estimands


def test_pns_point_examples():
    assert pns_point(1.0, 0.7).value == pytest.approx(0.3)
    assert pns_point(0.4, 0.4).value == 0
    assert pns_point(1, 0).value == 1


def test_pns_point_keeps_raw_negative():
    c = pns_point(0.3, 0.5)
    assert c.raw == pytest.approx(-0.2)
    assert c.value == 0 and c.clamped


def test_pns_point_range_check():
    with pytest.raises(DomainError):
        pns_point(1.2, 0.1)
    with pytest.raises(DomainError):
        pns_point(0.5, -0.1)


def test_ate_binary():
    assert ate_binary(0.9, 0.4) == pytest.approx(0.5)
    assert ate_binary(0.2, 0.6) == pytest.approx(-0.4)


def test_pn_two_node_example():
    o = ExactOracle(xy())
    assert o.p_y("Y") == pytest.approx(0.91)
    assert o.p_y_do("X", False, "Y") == pytest.approx(0.7)
    assert o.p(o.world()["X"] & o.world()["Y"]) == pytest.approx(0.7)
    assert pn_point(0.91, 0.7, 0.7).value == pytest.approx(0.3)
    assert o.pn("X", "Y") == pytest.approx(0.3)


def test_pn_edge_cases():
    assert pn_point(0.5, 0.5, 0.4).value == 0
    with pytest.raises(UndefinedEstimandError):
        pn_point(0.5, 0.4, 0.0)


def test_ps_two_node_example():
    assert ps_point(1.0, 0.91, 0.09).value == pytest.approx(1.0)
    assert ExactOracle(xy()).ps("X", "Y") == pytest.approx(1.0)
    assert ps_point(0.6, 0.6, 0.2).value == 0
    with pytest.raises(UndefinedEstimandError):
        ps_point(0.6, 0.5, 0.0)


def test_compose_product():
    assert compose_product([0.3, 0.3]) == pytest.approx(0.09)
    assert compose_product([1.0, 1.0, 1.0]) == 1.0
    assert compose_product([0.3, 0.3]) == pytest.approx(exact_pns(xyz(), "X", "Z"))


def test_deduce_local():
    assert deduce_local(0.09, [0.3]).value == pytest.approx(0.3)
    with pytest.raises(UndefinedEstimandError):
        deduce_local(0.09, [0.0])


def test_deduce_local_reports_out_of_range():
    c = deduce_local(0.5, [0.25])
    assert c.raw == pytest.approx(2.0) and c.value == 1.0 and c.clamped


def test_chain_formulas_deterministic():
    assert compose_pn_chain(1, 1, 1) == pytest.approx(1.0)
    assert compose_ps_chain(1, 1, 1) == pytest.approx(1.0)
    with pytest.raises(UndefinedEstimandError):
        compose_pn_chain(0.0, 0.5, 0.5)


def test_pair_estimand_round_trip():
    e = PairEstimand("X", "Y", "PNS", 0.3, "sampled", 1000, 4)
    assert PairEstimand.from_dict(e.to_dict()) == e
    with pytest.raises(DomainError):
        PairEstimand("X", "Y", "PN", 1.5)
    with pytest.raises(DomainError):
        PairEstimand("X", "Y", "RR", 0.5)


def test_checked_is_tuple_like():
    c = Checked(0.2, 0.2, False)
    assert c.value == 0.2 and tuple(c) == (0.2, 0.2, False)


# ---------------------------------------------------------------------------
# exact oracle properties


@given(st.integers(0, 10**6))
def test_identified_pns_equals_potential_outcome_pns(seed):
    task = random_admissible_task(seed, max_bccs=3, sizes=(2, 4))
    o = ExactOracle(task.scm)
    for a, b in task.cct.edges:
        assert o.pns(a, b) == pytest.approx(o.pns_brute(a, b), abs=1e-12)
        assert o.pns(a, b) == o.ate(a, b)


@given(st.integers(0, 10**6))
def test_identified_pn_ps_equal_potential_outcomes(seed):
    rng = np.random.default_rng(seed)
    task = random_admissible_task(seed, max_bccs=2, sizes=(2, 4))
    scm = BoolScm(task.dag, task.scm.func,
                  {n: float(rng.uniform(0.05, 0.95)) for n in task.dag.nodes},
                  {n: float(rng.uniform(0, 0.9)) for n in task.dag.nodes})
    o = ExactOracle(scm)
    for a, b in task.cct.edges:
        assert o.pn(a, b) == pytest.approx(o.pn_brute(a, b), abs=1e-12)
        assert o.ps(a, b) == pytest.approx(o.ps_brute(a, b), abs=1e-12)


@given(st.integers(0, 10**6))
def test_pns_composes_along_every_path(seed):
    task = random_admissible_task(seed)
    o = ExactOracle(task.scm)
    g = o.pns(task.cct.root, task.cct.leaf)
    for p in enumerate_paths(task.cct):
        assert abs(g - np.prod([o.pns(*q) for q in path_pairs(p)])) <= 1e-12


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.05, 0.95),
       st.floats(0.0, 0.95), st.floats(0.0, 0.95))
def test_chain_pn_ps_formulas_match_potential_outcomes(px, py, pz, iy, iz):
    scm = BoolScm(Dag.from_edges([("X", "Y"), ("Y", "Z")]), {}, {"X": px, "Y": py, "Z": pz},
                  {"Y": iy, "Z": iz})
    o = ExactOracle(scm)
    pn = compose_pn_chain(o.pn("X", "Y"), o.ps("X", "Y"), o.pn("Y", "Z"))
    ps = compose_ps_chain(o.ps("X", "Y"), o.pn("X", "Y"), o.ps("Y", "Z"))
    assert pn == pytest.approx(o.pn_brute("X", "Z"), abs=1e-12)
    assert ps == pytest.approx(o.ps_brute("X", "Z"), abs=1e-12)


def test_non_monotone_ate_can_be_negative():
    dag = Dag.from_edges([("X", "A"), ("X", "Y"), ("A", "Y")])
    scm = BoolScm(dag, {"Y": "XOR"}, {"X": 0.5, "A": 0.3, "Y": 0.0})
    o = ExactOracle(scm)
    # do(X=1) makes A=1 and Y = 1 xor 1 = 0; do(X=0) leaves Y = A
    assert o.ate("X", "Y") == pytest.approx(-0.3)
    assert o.pns_brute("X", "Y") == 0


def test_sampled_pns_matches_exact():
    scm = party_scm(0.5)
    on, off = sample(scm, {"C": True}, 10**5, 3), sample(scm, {"C": False}, 10**5, 3)
    assert sampled_pns(on, off, "D").value == pytest.approx(exact_pns(scm, "C", "D"), abs=0.01)


# ---------------------------------------------------------------------------
# linear models


def test_linear_path_tracing():
    plain, bridged = linear_scm(False), linear_scm(True)
    assert linear_ate_paths(plain, "X1", "X3") == 4.5
    assert linear_ate_paths(plain, "X3", "Y") == 4.5
    assert linear_ate_paths(plain, "X1", "Y") == 20.25
    assert linear_ate_paths(bridged, "X1", "Y") == 23.625


def test_linear_no_path_is_zero():
    assert linear_ate_paths(linear_scm(False), "X6", "X1") == 0.0


def test_regression_recovers_effects():
    batch = sample(linear_scm(False), None, 10**4, seed=0)
    assert linear_ate_regress(batch, "X1", "Y") == pytest.approx(20.25, abs=0.5)
    bridged = sample(linear_scm(True), None, 10**4, seed=0)
    assert linear_ate_regress(bridged, "X1", "Y") == pytest.approx(23.625, abs=0.5)
    assert linear_ate_regress(bridged, "X3", "Y", ["X5"]) == pytest.approx(4.5, abs=0.3)


def test_regression_adjustment_is_needed_under_bridge():
    bridged = sample(linear_scm(True), None, 10**4, seed=0)
    naive = linear_ate_regress(bridged, "X3", "Y")
    assert abs(naive - 4.5) > 0.3


def test_regression_pure_noise_pair():
    dag = Dag.from_edges([], ["A", "B"])
    batch = sample(LinearScm(dag, {}), None, 5000, seed=1)
    fit = linear_ate_regress(batch, "A", "B", with_se=True)
    assert abs(fit.ate) < 3 * fit.se


def test_regression_singular_design():
    dag = Dag.from_edges([("A", "B")])
    batch = sample(LinearScm(dag, {("A", "B"): 1.0}), {"A": 1.0}, 500, seed=0)
    with pytest.raises(NumericalError):
        linear_ate_regress(batch, "A", "B")


def test_regression_needs_samples():
    with pytest.raises(DomainError):
        linear_ate_regress(sample(linear_scm(False), None, 50), "X1", "Y")


def test_parents_adjustment():
    assert parents_adjustment(linear_scm(True).dag, "X3") == ("X2", "X5")
