from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maidlab.catalog import SPACE, SPEED, tree_killer_maid
from maidlab.errors import (
    CptRowNotNormalized,
    CycleDetected,
    MissingCptRow,
    PartialProfile,
    RuleDomainMismatch,
    UnassignedDecision,
    UnknownAgent,
    UnknownParent,
    UtilityHasChild,
)
from maidlab.maid import (
    CHANCE,
    DECISION,
    UTILITY,
    DecisionRule,
    Maid,
    NodeDecl,
    StrategyProfile,
    build_maid,
    dumps_maid,
    expected_utility,
    induce,
    joint_distribution,
    loads_maid,
    maid_to_dict,
    total_utility_distribution,
)
from maidlab.random_models import random_bayes_net, random_maid
from oracles import brute_expected_utility, brute_joint, sample_utility


def pure(maid, **choices):
    return StrategyProfile(DecisionRule.deterministic(maid, d, a) for d, a in choices.items())


def full_random_profile(maid, rng):
    rules = []
    for d in maid.decisions:
        k = len(maid.domain(d))
        rows = tuple(tuple(float(x) for x in rng.dirichlet(np.ones(k))) for _ in range(maid.num_rows(d)))
        rows = tuple(r[:-1] + (max(0.0, 1.0 - math.fsum(r[:-1])),) for r in rows)
        rules.append(DecisionRule(d, rows))
    return StrategyProfile(rules)


# -- construction --------------------------------------------------------------

def test_logistics_builds(logistics):
    assert logistics.decisions == ("D_A", "D_B")
    assert logistics.utilities == ("U_A", "U_B")
    assert logistics.agents == ("A", "B")
    assert logistics["U_A"].table == (9.0, 3.0, 6.0, 5.0)
    assert logistics["U_B"].table == (9.0, 6.0, 3.0, 5.0)


def test_single_chance_node():
    m = build_maid({"agents": [], "nodes": [{"id": "X", "kind": "chance", "domain": [0, 1],
                                              "table": [0.5, 0.5]}]})
    assert m.chance_nodes == ("X",)


def test_utility_with_child_rejected():
    spec = {"agents": ["A"], "nodes": [
        {"id": "U", "kind": "utility", "owner": "A", "parents": [], "table": [1.0]},
        {"id": "X", "kind": "chance", "parents": ["U"], "domain": [0], "table": [1.0]},
    ]}
    with pytest.raises(UtilityHasChild):
        build_maid(spec)


@pytest.mark.parametrize("nodes, error", [
    ([NodeDecl("X", CHANCE, ("Y",), (0, 1), (0.5, 0.5, 0.5, 0.5)),
      NodeDecl("Y", CHANCE, ("X",), (0, 1), (0.5, 0.5, 0.5, 0.5))], CycleDetected),
    ([NodeDecl("X", CHANCE, (), (0, 1), (0.5, 0.6))], CptRowNotNormalized),
    ([NodeDecl("X", CHANCE, (), (0, 1), (1.2, -0.2))], CptRowNotNormalized),
    ([NodeDecl("X", CHANCE, (), (0, 1), (0.5,))], MissingCptRow),
    ([NodeDecl("X", CHANCE, ("Q",), (0, 1), (0.5, 0.5))], UnknownParent),
])
def test_construction_errors(nodes, error):
    with pytest.raises(error):
        Maid(("A",), nodes)


def test_cpt_tolerance_is_tight():
    Maid((), [NodeDecl("X", CHANCE, (), (0, 1), (0.5, 0.5 + 5e-13))])
    with pytest.raises(CptRowNotNormalized):
        Maid((), [NodeDecl("X", CHANCE, (), (0, 1), (0.5, 0.5 + 1e-11))])


# -- induce -------------------------------------------------------------------------

def test_induce_full_gives_bayes_net(logistics):
    bn = induce(logistics, pure(logistics, D_A=SPACE, D_B=SPEED))
    assert bn.decisions == ()
    assert logistics.decisions == ("D_A", "D_B")


def test_induce_partial(logistics):
    m = induce(logistics, pure(logistics, D_A=SPACE))
    assert m.decisions == ("D_B",)


def test_induce_tree_killer_leaves_build_patio():
    tk = tree_killer_maid()
    m = induce(tk, pure(tk, PoisonTree="yes", TreeDoctor="no"))
    assert m.decisions == ("BuildPatio",)


def test_induce_rejects_wrong_shape(logistics):
    with pytest.raises(RuleDomainMismatch):
        induce(logistics, {"D_A": DecisionRule("D_A", ((1.0, 0.0, 0.0),))})


def test_induce_order_independent():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = random_maid(rng)
        prof = full_random_profile(m, rng)
        ds = m.decisions
        a, b = prof.restricted(ds[:1]), prof.restricted(ds[1:])
        assert induce(induce(m, a), b) == induce(m, prof)


# -- joint distribution -----------------------------------------------------------

def test_chain_factorization():
    m = Maid((), [NodeDecl("X", CHANCE, (), (0, 1), (0.3, 0.7)),
                  NodeDecl("Y", CHANCE, ("X",), (0, 1), (0.9, 0.1, 0.2, 0.8))])
    j = joint_distribution(m)
    assert j.probability({"X": 1, "Y": 0}) == pytest.approx(0.7 * 0.2, abs=1e-15)
    assert j.total() == pytest.approx(1.0, abs=1e-12)


def test_joint_requires_induced(logistics):
    with pytest.raises(UnassignedDecision):
        joint_distribution(logistics)


def test_logistics_space_space_joint(logistics):
    j = joint_distribution(induce(logistics, pure(logistics, D_A=SPACE, D_B=SPACE)))
    assert j.probability({"U_A": 9.0}) == 1.0
    assert j.probability({"U_B": 9.0}) == 1.0


def test_joint_matches_enumeration_oracle():
    rng = np.random.default_rng(11)
    for _ in range(10):
        bn = random_bayes_net(rng, n_nodes=5, max_card=3)
        oracle = brute_joint(bn)
        j = joint_distribution(bn)
        got = {vals: p for vals, p in j.outcomes}
        for vals, p in oracle.items():
            assert abs(got.get(vals, 0.0) - p) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_joint_sums_to_one(seed):
    rng = np.random.default_rng(seed)
    m = random_maid(rng)
    j = joint_distribution(induce(m, full_random_profile(m, rng)))
    assert abs(j.total() - 1.0) < 1e-9
    assert all(p >= 0 for _, p in j.outcomes)


# -- expected utility --------------------------------------------------------------

@pytest.mark.parametrize("a, b, agent, value", [
    (SPACE, SPACE, "A", 9.0), (SPEED, SPACE, "B", 3.0), (SPACE, SPEED, "B", 6.0), (SPEED, SPEED, "A", 5.0),
])
def test_logistics_expected_utility(logistics, a, b, agent, value):
    assert expected_utility(logistics, pure(logistics, D_A=a, D_B=b), agent) == value


def test_zero_utility():
    m = Maid(("A",), [NodeDecl("D", DECISION, (), (0, 1), owners=("A",)),
                      NodeDecl("U", UTILITY, ("D",), table=(0.0, 0.0), owners=("A",))])
    assert expected_utility(m, pure(m, D=1), "A") == 0.0


def test_expected_utility_errors(logistics):
    with pytest.raises(UnknownAgent):
        expected_utility(logistics, pure(logistics, D_A=SPACE, D_B=SPACE), "C")
    with pytest.raises(PartialProfile):
        expected_utility(logistics, pure(logistics, D_A=SPACE), "A")


def test_expected_utility_matches_oracle():
    rng = np.random.default_rng(5)
    for _ in range(15):
        m = random_maid(rng)
        prof = full_random_profile(m, rng)
        bn = induce(m, prof)
        for agent in m.agents:
            assert expected_utility(m, prof, agent) == pytest.approx(brute_expected_utility(bn, agent), abs=1e-12)


@pytest.mark.slow
def test_expected_utility_monte_carlo():
    rng = np.random.default_rng(8)
    for i in range(3):
        m = random_maid(rng)
        prof = full_random_profile(m, rng)
        bn = induce(m, prof)
        mean, se = sample_utility(bn, "A", 100_000, seed=i)
        assert abs(expected_utility(m, prof, "A") - mean) <= 4 * se + 1e-12


def test_constant_shift_linearity():
    rng = np.random.default_rng(21)
    for _ in range(10):
        m = random_maid(rng)
        prof = full_random_profile(m, rng)
        c = 2.5
        shifted = m.replace_nodes([
            NodeDecl(d.id, d.kind, d.parents, d.domain, tuple(v + c for v in d.table), d.owners)
            if d.kind == UTILITY else d for d in m])
        for agent in m.agents:
            n_util = len(m.utilities_of(agent))
            assert expected_utility(shifted, prof, agent) == pytest.approx(
                expected_utility(m, prof, agent) + c * n_util, abs=1e-12)


@pytest.mark.parametrize("a, b, total", [(SPACE, SPACE, 18.0), (SPEED, SPEED, 10.0)])
def test_total_utility_distribution(logistics, a, b, total):
    assert total_utility_distribution(logistics, pure(logistics, D_A=a, D_B=b)) == {total: 1.0}


def test_total_utility_without_utilities():
    m = Maid((), [NodeDecl("X", CHANCE, (), (0, 1), (0.5, 0.5))])
    assert total_utility_distribution(m, StrategyProfile()) == {0.0: 1.0}


# -- file format ------------------------------------------------------------------

def test_round_trip_is_byte_identical(logistics):
    text = dumps_maid(logistics)
    assert dumps_maid(loads_maid(text)) == text
    assert loads_maid(text) == logistics


def test_round_trip_random():
    rng = np.random.default_rng(2)
    for _ in range(10):
        m = random_maid(rng)
        assert loads_maid(dumps_maid(m)) == m


def test_canonical_field_order(logistics):
    node = maid_to_dict(logistics)["nodes"][0]
    assert list(node) == ["id", "kind", "owner", "parents", "domain"]


def test_deterministic_rule_per_row():
    tk = tree_killer_maid()
    rule = DecisionRule.deterministic(tk, "TreeDoctor", lambda pa: pa["TreeSick"])
    assert rule.table == ((1.0, 0.0), (0.0, 1.0))
    assert rule.is_deterministic
