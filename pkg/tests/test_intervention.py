from __future__ import annotations

import math
import threading

import numpy as np
import pytest

from maidlab.catalog import SPACE, SPEED, TARGETED_INTERVENTION, paradigm_base, paradigm_maid
from maidlab.equilibrium import DETERMINISTIC, RuleGrid, enumerate_nash
from maidlab.errors import (
    GuidanceNotFlagged,
    IdCollision,
    InvalidNode,
    NoEquilibriumFound,
    RuleDomainMismatch,
    TargetNotDecision,
)
from maidlab.intervention import (
    CausalEffectReport,
    OutcomeSpec,
    PreStrategy,
    _NashCache,
    apply_pre_strategy,
    attainable_totals,
    causal_effect,
    enumerate_pre_strategies,
    interventional_outcome_prob,
    lift_profile,
    null_pre_strategy,
    optimize_pre_strategy,
    outcome_probability,
    played_actions,
    posterior_score,
    steering_pre_strategy,
)
from maidlab.maid import CHANCE, DECISION, PASS, UTILITY, DecisionRule, Maid, NodeDecl, StrategyProfile
from maidlab.random_models import random_maid

U18 = OutcomeSpec(u_star=18.0)


def outcomes(maid, nash):
    return {tuple(played_actions(maid, p)[d] for d in ("D_A", "D_B")) for p in nash}


# -- applying pre-strategies ------------------------------------------------------------

def test_apply_adds_one_node_and_edges(guided_logistics):
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPACE)
    m = apply_pre_strategy(guided_logistics, pre)
    assert set(m.order) - set(guided_logistics.order) == {"D_pre"}
    assert m.parents("D_pre") == ("Z",)
    assert m.parents("D_A") == ("D_pre",)
    assert m["D_A"].commit == "D_pre"
    assert m["D_pre"].domain == (SPACE, SPEED, PASS)
    assert set(m.edges) - set(guided_logistics.edges) == {("Z", "D_pre"), ("D_pre", "D_A")}
    # the input is untouched
    assert guided_logistics.parents("D_A") == ()
    assert "D_pre" not in guided_logistics


def test_apply_errors(guided_logistics):
    pre = null_pre_strategy(guided_logistics, "D_A", "Z")
    with pytest.raises(TargetNotDecision):
        apply_pre_strategy(guided_logistics, PreStrategy("Z", "Z", pre.rule))
    with pytest.raises(GuidanceNotFlagged):
        apply_pre_strategy(guided_logistics, PreStrategy("D_A", "D_B", pre.rule))
    with pytest.raises(IdCollision):
        apply_pre_strategy(guided_logistics, PreStrategy("D_A", "Z", DecisionRule("U_A", pre.rule.table), "U_A"))
    with pytest.raises(RuleDomainMismatch):
        apply_pre_strategy(guided_logistics, PreStrategy("D_A", "Z", DecisionRule("D_pre", ((0.5, 0.5),))))
    once = apply_pre_strategy(guided_logistics, pre)
    with pytest.raises(InvalidNode):
        apply_pre_strategy(once, PreStrategy("D_A", "Z", pre.rule, "D_pre2"))


def test_null_keeps_equilibrium_outcomes():
    base = paradigm_base(TARGETED_INTERVENTION)
    m = paradigm_maid(TARGETED_INTERVENTION)
    rows = m.num_rows("D_pre")
    assert m["D_pre"].table == tuple(x for _ in range(rows) for x in (0.0, 0.0, 1.0))
    before = enumerate_nash(base)
    after = enumerate_nash(m)
    assert len(before) == len(after)
    assert sorted(tuple(sorted(x.items())) for x in after.payoffs) == sorted(
        tuple(sorted(x.items())) for x in before.payoffs)


def test_lift_profile_copies_pass_rows(guided_logistics):
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPEED)
    m = apply_pre_strategy(guided_logistics, pre)
    rule = DecisionRule.deterministic(guided_logistics, "D_A", SPACE)
    lifted = lift_profile(m, {"D_A": rule})
    # rows follow D_pre in (space, speed, pass) order
    assert lifted["D_A"].table == ((1.0, 0.0), (0.0, 1.0), (1.0, 0.0))


def test_steering_rejects_foreign_action(guided_logistics):
    with pytest.raises(RuleDomainMismatch):
        steering_pre_strategy(guided_logistics, "D_A", "Z", "fly")


# -- outcome probabilities ---------------------------------------------------------------

def test_space_steering_gives_certain_18(guided_logistics):
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPACE)
    assert interventional_outcome_prob(guided_logistics, pre, U18) == 1.0


def test_null_gives_half(guided_logistics):
    pre = null_pre_strategy(guided_logistics, "D_A", "Z")
    assert interventional_outcome_prob(guided_logistics, pre, U18) == 0.5


def test_unattainable_target_has_zero_probability(guided_logistics):
    pre = null_pre_strategy(guided_logistics, "D_A", "Z")
    assert interventional_outcome_prob(guided_logistics, pre, OutcomeSpec(u_star=17.0)) == 0.0


def test_attainable_totals(guided_logistics):
    assert attainable_totals(guided_logistics, guided_logistics.utilities) == [9.0, 10.0, 18.0]


def test_default_u_star_is_max(guided_logistics):
    pre = null_pre_strategy(guided_logistics, "D_A", "Z")
    assert causal_effect(guided_logistics, pre, OutcomeSpec()).u_star == 18.0


def test_outcome_decomposition(guided_logistics):
    only_a = OutcomeSpec(u_star=9.0, task=("U_A",))
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPACE)
    assert interventional_outcome_prob(guided_logistics, pre, only_a) == 1.0
    with pytest.raises(InvalidNode):
        OutcomeSpec(task=("D_A",)).utilities(guided_logistics)


def test_empty_equilibrium_set_raises():
    # matching pennies has no pure equilibrium
    m = Maid(("A", "B"), [
        NodeDecl("Z", CHANCE, (), (0,), (1.0,), guidance=True),
        NodeDecl("D1", DECISION, (), (0, 1), owners=("A",)),
        NodeDecl("D2", DECISION, (), (0, 1), owners=("B",)),
        NodeDecl("U1", UTILITY, ("D1", "D2"), table=(1.0, -1.0, -1.0, 1.0), owners=("A",)),
        NodeDecl("U2", UTILITY, ("D1", "D2"), table=(-1.0, 1.0, 1.0, -1.0), owners=("B",)),
    ])
    with pytest.raises(NoEquilibriumFound):
        causal_effect(m, null_pre_strategy(m, "D1", "Z"), OutcomeSpec(u_star=0.0))


# -- causal effect ---------------------------------------------------------------------------

def test_space_effect(guided_logistics):
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPACE)
    r = causal_effect(guided_logistics, pre, U18)
    assert (r.p_intervened, r.p_baseline, r.delta) == (1.0, 0.5, 0.5)
    assert outcomes(r.intervened_maid, r.induced) == {((SPACE,), (SPACE,))}


def test_speed_effect(guided_logistics):
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPEED)
    r = causal_effect(guided_logistics, pre, U18)
    assert r.delta == -0.5
    assert outcomes(r.intervened_maid, r.induced) == {((SPEED,), (SPEED,))}


def test_null_effect_is_exactly_zero(guided_logistics):
    r = causal_effect(guided_logistics, null_pre_strategy(guided_logistics, "D_A", "Z"), U18)
    assert r.delta == 0.0


def test_report_arithmetic_and_decomposition():
    rng = np.random.default_rng(17)
    for _ in range(10):
        m = random_maid(rng)
        target = m.decisions[0]
        for pre in enumerate_pre_strategies(m, target, "Z")[:6]:
            r = causal_effect(m, pre, OutcomeSpec())
            assert r.delta == r.p_intervened - r.p_baseline
            assert 0.0 <= r.p_intervened <= 1.0 and 0.0 <= r.p_baseline <= 1.0
            recomputed = math.fsum(
                w * outcome_probability(r.intervened_maid, p, m.utilities, r.u_star)
                for p, w in zip(r.induced.profiles, r.induced.weights))
            assert abs(recomputed - r.p_intervened) <= 1e-12


def test_null_neutrality_on_random_maids():
    rng = np.random.default_rng(19)
    for _ in range(20):
        m = random_maid(rng)
        for target in m.decisions:
            r = causal_effect(m, null_pre_strategy(m, target, "Z"), OutcomeSpec())
            assert r.delta == 0.0


def test_stochastic_pre_strategy(guided_logistics):
    pre = PreStrategy("D_A", "Z", DecisionRule("D_pre", ((0.5, 0.0, 0.5),)))
    r = causal_effect(guided_logistics, pre, U18)
    # half the time A is committed to space and is free otherwise
    assert -0.5 <= r.delta <= 0.5
    assert r.delta == r.p_intervened - r.p_baseline


# -- optimisation ---------------------------------------------------------------------------------

def test_optimizer_on_logistics(guided_logistics):
    pre, r = optimize_pre_strategy(guided_logistics, "D_A", "Z", U18)
    assert abs(r.delta - 0.5) <= 1e-9
    assert pre.rule.table == ((1.0, 0.0, 0.0),)
    assert outcomes(r.intervened_maid, r.induced) == {((SPACE,), (SPACE,))}


def test_optimizer_with_only_null(guided_logistics):
    null = null_pre_strategy(guided_logistics, "D_A", "Z")
    pre, r = optimize_pre_strategy(guided_logistics, "D_A", "Z", U18, pre_grid=[null])
    assert pre == null and r.delta == 0.0


def test_optimizer_requires_null(guided_logistics):
    with pytest.raises(ValueError):
        optimize_pre_strategy(guided_logistics, "D_A", "Z", U18,
                              pre_grid=[steering_pre_strategy(guided_logistics, "D_A", "Z", SPACE)])


def test_unique_equilibrium_gives_zero_best_delta():
    m = Maid(("A", "B"), [
        NodeDecl("Z", CHANCE, (), (0,), (1.0,), guidance=True),
        NodeDecl("D1", DECISION, (), (0, 1), owners=("A",)),
        NodeDecl("D2", DECISION, (), (0, 1), owners=("B",)),
        NodeDecl("U1", UTILITY, ("D1",), table=(0.0, 1.0), owners=("A",)),
        NodeDecl("U2", UTILITY, ("D2",), table=(0.0, 1.0), owners=("B",)),
    ])
    assert len(enumerate_nash(m)) == 1
    _, r = optimize_pre_strategy(m, "D1", "Z", OutcomeSpec())
    assert r.delta == 0.0


def test_pre_grid_starts_with_null(guided_logistics):
    grid = enumerate_pre_strategies(guided_logistics, "D_A", "Z")
    assert grid[0].is_null and len(grid) == 3
    mixed = enumerate_pre_strategies(guided_logistics, "D_A", "Z", RuleGrid(epsilon=0.5))
    assert mixed[0].is_null and len(mixed) == 6


def test_optimizer_lower_bound_on_random_maids():
    rng = np.random.default_rng(23)
    for _ in range(10):
        m = random_maid(rng)
        _, r = optimize_pre_strategy(m, m.decisions[-1], "Z", OutcomeSpec())
        assert r.delta >= 0.0


# -- posterior score -------------------------------------------------------------------------------

def test_posterior_positive_for_steered_equilibrium(guided_logistics):
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPACE)
    prof = StrategyProfile([DecisionRule.deterministic(guided_logistics, "D_A", SPACE),
                            DecisionRule.deterministic(guided_logistics, "D_B", SPACE)])
    assert posterior_score(guided_logistics, prof, pre, U18) > 0


def test_posterior_zero_when_outcome_impossible(guided_logistics):
    pre = steering_pre_strategy(guided_logistics, "D_A", "Z", SPACE)
    prof = StrategyProfile([DecisionRule.deterministic(guided_logistics, "D_A", SPEED),
                            DecisionRule.deterministic(guided_logistics, "D_B", SPEED)])
    assert posterior_score(guided_logistics, prof, pre, U18, weight=1.0) == 0.0


def test_posterior_proportional_to_weight(guided_logistics):
    pre = null_pre_strategy(guided_logistics, "D_A", "Z")
    prof = StrategyProfile([DecisionRule.deterministic(guided_logistics, "D_A", SPACE),
                            DecisionRule.deterministic(guided_logistics, "D_B", SPACE)])
    hi = posterior_score(guided_logistics, prof, pre, U18, weight=0.7)
    lo = posterior_score(guided_logistics, prof, pre, U18, weight=0.3)
    assert hi / lo == pytest.approx(7 / 3, rel=1e-12)


# -- cache ---------------------------------------------------------------------------------------

def test_cache_is_write_once_under_threads(guided_logistics):
    cache = _NashCache()
    results = []

    def work():
        results.append(cache.get(guided_logistics, DETERMINISTIC, 1e-9, None))

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r is results[0] for r in results)


def test_report_serializes(guided_logistics):
    _, r = optimize_pre_strategy(guided_logistics, "D_A", "Z", U18)
    assert isinstance(r, CausalEffectReport)
    d = r.to_dict()
    assert d["delta"] == 0.5 and len(d["baseline_equilibria"]) == 2
    assert r.summary_line() == "delta=0.5 p_I=1.0 p_U=0.5"
