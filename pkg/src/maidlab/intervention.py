"""Pre-strategy interventions on a targeted decision and their causal effect.

A pre-strategy inserts a chance node ``D_pre`` with parents ``Pa(D) + [Z]``
in front of the targeted decision ``D``. ``D_pre`` either names an action of
``D`` (the agent is steered onto it) or emits :data:`~maidlab.maid.PASS`
(the agent decides freely). The all-PASS rule is the null intervention and
leaves the equilibrium analysis unchanged.
"""

from __future__ import annotations

import itertools
import math
import threading
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .equilibrium import (
    DETERMINISTIC,
    NE_TOL,
    Measure,
    NashSet,
    RuleGrid,
    _joint_rules,
    _simplex_points,
    enumerate_nash,
)
from .errors import (
    GridTooLarge,
    GuidanceNotFlagged,
    IdCollision,
    InvalidNode,
    NoEquilibriumFound,
    RuleDomainMismatch,
    TargetNotDecision,
)
from .maid import (
    CHANCE,
    DECISION,
    PASS,
    DecisionRule,
    Maid,
    NodeDecl,
    StrategyProfile,
    Value,
    committed_rows,
    induce,
    joint_distribution,
    utility_total_distribution,
)

MATCH_TOL = 1e-9


@dataclass(frozen=True)
class PreStrategy:
    """Rule for ``D_pre`` over ``Pa(target) + [guidance]``; columns are ``dom(target) + [PASS]``."""

    target: str
    guidance: str
    rule: DecisionRule
    pre_node_id: str = "D_pre"

    @property
    def is_null(self) -> bool:
        return all(row[-1] == 1.0 for row in self.rule.table)


def pre_parents(maid: Maid, target: str, guidance: str) -> tuple[str, ...]:
    parents = maid.parents(target)
    return parents if guidance in parents else parents + (guidance,)


def _pre_rows(maid: Maid, target: str, guidance: str) -> list[dict[str, Value]]:
    names = pre_parents(maid, target, guidance)
    doms = [maid[p].domain for p in names]
    return [dict(zip(names, vals)) for vals in itertools.product(*doms)]


def _check_target(maid: Maid, target: str, guidance: str) -> None:
    if target not in maid or maid[target].kind != DECISION:
        raise TargetNotDecision(f"{target!r} is not a decision node")
    if guidance not in maid or not maid[guidance].guidance:
        raise GuidanceNotFlagged(f"{guidance!r} is not a flagged guidance node")


def null_pre_strategy(maid: Maid, target: str, guidance: str, pre_node_id: str = "D_pre") -> PreStrategy:
    return steering_pre_strategy(maid, target, guidance, lambda _: None, pre_node_id)


def steering_pre_strategy(maid: Maid, target: str, guidance: str, choose: Any,
                          pre_node_id: str = "D_pre") -> PreStrategy:
    """Deterministic pre-strategy.

    ``choose`` maps the observed parent values (a dict) to an action of the
    target or ``None`` for PASS; a plain action steers every row.
    """
    _check_target(maid, target, guidance)
    columns = maid[target].domain + (PASS,)
    rows = []
    for ctx in _pre_rows(maid, target, guidance):
        action = choose(ctx) if callable(choose) else choose
        pick = PASS if action is None else action
        if pick not in columns:
            raise RuleDomainMismatch(f"{pick!r} is not in dom({target})")
        rows.append(tuple(1.0 if c == pick else 0.0 for c in columns))
    return PreStrategy(target, guidance, DecisionRule(pre_node_id, tuple(rows)), pre_node_id)


def apply_pre_strategy(maid: Maid, pre: PreStrategy) -> Maid:
    """New diagram with ``D_pre`` inserted as the committing parent of the target."""
    _check_target(maid, pre.target, pre.guidance)
    if pre.pre_node_id in maid:
        raise IdCollision(f"{pre.pre_node_id!r} already exists")
    target = maid[pre.target]
    if target.commit is not None:
        raise InvalidNode(f"{pre.target!r} already carries a pre-strategy")
    parents = pre_parents(maid, pre.target, pre.guidance)
    domain = target.domain + (PASS,)
    n_rows = math.prod(len(maid[p].domain) for p in parents)
    table = pre.rule.table
    if len(table) != n_rows or any(len(r) != len(domain) for r in table):
        raise RuleDomainMismatch(
            f"pre-strategy needs {n_rows} rows of width {len(domain)} for {pre.target}")
    pre_decl = NodeDecl(pre.pre_node_id, CHANCE, parents, domain,
                        tuple(p for row in table for p in row))
    nodes = []
    for decl in maid:
        if decl.id == pre.target:
            nodes.append(pre_decl)
            nodes.append(NodeDecl(decl.id, decl.kind, decl.parents + (pre.pre_node_id,),
                                  decl.domain, decl.table, decl.owners, decl.guidance,
                                  pre.pre_node_id))
        else:
            nodes.append(decl)
    return Maid(maid.agents, nodes)


def lift_profile(intervened: Maid, profile: Mapping[str, DecisionRule]) -> StrategyProfile:
    """Extend rules written for the original diagram to the intervened one.

    Rows in which ``D_pre`` passes copy the original row; committed rows are
    pinned exactly as in the equilibrium grid.
    """
    rules = {}
    for d, rule in profile.items():
        decl = intervened[d]
        if decl.commit is None or len(rule.table) == intervened.num_rows(d):
            rules[d] = rule
            continue
        k = len(intervened[decl.commit].domain)
        if len(rule.table) * k != intervened.num_rows(d):
            raise RuleDomainMismatch(f"cannot lift rule for {d}")
        rows = []
        for r, pinned in enumerate(committed_rows(intervened, d)):
            if pinned is None:
                rows.append(rule.table[r // k])
            else:
                rows.append(tuple(1.0 if j == pinned else 0.0 for j in range(len(decl.domain))))
        rules[d] = DecisionRule(d, tuple(rows))
    return StrategyProfile(rules)


# -- outcomes -----------------------------------------------------------------

@dataclass(frozen=True)
class OutcomeSpec:
    """Desired total-utility value.

    ``task`` and ``secondary`` label utility nodes; when either is given the
    total is taken over their union, otherwise over every utility node.
    ``u_star=None`` selects the largest total attainable on the grid.
    """

    u_star: float | None = None
    task: tuple[str, ...] = ()
    secondary: tuple[str, ...] = ()

    def utilities(self, maid: Maid) -> tuple[str, ...]:
        chosen = set(self.task) | set(self.secondary)
        if not chosen:
            return maid.utilities
        unknown = chosen - set(maid.utilities)
        if unknown:
            raise InvalidNode(f"not utility nodes: {sorted(unknown)}")
        return tuple(u for u in maid.utilities if u in chosen)


def outcome_probability(maid: Maid, profile: Mapping[str, DecisionRule], utilities: Sequence[str],
                        u_star: float) -> float:
    dist = utility_total_distribution(joint_distribution(induce(maid, profile)), utilities)
    return math.fsum(p for t, p in dist.items() if abs(t - u_star) <= MATCH_TOL)


def attainable_totals(maid: Maid, utilities: Sequence[str], grid: RuleGrid = DETERMINISTIC) -> list[float]:
    """Totals reached with positive probability under at least one grid profile."""
    totals: set[float] = set()
    for combo in itertools.product(*_joint_rules(maid, maid.decisions, grid)):
        joint = joint_distribution(induce(maid, StrategyProfile(combo)))
        totals.update(t for t, p in utility_total_distribution(joint, utilities).items() if p > 0)
    return sorted(totals)


def resolve_u_star(maid: Maid, outcome: OutcomeSpec, grid: RuleGrid = DETERMINISTIC) -> float:
    if outcome.u_star is not None:
        return float(outcome.u_star)
    return attainable_totals(maid, outcome.utilities(maid), grid)[-1]


def _weighted_outcome(maid: Maid, nash: NashSet, utilities: Sequence[str], u_star: float) -> float:
    if not nash.profiles:
        raise NoEquilibriumFound("the equilibrium set is empty on this grid")
    return math.fsum(outcome_probability(maid, prof, utilities, u_star) * w
                     for prof, w in zip(nash.profiles, nash.weights))


def interventional_outcome_prob(maid: Maid, pre: PreStrategy, outcome: OutcomeSpec,
                                grid: RuleGrid = DETERMINISTIC, *, tol: float = NE_TOL,
                                measure: Measure | None = None) -> float:
    """Measure-weighted probability of hitting ``u*`` over the intervened equilibria."""
    u_star = resolve_u_star(maid, outcome, grid)
    intervened = apply_pre_strategy(maid, pre)
    nash = enumerate_nash(intervened, grid, tol, measure)
    return _weighted_outcome(intervened, nash, outcome.utilities(maid), u_star)


@dataclass(frozen=True)
class CausalEffectReport:
    p_intervened: float
    p_baseline: float
    delta: float
    induced: NashSet
    baseline: NashSet
    u_star: float
    pre: PreStrategy
    intervened_maid: Maid = field(repr=False, compare=False)
    maid: Maid = field(repr=False, compare=False)

    def summary_line(self) -> str:
        return f"delta={self.delta!r} p_I={self.p_intervened!r} p_U={self.p_baseline!r}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "delta": self.delta,
            "p_intervened": self.p_intervened,
            "p_baseline": self.p_baseline,
            "u_star": self.u_star,
            "pre_strategy": {
                "target": self.pre.target,
                "guidance": self.pre.guidance,
                "pre_node_id": self.pre.pre_node_id,
                "parents": list(self.intervened_maid.parents(self.pre.pre_node_id)),
                "domain": list(self.intervened_maid[self.pre.pre_node_id].domain),
                "rule": [list(r) for r in self.pre.rule.table],
            },
            "induced_equilibria": self.induced.to_dict(self.intervened_maid)["equilibria"],
            "baseline_equilibria": self.baseline.to_dict(self.maid)["equilibria"],
        }


class _NashCache:
    """Write-once map from (diagram digest, grid, tol, measure) to equilibria."""

    def __init__(self) -> None:
        self._data: dict[tuple, NashSet] = {}
        self._lock = threading.Lock()

    def get(self, maid: Maid, grid: RuleGrid, tol: float, measure: Measure | None) -> NashSet:
        key = (maid.digest(), grid, tol, measure)
        with self._lock:
            hit = self._data.get(key)
        if hit is not None:
            return hit
        value = enumerate_nash(maid, grid, tol, measure)
        with self._lock:
            return self._data.setdefault(key, value)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


baseline_cache = _NashCache()


def causal_effect(maid: Maid, pre: PreStrategy, outcome: OutcomeSpec, grid: RuleGrid = DETERMINISTIC,
                  *, tol: float = NE_TOL, measure: Measure | None = None) -> CausalEffectReport:
    """Change in the probability of ``U_tot = u*`` caused by the pre-strategy."""
    u_star = resolve_u_star(maid, outcome, grid)
    utilities = outcome.utilities(maid)
    baseline = baseline_cache.get(maid, grid, tol, measure)
    p_u = _weighted_outcome(maid, baseline, utilities, u_star)
    intervened = apply_pre_strategy(maid, pre)
    induced = enumerate_nash(intervened, grid, tol, measure)
    p_i = _weighted_outcome(intervened, induced, utilities, u_star)
    return CausalEffectReport(p_i, p_u, p_i - p_u, induced, baseline, u_star, pre, intervened, maid)


def enumerate_pre_strategies(maid: Maid, target: str, guidance: str, pre_grid: RuleGrid = DETERMINISTIC,
                             pre_node_id: str = "D_pre") -> list[PreStrategy]:
    """Candidate pre-strategies, null first, then the grid in row-major order."""
    _check_target(maid, target, guidance)
    n_rows = len(_pre_rows(maid, target, guidance))
    width = len(maid[target].domain) + 1
    if pre_grid.epsilon is None:
        options = [tuple(1.0 if j == i else 0.0 for j in range(width)) for i in range(width)]
    else:
        options = _simplex_points(width, pre_grid.epsilon)
    total = len(options) ** n_rows
    if total > pre_grid.cap:
        raise GridTooLarge(f"{total} pre-strategies exceed the cap of {pre_grid.cap}")
    null = null_pre_strategy(maid, target, guidance, pre_node_id)
    out = [null]
    for rows in itertools.product(options, repeat=n_rows):
        cand = PreStrategy(target, guidance, DecisionRule(pre_node_id, rows), pre_node_id)
        if cand.rule != null.rule:
            out.append(cand)
    return out


def optimize_pre_strategy(maid: Maid, target: str, guidance: str, outcome: OutcomeSpec,
                          pre_grid: RuleGrid | Iterable[PreStrategy] = DETERMINISTIC,
                          grid: RuleGrid = DETERMINISTIC, *, tol: float = NE_TOL,
                          measure: Measure | None = None,
                          pre_node_id: str = "D_pre") -> tuple[PreStrategy, CausalEffectReport]:
    """Exhaustive argmax of the causal effect; the first candidate wins ties."""
    if isinstance(pre_grid, RuleGrid):
        candidates = enumerate_pre_strategies(maid, target, guidance, pre_grid, pre_node_id)
    else:
        candidates = list(pre_grid)
        if not any(c.is_null for c in candidates):
            raise ValueError("the pre-strategy grid must contain the null pre-strategy")
    best: tuple[PreStrategy, CausalEffectReport] | None = None
    for cand in candidates:
        report = causal_effect(maid, cand, outcome, grid, tol=tol, measure=measure)
        if best is None or report.delta > best[1].delta:
            best = (cand, report)
    assert best is not None
    return best


def posterior_score(maid: Maid, profile: Mapping[str, DecisionRule], pre: PreStrategy,
                    outcome: OutcomeSpec, grid: RuleGrid = DETERMINISTIC, *,
                    tol: float = NE_TOL, measure: Measure | None = None,
                    weight: float | None = None) -> float:
    """Unnormalized posterior of a profile: outcome likelihood times its equilibrium weight.

    The weight is the profile's mass in the intervened equilibrium measure
    (zero when it is not an equilibrium) unless ``weight`` is supplied.
    """
    intervened = apply_pre_strategy(maid, pre)
    lifted = lift_profile(intervened, profile)
    u_star = resolve_u_star(maid, outcome, grid)
    likelihood = outcome_probability(intervened, lifted, outcome.utilities(maid), u_star)
    if weight is None:
        nash = enumerate_nash(intervened, grid, tol, measure)
        weight = next((w for p, w in zip(nash.profiles, nash.weights) if p == lifted), 0.0)
    return likelihood * weight


def played_actions(maid: Maid, profile: Mapping[str, DecisionRule]) -> dict[str, tuple[Value, ...]]:
    """Actions each decision takes with positive probability under the profile."""
    joint = joint_distribution(induce(maid, profile))
    out = {}
    for d in maid.decisions:
        out[d] = tuple(v for (v,), p in sorted(joint.marginal([d]).items(), key=lambda kv: str(kv[0]))
                       if p > 0)
    return out
