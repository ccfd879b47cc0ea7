"""Rule grids, best responses, Nash equilibria and generalized backward induction.

Every search is exhaustive over a finite grid of decision rules. Ties are
broken by grid order, so results are deterministic.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    BlockTooLarge,
    GridTooLarge,
    IncompleteContext,
    MixedOwnership,
    NoEquilibriumFound,
    NotADecision,
    PartialProfile,
)
from .graph import OWNER, classify_solvability
from .maid import (
    DECISION,
    DecisionRule,
    Maid,
    StrategyProfile,
    agent_utilities,
    committed_rows,
    profile_to_dict,
    total_utility_distribution,
)

DEFAULT_CAP = 10**7
NE_TOL = 1e-9

Measure = Callable[[Sequence[StrategyProfile]], Sequence[float]]


def uniform_measure(profiles: Sequence[StrategyProfile]) -> list[float]:
    n = len(profiles)
    return [1.0 / n] * n


@dataclass(frozen=True)
class RuleGrid:
    """Finite candidate rules per decision.

    With ``epsilon`` unset only deterministic rules are enumerated; otherwise
    every row ranges over the simplex points whose coordinates are multiples
    of ``epsilon``. ``rules`` overrides the candidates for named decisions.
    """

    epsilon: float | None = None
    cap: int = DEFAULT_CAP
    rules: Mapping[str, tuple[DecisionRule, ...]] = field(default_factory=dict)

    def __hash__(self) -> int:
        return hash((self.epsilon, self.cap, tuple(sorted(self.rules.items()))))

    def describe(self) -> str:
        return "deterministic" if self.epsilon is None else f"epsilon={self.epsilon}"


DETERMINISTIC = RuleGrid()


def _simplex_points(k: int, epsilon: float) -> list[tuple[float, ...]]:
    steps = Fraction(1) / Fraction(epsilon).limit_denominator(10**6)
    if steps.denominator != 1:
        raise ValueError(f"epsilon={epsilon} does not divide 1")
    m = int(steps)

    def compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first, *rest)

    return [tuple(c / m for c in comp) for comp in compositions(m, k)]


def _row_options(maid: Maid, d: str, grid: RuleGrid) -> list[list[tuple[float, ...]]]:
    decl = maid[d]
    k = len(decl.domain)
    if grid.epsilon is None:
        free = [tuple(1.0 if j == i else 0.0 for j in range(k)) for i in range(k)]
    else:
        free = _simplex_points(k, grid.epsilon)
    options = []
    for pinned in committed_rows(maid, d):
        if pinned is None:
            options.append(free)
        else:
            options.append([tuple(1.0 if j == pinned else 0.0 for j in range(k))])
    return options


def grid_size(maid: Maid, d: str, grid: RuleGrid = DETERMINISTIC) -> int:
    if d in grid.rules:
        return len(grid.rules[d])
    return math.prod(len(o) for o in _row_options(maid, d, grid))


def enumerate_rules(maid: Maid, d: str, grid: RuleGrid = DETERMINISTIC) -> list[DecisionRule]:
    """Candidate rules for ``d`` in grid order (first parent row varies slowest).

    Rows pinned by a committing parent admit a single option.
    """
    if d not in maid or maid[d].kind != DECISION:
        raise NotADecision(f"{d!r} is not a decision node")
    if d in grid.rules:
        return list(grid.rules[d])
    size = grid_size(maid, d, grid)
    if size > grid.cap:
        raise GridTooLarge(f"{d}: {size} rules exceed the cap of {grid.cap}")
    options = _row_options(maid, d, grid)
    return [DecisionRule(d, rows) for rows in itertools.product(*options)]


def _joint_rules(maid: Maid, decisions: Sequence[str], grid: RuleGrid,
                 error: type[Exception] = GridTooLarge) -> list[list[DecisionRule]]:
    total = math.prod(grid_size(maid, d, grid) for d in decisions)
    if total > grid.cap:
        raise error(f"{total} joint profiles over {list(decisions)} exceed the cap of {grid.cap}")
    return [enumerate_rules(maid, d, grid) for d in decisions]


def _single_owner(maid: Maid, subset: Iterable[str]) -> str:
    owners = set()
    for d in subset:
        if d not in maid or maid[d].kind != DECISION:
            raise NotADecision(f"{d!r} is not a decision node")
        owners.add(maid[d].owners[0])
    if len(owners) != 1:
        raise MixedOwnership(f"decisions {sorted(subset)} are owned by {sorted(owners)}")
    return owners.pop()


def best_response(maid: Maid, profile: Mapping[str, DecisionRule], subset: Iterable[str],
                  grid: RuleGrid = DETERMINISTIC) -> StrategyProfile:
    """Optimal rules for ``subset`` (one agent's decisions) against the rest of ``profile``.

    Returns only the rules for ``subset``; the first maximizer in grid order
    wins ties.
    """
    subset = [d for d in maid.decisions if d in set(subset)]
    agent = _single_owner(maid, subset)
    context = StrategyProfile(profile).without(subset)
    missing = [d for d in maid.decisions if d not in subset and d not in context]
    if missing:
        raise IncompleteContext(f"profile leaves {missing} unassigned")
    candidates = _joint_rules(maid, subset, grid)
    best: tuple[DecisionRule, ...] | None = None
    best_value = -math.inf
    for combo in itertools.product(*candidates):
        value = agent_utilities(maid, context.merged(combo))[agent]
        if value > best_value:
            best, best_value = combo, value
    assert best is not None
    return StrategyProfile(best)


def _agent_deviations_ok(maid: Maid, profile: StrategyProfile, agent: str, decisions: Sequence[str],
                         grid: RuleGrid, tol: float) -> bool:
    if not decisions:
        return True
    current = agent_utilities(maid, profile)[agent]
    for combo in itertools.product(*_joint_rules(maid, decisions, grid)):
        if agent_utilities(maid, profile.merged(combo))[agent] > current + tol:
            return False
    return True


def is_nash(maid: Maid, profile: Mapping[str, DecisionRule], grid: RuleGrid = DETERMINISTIC,
            tol: float = NE_TOL) -> bool:
    """No agent gains more than ``tol`` by jointly switching all of its decisions."""
    profile = StrategyProfile(profile)
    if not profile.is_full(maid):
        raise PartialProfile("is_nash needs a full profile")
    return all(_agent_deviations_ok(maid, profile, a, maid.decisions_of(a), grid, tol)
               for a in maid.agents)


@dataclass(frozen=True)
class NashSet:
    """Equilibria in grid order with a probability weight for each."""

    profiles: tuple[StrategyProfile, ...]
    weights: tuple[float, ...]
    payoffs: tuple[dict[str, float], ...] = ()

    def __len__(self) -> int:
        return len(self.profiles)

    def __iter__(self):
        return iter(self.profiles)

    def to_dict(self, maid: Maid) -> dict:
        return {
            "equilibria": [
                {
                    "weight": w,
                    "payoffs": dict(pay) if pay else {},
                    "rules": profile_to_dict(p, maid),
                }
                for p, w, pay in itertools.zip_longest(self.profiles, self.weights, self.payoffs)
            ]
        }


def make_nash_set(profiles: Sequence[StrategyProfile], payoffs: Sequence[dict[str, float]] = (),
                  measure: Measure | None = None) -> NashSet:
    if not profiles:
        return NashSet((), (), ())
    weights = list((measure or uniform_measure)(profiles))
    if len(weights) != len(profiles) or any(w < 0 for w in weights) or abs(math.fsum(weights) - 1) > 1e-9:
        raise ValueError("measure must return one nonnegative weight per equilibrium, summing to 1")
    return NashSet(tuple(profiles), tuple(weights), tuple(payoffs))


def payoff_table(maid: Maid, grid: RuleGrid = DETERMINISTIC
                 ) -> tuple[list[list[DecisionRule]], np.ndarray]:
    """Expected utility of every agent for every grid profile.

    The array has one axis per decision (declaration order) plus a final
    axis over agents.
    """
    decisions = maid.decisions
    rules = _joint_rules(maid, decisions, grid)
    shape = tuple(len(r) for r in rules)
    table = np.empty(shape + (len(maid.agents),))
    for idx in np.ndindex(*shape) if shape else [()]:
        prof = StrategyProfile(rules[k][i] for k, i in enumerate(idx))
        eu = agent_utilities(maid, prof)
        table[idx] = [eu[a] for a in maid.agents]
    return rules, table


def enumerate_nash(maid: Maid, grid: RuleGrid = DETERMINISTIC, tol: float = NE_TOL,
                   measure: Measure | None = None) -> NashSet:
    """All grid profiles from which no agent has a profitable joint deviation."""
    rules, table = payoff_table(maid, grid)
    decisions = maid.decisions
    ok = np.ones(table.shape[:-1], dtype=bool)
    for ai, agent in enumerate(maid.agents):
        axes = tuple(k for k, d in enumerate(decisions) if maid[d].owners[0] == agent)
        if not axes:
            continue
        own = table[..., ai]
        best = own.max(axis=axes, keepdims=True)
        ok &= ~(best > own + tol)
    profiles, payoffs = [], []
    for idx in np.ndindex(*ok.shape) if ok.shape else [()]:
        if ok[idx]:
            profiles.append(StrategyProfile(rules[k][i] for k, i in enumerate(idx)))
            payoffs.append({a: float(table[idx + (ai,)]) for ai, a in enumerate(maid.agents)})
    return make_nash_set(profiles, payoffs, measure)


def expected_total_utility(maid: Maid, profile: Mapping[str, DecisionRule]) -> float:
    dist = total_utility_distribution(maid, profile)
    return math.fsum(u * p for u, p in dist.items())


def _block_equilibrium(maid: Maid, profile: StrategyProfile, block: Sequence[str],
                       grid: RuleGrid, tol: float) -> StrategyProfile:
    candidates = _joint_rules(maid, block, grid, error=BlockTooLarge)
    owners: dict[str, list[str]] = {}
    for d in block:
        owners.setdefault(maid[d].owners[0], []).append(d)
    for combo in itertools.product(*candidates):
        trial = profile.merged(combo)
        if all(_agent_deviations_ok(maid, trial, a, ds, grid, tol) for a, ds in owners.items()):
            return StrategyProfile(combo)
    raise NoEquilibriumFound(f"no block equilibrium for {list(block)} on this grid")


def backward_induction(maid: Maid, grid: RuleGrid = DETERMINISTIC, *,
                       placeholders: Mapping[str, DecisionRule] | None = None,
                       tol: float = NE_TOL, utility_scope: str = OWNER,
                       trace: list[tuple[str, ...]] | None = None) -> StrategyProfile:
    """Solve the component graph in topological order, sources first.

    Undecided decisions start at ``placeholders`` (uniform rules by
    default). Placeholders should be fully mixed: a pure placeholder can give
    some information rows of a later decision zero probability, and a best
    response is then arbitrary on those rows. A singleton component is set to its owner's best response; a
    larger component is set to the first joint profile in grid order from
    which no owner gains by deviating inside the block. ``trace`` receives
    the components in the order they were fixed.
    """
    report = classify_solvability(maid, utility_scope=utility_scope)
    start = {d: DecisionRule.uniform(maid, d) for d in maid.decisions}
    if placeholders:
        start.update(placeholders)
    profile = StrategyProfile(start)
    for component in report.components.components:
        if trace is not None:
            trace.append(component)
        if len(component) == 1:
            fixed = best_response(maid, profile, component, grid)
        else:
            fixed = _block_equilibrium(maid, profile, component, grid, tol)
        profile = profile.merged(fixed)
    return profile
