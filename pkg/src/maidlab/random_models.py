"""Seeded generators of small random diagrams and Markov games for
property tests and the randomized checks of the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from .maid import CHANCE, DECISION, UTILITY, Maid, NodeDecl
from .markov import MarkovGame


def random_distribution(rng: np.random.Generator, k: int) -> tuple[float, ...]:
    """Dirichlet(1) draw whose entries sum to one up to float rounding."""
    p = rng.dirichlet(np.ones(k))
    p[-1] = max(0.0, 1.0 - float(np.sum(p[:-1])))
    return tuple(float(x) for x in p)


def random_cpd(rng: np.random.Generator, n_rows: int, k: int) -> tuple[float, ...]:
    return tuple(p for _ in range(n_rows) for p in random_distribution(rng, k))


def random_bayes_net(rng: np.random.Generator, n_nodes: int | None = None, max_parents: int = 3,
                     edge_prob: float = 0.45, max_card: int = 2) -> Maid:
    """Chance-only diagram over ``X0..X{n-1}`` (declaration order is topological)."""
    n = int(rng.integers(2, 8)) if n_nodes is None else n_nodes
    nodes, cards = [], {}
    for i in range(n):
        cand = [f"X{j}" for j in range(i) if rng.random() < edge_prob]
        if len(cand) > max_parents:
            cand = sorted(rng.choice(cand, size=max_parents, replace=False).tolist(),
                          key=lambda s: int(s[1:]))
        card = cards[f"X{i}"] = int(rng.integers(2, max_card + 1))
        rows = int(np.prod([cards[p] for p in cand]))
        nodes.append(NodeDecl(f"X{i}", CHANCE, tuple(cand), tuple(range(card)), random_cpd(rng, rows, card)))
    return Maid((), nodes)


def random_maid(rng: np.random.Generator, n_decisions: int | None = None, n_chance: int | None = None,
                agents: tuple[str, ...] = ("A", "B"), max_utility: int = 4) -> Maid:
    """Small binary MAID with a root guidance node ``Z``.

    Every decision has at most one parent and every utility node two, which
    keeps exhaustive equilibrium and pre-strategy search cheap. Utility values
    are small integers so that utility totals collide and ties occur.
    """
    n_dec = int(rng.integers(2, 4)) if n_decisions is None else n_decisions
    n_ch = int(rng.integers(0, 3)) if n_chance is None else n_chance
    binary = (0, 1)
    nodes = [NodeDecl("Z", CHANCE, (), binary, random_distribution(rng, 2), guidance=True)]
    kinds = [DECISION] * n_dec + [CHANCE] * n_ch
    rng.shuffle(kinds)
    owners = [agents[i % len(agents)] for i in range(n_dec)]
    rng.shuffle(owners)
    d_i = c_i = 0
    for kind in kinds:
        earlier = [d.id for d in nodes]
        if kind == DECISION:
            parents = tuple(rng.choice(earlier, size=1).tolist()) if rng.random() < 0.5 else ()
            nodes.append(NodeDecl(f"D{d_i}", DECISION, parents, binary, owners=(owners[d_i],)))
            d_i += 1
        else:
            k = int(rng.integers(0, min(2, len(earlier)) + 1))
            parents = tuple(sorted(rng.choice(earlier, size=k, replace=False).tolist(), key=earlier.index))
            nodes.append(NodeDecl(f"C{c_i}", CHANCE, parents, binary, random_cpd(rng, 2 ** k, 2)))
            c_i += 1
    non_utility = [d.id for d in nodes]
    decisions = [d.id for d in nodes if d.kind == DECISION]
    for agent in agents:
        # one utility node per agent, always depending on some decision
        anchor = str(rng.choice(decisions))
        others = [x for x in non_utility if x != anchor]
        extra = [str(rng.choice(others))] if others and rng.random() < 0.7 else []
        parents = tuple(sorted([anchor, *extra], key=non_utility.index))
        table = tuple(float(v) for v in rng.integers(0, max_utility + 1, size=2 ** len(parents)))
        nodes.append(NodeDecl(f"U_{agent}", UTILITY, parents, table=table, owners=(agent,)))
    return Maid(agents, nodes)


def random_markov_game(rng: np.random.Generator, max_states: int = 3, max_actions: int = 2,
                       max_horizon: int = 3, n_agents: int = 2) -> MarkovGame:
    n_s = int(rng.integers(1, max_states + 1))
    acts = tuple(tuple(range(int(rng.integers(1, max_actions + 1)))) for _ in range(n_agents))
    n_j = int(np.prod([len(a) for a in acts]))
    transition = tuple(tuple(random_distribution(rng, n_s) for _ in range(n_j)) for _ in range(n_s))
    reward = tuple(tuple(float(np.round(rng.uniform(-2, 2), 3)) for _ in range(n_j)) for _ in range(n_s))
    return MarkovGame(tuple(f"p{i}" for i in range(n_agents)), tuple(f"s{i}" for i in range(n_s)), acts,
                      transition, reward, int(rng.integers(1, max_horizon + 1)), random_distribution(rng, n_s))


def random_markov_policy(rng: np.random.Generator, game: MarkovGame) -> dict[tuple[str, int], list[tuple[float, ...]]]:
    """State-conditioned mixed policy for every (agent, step)."""
    return {(agent, t): [random_distribution(rng, len(acts)) for _ in game.states]
            for t in range(game.horizon) for agent, acts in zip(game.agents, game.actions)}


def evidence_sets(nodes: list[str], max_size: int = 2) -> list[tuple[str, ...]]:
    return [c for k in range(max_size + 1) for c in itertools.combinations(nodes, k)]
