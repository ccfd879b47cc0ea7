"""Finite-horizon team-reward Markov games and their influence-diagram unrolling.

Unrolled node names follow one pattern: states ``S^t``, decisions
``D_<agent>^t``, team rewards ``U^t`` and, for sequential moves, the
information node ``I^t``. Paradigm templates add ``Z^t``, ``D_pre^t`` and
individual utilities ``U_<agent>^t``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from .catalog import GLOBAL_INTERVENTION, PARADIGMS, SELF_ORGANIZATION, TARGETED_INTERVENTION
from .errors import InvalidNode, UnknownAgent, UnknownParadigm, UnrollTooLarge
from .maid import CHANCE, DECISION, ROW_TOL, UTILITY, Maid, NodeDecl, Value

UNROLL_CAP = 10**6


@dataclass(frozen=True)
class MarkovGame:
    """Team-reward Markov game with horizon ``horizon``.

    ``transition[s][j]`` is the next-state distribution and ``reward[s][j]``
    the team reward for state index ``s`` and joint-action index ``j``;
    joint actions enumerate the product of the agents' action sets with the
    first agent varying slowest.
    """

    agents: tuple[str, ...]
    states: tuple[Value, ...]
    actions: tuple[tuple[Value, ...], ...]
    transition: tuple[tuple[tuple[float, ...], ...], ...]
    reward: tuple[tuple[float, ...], ...]
    horizon: int
    initial: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.agents or not self.states or any(not a for a in self.actions):
            raise InvalidNode("agents, states and action sets must be nonempty")
        if len(self.actions) != len(self.agents):
            raise InvalidNode("one action set per agent is required")
        if self.horizon < 1:
            raise InvalidNode("horizon must be at least 1")
        n_s, n_j = len(self.states), self.num_joint_actions
        _check_dist(self.initial, n_s, "initial distribution")
        if len(self.transition) != n_s or len(self.reward) != n_s:
            raise InvalidNode("transition and reward need one block per state")
        for s in range(n_s):
            if len(self.transition[s]) != n_j or len(self.reward[s]) != n_j:
                raise InvalidNode("transition and reward need one row per joint action")
            for j in range(n_j):
                _check_dist(self.transition[s][j], n_s, f"transition row ({s}, {j})")
                if not math.isfinite(self.reward[s][j]):
                    raise InvalidNode("rewards must be finite")

    @property
    def num_joint_actions(self) -> int:
        return math.prod(len(a) for a in self.actions)

    def joint_actions(self) -> list[tuple[Value, ...]]:
        return list(itertools.product(*self.actions))

    def to_dict(self) -> dict[str, Any]:
        return {
            "agents": list(self.agents),
            "states": list(self.states),
            "actions": [list(a) for a in self.actions],
            "horizon": self.horizon,
            "initial": list(self.initial),
            "transition": [p for block in self.transition for row in block for p in row],
            "reward": [r for block in self.reward for r in block],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> MarkovGame:
        states = tuple(data["states"])
        actions = tuple(tuple(a) for a in data["actions"])
        n_s, n_j = len(states), math.prod(len(a) for a in actions)
        flat_t = list(data["transition"])
        flat_r = list(data["reward"])
        if len(flat_t) != n_s * n_j * n_s or len(flat_r) != n_s * n_j:
            raise InvalidNode("transition/reward tables have the wrong length")
        transition = tuple(
            tuple(tuple(float(x) for x in flat_t[(s * n_j + j) * n_s:(s * n_j + j + 1) * n_s])
                  for j in range(n_j))
            for s in range(n_s))
        reward = tuple(tuple(float(x) for x in flat_r[s * n_j:(s + 1) * n_j]) for s in range(n_s))
        return cls(tuple(data["agents"]), states, actions, transition, reward,
                   int(data["horizon"]), tuple(float(x) for x in data["initial"]))


def _check_dist(row: Sequence[float], n: int, what: str) -> None:
    if len(row) != n or any(not (0.0 <= p <= 1.0) for p in row) or abs(math.fsum(row) - 1.0) > ROW_TOL:
        raise InvalidNode(f"{what} is not a distribution over {n} outcomes")


def state_node(t: int) -> str:
    return f"S^{t}"


def decision_node(agent: str, t: int) -> str:
    return f"D_{agent}^{t}"


def reward_node(t: int) -> str:
    return f"U^{t}"


def unroll(game: MarkovGame, *, sequential: bool = False, cap: int = UNROLL_CAP) -> Maid:
    """Time-expanded diagram whose team-reward nodes are shared by every agent.

    With ``sequential`` the first agent moves first and every later agent
    observes its action through ``I^t``.
    """
    n_j = game.num_joint_actions
    outcomes = len(game.states) ** (game.horizon + 1) * n_j ** game.horizon
    if outcomes > cap:
        raise UnrollTooLarge(f"{outcomes} joint outcomes exceed the cap of {cap}")
    nodes = [NodeDecl(state_node(0), CHANCE, (), game.states, game.initial)]
    for t in range(game.horizon):
        s = state_node(t)
        decisions = [decision_node(a, t) for a in game.agents]
        for k, (agent, acts) in enumerate(zip(game.agents, game.actions)):
            parents: tuple[str, ...] = (s,)
            if sequential and k > 0:
                parents += (f"I^{t}",)
            nodes.append(NodeDecl(decisions[k], DECISION, parents, acts, owners=(agent,)))
            if sequential and k == 0:
                m = len(acts)
                ident = tuple(1.0 if i == j else 0.0 for i in range(m) for j in range(m))
                nodes.append(NodeDecl(f"I^{t}", CHANCE, (decisions[0],), acts, ident))
        nodes.append(NodeDecl(reward_node(t), UTILITY, (s, *decisions),
                              table=tuple(r for block in game.reward for r in block),
                              owners=game.agents))
        nodes.append(NodeDecl(state_node(t + 1), CHANCE, (s, *decisions), game.states,
                              tuple(p for block in game.transition for row in block for p in row)))
    return Maid(game.agents, nodes)


def expected_return(game: MarkovGame, policy: Mapping[tuple[str, int], Sequence[Sequence[float]]]) -> float:
    """Expected sum of team rewards by enumerating every trajectory.

    ``policy[(agent, t)][s]`` is the agent's action distribution in state ``s``
    (state-only observation, simultaneous moves).
    """
    joint = game.joint_actions()
    idx = [{a: i for i, a in enumerate(acts)} for acts in game.actions]
    total = []
    for s_seq in itertools.product(range(len(game.states)), repeat=game.horizon + 1):
        for j_seq in itertools.product(range(len(joint)), repeat=game.horizon):
            p = game.initial[s_seq[0]]
            ret = 0.0
            for t in range(game.horizon):
                s, j = s_seq[t], j_seq[t]
                for k, agent in enumerate(game.agents):
                    p *= policy[(agent, t)][s][idx[k][joint[j][k]]]
                p *= game.transition[s][j][s_seq[t + 1]]
                ret += game.reward[s][j]
            if p > 0:
                total.append(p * ret)
    return math.fsum(total)


# -- interaction paradigms --------------------------------------------------------

@dataclass(frozen=True)
class Paradigm:
    kind: str
    targeted: str | None = None
    guidance: str = "desired"

    def __post_init__(self) -> None:
        if self.kind not in PARADIGMS:
            raise UnknownParadigm(f"unknown paradigm {self.kind!r}")


IndividualUtility = Callable[[str, Mapping[str, Value]], float]


def _horizon(maid: Maid) -> int:
    t = 0
    while reward_node(t) in maid:
        t += 1
    if t == 0:
        raise InvalidNode("diagram has no unrolled reward nodes")
    return t


def apply_paradigm(maid: Maid, paradigm: Paradigm,
                   individual_utility: IndividualUtility | None = None) -> Maid:
    """Add guidance nodes and per-agent utilities for an interaction paradigm.

    The team-reward nodes keep their tables but are no longer owned by any
    agent; each agent is instead paid through ``U_<agent>^t`` whose parents
    follow the paradigm's wiring. ``individual_utility(agent, parent_values)``
    fills those tables (zero by default). Existing tables are never changed.
    """
    if not isinstance(paradigm, Paradigm):
        raise UnknownParadigm(f"unknown paradigm {paradigm!r}")
    agents = maid.agents
    target = paradigm.targeted or agents[0]
    if target not in agents:
        raise UnknownAgent(target)
    others = [a for a in agents if a != target]
    fill = individual_utility or (lambda agent, values: 0.0)

    def utility(agent: str, t: int, parents: Sequence[str]) -> NodeDecl:
        rows = itertools.product(*(nodes_by_id[p].domain for p in parents))
        table = tuple(float(fill(agent, dict(zip(parents, r)))) for r in rows)
        return NodeDecl(f"U_{agent}^{t}", UTILITY, tuple(parents), table=table, owners=(agent,))

    nodes_by_id = {d.id: d for d in maid}
    added: list[NodeDecl] = []
    horizon = _horizon(maid)
    for t in range(horizon):
        d = {a: decision_node(a, t) for a in agents}
        z = f"Z^{t}"
        if paradigm.kind == SELF_ORGANIZATION:
            zp = tuple(d[o] for o in others)
            zdom = tuple(itertools.product(*(nodes_by_id[p].domain for p in zp)))
            if len(zp) == 1:
                zdom = tuple(v[0] for v in zdom)
            ident = tuple(1.0 if i == j else 0.0 for i in range(len(zdom)) for j in range(len(zdom)))
            zdecl = NodeDecl(z, CHANCE, zp, zdom, ident, guidance=True)
            nodes_by_id[z] = zdecl
            added.append(zdecl)
            added.append(utility(target, t, (d[target], z)))
            added += [utility(o, t, (d[o], d[target])) for o in others]
        else:
            zdecl = NodeDecl(z, CHANCE, (), (paradigm.guidance,), (1.0,), guidance=True)
            nodes_by_id[z] = zdecl
            added.append(zdecl)
            if paradigm.kind == GLOBAL_INTERVENTION:
                added += [utility(a, t, (d[a], z)) for a in agents]
            else:
                added.append(utility(target, t, (d[target], z)))
                added += [utility(o, t, (d[o], d[target])) for o in others]

    new_nodes = []
    for decl in maid:
        if decl.kind == UTILITY and decl.id.startswith("U^"):
            decl = NodeDecl(decl.id, UTILITY, decl.parents, table=decl.table, owners=())
        elif paradigm.kind == GLOBAL_INTERVENTION and decl.kind == DECISION:
            t = decl.id.rsplit("^", 1)[1]
            decl = NodeDecl(decl.id, DECISION, decl.parents + (f"Z^{t}",), decl.domain,
                            owners=decl.owners)
        new_nodes.append(decl)
    result = Maid(agents, new_nodes + added)
    if paradigm.kind == TARGETED_INTERVENTION:
        from .intervention import apply_pre_strategy, null_pre_strategy

        for t in range(horizon):
            result = apply_pre_strategy(
                result, null_pre_strategy(result, decision_node(target, t), f"Z^{t}", f"D_pre^{t}"))
    return result


def paradigm_markov_maid(kind: str, *, sequential: bool = False, horizon: int = 1,
                         game: MarkovGame | None = None) -> Maid:
    """Markov-game paradigm diagram for agents ``h`` (targeted) and ``a``.

    In the sequential form ``a`` moves first and ``h`` observes it.
    """
    game = game or two_state_game(horizon)
    if sequential:
        game = MarkovGame(tuple(reversed(game.agents)), game.states, tuple(reversed(game.actions)),
                          _swap_joint(game.transition, game.actions), _swap_joint(game.reward, game.actions),
                          game.horizon, game.initial)
    return apply_paradigm(unroll(game, sequential=sequential), Paradigm(kind, targeted="h"))


def _swap_joint(blocks, actions):
    n0, n1 = len(actions[0]), len(actions[1])
    return tuple(tuple(block[x * n1 + y] for y in range(n1) for x in range(n0)) for block in blocks)


def two_state_game(horizon: int = 1) -> MarkovGame:
    """Small coordination game: matching actions pays off and moves to the good state."""
    states = ("low", "high")
    acts = (0, 1)
    transition, reward = [], []
    for s in range(2):
        t_rows, r_rows = [], []
        for x, y in itertools.product(acts, acts):
            match = x == y
            t_rows.append((0.2, 0.8) if match else (0.9, 0.1))
            r_rows.append((2.0 if x == 1 else 1.0) * (1.5 if s == 1 else 1.0) if match else 0.0)
        transition.append(tuple(t_rows))
        reward.append(tuple(r_rows))
    return MarkovGame(("h", "a"), states, (acts, acts), tuple(transition), tuple(reward),
                      horizon, (0.5, 0.5))
