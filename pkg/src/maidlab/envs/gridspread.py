"""Cooperative navigation on a square grid.

Agents move one cell per step and the team is rewarded for covering every
landmark while avoiding shared cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..errors import InvalidEnv, WrongTeamSize
from .noise import Observation

Pos = tuple[int, int]

ACTIONS = ("up", "down", "left", "right", "stay")
MOVES: dict[str, Pos] = {"up": (0, 1), "down": (0, -1), "left": (-1, 0), "right": (1, 0), "stay": (0, 0)}

FIXED_LANDMARK = "FixedLandmark"
FARTHEST_LANDMARK = "FarthestLandmark"


@dataclass(frozen=True)
class GridSpreadState:
    agents: tuple[Pos, ...]
    landmarks: tuple[Pos, ...]
    size: int
    step: int = 0


def dist(p: Pos, q: Pos) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def gridspread_reward(state: GridSpreadState) -> float:
    cover = sum(min(dist(p, l) for p in state.agents) for l in state.landmarks)
    n = len(state.agents)
    collisions = sum(1 for i in range(n) for j in range(i + 1, n) if state.agents[i] == state.agents[j])
    return -cover - collisions


def gridspread_step(state: GridSpreadState, joint_action: Sequence[str | int]) -> tuple[GridSpreadState, float]:
    """Move every agent (clamped to the arena) and score the new positions."""
    if len(joint_action) != len(state.agents):
        raise InvalidEnv("one action per agent is required")
    moved = []
    hi = state.size - 1
    for (x, y), a in zip(state.agents, joint_action):
        name = ACTIONS[a] if isinstance(a, (int, np.integer)) else a
        dx, dy = MOVES[name]
        moved.append((min(max(x + dx, 0), hi), min(max(y + dy, 0), hi)))
    nxt = replace(state, agents=tuple(moved), step=state.step + 1)
    return nxt, gridspread_reward(nxt)


def intrinsic_fixed_landmark(state: GridSpreadState, targeted: int, landmark_index: int) -> float:
    return -dist(state.agents[targeted], state.landmarks[landmark_index])


def farthest_landmark(state: GridSpreadState, targeted: int) -> int:
    """Index of the landmark whose nearest teammate is farthest away (lowest index on ties)."""
    mates = [p for i, p in enumerate(state.agents) if i != targeted]
    if len(mates) != 2:
        raise WrongTeamSize(f"expected 2 teammates, found {len(mates)}")
    d_min = [min(dist(m, l) for m in mates) for l in state.landmarks]
    return max(range(len(d_min)), key=lambda k: (d_min[k], -k))


def intrinsic_farthest_landmark(state: GridSpreadState, targeted: int) -> float:
    return -dist(state.agents[targeted], state.landmarks[farthest_landmark(state, targeted)])


DEFAULT_LANDMARKS: tuple[Pos, ...] = ((0, 4), (4, 4), (2, 0))


class GridSpread:
    """Episodic GridSpread with random starts and fixed landmarks.

    ``intrinsic`` selects the guidance outcome: ``FixedLandmark`` (toward
    ``landmark_index``) or ``FarthestLandmark``.
    """

    turn_based = False
    actions = ACTIONS

    def __init__(self, size: int = 5, n_agents: int = 3, landmarks: Sequence[Pos] = DEFAULT_LANDMARKS,
                 horizon: int = 10, intrinsic: str = FIXED_LANDMARK, landmark_index: int = 0,
                 observe_others: bool = False):
        if size < 1 or n_agents < 1 or horizon < 1 or not landmarks:
            raise InvalidEnv("size, agents, horizon and landmarks must be positive")
        if any(not (0 <= x < size and 0 <= y < size) for x, y in landmarks):
            raise InvalidEnv("landmarks must lie inside the arena")
        if intrinsic not in (FIXED_LANDMARK, FARTHEST_LANDMARK):
            raise InvalidEnv(f"GridSpread has no intrinsic signal {intrinsic!r}")
        if intrinsic == FIXED_LANDMARK and not 0 <= landmark_index < len(landmarks):
            raise InvalidEnv("landmark index out of range")
        if intrinsic == FARTHEST_LANDMARK and n_agents != 3:
            raise WrongTeamSize("the farthest-landmark signal needs exactly 3 agents")
        self.size = size
        self.n_agents = n_agents
        self.landmarks = tuple(tuple(l) for l in landmarks)
        self.horizon = horizon
        self.intrinsic = intrinsic
        self.landmark_index = landmark_index
        self.observe_others = observe_others
        self.state: GridSpreadState | None = None

    @property
    def signal_range(self) -> tuple[float, float]:
        return (-math.hypot(self.size - 1, self.size - 1), 0.0)

    def reset(self, rng: np.random.Generator) -> None:
        cells = rng.integers(0, self.size, size=(self.n_agents, 2))
        self.state = GridSpreadState(tuple((int(x), int(y)) for x, y in cells), self.landmarks, self.size)

    def acting(self) -> list[int]:
        return list(range(self.n_agents))

    def legal(self, agent: int) -> list[int]:
        return list(range(len(ACTIONS)))

    def observe(self, agent: int) -> Observation:
        """Own cell, followed by the teammates' cells when ``observe_others`` is set."""
        own = self.state.agents[agent]
        if not self.observe_others:
            return Observation(own)
        return Observation(own + tuple(c for i, p in enumerate(self.state.agents) if i != agent for c in p))

    def signal(self, agent: int) -> float:
        if self.intrinsic == FIXED_LANDMARK:
            return intrinsic_fixed_landmark(self.state, agent, self.landmark_index)
        return intrinsic_farthest_landmark(self.state, agent)

    def step(self, actions: dict[int, int]) -> tuple[float, list[float], bool, list[bool], list[bool]]:
        """Advance one step.

        Returns the team reward, each agent's intrinsic signal, the done flag,
        and per agent whether the step was convention-relevant and compliant.
        """
        self.state, reward = gridspread_step(self.state, [actions[i] for i in range(self.n_agents)])
        signals = [self.signal(i) for i in range(self.n_agents)]
        relevant = [True] * self.n_agents
        compliant = [s == 0.0 for s in signals]
        return reward, signals, self.state.step >= self.horizon, relevant, compliant
