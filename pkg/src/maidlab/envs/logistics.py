"""The two-company logistics game as a one-step Markov game."""

from __future__ import annotations

from ..catalog import LOGISTICS_PAYOFFS, SPACE, SPEED
from ..markov import MarkovGame


def logistics_game() -> MarkovGame:
    """Single state, horizon 1, team reward equal to the sum of both payoffs."""
    actions = (SPACE, SPEED)
    reward = tuple(sum(LOGISTICS_PAYOFFS[a, b]) for a in actions for b in actions)
    return MarkovGame(
        agents=("A", "B"),
        states=("warehouse",),
        actions=(actions, actions),
        transition=(((1.0,),) * 4,),
        reward=(reward,),
        horizon=1,
        initial=(1.0,),
    )
