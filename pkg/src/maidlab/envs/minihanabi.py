"""Reduced two-colour Hanabi and the 5 Save / Chop convention rewards.

Hands are ordered newest first: a drawn card is inserted at index 0, so the
rightmost (highest) index holds the oldest card.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import IllegalAction, InvalidEnv
from .noise import Observation

Card = tuple[int, int]  # (colour, rank)
Action = tuple[str, int]

PLAY = "play"
DISCARD = "discard"
HINT_COLOR = "hint_color"
HINT_RANK = "hint_rank"

FIVE_SAVE = "FiveSave"
THE_CHOP = "TheChop"

ILLEGAL = "illegal"
NO_GAIN = "no_gain"


@dataclass(frozen=True)
class HanabiRules:
    colors: int = 2
    rank_counts: tuple[int, ...] = (3, 2, 1)
    hand_size: int = 3
    max_tokens: int = 3
    lives: int = 2
    players: int = 2
    discard_at_max: str = ILLEGAL

    @property
    def max_rank(self) -> int:
        return len(self.rank_counts)

    def full_deck(self) -> list[Card]:
        return [(c, r + 1) for c in range(self.colors)
                for r, n in enumerate(self.rank_counts) for _ in range(n)]

    def card_types(self) -> list[Card]:
        return [(c, r) for c in range(self.colors) for r in range(1, self.max_rank + 1)]

    def actions(self) -> list[Action]:
        return ([(PLAY, i) for i in range(self.hand_size)]
                + [(DISCARD, i) for i in range(self.hand_size)]
                + [(HINT_COLOR, c) for c in range(self.colors)]
                + [(HINT_RANK, r) for r in range(1, self.max_rank + 1)])


@dataclass
class MiniHanabiState:
    rules: HanabiRules
    deck: list[Card]
    hands: list[list[Card]]
    # per card: (colour hinted, rank hinted)
    hints: list[list[tuple[bool, bool]]]
    fireworks: list[int]
    tokens: int
    lives: int
    discards: list[Card] = field(default_factory=list)
    current: int = 0
    score: int = 0
    turns_left: int | None = None
    done: bool = False

    def copy(self) -> MiniHanabiState:
        return copy.deepcopy(self)


def new_game(rules: HanabiRules, rng: np.random.Generator) -> MiniHanabiState:
    deck = rules.full_deck()
    order = rng.permutation(len(deck))
    deck = [deck[i] for i in order]
    hands: list[list[Card]] = [[] for _ in range(rules.players)]
    for _ in range(rules.hand_size):
        for p in range(rules.players):
            hands[p].insert(0, deck.pop())
    return MiniHanabiState(
        rules=rules, deck=deck, hands=hands,
        hints=[[(False, False)] * rules.hand_size for _ in range(rules.players)],
        fireworks=[0] * rules.colors, tokens=rules.max_tokens, lives=rules.lives,
    )


def hint_target(state: MiniHanabiState) -> int:
    return (state.current + 1) % state.rules.players


def is_unhinted(flags: tuple[bool, bool]) -> bool:
    return not flags[0] and not flags[1]


def check_action(state: MiniHanabiState, action: Action) -> None:
    """Raise :class:`IllegalAction` with the reason when ``action`` is not allowed."""
    if state.done:
        raise IllegalAction("the game is over")
    kind, arg = action
    hand = state.hands[state.current]
    if kind in (PLAY, DISCARD):
        if not 0 <= arg < len(hand):
            raise IllegalAction(f"no card at index {arg}")
        if kind == DISCARD and state.tokens >= state.rules.max_tokens and state.rules.discard_at_max == ILLEGAL:
            raise IllegalAction("hint tokens are already at the maximum")
    elif kind in (HINT_COLOR, HINT_RANK):
        if state.tokens <= 0:
            raise IllegalAction("no hint tokens left")
        slot = 0 if kind == HINT_COLOR else 1
        if not any(card[slot] == arg for card in state.hands[hint_target(state)]):
            raise IllegalAction(f"teammate holds no card matching {kind}={arg}")
    else:
        raise IllegalAction(f"unknown action kind {kind!r}")


def legal_actions(state: MiniHanabiState) -> list[Action]:
    out = []
    for a in state.rules.actions():
        try:
            check_action(state, a)
        except IllegalAction:
            continue
        out.append(a)
    return out


def _draw(state: MiniHanabiState, player: int) -> bool:
    """Draw into the player's newest slot; True when this draw emptied the deck."""
    if not state.deck:
        return False
    state.hands[player].insert(0, state.deck.pop())
    state.hints[player].insert(0, (False, False))
    if not state.deck:
        # every player, the drawer included, gets one more turn
        state.turns_left = state.rules.players
        return True
    return False


def minihanabi_step(state: MiniHanabiState, action: Action) -> tuple[MiniHanabiState, float, bool]:
    """Apply one action of the current player to a copy of ``state``.

    A successful play earns +1. Losing the last life ends the game and pays
    back the score so far, so the episode total is 0.
    """
    check_action(state, action)
    s = state.copy()
    rules = s.rules
    kind, arg = action
    player = s.current
    reward = 0.0
    emptied = False
    if kind == PLAY:
        card = s.hands[player].pop(arg)
        s.hints[player].pop(arg)
        colour, rank = card
        if s.fireworks[colour] + 1 == rank:
            s.fireworks[colour] = rank
            s.score += 1
            reward = 1.0
            if rank == rules.max_rank and s.tokens < rules.max_tokens:
                s.tokens += 1
        else:
            s.discards.append(card)
            s.lives -= 1
            if s.lives == 0:
                reward = -float(s.score)
                s.score = 0
                s.done = True
        emptied = _draw(s, player)
    elif kind == DISCARD:
        card = s.hands[player].pop(arg)
        s.hints[player].pop(arg)
        s.discards.append(card)
        if s.tokens < rules.max_tokens:
            s.tokens += 1
        emptied = _draw(s, player)
    else:
        s.tokens -= 1
        target = hint_target(s)
        slot = 0 if kind == HINT_COLOR else 1
        s.hints[target] = [
            (flags[0] or (slot == 0 and card[0] == arg), flags[1] or (slot == 1 and card[1] == arg))
            for card, flags in zip(s.hands[target], s.hints[target])
        ]
    if all(f == rules.max_rank for f in s.fireworks):
        s.done = True
    if not s.done and s.turns_left is not None and not emptied:
        s.turns_left -= 1
        if s.turns_left <= 0:
            s.done = True
    s.current = (player + 1) % rules.players
    return s, reward, s.done


def card_count(state: MiniHanabiState) -> dict[Card, int]:
    """Multiset of every card across deck, hands, discards and fireworks."""
    counts: dict[Card, int] = {}
    cards = list(state.deck) + [c for h in state.hands for c in h] + list(state.discards)
    cards += [(colour, r) for colour, top in enumerate(state.fireworks) for r in range(1, top + 1)]
    for c in cards:
        counts[c] = counts.get(c, 0) + 1
    return counts


# -- convention rewards -----------------------------------------------------------

def five_save_reward(action: Action, state: MiniHanabiState, actor: int | None = None,
                     save_rank: int | None = None) -> float:
    """-1 when a teammate holds an unhinted save-rank card and the actor hints
    something that names neither that rank nor the colour of such a card."""
    actor = state.current if actor is None else actor
    save_rank = state.rules.max_rank if save_rank is None else save_rank
    colours = set()
    for p in range(state.rules.players):
        if p == actor:
            continue
        for card, flags in zip(state.hands[p], state.hints[p]):
            if card[1] == save_rank and is_unhinted(flags):
                colours.add(card[0])
    if not colours:
        return 0.0
    kind, arg = action
    if kind == HINT_RANK and arg == save_rank:
        return 0.0
    if kind == HINT_COLOR and arg in colours:
        return 0.0
    if kind in (HINT_RANK, HINT_COLOR):
        return -1.0
    return 0.0


def chop_index(flags: Sequence[tuple[bool, bool]]) -> int | None:
    """Rightmost unhinted card, or ``None`` when every card carries a hint."""
    for i in range(len(flags) - 1, -1, -1):
        if is_unhinted(flags[i]):
            return i
    return None


def chop_reward(action: Action, state: MiniHanabiState, actor: int | None = None) -> float:
    kind, arg = action
    if kind != DISCARD:
        return 0.0
    actor = state.current if actor is None else actor
    chop = chop_index(state.hints[actor])
    if chop is None:
        return -1.0
    return 0.0 if arg == chop else -2.0


def five_save_relevant(state: MiniHanabiState, actor: int | None = None) -> bool:
    actor = state.current if actor is None else actor
    rank = state.rules.max_rank
    return any(card[1] == rank and is_unhinted(flags)
               for p in range(state.rules.players) if p != actor
               for card, flags in zip(state.hands[p], state.hints[p]))


# -- observations and the training wrapper ------------------------------------------

def beliefs(state: MiniHanabiState, player: int) -> tuple[tuple[float, ...], ...]:
    """Per own card, the distribution over card types consistent with what the player sees."""
    rules = state.rules
    types = rules.card_types()
    unseen = {t: 0 for t in types}
    for c in rules.full_deck():
        unseen[c] += 1
    seen = [c for p, h in enumerate(state.hands) if p != player for c in h] + list(state.discards)
    seen += [(colour, r) for colour, top in enumerate(state.fireworks) for r in range(1, top + 1)]
    for c in seen:
        unseen[c] -= 1
    out = []
    for card, (col_known, rank_known) in zip(state.hands[player], state.hints[player]):
        w = [unseen[t] if (not col_known or t[0] == card[0]) and (not rank_known or t[1] == card[1]) else 0
             for t in types]
        total = sum(w)
        out.append(tuple(x / total for x in w) if total else tuple(1.0 / len(types) for _ in types))
    return tuple(out)


def observe(state: MiniHanabiState, player: int) -> Observation:
    """Hint flags, visible teammate cards, fireworks, tokens and lives, plus own-card beliefs."""
    mate = (player + 1) % state.rules.players
    features = (
        tuple(state.hints[player]),
        tuple(state.hands[mate]),
        tuple(state.fireworks),
        state.tokens,
        state.lives,
    )
    playable = tuple(state.fireworks[c] + 1 == r for c, r in state.rules.card_types())
    return Observation(features, beliefs(state, player), playable)


class MiniHanabi:
    """Turn-based training wrapper; the intrinsic signal follows one convention."""

    turn_based = True

    def __init__(self, rules: HanabiRules = HanabiRules(), convention: str = FIVE_SAVE):
        if convention not in (FIVE_SAVE, THE_CHOP):
            raise InvalidEnv(f"MiniHanabi has no convention {convention!r}")
        if rules.players != 2:
            raise InvalidEnv("the training wrapper supports two players")
        self.rules = rules
        self.convention = convention
        self.actions = rules.actions()
        self.n_agents = rules.players
        self.state: MiniHanabiState | None = None
        self._last_signal = [0.0] * rules.players

    @property
    def signal_range(self) -> tuple[float, float]:
        return (-2.0, 0.0)

    def reset(self, rng: np.random.Generator) -> None:
        self.state = new_game(self.rules, rng)
        self._last_signal = [0.0] * self.n_agents

    def acting(self) -> list[int]:
        return [self.state.current]

    def legal(self, agent: int) -> list[int]:
        legal = set(legal_actions(self.state))
        return [i for i, a in enumerate(self.actions) if a in legal]

    def observe(self, agent: int) -> Observation:
        return observe(self.state, agent)

    def signal(self, agent: int) -> float:
        return self._last_signal[agent]

    def step(self, actions: dict[int, int]) -> tuple[float, list[float], bool, list[bool], list[bool]]:
        actor = self.state.current
        action = self.actions[actions[actor]]
        if self.convention == FIVE_SAVE:
            r_int = five_save_reward(action, self.state, actor)
            rel = five_save_relevant(self.state, actor)
        else:
            r_int = chop_reward(action, self.state, actor)
            rel = action[0] == DISCARD
        self.state, reward, done = minihanabi_step(self.state, action)
        signals = [0.0] * self.n_agents
        signals[actor] = r_int
        self._last_signal[actor] = r_int
        relevant = [False] * self.n_agents
        relevant[actor] = rel
        compliant = [False] * self.n_agents
        compliant[actor] = rel and r_int == 0.0
        return reward, signals, done, relevant, compliant
