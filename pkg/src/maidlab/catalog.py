"""Ready-made diagrams: the logistics game, the tree-killer story and the
one-shot interaction-paradigm templates for two agents ``h`` and ``a``."""

from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence

from .maid import CHANCE, DECISION, UTILITY, Maid, NodeDecl

SPACE = "space"
SPEED = "speed"

# (A's action, B's action) -> (A's payoff, B's payoff)
LOGISTICS_PAYOFFS = {
    (SPACE, SPACE): (9.0, 9.0),
    (SPACE, SPEED): (3.0, 6.0),
    (SPEED, SPACE): (6.0, 3.0),
    (SPEED, SPEED): (5.0, 5.0),
}

SELF_ORGANIZATION = "self_organization"
GLOBAL_INTERVENTION = "global_intervention"
TARGETED_INTERVENTION = "targeted_intervention"
PARADIGMS = (SELF_ORGANIZATION, GLOBAL_INTERVENTION, TARGETED_INTERVENTION)


def utility_table(domains: Sequence[Sequence], fn: Callable[..., float]) -> tuple[float, ...]:
    """Row-major utility table of ``fn`` over the product of parent domains."""
    return tuple(float(fn(*vals)) for vals in itertools.product(*domains))


def logistics_maid(with_guidance: bool = False) -> Maid:
    """Two companies choosing between space and speed.

    With ``with_guidance`` a constant guidance signal ``Z`` is added so that
    a pre-strategy can be attached to ``D_A``.
    """
    actions = (SPACE, SPEED)
    nodes = []
    if with_guidance:
        nodes.append(NodeDecl("Z", CHANCE, (), ("go",), (1.0,), guidance=True))
    nodes += [
        NodeDecl("D_A", DECISION, (), actions, owners=("A",)),
        NodeDecl("D_B", DECISION, (), actions, owners=("B",)),
        NodeDecl("U_A", UTILITY, ("D_A", "D_B"),
                 table=utility_table([actions, actions], lambda a, b: LOGISTICS_PAYOFFS[a, b][0]),
                 owners=("A",)),
        NodeDecl("U_B", UTILITY, ("D_A", "D_B"),
                 table=utility_table([actions, actions], lambda a, b: LOGISTICS_PAYOFFS[a, b][1]),
                 owners=("B",)),
    ]
    return Maid(("A", "B"), nodes)


def tree_killer_maid() -> Maid:
    """Alice may poison a tree blocking her view, Bob may call a tree doctor,
    and Alice later decides whether to build a patio."""
    yn = ("no", "yes")
    nodes = [
        NodeDecl("PoisonTree", DECISION, (), yn, owners=("Alice",)),
        NodeDecl("TreeSick", CHANCE, ("PoisonTree",), yn, (0.9, 0.1, 0.2, 0.8)),
        NodeDecl("TreeDoctor", DECISION, ("TreeSick",), yn, owners=("Bob",)),
        # rows: (sick, doctor) in (no,no), (no,yes), (yes,no), (yes,yes)
        NodeDecl("TreeDead", CHANCE, ("TreeSick", "TreeDoctor"), yn,
                 (0.95, 0.05, 0.97, 0.03, 0.2, 0.8, 0.7, 0.3)),
        NodeDecl("BuildPatio", DECISION, ("TreeDoctor", "PoisonTree"), yn, owners=("Alice",)),
        NodeDecl("Effort", UTILITY, ("PoisonTree",),
                 table=utility_table([yn], lambda p: -2.0 if p == "yes" else 0.0), owners=("Alice",)),
        NodeDecl("View", UTILITY, ("TreeDead", "BuildPatio"),
                 table=utility_table([yn, yn], lambda dead, patio: (
                     0.0 if patio == "no" else (10.0 if dead == "yes" else -3.0))),
                 owners=("Alice",)),
        NodeDecl("Cost", UTILITY, ("TreeDoctor",),
                 table=utility_table([yn], lambda d: -3.0 if d == "yes" else 0.0), owners=("Bob",)),
        NodeDecl("Tree", UTILITY, ("TreeDead",),
                 table=utility_table([yn], lambda dead: 0.0 if dead == "yes" else 8.0), owners=("Bob",)),
    ]
    return Maid(("Alice", "Bob"), nodes)


# -- one-shot paradigm templates ---------------------------------------------------

BIN = (0, 1)


def _copy_cpd(noise: float = 0.1) -> tuple[float, ...]:
    """Binary child that copies its binary parent with the given flip rate."""
    return (1 - noise, noise, noise, 1 - noise)


def _coordination(x: int, y: int) -> float:
    return 2.0 if x == y == 1 else (1.0 if x == y else 0.0)


def paradigm_maid(paradigm: str, sequential: bool = False) -> Maid:
    """Two-agent one-shot diagram for an interaction paradigm.

    The targeted agent is ``h``. With ``sequential`` agent ``a`` moves first
    and ``h`` observes it through the information node ``I``. The targeted
    template carries the null pre-strategy; swap it with
    :func:`maidlab.intervention.apply_pre_strategy` on :func:`paradigm_base`.
    """
    from .intervention import apply_pre_strategy, null_pre_strategy

    base = paradigm_base(paradigm, sequential)
    if paradigm != TARGETED_INTERVENTION:
        return base
    return apply_pre_strategy(base, null_pre_strategy(base, "D_h", "Z"))


def paradigm_base(paradigm: str, sequential: bool = False) -> Maid:
    from .errors import UnknownParadigm

    info = [NodeDecl("I", CHANCE, ("D_a",), BIN, _copy_cpd(0.0))] if sequential else []
    h_info = ("I",) if sequential else ()
    if paradigm == SELF_ORGANIZATION:
        nodes = [
            NodeDecl("D_h", DECISION, h_info, BIN, owners=("h",)),
            NodeDecl("D_a", DECISION, (), BIN, owners=("a",)),
            *info,
            NodeDecl("Z", CHANCE, ("D_a",), BIN, _copy_cpd(), guidance=True),
            NodeDecl("U_h", UTILITY, ("D_h", "Z"), table=utility_table([BIN, BIN], _coordination),
                     owners=("h",)),
            NodeDecl("U_a", UTILITY, ("D_a", "D_h"), table=utility_table([BIN, BIN], _coordination),
                     owners=("a",)),
        ]
    elif paradigm == GLOBAL_INTERVENTION:
        nodes = [
            NodeDecl("Z", CHANCE, (), BIN, (0.5, 0.5), guidance=True),
            NodeDecl("D_h", DECISION, ("Z",) + h_info, BIN, owners=("h",)),
            NodeDecl("D_a", DECISION, ("Z",), BIN, owners=("a",)),
            *info,
            NodeDecl("U_h", UTILITY, ("D_h", "Z"), table=utility_table([BIN, BIN], _coordination),
                     owners=("h",)),
            NodeDecl("U_a", UTILITY, ("D_a", "Z"), table=utility_table([BIN, BIN], _coordination),
                     owners=("a",)),
        ]
    elif paradigm == TARGETED_INTERVENTION:
        nodes = [
            NodeDecl("Z", CHANCE, (), BIN, (0.5, 0.5), guidance=True),
            NodeDecl("D_h", DECISION, h_info, BIN, owners=("h",)),
            NodeDecl("D_a", DECISION, (), BIN, owners=("a",)),
            *info,
            NodeDecl("U_h", UTILITY, ("D_h",), table=(0.0, 1.0), owners=("h",)),
            NodeDecl("U_a", UTILITY, ("D_a", "D_h"), table=utility_table([BIN, BIN], _coordination),
                     owners=("a",)),
        ]
    else:
        raise UnknownParadigm(paradigm)
    return Maid(("h", "a"), nodes)
