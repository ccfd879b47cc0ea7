"""Multi-agent influence diagrams, equilibrium analysis, pre-strategy
interventions and tabular multi-agent learning."""

from __future__ import annotations

from .equilibrium import (
    DETERMINISTIC,
    NashSet,
    RuleGrid,
    backward_induction,
    best_response,
    enumerate_nash,
    enumerate_rules,
    is_nash,
)
from .errors import MaidlabError
from .graph import (
    classify_solvability,
    component_graph,
    d_separated,
    is_active_path,
    relevance_graph,
    s_reachable,
    to_dot,
)
from .intervention import (
    OutcomeSpec,
    PreStrategy,
    apply_pre_strategy,
    causal_effect,
    null_pre_strategy,
    optimize_pre_strategy,
    steering_pre_strategy,
)
from .maid import (
    CHANCE,
    DECISION,
    PASS,
    UTILITY,
    DecisionRule,
    Maid,
    NodeDecl,
    StrategyProfile,
    build_maid,
    expected_utility,
    joint_distribution,
    load_maid,
    save_maid,
)
from .markov import MarkovGame, Paradigm, apply_paradigm, paradigm_markov_maid, unroll
from .marl import TrainConfig, train

__version__ = "0.1.0"
