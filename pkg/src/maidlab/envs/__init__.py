"""Desk-scale environments, intrinsic signals and observation noise."""

from .gridspread import (
    FARTHEST_LANDMARK,
    FIXED_LANDMARK,
    GridSpread,
    GridSpreadState,
    gridspread_reward,
    gridspread_step,
    intrinsic_farthest_landmark,
    intrinsic_fixed_landmark,
)
from .logistics import logistics_game
from .minihanabi import (
    FIVE_SAVE,
    THE_CHOP,
    HanabiRules,
    MiniHanabi,
    MiniHanabiState,
    chop_reward,
    five_save_reward,
    minihanabi_step,
    new_game,
)
from .noise import Observation, inject_noise

__all__ = [
    "FARTHEST_LANDMARK", "FIXED_LANDMARK", "FIVE_SAVE", "THE_CHOP",
    "GridSpread", "GridSpreadState", "HanabiRules", "MiniHanabi", "MiniHanabiState", "Observation",
    "chop_reward", "five_save_reward", "gridspread_reward", "gridspread_step", "inject_noise",
    "intrinsic_farthest_landmark", "intrinsic_fixed_landmark", "logistics_game", "minihanabi_step",
    "new_game",
]
