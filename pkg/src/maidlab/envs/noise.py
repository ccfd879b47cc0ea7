"""Observation containers and belief-noise injection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Hashable

import numpy as np


@dataclass(frozen=True)
class Observation:
    """What one agent sees.

    ``features`` is the exact discrete part. ``beliefs`` holds one
    probability vector per hidden item (e.g. each own card); ``playable``
    marks the belief entries that count as a playable card, from which the
    tabular key derives a coarse playability level per item.
    """

    features: tuple[Hashable, ...]
    beliefs: tuple[tuple[float, ...], ...] = ()
    playable: tuple[bool, ...] = ()

    def key(self) -> tuple[Hashable, ...]:
        if not self.beliefs:
            return self.features
        return self.features + tuple(playability_level(b, self.playable) for b in self.beliefs)


def playability_level(belief: tuple[float, ...], playable: tuple[bool, ...]) -> int:
    p = sum(q for q, ok in zip(belief, playable) if ok)
    if p < 0.25:
        return 0
    if p > 0.75:
        return 2
    return 1


def _perturb_rows(rows: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    noisy = rows + rng.uniform(-scale, scale, size=rows.shape)
    noisy = np.clip(noisy, 0.0, 1.0)
    sums = noisy.sum(axis=-1, keepdims=True)
    width = rows.shape[-1]
    return np.where(sums > 0, noisy / np.where(sums > 0, sums, 1.0), 1.0 / width)


def inject_noise(observation: Observation | np.ndarray, scale: float,
                 rng: np.random.Generator) -> Observation | np.ndarray:
    """Add uniform noise in ``[-scale, scale]`` to belief distributions.

    Entries are clipped to ``[0, 1]`` and each distribution renormalized; a
    row that clips to all zeros becomes uniform. Scale 0 returns the input
    unchanged and draws nothing from ``rng``. Arrays are treated as a stack
    of distributions along the last axis.
    """
    if scale < 0:
        raise ValueError("noise scale must be nonnegative")
    if scale == 0:
        return observation
    if isinstance(observation, np.ndarray):
        return _perturb_rows(observation.astype(float), scale, rng)
    if not observation.beliefs:
        return observation
    rows = _perturb_rows(np.asarray(observation.beliefs, dtype=float), scale, rng)
    return replace(observation, beliefs=tuple(tuple(float(x) for x in r) for r in rows))
