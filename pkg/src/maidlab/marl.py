"""Tabular independent Q-learning and value decomposition with four
interaction-paradigm variants.

* ``Base``: every agent learns from the team reward.
* ``IntrinsicReward``: the targeted agent learns from the team reward plus
  ``ratio`` times its intrinsic signal.
* ``GlobalIntervention``: every agent receives the composite reward built
  from its own intrinsic signal.
* ``PSI``: as ``IntrinsicReward``, and the targeted agent's observation key
  is extended with the bucketed intrinsic signal.
"""

from __future__ import annotations

import csv
import io
import math
import random
from collections.abc import Hashable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from .envs.gridspread import DEFAULT_LANDMARKS, FIXED_LANDMARK, GridSpread
from .envs.minihanabi import FIVE_SAVE, HanabiRules, MiniHanabi
from .envs.noise import inject_noise
from .errors import InvalidConfig, InvalidEnv, SeedCollision

IQL = "IQL"
VDN = "VDN"
ALGORITHMS = (IQL, VDN)

BASE = "Base"
INTRINSIC_REWARD = "IntrinsicReward"
GLOBAL = "GlobalIntervention"
PSI = "PSI"
VARIANTS = (BASE, INTRINSIC_REWARD, GLOBAL, PSI)

NOISE_REGIMES = ("none", "train-only", "test-only", "both")

Key = Hashable


# -- building blocks ---------------------------------------------------------------

def composite_reward(extrinsic: float, intrinsic: float, ratio: float) -> float:
    return extrinsic + ratio * intrinsic


def bucket(signal: float, buckets: int, low: float, high: float) -> int:
    """Equal-width bin of ``signal`` over ``[low, high]``, clamped to the end bins."""
    if buckets < 1:
        raise InvalidConfig("buckets must be at least 1")
    if buckets == 1 or high <= low:
        return 0
    k = math.floor((signal - low) / (high - low) * buckets)
    return min(max(k, 0), buckets - 1)


def guidance_feature(obs: tuple[Key, ...], intrinsic_signal: float, buckets: int,
                     signal_range: tuple[float, float] = (-1.0, 0.0)) -> tuple[Key, ...]:
    """Observation key with the bucketed intrinsic signal appended."""
    return tuple(obs) + (bucket(intrinsic_signal, buckets, *signal_range),)


class QTable:
    """Action values per observation key; unseen keys read as zeros."""

    def __init__(self, n_actions: int, learning_rate: float = 0.1, gamma: float = 0.9):
        self.n_actions = n_actions
        self.learning_rate = learning_rate
        self.gamma = gamma
        self.values: dict[Key, list[float]] = {}

    def row(self, key: Key) -> list[float]:
        r = self.values.get(key)
        if r is None:
            r = self.values[key] = [0.0] * self.n_actions
        return r

    def peek(self, key: Key) -> list[float]:
        return self.values.get(key) or [0.0] * self.n_actions

    def max_value(self, key: Key, legal: Sequence[int] | None = None) -> float:
        r = self.peek(key)
        return max(r) if legal is None else max(r[a] for a in legal)

    def greedy(self, key: Key, legal: Sequence[int], rng: random.Random) -> int:
        r = self.peek(key)
        best = max(r[a] for a in legal)
        ties = [a for a in legal if r[a] == best]
        return ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]

    def snapshot(self) -> dict[Key, tuple[float, ...]]:
        return {k: tuple(v) for k, v in self.values.items()}


def iql_update(q: QTable, obs: Key, action: int, reward: float, next_obs: Key, done: bool,
               next_legal: Sequence[int] | None = None) -> QTable:
    """One-step Q-learning; the bootstrap term is dropped on terminal transitions."""
    target = reward if done else reward + q.gamma * q.max_value(next_obs, next_legal)
    row = q.row(obs)
    row[action] += q.learning_rate * (target - row[action])
    return q


def joint_value(qs: Sequence[QTable], obs: Sequence[Key], actions: Sequence[int]) -> float:
    return sum(q.peek(o)[a] for q, o, a in zip(qs, obs, actions))


def vdn_update(qs: Sequence[QTable], obs: Sequence[Key], actions: Sequence[int], reward: float,
               next_obs: Sequence[Key], done: bool,
               next_legal: Sequence[Sequence[int] | None] | None = None) -> Sequence[QTable]:
    """Additive decomposition: the team TD error is shared equally among agents."""
    n = len(qs)
    next_legal = next_legal or [None] * n
    q_tot = joint_value(qs, obs, actions)
    if done:
        target = reward
    else:
        target = reward + qs[0].gamma * sum(q.max_value(o, l) for q, o, l in zip(qs, next_obs, next_legal))
    td = target - q_tot
    for q, o, a in zip(qs, obs, actions):
        row = q.row(o)
        row[a] += q.learning_rate * td / n
    return qs


def epsilon_at(step: int, total: int, start: float, finish: float, decay: float) -> float:
    """Linear decay from ``start`` to ``finish`` over the first ``decay`` fraction of training."""
    horizon = decay * total
    if horizon <= 0 or step >= horizon:
        return finish
    return start + (finish - start) * (step / horizon)


# -- configuration -----------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = IQL
    variant: str = BASE
    targeted: int = 0
    intrinsic_reward_ratio: float = 0.6
    total_timesteps: int = 100_000
    seeds: tuple[int, ...] = (0,)
    env: Mapping[str, Any] = field(default_factory=lambda: {"name": "gridspread"})
    noise: str = "none"
    noise_scale: float = 0.0
    learning_rate: float = 0.1
    gamma: float = 0.9
    epsilon_start: float = 0.8
    epsilon_finish: float = 0.02
    epsilon_decay: float = 0.1
    buckets: int = 3
    eval_episodes: int = 32
    eval_fraction: float = 0.05

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise InvalidConfig(f"unknown algorithm {self.algorithm!r}")
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown variant {self.variant!r}")
        if self.intrinsic_reward_ratio < 0:
            raise InvalidConfig("intrinsic_reward_ratio must be nonnegative")
        if not self.seeds:
            raise InvalidConfig("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise SeedCollision(f"repeated seeds in {list(self.seeds)}")
        if self.noise not in NOISE_REGIMES:
            raise InvalidConfig(f"unknown noise regime {self.noise!r}")
        if self.noise_scale < 0:
            raise InvalidConfig("noise_scale must be nonnegative")
        if self.total_timesteps < 1 or self.buckets < 1 or self.eval_episodes < 1:
            raise InvalidConfig("total_timesteps, buckets and eval_episodes must be positive")
        for name in ("epsilon_start", "epsilon_finish", "epsilon_decay", "gamma", "learning_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1]")
        if not 0.0 < self.eval_fraction <= 1.0:
            raise InvalidConfig("eval_fraction must lie in (0, 1]")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TrainConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys {sorted(unknown)}")
        values = dict(data)
        if "seeds" in values:
            seeds = values["seeds"]
            values["seeds"] = tuple(int(s) for s in (seeds if isinstance(seeds, (list, tuple)) else [seeds]))
        if "env" in values:
            values["env"] = dict(values["env"])
        try:
            return cls(**values)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        d["env"] = dict(self.env)
        return d


def make_env(spec: Mapping[str, Any]):
    spec = dict(spec)
    name = spec.pop("name", None)
    try:
        if name == "gridspread":
            landmarks = tuple(tuple(l) for l in spec.pop("landmarks", DEFAULT_LANDMARKS))
            return GridSpread(
                size=int(spec.pop("size", 5)), n_agents=int(spec.pop("agents", 3)), landmarks=landmarks,
                horizon=int(spec.pop("horizon", 10)), intrinsic=spec.pop("intrinsic", FIXED_LANDMARK),
                landmark_index=int(spec.pop("landmark_index", 0)),
                observe_others=bool(spec.pop("observe_others", False)))
        if name == "minihanabi":
            convention = spec.pop("convention", FIVE_SAVE)
            rules = HanabiRules(**{k: tuple(v) if isinstance(v, list) else v for k, v in spec.items()})
            return MiniHanabi(rules, convention)
    except TypeError as exc:
        raise InvalidEnv(str(exc)) from exc
    raise InvalidEnv(f"unknown environment {name!r}")


# -- metrics -------------------------------------------------------------------------

METRIC_COLUMNS = ("seed", "step", "variant", "algorithm", "extrinsic_return", "intrinsic_return",
                  "compliance_rate")


@dataclass(frozen=True)
class MetricsRow:
    seed: int
    step: int
    variant: str
    algorithm: str
    extrinsic_return: float
    intrinsic_return: float
    compliance_rate: float

    def values(self) -> tuple[float, ...]:
        return (self.seed, self.step, self.extrinsic_return, self.intrinsic_return, self.compliance_rate)


@dataclass(frozen=True)
class Metrics:
    rows: tuple[MetricsRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        for r in self.rows:
            w.writerow([r.seed, r.step, r.variant, r.algorithm, repr(r.extrinsic_return),
                        repr(r.intrinsic_return), repr(r.compliance_rate)])
        return buf.getvalue()

    def final(self) -> list[MetricsRow]:
        """Last evaluation row of every seed."""
        last: dict[int, MetricsRow] = {}
        for r in self.rows:
            last[r.seed] = r
        return [last[s] for s in sorted(last)]


# -- training --------------------------------------------------------------------------

@dataclass
class _Wiring:
    receivers: frozenset[int]
    augmented: frozenset[int]
    measured: tuple[int, ...]


def _wiring(config: TrainConfig, n_agents: int) -> _Wiring:
    if not 0 <= config.targeted < n_agents:
        raise InvalidConfig(f"targeted agent {config.targeted} does not exist")
    everyone = frozenset(range(n_agents))
    target = frozenset({config.targeted})
    receivers = {BASE: frozenset(), INTRINSIC_REWARD: target, GLOBAL: everyone, PSI: target}[config.variant]
    augmented = target if config.variant == PSI else frozenset()
    measured = tuple(range(n_agents)) if config.variant == GLOBAL else (config.targeted,)
    return _Wiring(receivers, augmented, measured)


class _Runner:
    """State of one training run: tables, random streams and the observation pipeline."""

    def __init__(self, config: TrainConfig, seed: int):
        self.config = config
        self.seed = seed
        self.env = make_env(config.env)
        self.wiring = _wiring(config, self.env.n_agents)
        env_ss, explore_ss, noise_ss = np.random.SeedSequence(seed).spawn(3)
        self.env_rng = np.random.default_rng(env_ss)
        self.explore = random.Random(int(explore_ss.generate_state(1)[0]))
        self.noise_rng = np.random.default_rng(noise_ss)
        n_actions = len(self.env.actions)
        self.tables = [QTable(n_actions, config.learning_rate, config.gamma) for _ in range(self.env.n_agents)]
        self.train_noise = config.noise in ("train-only", "both")
        self.test_noise = config.noise in ("test-only", "both")

    def key(self, env, agent: int, noisy: bool, noise_rng: np.random.Generator) -> Key:
        obs = env.observe(agent)
        if noisy:
            obs = inject_noise(obs, self.config.noise_scale, noise_rng)
        k = obs.key()
        if agent in self.wiring.augmented:
            k = guidance_feature(k, env.signal(agent), self.config.buckets, env.signal_range)
        return k

    def reward(self, agent: int, team: float, signals: Sequence[float]) -> float:
        if agent in self.wiring.receivers:
            return composite_reward(team, signals[agent], self.config.intrinsic_reward_ratio)
        return team

    def act(self, agent: int, key: Key, legal: Sequence[int], epsilon: float) -> int:
        if self.explore.random() < epsilon:
            return legal[self.explore.randrange(len(legal))]
        return self.tables[agent].greedy(key, legal, self.explore)

    # -- training loops --

    def run(self) -> list[MetricsRow]:
        cfg = self.config
        n_evals = round(1 / cfg.eval_fraction)
        eval_at = {max(1, round(cfg.total_timesteps * k / n_evals)): k for k in range(1, n_evals + 1)}
        rows = []
        loop = self._turn_based if self.env.turn_based else self._simultaneous
        for step, k in loop(eval_at):
            rows.append(self.evaluate(step, k))
        return rows

    def _epsilon(self, t: int) -> float:
        c = self.config
        return epsilon_at(t, c.total_timesteps, c.epsilon_start, c.epsilon_finish, c.epsilon_decay)

    def _simultaneous(self, eval_at: Mapping[int, int]):
        env, n = self.env, self.env.n_agents
        env.reset(self.env_rng)
        keys = [self.key(env, i, self.train_noise, self.noise_rng) for i in range(n)]
        for t in range(self.config.total_timesteps):
            eps = self._epsilon(t)
            actions = {i: self.act(i, keys[i], env.legal(i), eps) for i in range(n)}
            team, signals, done, _, _ = env.step(actions)
            next_keys = [self.key(env, i, self.train_noise, self.noise_rng) for i in range(n)]
            if self.config.algorithm == VDN:
                shaped = team + sum(self.config.intrinsic_reward_ratio * signals[i]
                                    for i in sorted(self.wiring.receivers))
                vdn_update(self.tables, keys, [actions[i] for i in range(n)], shaped, next_keys, done)
            else:
                for i in range(n):
                    iql_update(self.tables[i], keys[i], actions[i], self.reward(i, team, signals),
                               next_keys[i], done)
            if done:
                env.reset(self.env_rng)
                next_keys = [self.key(env, i, self.train_noise, self.noise_rng) for i in range(n)]
            keys = next_keys
            if t + 1 in eval_at:
                yield t + 1, eval_at[t + 1]

    def _turn_based(self, eval_at: Mapping[int, int]):
        # Each agent's transition runs from one of its turns to its next turn,
        # accumulating the rewards it receives in between. With one actor per
        # step the value-decomposition sum has a single term, so VDN reduces
        # to independent learning here.
        env, n = self.env, self.env.n_agents
        env.reset(self.env_rng)
        pending: list[list | None] = [None] * n
        for t in range(self.config.total_timesteps):
            i = env.acting()[0]
            key = self.key(env, i, self.train_noise, self.noise_rng)
            legal = env.legal(i)
            if pending[i] is not None:
                k0, a0, r0 = pending[i]
                iql_update(self.tables[i], k0, a0, r0, key, False, legal)
            a = self.act(i, key, legal, self._epsilon(t))
            team, signals, done, _, _ = env.step({i: a})
            pending[i] = [key, a, 0.0]
            for j in range(n):
                if pending[j] is not None:
                    pending[j][2] += self.reward(j, team, signals)
            if done:
                for j in range(n):
                    if pending[j] is not None:
                        k0, a0, r0 = pending[j]
                        iql_update(self.tables[j], k0, a0, r0, k0, True)
                pending = [None] * n
                env.reset(self.env_rng)
            if t + 1 in eval_at:
                yield t + 1, eval_at[t + 1]

    # -- evaluation --

    def evaluate(self, step: int, index: int) -> MetricsRow:
        cfg = self.config
        env = make_env(cfg.env)
        env_ss, tie_ss, noise_ss = np.random.SeedSequence([self.seed, index]).spawn(3)
        env_rng = np.random.default_rng(env_ss)
        ties = random.Random(int(tie_ss.generate_state(1)[0]))
        noise_rng = np.random.default_rng(noise_ss)
        extrinsic, intrinsic, relevant, compliant = [], [], 0, 0
        for _ in range(cfg.eval_episodes):
            env.reset(env_rng)
            ext, intr, done = 0.0, 0.0, False
            while not done:
                acting = env.acting()
                actions = {}
                for i in acting:
                    key = self.key(env, i, self.test_noise, noise_rng)
                    actions[i] = self.tables[i].greedy(key, env.legal(i), ties)
                team, signals, done, rel, comp = env.step(actions)
                ext += team
                for i in self.wiring.measured:
                    intr += signals[i]
                    relevant += rel[i]
                    compliant += comp[i]
            extrinsic.append(ext)
            intrinsic.append(intr)
        rate = compliant / relevant if relevant else 1.0
        return MetricsRow(self.seed, step, cfg.variant, cfg.algorithm, math.fsum(extrinsic) / len(extrinsic),
                          math.fsum(intrinsic) / len(intrinsic), rate)


def train_seed(config: TrainConfig, seed: int) -> list[MetricsRow]:
    return _Runner(config, seed).run()


def train(config: TrainConfig, jobs: int = 1) -> Metrics:
    """Train every seed (in parallel when ``jobs > 1``) and merge rows by (seed, step)."""
    make_env(config.env)
    if jobs > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(train_seed, [config] * len(config.seeds), config.seeds))
    else:
        parts = [train_seed(config, s) for s in config.seeds]
    rows = sorted((r for part in parts for r in part), key=lambda r: (r.seed, r.step))
    return Metrics(tuple(rows))


def confidence_interval(values: Sequence[float], z: float = 1.96) -> tuple[float, float, float]:
    """Mean with the normal-approximation interval mean ± z·s/√n (sample std)."""
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, mean, mean
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    half = z * math.sqrt(var) / math.sqrt(n)
    return mean, mean - half, mean + half
