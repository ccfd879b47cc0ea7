from __future__ import annotations

import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maidlab.envs.gridspread import GridSpread, GridSpreadState, gridspread_step
from maidlab.errors import InvalidConfig, InvalidEnv, SeedCollision
from maidlab.marl import (
    BASE,
    GLOBAL,
    INTRINSIC_REWARD,
    IQL,
    PSI,
    VDN,
    Metrics,
    QTable,
    TrainConfig,
    _wiring,
    bucket,
    composite_reward,
    confidence_interval,
    epsilon_at,
    guidance_feature,
    iql_update,
    joint_value,
    make_env,
    train,
    vdn_update,
)
from oracles import value_iteration

GRID = {"name": "gridspread", "size": 3, "agents": 2, "landmarks": [[0, 0], [2, 2]], "horizon": 4}
HANABI = {"name": "minihanabi", "convention": "TheChop"}


def small(**kw):
    base = dict(total_timesteps=2000, seeds=(0, 1), env=GRID, eval_episodes=4, eval_fraction=0.25)
    base.update(kw)
    return TrainConfig(**base)


# -- building blocks -------------------------------------------------------------------

def test_composite_reward():
    assert composite_reward(-1.0, -2.0, 0.5) == -2.0
    assert composite_reward(3.25, 123.0, 0.0) == 3.25
    assert composite_reward(0.0, -1.0, 0.02) == -0.02


def test_bucket_rules():
    assert guidance_feature(("o",), -0.5, 3, (-1.0, 0.0)) == ("o", 1)
    assert bucket(-7.0, 3, -1.0, 0.0) == 0
    assert bucket(0.0, 3, -1.0, 0.0) == 2
    assert all(bucket(s, 1, -1.0, 0.0) == 0 for s in (-1.0, -0.3, 0.0))
    with pytest.raises(InvalidConfig):
        bucket(0.0, 0, -1.0, 0.0)


def chain_step(s, a):
    # three states; action 1 moves right, reward 1 on reaching the goal at 2
    if s == 2:
        return 2, 0.0, True
    if a == 1:
        return (s + 1, 1.0, True) if s == 1 else (s + 1, 0.0, False)
    return s, 0.0, False


def test_iql_matches_value_iteration_on_chain():
    q_star = value_iteration(3, 2, chain_step, gamma=0.9)
    q = QTable(2, learning_rate=0.5, gamma=0.9)
    for _ in range(400):
        for s, a in itertools.product(range(2), range(2)):
            s2, r, done = chain_step(s, a)
            iql_update(q, s, a, r, s2, done)
    for s in range(2):
        assert q.peek(s) == pytest.approx(q_star[s], abs=1e-6)
        assert q.peek(s).index(max(q.peek(s))) == 1


def test_zero_learning_rate_leaves_table():
    q = QTable(2, learning_rate=0.0)
    iql_update(q, "s", 0, 5.0, "t", False)
    assert q.peek("s") == [0.0, 0.0]


def test_terminal_target_drops_bootstrap():
    q = QTable(2, learning_rate=1.0, gamma=0.9)
    q.row("t")[1] = 100.0
    iql_update(q, "s", 0, 2.0, "t", True)
    assert q.peek("s")[0] == 2.0
    iql_update(q, "s", 1, 2.0, "t", False)
    assert q.peek("s")[1] == 2.0 + 0.9 * 100.0


def test_vdn_single_agent_is_iql():
    rng = random.Random(0)
    a, b = QTable(3, 0.3, 0.8), QTable(3, 0.3, 0.8)
    for _ in range(200):
        s, act, r, s2, done = rng.randrange(4), rng.randrange(3), rng.uniform(-1, 1), rng.randrange(4), rng.random() < .2
        iql_update(a, s, act, r, s2, done)
        vdn_update([b], [s], [act], r, [s2], done)
    assert a.snapshot() == b.snapshot()


def test_vdn_matrix_game_picks_team_argmax():
    payoff = [[8.0, -12.0], [-12.0, 0.0]]
    qs = [QTable(2, 0.05, 0.9), QTable(2, 0.05, 0.9)]
    rng = random.Random(3)
    for _ in range(5000):
        acts = [rng.randrange(2), rng.randrange(2)]
        vdn_update(qs, ["o", "o"], acts, payoff[acts[0]][acts[1]], ["o", "o"], True)
        assert joint_value(qs, ["o", "o"], acts) == qs[0].peek("o")[acts[0]] + qs[1].peek("o")[acts[1]]
    greedy = tuple(q.peek("o").index(max(q.peek("o"))) for q in qs)
    best = max(itertools.product(range(2), range(2)), key=lambda j: payoff[j[0]][j[1]])
    assert greedy == best


def test_vdn_zero_reward_keeps_zero_tables():
    qs = [QTable(2), QTable(2)]
    for a, b in itertools.product(range(2), range(2)):
        vdn_update(qs, ["x", "y"], [a, b], 0.0, ["x", "y"], False)
    assert all(v == 0.0 for q in qs for row in q.snapshot().values() for v in row)


@given(st.integers(1, 10**6), st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 1))
def test_epsilon_schedule(total, start, finish, decay):
    start, finish = max(start, finish), min(start, finish)
    values = [epsilon_at(t, total, start, finish, decay) for t in np.linspace(0, total, 50).astype(int)]
    assert all(x >= y - 1e-15 for x, y in zip(values, values[1:]))
    assert epsilon_at(math.ceil(decay * total), total, start, finish, decay) == finish


def test_confidence_interval():
    vals = [1.0, 2.0, 4.0, 7.0]
    mean, lo, hi = confidence_interval(vals)
    s = math.sqrt(sum((v - 3.5) ** 2 for v in vals) / 3)
    assert mean == 3.5
    assert hi - mean == pytest.approx(1.96 * s / 2, abs=1e-15)
    assert confidence_interval([2.0]) == (2.0, 2.0, 2.0)


# -- configuration ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(InvalidConfig):
        TrainConfig(algorithm="PPO")
    with pytest.raises(InvalidConfig):
        TrainConfig(variant="Oracle")
    with pytest.raises(SeedCollision):
        TrainConfig(seeds=(1, 1))
    with pytest.raises(InvalidConfig):
        TrainConfig.from_dict({"learning_rat": 0.1})
    with pytest.raises(InvalidEnv):
        make_env({"name": "pong"})
    with pytest.raises(InvalidConfig):
        train(small(targeted=5))


def test_config_round_trip():
    cfg = small(variant=PSI, buckets=2)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg


def test_wiring():
    assert _wiring(TrainConfig(variant=GLOBAL), 3).measured == (0, 1, 2)
    assert _wiring(TrainConfig(variant=GLOBAL), 3).receivers == frozenset({0, 1, 2})
    psi = _wiring(TrainConfig(variant=PSI, targeted=1), 3)
    assert psi.receivers == psi.augmented == frozenset({1}) and psi.measured == (1,)
    assert _wiring(TrainConfig(variant=BASE), 3).receivers == frozenset()


# -- training ----------------------------------------------------------------------------------

def test_single_agent_grid_reaches_optimal_return():
    env_spec = {"name": "gridspread", "size": 3, "agents": 1, "landmarks": [[0, 0]], "horizon": 4}
    cfg = TrainConfig(total_timesteps=20000, seeds=(0,), env=env_spec, eval_episodes=8,
                      learning_rate=0.5, epsilon_decay=0.5)
    final = train(cfg).final()[0]
    env = GridSpread(size=3, n_agents=1, landmarks=((0, 0),), horizon=4)

    def best(state, steps):
        if steps == 0:
            return 0.0
        return max(r + best(nxt, steps - 1)
                   for nxt, r in (gridspread_step(state, [a]) for a in range(5)))

    optimum = {(x, y): best(GridSpreadState(((x, y),), ((0, 0),), 3), 4) for x in range(3) for y in range(3)}
    # replay the evaluation starts
    env_ss = np.random.SeedSequence([0, 20]).spawn(3)[0]
    rng = np.random.default_rng(env_ss)
    starts = []
    for _ in range(8):
        env.reset(rng)
        starts.append(env.state.agents[0])
    assert final.extrinsic_return == pytest.approx(sum(optimum[s] for s in starts) / 8, abs=1e-9)


def test_metrics_layout():
    m = train(small())
    assert len(m.rows) == 8
    assert [r.step for r in m.rows[:4]] == [500, 1000, 1500, 2000]
    assert m.to_csv().splitlines()[0] == "seed,step,variant,algorithm,extrinsic_return,intrinsic_return,compliance_rate"
    assert [r.seed for r in m.final()] == [0, 1]


def test_training_is_deterministic():
    cfg = small(variant=PSI, algorithm=VDN)
    assert train(cfg).to_csv() == train(cfg).to_csv()
    assert train(cfg, jobs=2).to_csv() == train(cfg).to_csv()


@pytest.mark.parametrize("variant", [PSI, INTRINSIC_REWARD])
@pytest.mark.parametrize("algorithm", [IQL, VDN])
def test_degenerate_variants_match_base(variant, algorithm):
    base = train(small(algorithm=algorithm))
    other = train(small(algorithm=algorithm, variant=variant, intrinsic_reward_ratio=0.0, buckets=1))
    assert [r.values() for r in other.rows] == [r.values() for r in base.rows]


def test_psi_with_buckets_differs_from_base():
    base = train(small())
    psi = train(small(variant=PSI, buckets=3))
    assert [r.values() for r in psi.rows] != [r.values() for r in base.rows]


def test_hanabi_training_runs_and_vdn_reduces_to_iql():
    cfg = dict(total_timesteps=1500, seeds=(3,), env=HANABI, eval_episodes=3, eval_fraction=0.5, variant=PSI)
    iql = train(TrainConfig(**cfg, algorithm=IQL))
    vdn = train(TrainConfig(**cfg, algorithm=VDN))
    assert [r.values() for r in iql.rows] == [r.values() for r in vdn.rows]
    for r in iql.rows:
        assert 0.0 <= r.compliance_rate <= 1.0 and r.intrinsic_return <= 0.0


@pytest.mark.parametrize("regime", ["train-only", "test-only", "both"])
def test_noise_regimes_are_deterministic(regime):
    cfg = TrainConfig(total_timesteps=800, seeds=(1,), env=HANABI, eval_episodes=2, eval_fraction=0.5,
                      noise=regime, noise_scale=0.3)
    assert train(cfg).to_csv() == train(cfg).to_csv()


def test_metrics_final_picks_last_step():
    m = train(small())
    assert isinstance(m, Metrics)
    assert all(r.step == 2000 for r in m.final())
