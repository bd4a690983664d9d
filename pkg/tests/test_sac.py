"""SAC core: replay buffer, exact gradients, checkpoints, training loop."""

import numpy as np
import pytest

from uavlc import ReplayBuffer, SacAgent, run_episode, train_sac
from uavlc.baselines import RandomPolicy
from uavlc.sac import gaussian_policy_forward

from conftest import small_config


def make_batch(rng, n, obs_dim, act_dim):
    return {"obs": rng.standard_normal((n, obs_dim)),
            "act": np.tanh(rng.standard_normal((n, act_dim))),
            "rew": rng.standard_normal(n),
            "next_obs": rng.standard_normal((n, obs_dim)),
            "done": rng.integers(0, 2, n).astype(float)}


def small_agent(seed, obs_dim=5, act_dim=2):
    cfg = small_config(hidden_sizes=(16,))
    return SacAgent(obs_dim, act_dim, cfg, seed=seed), cfg


def critic_fd(agent, batch, xi, which, eps=1e-6):
    y = agent.critic_target(batch["rew"], batch["done"], batch["next_obs"],
                            xi=xi)
    qin = np.concatenate([batch["obs"], batch["act"]], axis=1)
    net = agent.q1 if which == 0 else agent.q2

    def loss_at(flat):
        probe = net.clone()
        probe.set_flat(flat)
        pred = probe(qin)[:, 0]
        return float(np.mean((pred - y) ** 2))

    flat = net.get_flat()
    g = np.zeros_like(flat)
    for i in range(flat.size):
        fp, fm = flat.copy(), flat.copy()
        fp[i] += eps
        fm[i] -= eps
        g[i] = (loss_at(fp) - loss_at(fm)) / (2 * eps)
    return g


def actor_fd(agent, batch, xi, eps=1e-6):
    cfg = agent.cfg
    obs = batch["obs"]

    def loss_at(flat):
        probe = agent.actor.clone()
        probe.set_flat(flat)
        fw = gaussian_policy_forward(probe, obs, xi)
        qin = np.concatenate([obs, fw["action"]], axis=1)
        q_min = np.minimum(agent.q1(qin)[:, 0], agent.q2(qin)[:, 0])
        return float(np.mean(cfg.entropy_weight * fw["logp"] - q_min))

    flat = agent.actor.get_flat()
    g = np.zeros_like(flat)
    for i in range(flat.size):
        fp, fm = flat.copy(), flat.copy()
        fp[i] += eps
        fm[i] -= eps
        g[i] = (loss_at(fp) - loss_at(fm)) / (2 * eps)
    return g


def max_rel_err(analytic, numeric):
    return float(np.max(np.abs(analytic - numeric)
                        / (np.abs(numeric) + 1e-8)))


def test_critic_gradients_match_finite_differences():
    agent, _ = small_agent(seed=0)
    rng = np.random.default_rng(10)
    batch = make_batch(rng, 8, 5, 2)
    xi = rng.standard_normal((8, 2))
    (g1, _), (g2, _) = agent.critic_grads(batch, xi=xi)
    a1 = np.concatenate([g.ravel() for g in g1])
    a2 = np.concatenate([g.ravel() for g in g2])
    assert max_rel_err(a1, critic_fd(agent, batch, xi, 0)) < 1e-4
    assert max_rel_err(a2, critic_fd(agent, batch, xi, 1)) < 1e-4


def test_actor_gradient_matches_finite_differences():
    agent, _ = small_agent(seed=1)
    rng = np.random.default_rng(11)
    batch = make_batch(rng, 8, 5, 2)
    xi = rng.standard_normal((8, 2))
    grads, _ = agent.actor_grads(batch, xi=xi)
    analytic = np.concatenate([g.ravel() for g in grads])
    assert max_rel_err(analytic, actor_fd(agent, batch, xi)) < 1e-4


def test_replay_buffer_ring_semantics():
    buf = ReplayBuffer(capacity=3, obs_dim=2, act_dim=1)
    for i in range(5):
        buf.add(np.full(2, i), np.full(1, i), float(i), np.full(2, i + 10),
                i == 4)
    assert len(buf) == 3
    # oldest entries (0, 1) overwritten by (3, 4)
    stored = sorted(buf.rew.tolist())
    assert stored == [2.0, 3.0, 4.0]


def test_replay_buffer_sampling_and_batches():
    buf = ReplayBuffer(capacity=50, obs_dim=2, act_dim=1)
    rng = np.random.default_rng(0)
    for i in range(20):
        buf.add(rng.standard_normal(2), rng.standard_normal(1),
                float(i), rng.standard_normal(2), False)
    batch = buf.sample(8, rng)
    assert batch["obs"].shape == (8, 2)
    assert batch["rew"].shape == (8,)
    with pytest.raises(ValueError):
        ReplayBuffer(4, 1, 1).sample(2, rng)


def test_replay_buffer_split_is_disjoint_partition():
    buf = ReplayBuffer(capacity=50, obs_dim=1, act_dim=1)
    for i in range(30):
        buf.add([i], [0.0], 0.0, [0.0], False)
    rng = np.random.default_rng(3)
    support, query = buf.split_indices(0.8, rng)
    assert len(set(support) & set(query)) == 0
    assert sorted(np.concatenate([support, query])) == list(range(30))
    assert len(support) == 24


def test_policy_actions_bounded_and_deterministic_mode():
    agent, _ = small_agent(seed=2)
    obs = np.random.default_rng(5).standard_normal(5)
    a1 = agent.act(obs, deterministic=True)
    a2 = agent.act(obs, deterministic=True)
    assert np.array_equal(a1, a2)
    assert np.all(np.abs(a1) < 1.0)
    stoch = [agent.act(obs) for _ in range(3)]
    assert not np.array_equal(stoch[0], stoch[1])


def test_update_changes_parameters_and_targets_lag():
    agent, _ = small_agent(seed=3)
    rng = np.random.default_rng(12)
    batch = make_batch(rng, 16, 5, 2)
    before_actor = agent.actor.get_flat().copy()
    before_target = agent.tq1.get_flat().copy()
    agent.update(batch)
    assert not np.array_equal(agent.actor.get_flat(), before_actor)
    # Polyak-averaged target moves, but only slightly
    moved = np.linalg.norm(agent.tq1.get_flat() - before_target)
    online = np.linalg.norm(agent.q1.get_flat() - before_target)
    assert 0.0 < moved < online


def test_clone_is_deep_and_rng_synchronized():
    agent, _ = small_agent(seed=4)
    other = agent.clone()
    assert np.array_equal(agent.actor.get_flat(), other.actor.get_flat())
    # same rng state: identical next stochastic action
    obs = np.zeros(5)
    assert np.array_equal(agent.act(obs), other.act(obs))
    other.actor.weights[0][0, 0] += 1.0
    assert not np.array_equal(agent.actor.get_flat(),
                              other.actor.get_flat())


def test_checkpoint_round_trip(tmp_path):
    agent, cfg = small_agent(seed=5)
    rng = np.random.default_rng(13)
    agent.update(make_batch(rng, 16, 5, 2))
    path = str(tmp_path / "agent.npz")
    agent.save(path)
    loaded = SacAgent.load(path, cfg)
    for name in ("actor", "q1", "q2", "target_actor", "tq1", "tq2"):
        assert np.array_equal(getattr(agent, name).get_flat(),
                              getattr(loaded, name).get_flat())
    assert loaded.adam_actor.t == agent.adam_actor.t
    for m1, m2 in zip(agent.adam_q1.m, loaded.adam_q1.m):
        assert np.array_equal(m1, m2)


def test_run_episode_fills_buffer(env):
    buf = ReplayBuffer(100, env.obs_dim, env.action_dim)
    policy = RandomPolicy(env, seed=0)
    total, trace = run_episode(env, policy, buffer=buf, episode_seed=1)
    assert len(buf) == env.cfg.n_slots
    assert len(trace.rows) == env.cfg.n_slots
    assert total == pytest.approx(sum(r["reward"] for r in trace.rows))


def test_train_sac_runs_and_is_deterministic(make_env):
    env1 = make_env()
    env2 = make_env()
    cfg = env1.cfg
    a1, _, r1 = train_sac(env1, cfg, seed=7, episodes=3)
    a2, _, r2 = train_sac(env2, cfg, seed=7, episodes=3)
    assert r1 == r2
    assert np.array_equal(a1.actor.get_flat(), a2.actor.get_flat())
    assert len(r1) == 3
