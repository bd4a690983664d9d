"""Soft actor-critic on hand-rolled networks.

Squashed-Gaussian policy, twin critics with Polyak-averaged targets, and
ADAM updates computed from exact manual gradients. Rewards are scaled by a
constant inside the learner only; buffers and traces keep raw values.
A target actor is maintained for parity with the two target critics but is
used for bootstrapping only when explicitly enabled.
"""

from __future__ import annotations

import json

import numpy as np

from .config import SystemConfig
from .nets import (Adam, Mlp, soft_update, squash_log_std,
                   squash_log_std_grad)

TANH_EPS = 1e-6
CHECKPOINT_VERSION = 1


class ReplayBuffer:
    """Uniform ring buffer of transitions; batches sample without replacement."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.rew = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.size = 0
        self._pos = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, act, rew, next_obs, done):
        i = self._pos
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.next_obs[i] = next_obs
        self.done[i] = float(done)
        self._pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def get(self, idx: np.ndarray) -> dict:
        return {"obs": self.obs[idx], "act": self.act[idx],
                "rew": self.rew[idx], "next_obs": self.next_obs[idx],
                "done": self.done[idx]}

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        replace = batch_size > self.size
        idx = rng.choice(self.size, size=batch_size, replace=replace)
        return self.get(idx)

    def split_indices(self, support_fraction: float,
                      rng: np.random.Generator):
        """Disjoint support/query partition of the whole buffer."""
        perm = rng.permutation(self.size)
        cut = max(1, int(round(support_fraction * self.size)))
        cut = min(cut, self.size - 1) if self.size > 1 else 1
        return perm[:cut], perm[cut:]


def gaussian_policy_forward(actor: Mlp, obs: np.ndarray, xi: np.ndarray):
    """Reparameterized squashed-Gaussian head on top of the actor trunk.

    action = tanh(mu + sigma * xi); the log-probability carries the tanh
    change-of-variables correction.
    """
    obs = np.atleast_2d(obs)
    out, cache = actor.forward(obs)
    act_dim = out.shape[1] // 2
    mu = out[:, :act_dim]
    raw_ls = out[:, act_dim:]
    log_std = squash_log_std(raw_ls)
    sigma = np.exp(log_std)
    u = mu + sigma * xi
    a = np.tanh(u)
    logp = (-0.5 * np.log(2.0 * np.pi) - log_std - 0.5 * xi ** 2
            - np.log(1.0 - a ** 2 + TANH_EPS)).sum(axis=1)
    return {"obs": obs, "cache": cache, "mu": mu, "raw_ls": raw_ls,
            "log_std": log_std, "sigma": sigma, "xi": xi, "u": u,
            "action": a, "logp": logp}


def gaussian_policy_backward(actor: Mlp, fw: dict, grad_action: np.ndarray,
                             grad_logp: np.ndarray):
    """Actor parameter gradients for a loss touching action and logp.

    grad_action: d(loss)/d(action), shape (B, A); grad_logp: d(loss)/d(logp)
    per sample, shape (B,). The sampling noise xi is held fixed
    (reparameterization trick).
    """
    a = fw["action"]
    one_m_a2 = 1.0 - a ** 2
    c = grad_logp[:, None]
    # logp depends on the action through the tanh correction term
    d_da = grad_action + c * 2.0 * a / (one_m_a2 + TANH_EPS)
    d_du = d_da * one_m_a2
    d_mu = d_du
    d_log_std = -c + d_du * fw["sigma"] * fw["xi"]
    d_raw_ls = d_log_std * squash_log_std_grad(fw["raw_ls"])
    grad_out = np.concatenate([d_mu, d_raw_ls], axis=1)
    grads, _ = actor.backward(fw["cache"], grad_out)
    return grads


def policy_sample(actor: Mlp, obs: np.ndarray, rng: np.random.Generator,
                  deterministic: bool = False):
    """Sample an action in (-1, 1)^A and its log-probability."""
    obs = np.atleast_2d(obs)
    out, _ = actor.forward(obs)
    act_dim = out.shape[1] // 2
    if deterministic:
        xi = np.zeros((obs.shape[0], act_dim))
    else:
        xi = rng.standard_normal((obs.shape[0], act_dim))
    fw = gaussian_policy_forward(actor, obs, xi)
    return fw["action"], fw["logp"]


class SacAgent:
    def __init__(self, obs_dim: int, act_dim: int, cfg: SystemConfig,
                 seed: int = 0):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.rng = np.random.default_rng(seed)
        hidden = list(cfg.hidden_sizes)
        self.actor = Mlp([obs_dim] + hidden + [2 * act_dim], self.rng)
        self.q1 = Mlp([obs_dim + act_dim] + hidden + [1], self.rng)
        self.q2 = Mlp([obs_dim + act_dim] + hidden + [1], self.rng)
        self.target_actor = self.actor.clone()
        self.tq1 = self.q1.clone()
        self.tq2 = self.q2.clone()
        kw = dict(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2,
                  eps=cfg.adam_eps)
        self.adam_actor = Adam(self.actor.params, cfg.lr_actor, **kw)
        self.adam_q1 = Adam(self.q1.params, cfg.lr_critic1, **kw)
        self.adam_q2 = Adam(self.q2.params, cfg.lr_critic2, **kw)

    # -- acting --

    def act(self, obs: np.ndarray, deterministic: bool = False) -> np.ndarray:
        a, _ = policy_sample(self.actor, obs, self.rng, deterministic)
        return a[0]

    # -- targets and losses --

    def critic_target(self, rew: np.ndarray, done: np.ndarray,
                      next_obs: np.ndarray,
                      xi: np.ndarray | None = None) -> np.ndarray:
        """y = r + gamma (1 - done) [min(Q'_1, Q'_2)(s', a') - lambda log pi]."""
        cfg = self.cfg
        next_obs = np.atleast_2d(next_obs)
        bootstrap_actor = (self.target_actor if cfg.target_actor_bootstrap
                           else self.actor)
        if xi is None:
            xi = self.rng.standard_normal((next_obs.shape[0], self.act_dim))
        fw = gaussian_policy_forward(bootstrap_actor, next_obs, xi)
        qin = np.concatenate([next_obs, fw["action"]], axis=1)
        q_min = np.minimum(self.tq1(qin)[:, 0], self.tq2(qin)[:, 0])
        soft_v = q_min - cfg.entropy_weight * fw["logp"]
        return rew * cfg.reward_scale + cfg.gamma * (1.0 - done) * soft_v

    def critic_grads(self, batch: dict, xi: np.ndarray | None = None):
        """Mean-squared-error gradients of both critics toward the target."""
        y = self.critic_target(batch["rew"], batch["done"],
                               batch["next_obs"], xi=xi)
        qin = np.concatenate([batch["obs"], batch["act"]], axis=1)
        n = qin.shape[0]
        out = []
        for q in (self.q1, self.q2):
            pred, cache = q.forward(qin)
            err = pred[:, 0] - y
            loss = float(np.mean(err ** 2))
            grads, _ = q.backward(cache, (2.0 / n) * err[:, None])
            out.append((grads, loss))
        return out[0], out[1]

    def actor_grads(self, batch: dict, xi: np.ndarray | None = None):
        """Gradient of mean[lambda log pi(a|s) - min Q(s, a)], reparameterized."""
        cfg = self.cfg
        obs = batch["obs"]
        n = obs.shape[0]
        if xi is None:
            xi = self.rng.standard_normal((n, self.act_dim))
        fw = gaussian_policy_forward(self.actor, obs, xi)
        qin = np.concatenate([obs, fw["action"]], axis=1)
        p1, c1 = self.q1.forward(qin)
        p2, c2 = self.q2.forward(qin)
        q1v, q2v = p1[:, 0], p2[:, 0]
        q_min = np.minimum(q1v, q2v)
        loss = float(np.mean(cfg.entropy_weight * fw["logp"] - q_min))
        # dQ/da through whichever critic is the per-sample minimum
        use1 = (q1v <= q2v)[:, None]
        _, dx1 = self.q1.backward(c1, np.where(use1, -1.0 / n, 0.0))
        _, dx2 = self.q2.backward(c2, np.where(use1, 0.0, -1.0 / n))
        grad_action = (dx1 + dx2)[:, self.obs_dim:]
        grad_logp = np.full(n, cfg.entropy_weight / n)
        grads = gaussian_policy_backward(self.actor, fw, grad_action,
                                         grad_logp)
        return grads, loss

    # -- updates --

    def soft_update_targets(self):
        c = self.cfg.polyak
        soft_update(self.target_actor, self.actor, c)
        soft_update(self.tq1, self.q1, c)
        soft_update(self.tq2, self.q2, c)

    def update_critics(self, batch: dict):
        (g1, l1), (g2, l2) = self.critic_grads(batch)
        self.q1.set_params(self.adam_q1.step(self.q1.params, g1))
        self.q2.set_params(self.adam_q2.step(self.q2.params, g2))
        self.soft_update_targets()
        return l1, l2

    def update_actor(self, batch: dict):
        grads, loss = self.actor_grads(batch)
        self.actor.set_params(self.adam_actor.step(self.actor.params, grads))
        return loss

    def update(self, batch: dict):
        """One simultaneous SAC step: both grads at current parameters."""
        (g1, l1), (g2, l2) = self.critic_grads(batch)
        ga, la = self.actor_grads(batch)
        self.q1.set_params(self.adam_q1.step(self.q1.params, g1))
        self.q2.set_params(self.adam_q2.step(self.q2.params, g2))
        self.actor.set_params(self.adam_actor.step(self.actor.params, ga))
        self.soft_update_targets()
        return la, l1, l2

    # -- cloning and checkpoints --

    def clone(self) -> "SacAgent":
        other = SacAgent.__new__(SacAgent)
        other.cfg = self.cfg
        other.obs_dim = self.obs_dim
        other.act_dim = self.act_dim
        other.rng = np.random.default_rng()
        other.rng.bit_generator.state = self.rng.bit_generator.state
        for name in ("actor", "q1", "q2", "target_actor", "tq1", "tq2"):
            setattr(other, name, getattr(self, name).clone())
        for name in ("adam_actor", "adam_q1", "adam_q2"):
            setattr(other, name, getattr(self, name).clone())
        return other

    def _net_map(self) -> dict:
        return {"actor": self.actor, "q1": self.q1, "q2": self.q2,
                "target_actor": self.target_actor, "tq1": self.tq1,
                "tq2": self.tq2}

    def save(self, path: str, extra: dict | None = None):
        arrays = {}
        for name, net in self._net_map().items():
            for i, p in enumerate(net.params):
                arrays[f"{name}_{i}"] = p
        for name in ("adam_actor", "adam_q1", "adam_q2"):
            adam = getattr(self, name)
            arrays[f"{name}_t"] = np.array(adam.t)
            for i, (m, v) in enumerate(zip(adam.m, adam.v)):
                arrays[f"{name}_m{i}"] = m
                arrays[f"{name}_v{i}"] = v
        header = {"version": CHECKPOINT_VERSION, "obs_dim": self.obs_dim,
                  "act_dim": self.act_dim,
                  "hidden_sizes": list(self.cfg.hidden_sizes)}
        if extra:
            header["extra"] = extra
        arrays["header"] = np.frombuffer(
            json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path: str, cfg: SystemConfig) -> "SacAgent":
        data = np.load(path)
        header = json.loads(bytes(data["header"]).decode())
        if header["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version "
                             f"{header['version']}")
        agent = cls(header["obs_dim"], header["act_dim"], cfg)
        for name, net in agent._net_map().items():
            net.set_params([data[f"{name}_{i}"]
                            for i in range(len(net.params))])
        for name in ("adam_actor", "adam_q1", "adam_q2"):
            adam = getattr(agent, name)
            adam.t = int(data[f"{name}_t"])
            adam.m = [data[f"{name}_m{i}"] for i in range(len(adam.m))]
            adam.v = [data[f"{name}_v{i}"] for i in range(len(adam.v))]
        return agent


def run_episode(env, policy, buffer: ReplayBuffer | None = None,
                episode_seed: int | None = None):
    """Roll one episode; policy maps an observation to a raw action."""
    obs = env.reset(seed=episode_seed)
    total = 0.0
    while not env.done:
        raw = policy(obs)
        tr = env.step(raw)
        if buffer is not None:
            buffer.add(tr.obs, tr.raw_action, tr.reward, tr.next_obs, tr.done)
        total += tr.reward
        obs = tr.next_obs
    return total, env.trace


def train_sac(env, cfg: SystemConfig, seed: int, episodes: int,
              agent: SacAgent | None = None,
              buffer: ReplayBuffer | None = None):
    """Plain single-task SAC training loop."""
    if agent is None:
        agent = SacAgent(env.obs_dim, env.action_dim, cfg, seed=seed)
    if buffer is None:
        buffer = ReplayBuffer(cfg.buffer_capacity, env.obs_dim,
                              env.action_dim)
    rng = np.random.default_rng([seed, 1])
    steps = 0
    returns = []
    for ep in range(episodes):
        obs = env.reset(seed=int(rng.integers(2**31)))
        total = 0.0
        while not env.done:
            if steps < cfg.warmup_steps:
                raw = rng.uniform(-1.0, 1.0, env.action_dim)
            else:
                raw = agent.act(obs)
            tr = env.step(raw)
            buffer.add(tr.obs, tr.raw_action, tr.reward, tr.next_obs, tr.done)
            obs = tr.next_obs
            total += tr.reward
            steps += 1
            if len(buffer) >= cfg.batch_size and steps >= cfg.warmup_steps:
                agent.update(buffer.sample(cfg.batch_size, agent.rng))
        returns.append(total)
    return agent, buffer, returns
