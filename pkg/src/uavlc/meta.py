"""Meta-learning layer over the SAC core.

Two-phase procedure: meta-training alternates per-task inner adaptation on
support data with one first-order outer step on query data evaluated at the
adapted parameters; meta-adaptation then fine-tunes the shared
initialization on a fresh task's buffer. Inner steps use ADAM with a
separate inner learning rate; the outer step reuses the global optimizers.
"""

from __future__ import annotations

import numpy as np

from .config import SystemConfig
from .env import Task, VlcUavEnv
from .nets import Adam
from .sac import ReplayBuffer, SacAgent


class MetaSac:
    def __init__(self, cfg: SystemConfig, obs_dim: int, act_dim: int,
                 seed: int = 0):
        self.cfg = cfg
        self.agent = SacAgent(obs_dim, act_dim, cfg, seed=seed)
        self.rng = np.random.default_rng([seed, 7])
        self.task_seeds: list[int] = []
        self.iteration = 0

    # -- inner loop --

    def inner_adapt(self, buffer: ReplayBuffer, support_idx: np.ndarray,
                    steps: int) -> SacAgent:
        """Adapt a copy of the global parameters on support data only."""
        adapted = self.agent.clone()
        kw = dict(beta1=self.cfg.adam_beta1, beta2=self.cfg.adam_beta2,
                  eps=self.cfg.adam_eps)
        adapted.adam_actor = Adam(adapted.actor.params, self.cfg.lr_inner, **kw)
        adapted.adam_q1 = Adam(adapted.q1.params, self.cfg.lr_inner, **kw)
        adapted.adam_q2 = Adam(adapted.q2.params, self.cfg.lr_inner, **kw)
        for _ in range(steps):
            idx = self.rng.choice(support_idx, size=self.cfg.batch_size,
                                  replace=len(support_idx) < self.cfg.batch_size)
            adapted.update(buffer.get(idx))
        return adapted

    # -- outer loop --

    def outer_update(self, adapted_agents: list[SacAgent],
                     query_batches: list[dict]) -> dict:
        """One global ADAM step on the summed query losses (first order)."""
        if not adapted_agents:
            raise ValueError("need at least one adapted task")
        sum_a = sum_1 = sum_2 = None
        losses = {"actor": 0.0, "critic1": 0.0, "critic2": 0.0}
        for adapted, batch in zip(adapted_agents, query_batches):
            (g1, l1), (g2, l2) = adapted.critic_grads(batch)
            ga, la = adapted.actor_grads(batch)
            if sum_a is None:
                sum_a = [g.copy() for g in ga]
                sum_1 = [g.copy() for g in g1]
                sum_2 = [g.copy() for g in g2]
            else:
                for acc, g in zip(sum_a, ga):
                    acc += g
                for acc, g in zip(sum_1, g1):
                    acc += g
                for acc, g in zip(sum_2, g2):
                    acc += g
            losses["actor"] += la
            losses["critic1"] += l1
            losses["critic2"] += l2
        g = self.agent
        g.q1.set_params(g.adam_q1.step(g.q1.params, sum_1))
        g.q2.set_params(g.adam_q2.step(g.q2.params, sum_2))
        g.actor.set_params(g.adam_actor.step(g.actor.params, sum_a))
        g.soft_update_targets()
        return losses

    # -- phases --

    def meta_train(self, task_sampler, iterations: int,
                   checkpoint_path: str | None = None) -> list[dict]:
        """Alternate per-task rollouts, inner adaptation, one outer step."""
        cfg = self.cfg
        tasks = [task_sampler() for _ in range(cfg.meta_task_count)]
        self.task_seeds = [t.seed for t in tasks]
        envs = [VlcUavEnv(cfg, t) for t in tasks]
        buffers = [ReplayBuffer(cfg.buffer_capacity, envs[0].obs_dim,
                                envs[0].action_dim)
                   for _ in tasks]
        history = []
        for it in range(iterations):
            adapted_agents = []
            query_batches = []
            for env, buf in zip(envs, buffers):
                for _ in range(cfg.episodes_per_task):
                    obs = env.reset(seed=int(self.rng.integers(2**31)))
                    while not env.done:
                        if buf.size < cfg.warmup_steps:
                            raw = self.rng.uniform(-1.0, 1.0, env.action_dim)
                        else:
                            raw = self.agent.act(obs)
                        tr = env.step(raw)
                        buf.add(tr.obs, tr.raw_action, tr.reward,
                                tr.next_obs, tr.done)
                        obs = tr.next_obs
                support_idx, query_idx = buf.split_indices(
                    cfg.support_fraction, self.rng)
                adapted = self.inner_adapt(buf, support_idx, cfg.inner_steps)
                q_idx = self.rng.choice(
                    query_idx, size=cfg.batch_size,
                    replace=len(query_idx) < cfg.batch_size)
                adapted_agents.append(adapted)
                query_batches.append(buf.get(q_idx))
            losses = self.outer_update(adapted_agents, query_batches)
            losses["iteration"] = it
            history.append(losses)
            self.iteration += 1
        if checkpoint_path is not None:
            self.save(checkpoint_path)
        return history

    def meta_adapt(self, task: Task, episodes: int,
                   seed: int = 0) -> SacAgent:
        """Fine-tune a copy of the meta-initialization on a fresh task."""
        cfg = self.cfg
        agent = self.agent.clone()
        agent.rng = np.random.default_rng([seed, 11])
        kw = dict(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2,
                  eps=cfg.adam_eps)
        agent.adam_actor = Adam(agent.actor.params, cfg.lr_actor, **kw)
        agent.adam_q1 = Adam(agent.q1.params, cfg.lr_critic1, **kw)
        agent.adam_q2 = Adam(agent.q2.params, cfg.lr_critic2, **kw)
        if episodes == 0:
            return agent
        env = VlcUavEnv(cfg, task)
        d_ada = ReplayBuffer(cfg.buffer_capacity, env.obs_dim,
                             env.action_dim)
        rng = np.random.default_rng([seed, 13])
        for _ in range(episodes):
            obs = env.reset(seed=int(rng.integers(2**31)))
            while not env.done:
                raw = agent.act(obs)
                tr = env.step(raw)
                d_ada.add(tr.obs, tr.raw_action, tr.reward, tr.next_obs,
                          tr.done)
                obs = tr.next_obs
                if len(d_ada) >= cfg.batch_size:
                    agent.update(d_ada.sample(cfg.batch_size, agent.rng))
        return agent

    # -- checkpoints --

    def save(self, path: str):
        self.agent.save(path, extra={"task_seeds": self.task_seeds,
                                     "iteration": self.iteration})

    @classmethod
    def load(cls, path: str, cfg: SystemConfig) -> "MetaSac":
        import json

        import numpy as _np
        agent = SacAgent.load(path, cfg)
        data = _np.load(path)
        header = json.loads(bytes(data["header"]).decode())
        meta = cls.__new__(cls)
        meta.cfg = cfg
        meta.agent = agent
        meta.rng = np.random.default_rng(0)
        extra = header.get("extra", {})
        meta.task_seeds = list(extra.get("task_seeds", []))
        meta.iteration = int(extra.get("iteration", 0))
        return meta
