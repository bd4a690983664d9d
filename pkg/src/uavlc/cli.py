"""Command-line entry points.

Subcommands: simulate, train, meta-train, adapt, eval, sweep, check.
CSV files are the output contract; plotting is out of scope.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .baselines import GreedyPolicy, RandomPolicy
from .config import load_config
from .env import VlcUavEnv, sample_task
from .harness import (ExperimentSpec, derive_seed, evaluate,
                      make_agent_policy, run_experiment)
from .meta import MetaSac
from .sac import SacAgent, train_sac


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, help="YAML config path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paper-literal", action="store_true",
                   help="reward 0 on infeasible slots, channels-only state")


def _load_cfg(args):
    cfg = load_config(args.config)
    if args.paper_literal:
        cfg = cfg.replace(reward_mode="paper", observe_pose=False)
    return cfg


def _task_for(cfg, seed):
    return sample_task(cfg, np.random.default_rng(derive_seed("task", seed)))


def cmd_simulate(args):
    cfg = _load_cfg(args)
    env = VlcUavEnv(cfg, _task_for(cfg, args.seed))
    if args.scheme == "greedy":
        policy = GreedyPolicy(env)
    elif args.scheme == "random":
        policy = RandomPolicy(env, seed=args.seed)
    else:
        agent = SacAgent.load(args.checkpoint, cfg)
        policy = make_agent_policy(agent)
    obs = env.reset(seed=args.seed)
    while not env.done:
        obs = env.step(policy(obs)).next_obs
    env.trace.write_csv(args.out)
    print(f"episode trace ({len(env.trace.rows)} slots) -> {args.out}")
    print(f"mean P_Tot: {env.trace.mean('p_total'):.3f} W, "
          f"feasible fraction: {env.trace.feasibility_fraction():.2f}")


def cmd_train(args):
    cfg = _load_cfg(args)
    env = VlcUavEnv(cfg, _task_for(cfg, args.seed))
    agent, _, returns = train_sac(env, cfg, seed=args.seed,
                                  episodes=args.episodes)
    agent.save(args.out)
    print(f"trained {args.episodes} episodes; last-5 mean return "
          f"{np.mean(returns[-5:]):.1f}; checkpoint -> {args.out}")


def cmd_meta_train(args):
    cfg = _load_cfg(args)
    probe = VlcUavEnv(cfg, _task_for(cfg, args.seed))
    meta = MetaSac(cfg, probe.obs_dim, probe.action_dim, seed=args.seed)
    rng = np.random.default_rng(derive_seed("meta-tasks", args.seed))
    history = meta.meta_train(lambda: sample_task(cfg, rng),
                              args.iterations, checkpoint_path=args.out)
    print(f"meta-trained {args.iterations} iterations on "
          f"{cfg.meta_task_count} tasks; checkpoint -> {args.out}")
    if history:
        print(f"final query losses: {history[-1]}")


def cmd_adapt(args):
    cfg = _load_cfg(args)
    meta = MetaSac.load(args.checkpoint, cfg)
    task = _task_for(cfg, args.seed)
    agent = meta.meta_adapt(task, args.episodes, seed=args.seed)
    agent.save(args.out)
    print(f"adapted {args.episodes} episodes on task seed {task.seed}; "
          f"checkpoint -> {args.out}")


def cmd_eval(args):
    cfg = _load_cfg(args)
    env = VlcUavEnv(cfg, _task_for(cfg, args.seed))
    if args.scheme == "greedy":
        policy = GreedyPolicy(env)
    elif args.scheme == "random":
        policy = RandomPolicy(env, seed=args.seed)
    else:
        agent = SacAgent.load(args.checkpoint, cfg)
        policy = make_agent_policy(agent)
    stats = evaluate(env, policy, args.episodes, args.seed)
    for k, v in stats.items():
        print(f"{k}: {v:.6g}")


def cmd_sweep(args):
    cfg = _load_cfg(args)
    spec = ExperimentSpec(
        scenario=args.scenario, sweep_var=args.var,
        sweep_values=[float(v) for v in args.values],
        seeds=args.seeds, schemes=args.scheme, out_path=args.out,
        eval_episodes=args.eval_episodes,
        train_episodes=args.train_episodes,
        adapt_episodes=args.adapt_episodes,
        meta_iterations=args.meta_iterations)
    rows = run_experiment(spec, cfg)
    print(f"{len(rows)} rows -> {spec.out_path}")


def cmd_check(args):
    """Small invariant suite runnable without pytest."""
    import math

    from .channel import lambertian_order, los_channel_gain, OpticsParams
    from .dimming import (DimmingConfig, active_led_count, dc_bias_for,
                          dimming_level_of)
    from .uav import RotorcraftParams, hover_power, propulsion_power

    cfg = _load_cfg(args)
    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"  [{'ok' if ok else 'FAIL'}] {name}")
        failures += 0 if ok else 1

    check("lambertian order at 60 deg is 1",
          abs(lambertian_order(math.radians(60)) - 1.0) < 1e-12)
    optics = OpticsParams(cfg.half_power_semiangle, cfg.fov_semiangle,
                          cfg.pd_area_m2, cfg.refractive_index)
    h = los_channel_gain(np.array([0, 0, 10.0]), np.zeros(3), optics)
    check("nadir gain positive", h > 0)
    dim = DimmingConfig(eta=0.55, i_low=cfg.i_low, i_high=cfg.i_high,
                        n_leds=cfg.n_leds)
    n_a = active_led_count(dim.eta, dim.n_leds)
    eta_back = dimming_level_of(n_a, dc_bias_for(dim, n_a), dim)
    check("dimming round trip", abs(eta_back - dim.eta) < 1e-12)
    rotor = RotorcraftParams(
        cfg.profile_drag_coeff, cfg.air_density, cfg.rotor_solidity,
        cfg.rotor_disk_area, cfg.blade_angular_velocity, cfg.rotor_radius,
        cfg.correction_factor, cfg.uav_weight, cfg.induced_hover_velocity,
        cfg.fuselage_drag_ratio)
    hov = hover_power(rotor)
    check("propulsion(0) equals hover",
          abs(propulsion_power(np.zeros(3), rotor) - hov.total)
          < 1e-12 * hov.total)
    env = VlcUavEnv(cfg, _task_for(cfg, args.seed))
    env.reset(seed=args.seed)
    rng = np.random.default_rng(args.seed)
    ok_c3 = ok_c9 = True
    for _ in range(200):
        act = env.decode_action(rng.uniform(-1, 1, env.action_dim))
        ok_c3 &= bool(np.all(np.abs(act.w).sum(axis=1)
                             <= env.bound * (1 + 1e-9)))
        ok_c9 &= act.selection.n_active == env.n_active
    check("decoded actions satisfy C3", ok_c3)
    check("decoded actions satisfy C9", ok_c9)
    if failures:
        print(f"{failures} check(s) failed")
        sys.exit(1)
    print("all checks passed")


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = argparse.ArgumentParser(
        prog="uavlc",
        description="UAV LED-array VLC simulator and allocator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="single-episode trace CSV")
    _common(p)
    p.add_argument("--scheme", default="greedy",
                   choices=["greedy", "random", "agent"])
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="plain SAC on one task")
    _common(p)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("meta-train", help="meta-training phase")
    _common(p)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_meta_train)

    p = sub.add_parser("adapt", help="meta-adaptation on a fresh task")
    _common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("eval", help="evaluate a scheme or checkpoint")
    _common(p)
    p.add_argument("--scheme", default="agent",
                   choices=["greedy", "random", "agent"])
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--episodes", type=int, default=5)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="experiment sweep to CSV")
    _common(p)
    p.add_argument("--scenario", default="sweep")
    p.add_argument("--var", required=True,
                   choices=["K", "P_max", "R_min", "N"])
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--scheme", nargs="+", required=True,
                   choices=["meta-sac", "sac", "greedy", "random"])
    p.add_argument("--eval-episodes", type=int, default=3)
    p.add_argument("--train-episodes", type=int, default=60)
    p.add_argument("--adapt-episodes", type=int, default=20)
    p.add_argument("--meta-iterations", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run the quick invariant suite")
    _common(p)
    p.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
