"""Operator command line: list-tasks | run | replay | bench | validate-config."""

import argparse
import json
import os
import subprocess
import sys

import numpy as np

from .config import Config, ConfigError, load_config_file, parse_override
from .oracle import replay_verify
from .record import TrajectoryRecorder
from .scripted import get_policy
from .tasks import TASK_IDS, build_task, spaces
from .vecenv import EnvBatch, bench as bench_batch

__all__ = ["main"]


def _build_cfg(args):
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(load_config_file(args.config))
    for item in getattr(args, "override", None) or []:
        k, v = parse_override(item)
        overrides[k] = v
    return Config(overrides)


def _cmd_list_tasks(args):
    cfg = _build_cfg(args)
    for tid in TASK_IDS:
        t = build_task(tid, cfg)
        meta = spaces(t)
        kind = "collaborative" if t.collaborative else "competitive"
        print(f"{tid:16s} {kind:13s} agents={meta['n_agents']} "
              f"obs_dim={meta['obs_dim']} episode_len={meta['episode_len']}")
    return 0


def _cmd_run(args):
    cfg = _build_cfg(args)
    task = build_task(args.task, cfg)
    batch = EnvBatch(task, args.envs, args.seed, workers=args.workers)
    policy = get_policy(args.policy, task)
    steps = args.steps if args.steps else task.episode_len
    recorder = None
    if args.record:
        recorder = TrajectoryRecorder(args.record, batch)
        batch.recorder = recorder
    if args.dump_config:
        cfg.dump(args.dump_config)

    batch.reset()
    if hasattr(policy, "reset"):
        policy.reset(batch)
    outcomes = {}
    returns = []
    for _ in range(steps):
        res = batch.step(policy(batch))
        for info in res.infos:
            if info is None:
                continue
            outcomes[info["outcome"]] = outcomes.get(info["outcome"], 0) + 1
            returns.append(float(np.mean(info["episode_return"])))
    if recorder is not None:
        recorder.close()
    episodes = sum(outcomes.values())
    success = outcomes.get("success", 0)
    print(f"task={task.id} envs={batch.n_envs} seed={batch.master_seed} "
          f"steps={steps} episodes={episodes}")
    if episodes:
        print(f"mean episode return: {float(np.mean(returns)):.4f}")
        rate = success / episodes
        print(f"success rate: {rate:.3f}")
    else:
        print("mean episode return: n/a (no episode finished)")
        print("success rate: n/a")
    print("outcome histogram:", json.dumps(outcomes, sort_keys=True))
    batch.close()
    return 0


def _cmd_replay(args):
    report = replay_verify(args.path)
    print(f"file: {report['path']}")
    print(f"task: {report['task']}  rows: {report['rows']}  "
          f"elapsed: {report['elapsed_s']:.2f}s")
    print(f"max abs reward discrepancy: {report['max_abs_discrepancy']:.3e}")
    for m in report["mismatches"]:
        print("  ", m)
    for m in report["termination_mismatches"]:
        print("  termination:", m)
    for lineno, err in report["malformed_lines"]:
        print(f"  malformed line {lineno}: {err}")
    ok = (report["max_abs_discrepancy"] <= 1e-9
          and not report["termination_mismatches"]
          and not report["malformed_lines"])
    print("verdict:", "OK" if ok else "MISMATCH")
    return 0 if ok else 1


def _cmd_bench(args):
    cfg = _build_cfg(args)
    tasks = args.tasks.split(",")
    env_counts = [int(x) for x in args.envs.split(",")]
    rows = []
    for n_envs in env_counts:
        for tid in tasks:
            task = build_task(tid, cfg)
            batch = EnvBatch(task, n_envs, args.seed, workers=args.workers)
            rep = bench_batch(batch, args.steps, policy=args.policy,
                              trials=args.trials)
            batch.close()
            rows.append(rep)
            print(f"  measured {tid} @ {n_envs} envs: "
                  f"{rep['agent_steps_per_sec_mean']:.0f} agent-steps/s",
                  file=sys.stderr)

    from .core import BACKEND
    print(f"\nSimulation throughput in agent-steps/s "
          f"(mean +/- std over {args.trials} trials, backend={BACKEND})")
    header = ["# Envs"] + tasks
    widths = [8] + [max(22, len(t) + 2) for t in tasks]
    print("".join(h.ljust(w) for h, w in zip(header, widths)))
    for n_envs in env_counts:
        cells = [str(n_envs).ljust(widths[0])]
        for i, tid in enumerate(tasks):
            rep = next(r for r in rows
                       if r["task"] == tid and r["n_envs"] == n_envs)
            cells.append(f"{rep['agent_steps_per_sec_mean']:.0f} +/- "
                         f"{rep['agent_steps_per_sec_std']:.0f}".ljust(widths[i + 1]))
        print("".join(cells))
    report = {"backend": BACKEND, "policy": args.policy, "rows": rows}

    if args.compare_backends:
        report["backend_comparison"] = _compare_backends(args)
        print("\nBackend comparison (narrow_gate):")
        for row in report["backend_comparison"]:
            print(f"  {row['backend']:9s} {row['n_envs']:5d} envs: "
                  f"{row['agent_steps_per_sec_mean']:.0f} +/- "
                  f"{row['agent_steps_per_sec_std']:.0f} agent-steps/s")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
        print(f"\nreport written to {args.json}")
    return 0


def _compare_backends(args):
    """Re-run a small benchmark in subprocesses, one per backend."""
    out = []
    for backend in ("compiled", "python"):
        env = dict(os.environ)
        env["QUADARENA_BACKEND"] = backend
        code = (
            "import json\n"
            "from quadarena.vecenv import EnvBatch, bench\n"
            "from quadarena.core import BACKEND\n"
            f"b = EnvBatch('narrow_gate', {args.compare_envs}, 0)\n"
            f"r = bench(b, {args.compare_steps}, policy='random', trials=3, "
            "warmup=10)\n"
            "r['backend'] = BACKEND\n"
            "print(json.dumps(r))\n"
        )
        proc = subprocess.run([sys.executable, "-c", code], env=env,
                              capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"  backend {backend} failed: {proc.stderr.strip()[-200:]}",
                  file=sys.stderr)
            continue
        out.append(json.loads(proc.stdout.strip().splitlines()[-1]))
    return out


def _cmd_validate_config(args):
    cfg = _build_cfg(args)
    n = len(cfg.overrides())
    print(f"config OK ({n} override{'s' if n != 1 else ''})")
    if args.dump_config:
        cfg.dump(args.dump_config)
        print(f"effective config written to {args.dump_config}")
    else:
        for k, v in sorted(cfg.overrides().items()):
            print(f"  {k} = {v}")
    return 0


def _parser():
    p = argparse.ArgumentParser(
        prog="quadarena",
        description="Deterministic batch-parallel multi-agent quadruped arena.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--override", action="append", metavar="KEY=VALUE",
                        help="config override (repeatable)")

    sp = sub.add_parser("list-tasks", help="enumerate benchmark tasks")
    common(sp)
    sp.set_defaults(fn=_cmd_list_tasks)

    sp = sub.add_parser("run", help="run episodes and print a summary")
    sp.add_argument("--task", required=True)
    sp.add_argument("--envs", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--steps", type=int, default=0,
                    help="control steps (default: one episode length)")
    sp.add_argument("--policy", default="zero",
                    help="zero | random | scripted:<name>")
    sp.add_argument("--record", help="write a trajectory file")
    sp.add_argument("--workers", type=int,
                    default=int(os.environ.get("QUADARENA_WORKERS", "1")))
    sp.add_argument("--dump-config", help="write the effective config")
    common(sp)
    sp.set_defaults(fn=_cmd_run)

    sp = sub.add_parser("replay", help="verify a recorded trajectory")
    sp.add_argument("path")
    sp.set_defaults(fn=_cmd_replay)

    sp = sub.add_parser("bench", help="throughput benchmark table")
    sp.add_argument("--tasks", default="narrow_gate,climb_seesaw,sheepdog_easy")
    sp.add_argument("--envs", default="500,1000")
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--policy", default="random")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int,
                    default=int(os.environ.get("QUADARENA_WORKERS", "1")))
    sp.add_argument("--json", help="write machine-readable report")
    sp.add_argument("--compare-backends", action="store_true",
                    help="also benchmark compiled vs interpreted kernels")
    sp.add_argument("--compare-envs", type=int, default=64)
    sp.add_argument("--compare-steps", type=int, default=200)
    common(sp)
    sp.set_defaults(fn=_cmd_bench)

    sp = sub.add_parser("validate-config", help="check a config file/overrides")
    common(sp)
    sp.add_argument("--dump-config", help="write the effective config")
    sp.set_defaults(fn=_cmd_validate_config)
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
