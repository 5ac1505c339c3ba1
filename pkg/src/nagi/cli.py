"""Command-line interface: ``nagi run``, ``nagi eval``, ``nagi inspect``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from nagi import config as config_mod
from nagi.codec import ACTION_NAMES
from nagi.config import ConfigError, RunConfig
from nagi.environment import generate_schedule
from nagi.evolution import GenerationRecord, resolve_workers, run
from nagi.genome import GenomeError, NodeKind, load_genome, save_genome, validate_genome
from nagi.lifetime import evaluate, make_agent

EXIT_OK = 0
EXIT_CONFIG = 2

log = logging.getLogger("nagi")


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = config_mod.load_config(args.config)
    except ConfigError as exc:
        return _fail(f"{args.config}: {exc}")
    if args.seed is not None:
        cfg = cfg.replace(master_seed=args.seed)
    if args.out is not None:
        cfg = cfg.replace(output_dir=str(args.out))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_mod.dump_config(cfg, out / "config.resolved.json")
    workers = resolve_workers(args.workers)

    def save_champion(record: GenerationRecord) -> None:
        save_genome(record.champion, out / f"champion_gen_{record.generation}.json", record.champion_meta)

    from nagi import report

    result = run(cfg, workers=workers, on_generation=save_champion)
    report.write_metrics(result.history, out / "metrics.csv")
    if not args.no_plots and result.history:
        report.plot_history(result.history, out / "fitness.png", random_baseline=_random_baseline(cfg))
    if result.history:
        last = result.history[-1]
        print(f"{len(result.history)} generations; final best fitness {last.best_fitness:.2f}")
    print(f"wrote {out / 'metrics.csv'}")
    return EXIT_OK


def _random_baseline(cfg: RunConfig) -> float:
    lt = cfg.lifetime
    return lt.initial_health / ((lt.reward_decrement + lt.penalty_decrement) / 2)


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        genome, meta = load_genome(args.genome)
    except GenomeError as exc:
        return _fail(str(exc))
    try:
        cfg = config_mod.load_config(args.config)
    except ConfigError as exc:
        return _fail(f"{args.config}: {exc}")
    env_seed = args.env_seed if args.env_seed is not None else meta.get("env_seed")
    if args.weight_seed is not None:
        weight_seeds = [args.weight_seed]
    else:
        weight_seeds = list(meta.get("weight_seeds", []))
    if env_seed is None or not weight_seeds:
        return _fail("--env-seed and --weight-seed are required when the genome file records no seeds")

    schedule = generate_schedule(int(env_seed), cfg.environment)
    report_topology = None
    lifetimes = []
    for i, seed in enumerate(weight_seeds):
        agent = make_agent(genome, int(seed), cfg)
        if report_topology is None:
            report_topology = agent.net.topology_report()
            print(f"topology: {report_topology['inputs']} inputs, {report_topology['outputs']} outputs, "
                  f"{report_topology['hidden']} hidden, {len(report_topology['synapses'])} synapses")
            print("edges: " + " ".join(f"{a}->{b}" for a, b in report_topology["synapses"]))
        samples: list[dict] = []
        rows: list[dict] = []
        tracing = args.trace is not None and i == 0

        def on_step(state, sample, action, agent=agent, samples=samples, rows=rows, tracing=tracing):
            if not samples or samples[-1]["sample_obj"] is not sample or samples[-1]["steps"] >= cfg.lifetime.sample_steps:
                samples.append({"sample_obj": sample, "steps": 0, "correct": 0, "actions": [0] * len(ACTION_NAMES)})
            entry = samples[-1]
            entry["steps"] += 1
            entry["correct"] += action == sample.label
            entry["actions"][action] += 1
            if tracing:
                rows.append({
                    "step": state.lifetime,
                    "sample": len(samples) - 1,
                    "sensors": sample.sensors,
                    "label": sample.label,
                    "action": action,
                    "reward": state.reward_flag,
                    "penalty": state.penalty_flag,
                    "health": state.health,
                    "input_spikes": agent.last_inputs,
                    "output_spikes": agent.last_outputs,
                    "weights": list(agent.net.magnitude),
                })

        lifetime = evaluate(genome, schedule, int(seed), cfg, on_step=on_step, agent=agent)
        lifetimes.append(lifetime)
        print(f"weight seed {seed}: lifetime {lifetime}")
        print("  sample  sensors         label  steps  correct  majority")
        for k, s in enumerate(samples):
            obj = s["sample_obj"]
            sensors = ",".join(f"{x:.3f}" for x in obj.sensors)
            majority = ACTION_NAMES[int(np.argmax(s["actions"]))]
            print(f"  {k:6d}  {sensors:<14s}  {ACTION_NAMES[obj.label]:<5s}  {s['steps']:5d}  {s['correct']:7d}  {majority}")
        if tracing:
            from nagi import report

            report.write_trace(rows, args.trace)
            report.plot_trace(rows, Path(args.trace).with_suffix(".png"))
            print(f"trace: {len(rows)} rows -> {args.trace}")
    if len(lifetimes) > 1:
        print(f"fitness (mean lifetime): {float(np.mean(lifetimes))!r}")
    else:
        print(f"fitness: {float(lifetimes[0])!r}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        genome, meta = load_genome(args.genome)
        validate_genome(genome)
    except GenomeError as exc:
        return _fail(str(exc))
    if meta:
        print("meta: " + json.dumps(meta, sort_keys=True))
    print(f"nodes ({len(genome.nodes)}):")
    for n in genome.nodes:
        if n.kind is NodeKind.INPUT:
            print(f"  {n.id:4d}  input")
        else:
            p = n.plasticity
            print(f"  {n.id:4d}  {n.kind.value:<6s}  {n.neurotransmitter.value:<10s}  "
                  f"{p.kind.value:<24s}  a+={p.a_plus:.4f}  a-={p.a_minus:.4f}")
    print(f"connections ({len(genome.connections)}, {genome.n_enabled} enabled):")
    for c in genome.connections:
        flag = "" if c.enabled else "  (disabled)"
        print(f"  #{c.innovation:<4d} {c.in_node:4d} -> {c.out_node}{flag}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nagi", description="Neuroevolution of self-learning spiking agents")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-generation progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an evolution experiment")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--out", help="override output_dir")
    p.add_argument("--workers", type=int, help="evaluation processes (default: $NAGI_WORKERS or 1)")
    p.add_argument("--no-plots", action="store_true", help="skip fitness.png")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="replay one genome's lifetime")
    p.add_argument("--genome", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--env-seed", type=int, help="generation seed (default: recorded in genome meta)")
    p.add_argument("--weight-seed", type=int, help="weight seed (default: recorded trial seeds)")
    p.add_argument("--trace", help="write a per-step CSV trace (and a PNG next to it)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="pretty-print a genome file")
    p.add_argument("--genome", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
