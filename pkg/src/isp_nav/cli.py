"""Command-line entry point: ``isp-nav run | bench | dump-field``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import field as fieldio
from . import scenario as scen
from .bench import run_bench
from .sim import Simulation

EXIT_OK, EXIT_INPUT, EXIT_COLLISION = 0, 1, 2


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ISP_NAV_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise scen.ScenarioError(f"ISP_NAV_SEED must be an integer, got {env!r}") from None


def _load(path):
    try:
        return scen.load(path)
    except OSError as exc:
        raise scen.ScenarioError(f"cannot read scenario: {exc}") from None


def _ego(scenario):
    for a in scenario.agents:
        if a.mode == "controlled":
            return a.state.id
    return scenario.agents[0].state.id


def cmd_run(scenario_path, out_trace_path, field_dump_dir=None, dump_every=None, seed=0):
    scenario = _load(scenario_path)
    if dump_every is not None and dump_every < 1:
        raise scen.ScenarioError("--dump-every must be >= 1")
    ego = _ego(scenario)
    if field_dump_dir is not None:
        Path(field_dump_dir).mkdir(parents=True, exist_ok=True)
        dump_every = dump_every or 1

    sim = Simulation(scenario, seed)
    with open(out_trace_path, "w", encoding="utf-8", newline="") as out:
        out.write(scen.TRACE_HEADER + "\n")
        for _ in range(scenario.config.steps):
            step = sim.step_index
            records = sim.step()
            for r in records:
                out.write(scen.trace_row(r) + "\n")
            if field_dump_dir is not None and step % dump_every == 0:
                fieldio.save(sim.fields[ego], Path(field_dump_dir) / f"field_{step}_{ego}.txt")
            if sim.collided:
                return EXIT_COLLISION
    return EXIT_OK


def cmd_dump_field(scenario_path, out_path, step=1, agent=None, seed=0):
    """Write the field an agent senses at ``step`` (world advanced ``step`` times)."""
    scenario = _load(scenario_path)
    agent = agent or _ego(scenario)
    sim = Simulation(scenario, seed)
    if agent not in sim.states:
        raise scen.ScenarioError(f"no agent {agent!r} in scenario")
    for _ in range(step):
        sim.step()
        if sim.collided:
            break
    sim.sense_all()
    fieldio.save(sim.fields[agent], out_path)
    return EXIT_OK


def cmd_bench(field_width, field_height, object_counts, repetitions, seed=0, out=sys.stdout):
    rows = run_bench(field_width, field_height, object_counts, repetitions, seed)
    out.write("N,median_ns,field_bytes\n")
    for row in rows:
        out.write(row.csv() + "\n")
    for row in rows:
        print(f"# N={row.n_objects}: compose_many {row.compose_ns} ns (not bounded)",
              file=sys.stderr)
    return rows


def _counts(text):
    try:
        counts = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad object count list {text!r}") from None
    if not counts or any(c < 0 for c in counts):
        raise argparse.ArgumentTypeError("object counts must be a non-empty list of integers >= 0")
    return counts


def build_parser():
    p = argparse.ArgumentParser(prog="isp-nav", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run a scenario and write a CSV trace")
    r.add_argument("--scenario", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--dump-dir")
    r.add_argument("--dump-every", type=int)
    r.add_argument("--seed", type=int)

    b = sub.add_parser("bench", help="time safe_controls against object count")
    b.add_argument("--width", type=int, default=640)
    b.add_argument("--height", type=int, default=480)
    b.add_argument("--objects", type=_counts, default=[1, 10, 100])
    b.add_argument("--reps", type=int, default=200)
    b.add_argument("--seed", type=int)
    b.add_argument("--out")

    d = sub.add_parser("dump-field", help="write one agent's sensed field")
    d.add_argument("--scenario", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--step", type=int, default=1)
    d.add_argument("--agent")
    d.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        seed = _seed(args)
        if args.verb == "run":
            return cmd_run(args.scenario, args.out, args.dump_dir, args.dump_every, seed)
        if args.verb == "dump-field":
            return cmd_dump_field(args.scenario, args.out, args.step, args.agent, seed)
        if args.reps < 1:
            raise scen.ScenarioError("--reps must be >= 1")
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                cmd_bench(args.width, args.height, args.objects, args.reps, seed, fh)
        else:
            cmd_bench(args.width, args.height, args.objects, args.reps, seed)
        return EXIT_OK
    except (scen.ScenarioError, ValueError) as exc:
        print(f"isp-nav: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
