"""Command line entry point: ``antplace run | gen | eval``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import formats
from .exceptions import AntPlaceError
from .graph import AddColor, DynamicGraph, Tick
from .metrics import BRUTE_FORCE_MAX_VERTICES, balance, brute_force_optimum, cut_ratio, score
from .runner import RunConfig, apply_setting, config_keys, load_config, run
from .workloads import (ChurnSchedule, CommunitySpec, FlockSpec, VertexChurn, flock_labels,
                        gen_churn, gen_communities, gen_flocking)


def _split(text, kinds):
    parts = text.split(":")
    if len(parts) != len(kinds):
        raise argparse.ArgumentTypeError(f"expected {len(kinds)} ':'-separated fields, got {text!r}")
    return tuple(k(p) for k, p in zip(kinds, parts))


def _run(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    for key in config_keys():
        value = getattr(args, "opt_" + key)
        if value is not None:
            apply_setting(cfg, key, value, where=f"--{key}")
    steps = run(cfg)
    print(f"steps={steps}")
    return 0


def _gen(args):
    if args.kind == "communities":
        spec = CommunitySpec(args.n_per_community, args.k, args.w_in, args.w_out,
                             args.p_in, args.p_out, args.seed)
        base, labels = gen_communities(spec)
        sink = {}
        schedule = ChurnSchedule(
            merges=[_split(m, (int, int, int, float)) for m in args.merge],
            splits=[_split(s, (int, int, int)) for s in args.split],
            new_communities=[_split(c, (int, int)) for c in args.new_community],
            add_colors=[_split(c, (int, int)) for c in args.add_color],
            remove_colors=[_split(c, (int, int)) for c in args.remove_color],
            vertex_churn=VertexChurn(*_split(args.churn, (int, int, float, float)))
            if args.churn else None,
            horizon=args.steps, w_in=args.w_in, w_out=args.w_out, p_in=args.p_in,
            p_out=args.p_out)
        stream = gen_churn(base, schedule, labels, seed=args.seed, label_sink=sink)
        colors = args.k if args.colors is None else args.colors
    else:
        spec = FlockSpec(n_agents=args.n_agents, world=args.world, comm_radius=args.comm_radius,
                         n_schools=args.n_schools, predator_count=args.predators,
                         duration=args.steps or 500, seed=args.seed)
        stream = gen_flocking(spec)
        labels, sink = flock_labels(spec), {}
        colors = args.n_schools if args.colors is None else args.colors
    head = [AddColor(c) for c in range(colors)]
    with open(args.out, "w") as fh:
        n = formats.write_trace(head, fh) + formats.write_trace(stream, fh)
    if args.truth:
        with open(args.truth, "w") as fh:
            formats.write_labels({**labels, **sink}, fh)
    print(f"events={n}")
    return 0


def _eval(args):
    graph = DynamicGraph()
    with open(args.trace) as fh:
        for event in formats.iter_trace(fh):
            if not isinstance(event, Tick):
                graph.apply(event)
    snap = formats.read_snapshot(args.snapshot)
    assignment = {v: snap.vertices.get(v) for v in graph.vertices()}
    colors = graph.colors()
    cr = cut_ratio(graph, assignment)
    bal = balance(assignment, colors) if colors else 0.0
    print(f"step={snap.step}")
    print(f"cut_ratio={cr:.6f}")
    print(f"balance={bal:.6f}")
    print(f"score={score(cr, bal, args.lam):.6f}")
    if colors and graph.n_vertices <= BRUTE_FORCE_MAX_VERTICES:
        best, witness = brute_force_optimum(graph, len(colors), args.lam, colors)
        print(f"optimum_score={best:.6f}")
        print("optimum=" + " ".join(f"{v}:{c}" for v, c in witness.items()))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="antplace", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay a trace or generator and write metrics/advice")
    p.add_argument("--config", help="flat key=value config file")
    for key in config_keys():
        p.add_argument(f"--{key}", dest="opt_" + key, metavar="VALUE")
    p.set_defaults(func=_run)

    g = sub.add_parser("gen", help="write a synthetic trace and its ground truth")
    g.add_argument("kind", choices=["communities", "flocking"])
    g.add_argument("--out", required=True)
    g.add_argument("--truth", help="ground-truth sidecar path")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--colors", type=int)
    g.add_argument("--steps", type=int, help="pad/run to this many ticks")
    g.add_argument("--n-per-community", type=int, default=8)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--w-in", type=float, default=1.0)
    g.add_argument("--w-out", type=float, default=1.0)
    g.add_argument("--p-in", type=float, default=1.0)
    g.add_argument("--p-out", type=float, default=0.0)
    g.add_argument("--merge", action="append", default=[], metavar="STEP:A:B:P")
    g.add_argument("--split", action="append", default=[], metavar="STEP:A:B")
    g.add_argument("--new-community", action="append", default=[], metavar="STEP:SIZE")
    g.add_argument("--add-color", action="append", default=[], metavar="STEP:COLOR")
    g.add_argument("--remove-color", action="append", default=[], metavar="STEP:COLOR")
    g.add_argument("--churn", metavar="START:STOP:REMOVE:ADD")
    g.add_argument("--n-agents", type=int, default=200)
    g.add_argument("--world", type=float, default=100.0)
    g.add_argument("--comm-radius", type=float, default=5.0)
    g.add_argument("--n-schools", type=int, default=4)
    g.add_argument("--predators", type=int, default=1)
    g.set_defaults(func=_gen)

    e = sub.add_parser("eval", help="score a snapshot against the graph built by a trace")
    e.add_argument("--trace", required=True)
    e.add_argument("--snapshot", required=True)
    e.add_argument("--lambda", dest="lam", type=float, default=0.5)
    e.set_defaults(func=_eval)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (AntPlaceError, OSError, ValueError) as exc:
        print(f"antplace: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
