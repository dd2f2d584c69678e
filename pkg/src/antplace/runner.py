"""Run configuration and the replay/step/report loop."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, fields
from typing import Optional

from . import formats
from .advisor import Advisor
from .colony import ColonyEngine, ColonyParams
from .graph import AddColor, DynamicGraph, Tick
from .metrics import evaluate
from .workloads import (ChurnSchedule, CommunitySpec, FlockSpec, gen_churn,
                        gen_communities, gen_flocking)

log = logging.getLogger(__name__)

GENERATORS = ("communities", "flocking")


@dataclass
class RunConfig:
    alpha: float = 0.5
    beta: float = 2.0
    gamma: float = 1.0
    rho: float = 0.001
    q: float = 0.1
    epsilon: float = 0.01
    phi_min: float = 1e-9
    eta: float = 1.0
    tau: int = 7
    lam: float = 0.5
    h: int = 5
    seed: int = 0
    max_steps: Optional[int] = None
    trace: Optional[str] = None
    generator: Optional[str] = None
    colors: Optional[int] = None
    metrics: str = "metrics.csv"
    advice: str = "advice.log"
    snapshot_dir: Optional[str] = None
    snapshot_every: int = 0
    # generator knobs
    n_per_community: int = 8
    k: int = 2
    w_in: float = 1.0
    w_out: float = 1.0
    p_in: float = 1.0
    p_out: float = 0.0
    n_agents: int = 200
    world: float = 100.0
    comm_radius: float = 5.0
    n_schools: int = 4
    predator_count: int = 1

    def colony_params(self):
        return ColonyParams(**{name: getattr(self, name) for name in ColonyParams.field_names()})

    def validate(self):
        self.colony_params()
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if (self.trace is None) == (self.generator is None):
            raise ValueError("give exactly one of trace= or generator=")
        if self.generator is not None and self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; pick one of {GENERATORS}")
        if self.generator is not None and self.max_steps is None:
            raise ValueError("generator runs need max_steps")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")
        if self.snapshot_every and not self.snapshot_dir:
            raise ValueError("snapshot_every needs snapshot_dir")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        return self


# config-file key -> attribute (only where they differ)
_ALIASES = {"lambda": "lam"}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name, raw):
    kind = _TYPES[name]
    if raw.lower() in ("none", ""):
        return None
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def config_keys():
    keys = [f.name for f in fields(RunConfig)]
    return ["lambda" if k == "lam" else k for k in keys]


def parse_config(text, base: Optional[RunConfig] = None) -> RunConfig:
    """Read a flat ``key = value`` config; ``#`` starts a comment."""
    cfg = base or RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        apply_setting(cfg, key, value, where=f"config line {lineno}")
    return cfg


def apply_setting(cfg, key, value, where="setting"):
    name = _ALIASES.get(key, key)
    if name not in _TYPES:
        raise ValueError(f"{where}: unknown key {key!r}")
    try:
        setattr(cfg, name, _coerce(name, str(value)))
    except ValueError:
        raise ValueError(f"{where}: bad value {value!r} for {key}") from None
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def event_source(cfg: RunConfig):
    """Open the trace (or build the generator stream) named by ``cfg``."""
    if cfg.trace is not None:
        fh = open(cfg.trace)
        return formats.iter_trace(fh), fh
    if cfg.generator == "communities":
        spec = CommunitySpec(cfg.n_per_community, cfg.k, cfg.w_in, cfg.w_out,
                             cfg.p_in, cfg.p_out, cfg.seed)
        base, _ = gen_communities(spec)
        colors = cfg.colors if cfg.colors is not None else cfg.k
        stream = gen_churn(base, ChurnSchedule(horizon=cfg.max_steps), _labels(spec))
    else:
        spec = FlockSpec(n_agents=cfg.n_agents, world=cfg.world, comm_radius=cfg.comm_radius,
                         n_schools=cfg.n_schools, predator_count=cfg.predator_count,
                         duration=cfg.max_steps, seed=cfg.seed)
        colors = cfg.colors if cfg.colors is not None else cfg.n_schools
        stream = gen_flocking(spec)
    return _prefixed([AddColor(c) for c in range(colors)], stream), None


def _labels(spec):
    return {i: i // spec.n_per_community for i in range(spec.n_per_community * spec.k)}


def _prefixed(head, tail):
    yield from head
    yield from tail


def run(cfg: RunConfig) -> int:
    """Replay the configured events, stepping the engine at every tick.

    Writes one metrics row per step, the advice log, and a snapshot every
    ``snapshot_every`` steps. Returns the number of steps executed.
    """
    cfg.validate()
    engine = ColonyEngine(DynamicGraph(), cfg.colony_params(), cfg.seed)
    graph = engine.graph
    advisor = Advisor(cfg.h)
    if cfg.snapshot_dir:
        os.makedirs(cfg.snapshot_dir, exist_ok=True)
    events, handle = event_source(cfg)
    steps = 0
    previous = None
    try:
        with open(cfg.metrics, "w", newline="") as mfh, open(cfg.advice, "w") as afh:
            mfh.write(",".join(formats.METRICS_HEADER) + "\n")
            for event in events:
                if not isinstance(event, Tick):
                    engine.apply(event)
                    continue
                if cfg.max_steps is not None and steps >= cfg.max_steps:
                    break
                assignment = engine.step()
                steps += 1
                moves = 0
                if graph.n_colors:
                    advice = advisor.advise(assignment, graph.streaks(), graph.colors(), steps)
                    afh.write(formats.format_moves(advice))
                    moves = len(advice)
                record = evaluate(graph, assignment, previous, cfg.lam, steps)
                mfh.write(",".join(formats.metrics_row(record, moves)) + "\n")
                if cfg.snapshot_every and steps % cfg.snapshot_every == 0:
                    path = os.path.join(cfg.snapshot_dir, f"snapshot_{steps:06d}.txt")
                    formats.export_snapshot(graph, steps, path)
                previous = assignment
    finally:
        if handle is not None:
            handle.close()
    log.info("ran %d steps", steps)
    return steps
