"""Synthetic event streams with known community structure.

Every generator is deterministic for a given seed and yields
:mod:`antplace.graph` events lazily, so long churning runs never hold the
whole stream in memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .exceptions import ScheduleError
from .graph import (AddColor, AddEdge, AddVertex, RemoveColor, RemoveEdge,
                    RemoveVertex, SetWeight, Tick)


@dataclass(frozen=True)
class CommunitySpec:
    n_per_community: int = 8
    k: int = 2
    w_in: float = 1.0
    w_out: float = 1.0
    p_in: float = 1.0
    p_out: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_per_community < 1 or self.k < 1:
            raise ValueError("need at least one community of at least one vertex")
        for name in ("p_in", "p_out"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        for name in ("w_in", "w_out"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be non-negative")


def _sample_pairs(rng, n_pairs, p):
    """Indices of the pairs kept when each of ``n_pairs`` survives with prob ``p``."""
    if n_pairs == 0 or p <= 0.0:
        return np.zeros(0, dtype=np.int64)
    m = int(rng.binomial(n_pairs, p))
    if m == n_pairs:
        return np.arange(n_pairs, dtype=np.int64)
    return np.sort(rng.choice(n_pairs, size=m, replace=False))


def _triangle_pairs(n, idx):
    """Decode lexicographic indices over ``{(a, b): 0 <= a < b < n}``."""
    a_range = np.arange(n, dtype=np.int64)
    row_start = a_range * n - a_range * (a_range + 1) // 2
    a = np.searchsorted(row_start, idx, side="right") - 1
    b = idx - row_start[a] + a + 1
    return a, b


def community_edges(spec: CommunitySpec):
    """Sorted ``(u, v, weight)`` arrays of a planted-partition graph."""
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n_per_community, spec.k
    us, vs, ws = [], [], []
    for i in range(k):
        for j in range(i, k):
            if i == j:
                idx = _sample_pairs(rng, n * (n - 1) // 2, spec.p_in)
                a, b = _triangle_pairs(n, idx)
                w = spec.w_in
            else:
                idx = _sample_pairs(rng, n * n, spec.p_out)
                a, b = idx // n, idx % n
                w = spec.w_out
            us.append(i * n + a)
            vs.append(j * n + b)
            ws.append(np.full(idx.shape[0], w))
    u, v, w = (np.concatenate(x) for x in (us, vs, ws))
    order = np.lexsort((v, u))
    return u[order], v[order], w[order]


def gen_communities(spec: CommunitySpec):
    """Planted communities as ``(events, labels)``.

    Vertex ``c * n + i`` is member ``i`` of community ``c``. Intra pairs are
    joined with probability ``p_in`` at weight ``w_in``, inter pairs with
    ``p_out`` at ``w_out``. The event list ends with one ``Tick``.
    """
    n, k = spec.n_per_community, spec.k
    u, v, w = community_edges(spec)
    events = [AddVertex(i) for i in range(n * k)]
    events += [AddEdge(e, int(a), int(b), float(x))
               for e, (a, b, x) in enumerate(zip(u.tolist(), v.tolist(), w.tolist()))]
    events.append(Tick())
    labels = {i: i // n for i in range(n * k)}
    return events, labels


# -- churn ------------------------------------------------------------------------

@dataclass(frozen=True)
class VertexChurn:
    start: int
    stop: int
    remove_rate: float
    add_rate: float


@dataclass
class ChurnSchedule:
    """Structural changes spliced into a base stream.

    Steps count ``Tick`` events from 1. Merges, splits, new communities and
    vertex churn at step ``t`` are inserted right after the ``t``-th tick;
    color changes at step ``t`` right before it.
    """

    merges: list = field(default_factory=list)          # (step, a, b, p)
    splits: list = field(default_factory=list)          # (step, a, b)
    new_communities: list = field(default_factory=list)  # (step, size)
    add_colors: list = field(default_factory=list)      # (step, color)
    remove_colors: list = field(default_factory=list)   # (step, color)
    vertex_churn: Optional[VertexChurn] = None
    horizon: Optional[int] = None
    w_in: float = 1.0
    w_out: float = 1.0
    p_in: float = 1.0
    p_out: float = 0.0

    def is_empty(self):
        return not (self.merges or self.splits or self.new_communities or self.add_colors
                    or self.remove_colors or self.vertex_churn or self.horizon)

    def last_step(self):
        steps = [m[0] for m in self.merges] + [s[0] for s in self.splits]
        steps += [c[0] for c in self.new_communities + self.add_colors + self.remove_colors]
        if self.vertex_churn:
            steps.append(self.vertex_churn.stop - 1)
        return max(steps, default=0)


class _Tracker:
    """Mirror of the graph structure the stream has built so far."""

    def __init__(self, labels):
        self.labels = dict(labels)
        self.edges = {}
        self.pairs = {}
        self.incident = {}
        self.next_vertex = 0
        self.next_edge = 0

    def feed(self, ev):
        if isinstance(ev, AddVertex):
            self.incident[ev.vertex] = set()
            self.next_vertex = max(self.next_vertex, ev.vertex + 1)
        elif isinstance(ev, RemoveVertex):
            for e in list(self.incident.pop(ev.vertex)):
                self._drop_edge(e)
            self.labels.pop(ev.vertex, None)
        elif isinstance(ev, AddEdge):
            self.edges[ev.edge] = (ev.u, ev.v)
            self.pairs[(min(ev.u, ev.v), max(ev.u, ev.v))] = ev.edge
            self.incident[ev.u].add(ev.edge)
            self.incident[ev.v].add(ev.edge)
            self.next_edge = max(self.next_edge, ev.edge + 1)
        elif isinstance(ev, RemoveEdge):
            self._drop_edge(ev.edge)
        return ev

    def _drop_edge(self, e):
        u, v = self.edges.pop(e)
        del self.pairs[(min(u, v), max(u, v))]
        for x in (u, v):
            if x in self.incident:      # absent while its vertex is being removed
                self.incident[x].discard(e)

    def members(self, label):
        return sorted(v for v, c in self.labels.items() if c == label and v in self.incident)

    def new_edge(self, u, v, w):
        ev = AddEdge(self.next_edge, min(u, v), max(u, v), w)
        return self.feed(ev)


def gen_churn(base: Iterable, schedule: ChurnSchedule, labels: dict, seed: int = 0,
              label_sink: Optional[dict] = None) -> Iterator:
    """Splice the changes of ``schedule`` into ``base``.

    ``labels`` gives the community of every base vertex. If ``label_sink`` is
    a dict it receives the community of every vertex created by the churn.
    With an empty schedule the base stream passes through unchanged.
    """
    known = set(labels.values())
    for _, a, b, *rest in schedule.merges + schedule.splits:
        if a not in known or b not in known or a == b:
            raise ScheduleError(f"merge/split needs two distinct known communities, got {a}, {b}")
    if any(item[0] < 1 for item in schedule.merges + schedule.splits + schedule.new_communities
           + schedule.add_colors + schedule.remove_colors):
        raise ScheduleError("schedule steps start at 1")
    if schedule.horizon is not None and schedule.last_step() > schedule.horizon:
        raise ScheduleError("schedule extends past its horizon")
    vc = schedule.vertex_churn
    if vc and not (0 <= vc.remove_rate <= 1 and 0 <= vc.add_rate <= 1 and 1 <= vc.start <= vc.stop):
        raise ScheduleError("vertex churn needs rates in [0, 1] and 1 <= start <= stop")
    return _churn_stream(base, schedule, labels, seed, label_sink)


def _churn_stream(base, schedule, labels, seed, label_sink):
    rng = np.random.default_rng(seed)
    track = _Tracker(labels)
    next_label = max(labels.values(), default=-1) + 1
    tick = 0

    def before_tick(t):
        for s, c in schedule.add_colors:
            if s == t:
                yield AddColor(c)
        for s, c in schedule.remove_colors:
            if s == t:
                yield RemoveColor(c)

    def after_tick(t):
        nonlocal next_label
        for s, a, b, p in schedule.merges:
            if s != t:
                continue
            for u in track.members(a):
                for v in track.members(b):
                    key = (min(u, v), max(u, v))
                    if key in track.pairs:
                        yield SetWeight(track.pairs[key], schedule.w_in)
                    elif rng.random() < p:
                        yield track.new_edge(u, v, schedule.w_in)
        for s, a, b in schedule.splits:
            if s != t:
                continue
            for u in track.members(a):
                for v in track.members(b):
                    key = (min(u, v), max(u, v))
                    if key in track.pairs:
                        yield track.feed(RemoveEdge(track.pairs[key]))
        for s, size in schedule.new_communities:
            if s != t:
                continue
            label = next_label
            next_label += 1
            yield from _spawn(rng, track, label, size, schedule, label_sink)
        vc = schedule.vertex_churn
        if vc and vc.start <= t < vc.stop:
            yield from _vertex_churn(rng, track, vc, schedule, label_sink)

    for ev in base:
        if isinstance(ev, Tick):
            tick += 1
            yield from before_tick(tick)
            yield ev
            yield from after_tick(tick)
        else:
            yield track.feed(ev)
    horizon = schedule.horizon or 0
    if tick < schedule.last_step() and not horizon:
        raise ScheduleError(f"base stream has {tick} ticks but the schedule reaches "
                            f"step {schedule.last_step()}; set a horizon")
    while tick < horizon:
        tick += 1
        yield from before_tick(tick)
        yield Tick()
        yield from after_tick(tick)


def _pick(rng, pool, p):
    pool = np.asarray(pool, dtype=np.int64)
    m = int(rng.binomial(pool.shape[0], p)) if pool.shape[0] and p > 0 else 0
    if m == 0:
        return []
    return np.sort(rng.choice(pool, size=m, replace=False)).tolist()


def _spawn(rng, track, label, size, schedule, label_sink, by_label=None):
    """Add ``size`` fresh vertices to community ``label`` with random ties."""
    if by_label is None:
        by_label = {}
        for v in sorted(track.incident):
            by_label.setdefault(track.labels.get(v), []).append(v)
    for _ in range(size):
        vid = track.next_vertex
        yield track.feed(AddVertex(vid))
        mates = by_label.get(label, [])
        others = [v for c, vs in sorted(by_label.items(), key=lambda kv: str(kv[0]))
                  if c != label for v in vs] if schedule.p_out > 0 else []
        for u in _pick(rng, mates, schedule.p_in):
            yield track.new_edge(u, vid, schedule.w_in)
        for u in _pick(rng, others, schedule.p_out):
            yield track.new_edge(u, vid, schedule.w_out)
        track.labels[vid] = label
        by_label.setdefault(label, []).append(vid)
        if label_sink is not None:
            label_sink[vid] = label


def _vertex_churn(rng, track, vc, schedule, label_sink):
    live = np.array(sorted(track.incident), dtype=np.int64)
    n_live = live.shape[0]
    n_remove = int(rng.binomial(n_live, vc.remove_rate)) if n_live else 0
    n_add = int(rng.binomial(n_live, vc.add_rate)) if n_live else 0
    if n_remove:
        for v in np.sort(rng.choice(live, size=n_remove, replace=False)).tolist():
            yield track.feed(RemoveVertex(v))
    communities = sorted({c for v, c in track.labels.items() if v in track.incident})
    if not communities or not n_add:
        return
    by_label = {}
    for v in sorted(track.incident):
        by_label.setdefault(track.labels.get(v), []).append(v)
    picks = rng.integers(0, len(communities), size=n_add)
    for i in picks.tolist():
        yield from _spawn(rng, track, communities[i], 1, schedule, label_sink, by_label)


# -- flocking --------------------------------------------------------------------

@dataclass(frozen=True)
class FlockSpec:
    n_agents: int = 200
    world: float = 100.0
    comm_radius: float = 5.0
    max_speed: float = 1.0
    cohesion: float = 0.01
    alignment: float = 0.05
    separation: float = 0.05
    separation_radius: float = 1.0
    perception: float = 10.0
    predator_count: int = 1
    predator_speed: float = 1.5
    flee_radius: float = 10.0
    flee: float = 0.5
    n_schools: int = 4
    school_spread: float = 4.0
    duration: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("need at least one agent")
        if not 0 < self.comm_radius < self.world:
            raise ValueError("comm_radius must be positive and smaller than the world")
        if self.duration < 1 or self.n_schools < 1 or self.predator_count < 0:
            raise ValueError("duration and n_schools must be >= 1, predator_count >= 0")


class Flock:
    """Boids on a torus, plus predators cruising in straight lines."""

    def __init__(self, spec: FlockSpec, positions=None, velocities=None,
                 predators=None, predator_velocities=None):
        self.spec = spec
        rng = np.random.default_rng(spec.seed)
        n, L = spec.n_agents, spec.world
        self.labels = np.arange(n) % spec.n_schools
        centres = rng.uniform(0, L, size=(spec.n_schools, 2))
        headings = rng.uniform(0, 2 * np.pi, size=spec.n_schools)
        pos = centres[self.labels] + rng.normal(0, spec.school_spread, size=(n, 2))
        vel = 0.5 * spec.max_speed * np.stack([np.cos(headings), np.sin(headings)], 1)[self.labels]
        pred = rng.uniform(0, L, size=(spec.predator_count, 2))
        ang = rng.uniform(0, 2 * np.pi, size=spec.predator_count)
        pvel = spec.predator_speed * np.stack([np.cos(ang), np.sin(ang)], 1)
        self.pos = np.mod(np.asarray(positions if positions is not None else pos, float), L)
        self.vel = np.asarray(velocities if velocities is not None else vel, float)
        self.pred = np.mod(np.asarray(predators if predators is not None else pred, float).reshape(-1, 2), L)
        self.pred_vel = np.asarray(predator_velocities if predator_velocities is not None
                                   else pvel, float).reshape(-1, 2)

    def _offsets(self, a, b):
        d = b[None, :, :] - a[:, None, :]
        d -= self.spec.world * np.round(d / self.spec.world)
        return d, np.sqrt((d ** 2).sum(axis=-1))

    def update(self):
        s = self.spec
        d, dist = self._offsets(self.pos, self.pos)
        np.fill_diagonal(dist, np.inf)
        near = dist < s.perception
        count = near.sum(axis=1, keepdims=True)
        safe = np.maximum(count, 1)
        centre = (d * near[..., None]).sum(axis=1) / safe
        mean_vel = (near.astype(float) @ self.vel) / safe
        acc = s.cohesion * centre + s.alignment * (mean_vel - self.vel) * (count > 0)
        close = dist < s.separation_radius
        push = -(d / np.maximum(dist, 1e-9)[..., None] ** 2) * close[..., None]
        acc += s.separation * push.sum(axis=1)
        if self.pred.shape[0]:
            pd, pdist = self._offsets(self.pos, self.pred)
            scared = pdist < s.flee_radius
            away = -(pd / np.maximum(pdist, 1e-9)[..., None]) * scared[..., None]
            acc += s.flee * away.sum(axis=1)
        self.vel = self.vel + acc
        speed = np.sqrt((self.vel ** 2).sum(axis=1, keepdims=True))
        self.vel = np.where(speed > s.max_speed, self.vel * s.max_speed / np.maximum(speed, 1e-12),
                            self.vel)
        self.pos = np.mod(self.pos + self.vel, s.world)
        self.pred = np.mod(self.pred + self.pred_vel, s.world)

    def proximity(self):
        """``{(i, j): weight}`` for every pair closer than ``comm_radius``."""
        _, dist = self._offsets(self.pos, self.pos)
        i, j = np.nonzero(np.triu(dist < self.spec.comm_radius, k=1))
        w = 1.0 - dist[i, j] / self.spec.comm_radius
        return {(int(a), int(b)): float(x) for a, b, x in zip(i, j, w)}


def gen_flocking(spec: FlockSpec, flock: Optional[Flock] = None):
    """Proximity-graph deltas of a boids run; yields ``Tick`` after each frame.

    Returns a generator; the ground-truth school of agent ``i`` is
    ``Flock(spec).labels[i]``.
    """
    flock = flock or Flock(spec)
    for i in range(spec.n_agents):
        yield AddVertex(i)
    live = {}
    next_edge = 0
    for t in range(spec.duration):
        if t:
            flock.update()
        now = flock.proximity()
        for pair in sorted(live.keys() - now.keys()):
            yield RemoveEdge(live.pop(pair)[0])
        for pair in sorted(now):
            w = now[pair]
            if pair in live:
                eid, old = live[pair]
                if w != old:
                    live[pair] = (eid, w)
                    yield SetWeight(eid, w)
            else:
                live[pair] = (next_edge, w)
                yield AddEdge(next_edge, pair[0], pair[1], w)
                next_edge += 1
        yield Tick()


def flock_labels(spec: FlockSpec):
    return {i: int(c) for i, c in enumerate(np.arange(spec.n_agents) % spec.n_schools)}
