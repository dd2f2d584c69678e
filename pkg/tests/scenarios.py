"""Workloads shared by the acceptance suite (and handy for manual tuning)."""

from __future__ import annotations

import numpy as np

from antplace.colony import ColonyEngine, ColonyParams
from antplace.graph import AddColor, AddEdge, AddVertex, DynamicGraph, Tick
from antplace.metrics import brute_force_optimum, cut_ratio, evaluate, stability
from antplace.workloads import ChurnSchedule, CommunitySpec, gen_churn, gen_communities


def two_cliques(n=8):
    """Two K_n joined by one bridge between vertex 0 and vertex n; two colors."""
    events = [AddVertex(i) for i in range(2 * n)]
    e = 0
    for base in (0, n):
        for i in range(n):
            for j in range(i + 1, n):
                events.append(AddEdge(e, base + i, base + j, 1.0))
                e += 1
    events.append(AddEdge(e, 0, n, 1.0))
    events += [AddColor(0), AddColor(1)]
    return events


def _run(engine, steps, watch):
    for _ in range(steps):
        cur = engine.step()
        if watch is not None:
            watch(engine, cur)


def two_clique_run(seed, steps=2000, params=None, watch=None):
    """``watch(engine, assignment)`` is called after every step."""
    engine = ColonyEngine(DynamicGraph().apply_all(two_cliques()), params or ColonyParams(), seed)
    _run(engine, steps, watch)
    return engine


def oracle_graph(i):
    """The i-th small random community graph: |V| <= 10, K alternating 2/3."""
    k = 2 + i % 2
    spec = CommunitySpec(n_per_community=10 // k, k=k, p_in=0.8, p_out=0.15, seed=i)
    events, _ = gen_communities(spec)
    graph = DynamicGraph().apply_all([AddColor(c) for c in range(k)])
    graph.apply_all(e for e in events if not isinstance(e, Tick))
    return graph, k


def oracle_case(i, steps=2000, params=None, optimum=None, watch=None):
    """(engine score, brute-force optimum) for oracle graph ``i``."""
    graph, k = oracle_graph(i)
    if optimum is None:
        optimum, _ = brute_force_optimum(graph, k, colors=range(k))
    engine = ColonyEngine(graph, params or ColonyParams(), seed=i)
    _run(engine, steps, watch)
    return evaluate(graph, graph.assignment()).score, optimum


ADAPT_WARMUP = 1000
ADAPT_AFTER = 1000


def adaptation_stream(seed):
    """Two 4-vertex communities; at the warmup boundary they merge, a third
    community of 4 appears and a third color is added (12 vertices total)."""
    base, labels = gen_communities(CommunitySpec(4, 2, p_in=1.0, p_out=0.25, seed=seed))
    t = ADAPT_WARMUP
    schedule = ChurnSchedule(merges=[(t, 0, 1, 1.0)], new_communities=[(t, 4)],
                             add_colors=[(t + 1, 2)], horizon=t + ADAPT_AFTER,
                             p_in=1.0, p_out=0.1)
    yield AddColor(0)
    yield AddColor(1)
    yield from gen_churn(base, schedule, labels, seed=seed)


def adaptation_run(seed, params=None, optimum=None, watch=None):
    """Replay the adaptation stream.

    Returns ``(final cut_ratio, optimum cut_ratio, stabilities of the last 50
    steps)``; the optimum is the brute-force best-score witness with K=3.
    """
    engine = ColonyEngine(DynamicGraph(), params or ColonyParams(), seed)
    graph = engine.graph
    stab, prev = [], None
    for ev in adaptation_stream(seed):
        if not isinstance(ev, Tick):
            engine.apply(ev)
            continue
        cur = engine.step()
        if watch is not None:
            watch(engine, cur)
        if prev is not None:
            stab.append(stability(cur, prev))
        prev = cur
    if optimum is None:
        _, witness = brute_force_optimum(graph, 3, colors=graph.colors())
        optimum = cut_ratio(graph, witness)
    return cut_ratio(graph, graph.assignment()), optimum, np.array(stab[-50:])
