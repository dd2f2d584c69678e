"""Placement quality: communication cut, load balance, stability, tradeoff score.

Assignments are plain ``{vertex_id: color_id or None}`` mappings; ``None``
means unassigned. Only the induced partition matters, so every function is
invariant under a consistent relabeling of colors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .exceptions import TooLarge

BRUTE_FORCE_MAX_VERTICES = 12


@dataclass(frozen=True)
class MetricsRecord:
    step: int
    cut_ratio: float
    balance: float
    stability: float
    score: float


def cut_ratio(graph, assignment: Mapping[int, Optional[int]]) -> float:
    """Fraction of total edge weight joining differently colored endpoints.

    An unassigned endpoint counts as different from everything, itself
    included. Returns 0.0 for a graph without weight.
    """
    _, us, vs, ws = graph.edge_arrays()
    total = float(ws.sum())
    if total <= 0.0:
        return 0.0
    cut = 0.0
    for u, v, w in zip(us.tolist(), vs.tolist(), ws.tolist()):
        cu = assignment.get(u)
        if cu is None or cu != assignment.get(v):
            cut += w
    return cut / total


def balance(assignment: Mapping[int, Optional[int]], live_colors) -> float:
    """Ideal per-color load divided by the largest actual load.

    Only assigned vertices count. 1.0 is a perfect split; 0.0 when nothing
    is assigned.
    """
    live_colors = list(live_colors)
    if not live_colors:
        raise ValueError("balance needs at least one live color")
    counts = dict.fromkeys(live_colors, 0)
    n = 0
    for c in assignment.values():
        if c is not None:
            counts[c] = counts.get(c, 0) + 1
            n += 1
    if n == 0:
        return 0.0
    return (n / len(live_colors)) / max(counts.values())


def stability(current: Mapping, previous: Mapping) -> float:
    """Share of vertices present in both assignments whose color did not change."""
    common = current.keys() & previous.keys()
    if not common:
        return 1.0
    same = sum(1 for v in common if current[v] == previous[v])
    return same / len(common)


def score(cut: float, bal: float, lam: float = 0.5) -> float:
    """Weighted tradeoff ``lam * (1 - cut) + (1 - lam) * bal``; higher is better."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")
    return lam * (1.0 - cut) + (1.0 - lam) * bal


def evaluate(graph, assignment, previous=None, lam=0.5, step=0) -> MetricsRecord:
    colors = graph.colors()
    cr = cut_ratio(graph, assignment)
    bal = balance(assignment, colors) if colors else 0.0
    stab = stability(assignment, previous) if previous is not None else 1.0
    return MetricsRecord(step, cr, bal, stab, score(cr, bal, lam))


def brute_force_optimum(graph, k: int, lam: float = 0.5, colors=None):
    """Exhaustively score every assignment of ``k`` colors to the vertices.

    Returns ``(best_score, witness)`` where the witness is the
    lexicographically smallest optimal assignment (vertices by id, colors
    ``0..k-1`` or the given ``colors`` in sorted order).
    """
    vertices = graph.vertices()
    n = len(vertices)
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise TooLarge(f"{n} vertices; exhaustive search is capped at {BRUTE_FORCE_MAX_VERTICES}")
    if k < 1:
        raise ValueError("k must be at least 1")
    labels = sorted(colors) if colors is not None else list(range(k))
    if len(labels) != k:
        raise ValueError("colors must contain exactly k labels")
    # row r spells r in base k, most significant digit first: lexicographic order
    rows = np.arange(k ** n, dtype=np.int64)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    table = ((rows[:, None] // powers[None, :]) % k).astype(np.int8)
    index = {v: i for i, v in enumerate(vertices)}
    _, us, vs, ws = graph.edge_arrays()
    total = float(ws.sum())
    cut = np.zeros(table.shape[0])
    for u, v, w in zip(us.tolist(), vs.tolist(), ws.tolist()):
        cut += (table[:, index[u]] != table[:, index[v]]) * w
    cut = cut / total if total > 0 else cut * 0.0
    if n:
        loads = np.stack([(table == c).sum(axis=1) for c in range(k)], axis=1)
        bal = (n / k) / loads.max(axis=1)
    else:
        bal = np.zeros(table.shape[0])
    scores = lam * (1.0 - cut) + (1.0 - lam) * bal
    best = int(np.argmax(scores))
    witness = {v: labels[int(table[best, i])] for i, v in enumerate(vertices)}
    return float(scores[best]), witness
