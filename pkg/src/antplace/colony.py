"""Colored ant colonies that cluster a dynamic graph through pheromone.

One colony per live color. Each step runs four phases in a fixed order:
population management, ant moves with deposits, evaporation, and vertex
recoloring from the dominant incident pheromone. All state lives in the
graph's slot arrays plus a structure-of-arrays for the ants, so one step
costs O(ants * max_degree + edges * colors + vertices) whatever the step
index.

Colonies are identified by the slot their color occupies in the graph.
Ants are processed in (colony slot, ant id) order, and exact ties in the
dominant-color rule go to the lowest colony slot. Colonies, not color ids,
fix the processing order, which keeps a run equivariant under relabeling of
color ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import _kernels
from .exceptions import EmptyGraph
from .graph import UNASSIGNED, DynamicGraph

STUCK = None


@dataclass(frozen=True)
class ColonyParams:
    # defaults tuned on held-out community workloads; see README
    alpha: float = 0.5
    beta: float = 2.0
    gamma: float = 1.0
    rho: float = 0.001
    q: float = 0.1
    epsilon: float = 0.01
    phi_min: float = 1e-9
    eta: float = 1.0
    tau: int = 7

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "phi_min"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        for name in ("q", "epsilon", "eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not 0 <= self.rho < 1:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho!r}")
        if isinstance(self.tau, bool) or int(self.tau) != self.tau or self.tau < 0:
            raise ValueError(f"tau must be a non-negative integer, got {self.tau!r}")
        object.__setattr__(self, "tau", int(self.tau))

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    def _exponents(self):
        return self.alpha, self.beta, self.gamma, self.epsilon


@dataclass(frozen=True)
class Ant:
    id: int
    color: int
    location: int
    tabu: tuple = ()


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


# -- single-ant operations ----------------------------------------------------

def edge_attractiveness(graph: DynamicGraph, edge: int, color: int, params: ColonyParams) -> float:
    """How strongly an ant of ``color`` is drawn to ``edge``.

    ``w**beta * (eps + own)**alpha / (eps + foreign)**gamma`` where ``own`` is
    the color's pheromone on the edge and ``foreign`` the sum of all others.
    """
    es = graph._edge_slot(edge)
    cs = graph._color_slot(color)
    return float(_kernels.attractiveness(graph._e_w, graph._pher, es, cs, *params._exponents()))


def _tabu_array(ant):
    return np.asarray(ant.tabu, dtype=np.int64).reshape(-1)


def _choose_position(graph, ant, params, u):
    indptr, adj_e, _, adj_nbr_id, _ = graph.csr()
    loc = graph._vertex_slot(ant.location)
    cs = graph._color_slot(ant.color)
    deg = indptr[loc + 1] - indptr[loc]
    cand = np.empty(deg + 1, dtype=np.int64)
    cand_a = np.empty(deg + 1)
    return _kernels.choose(indptr, adj_e, adj_nbr_id, graph._e_w, graph._pher, loc,
                           _tabu_array(ant), cs, u, *params._exponents(), cand, cand_a)


def choose_edge(graph: DynamicGraph, ant: Ant, params: ColonyParams, rng) -> Optional[int]:
    """Pick the edge ``ant`` crosses next, or ``STUCK`` (None)."""
    pos = _choose_position(graph, ant, params, _rng(rng).random())
    if pos < 0:
        return STUCK
    return int(graph._e_ids[graph.csr()[1][pos]])


def edge_probabilities(graph: DynamicGraph, ant: Ant, params: ColonyParams) -> dict:
    """Selection probability of every candidate edge for ``ant``.

    Mirrors the candidate rule of :func:`choose_edge`; empty when stuck.
    """
    nbrs = {}
    for eid in sorted(graph.incident(ant.location)):
        u, v = graph.endpoints(eid)
        nbrs[eid] = v if u == ant.location else u
    cands = [e for e, n in nbrs.items() if n not in ant.tabu] or list(nbrs)
    attr = {e: edge_attractiveness(graph, e, ant.color, params) for e in cands}
    total = sum(attr.values())
    if not total > 0:
        return {}
    return {e: a / total for e, a in attr.items()}


def move_and_deposit(graph: DynamicGraph, ant: Ant, params: ColonyParams, rng,
                     deposit: bool = True) -> Ant:
    """Move ``ant`` one hop, laying ``q`` pheromone on the crossed edge.

    A stuck ant jumps to a uniformly random live vertex, clears its tabu
    list and deposits nothing.
    """
    rng = _rng(rng)
    u1, u2 = rng.random(2)
    pos = _choose_position(graph, ant, params, u1)
    _, adj_e, _, adj_nbr_id, live_v = graph.csr()
    if pos < 0:
        if live_v.shape[0] == 0:
            raise EmptyGraph("no live vertex to relocate a stuck ant to")
        j = min(int(u2 * live_v.shape[0]), live_v.shape[0] - 1)
        return Ant(ant.id, ant.color, int(graph._v_ids[live_v[j]]), ())
    if deposit:
        graph._pher[adj_e[pos], graph._color_slot(ant.color)] += params.q
    far = int(adj_nbr_id[pos])
    tabu = (tuple(ant.tabu) + (far,))[-params.tau:] if params.tau else ()
    return Ant(ant.id, ant.color, far, tabu)


def evaporate(graph: DynamicGraph, params: ColonyParams) -> DynamicGraph:
    """Scale every pheromone value by ``1 - rho``; values under ``phi_min`` drop to 0."""
    _kernels.evaporate(graph._pher, 1.0 - params.rho, params.phi_min)
    return graph


def _live_color_slots(graph):
    return np.array(sorted(graph._c_slot.values()), dtype=np.int64)


def dominant_color(graph: DynamicGraph, vertex: int) -> Optional[int]:
    """Color whose pheromone dominates the edges around ``vertex``.

    Keeps the current color when nothing is deposited or when it ties for
    the maximum; other ties go to the colony in the lowest slot.
    """
    slot = graph._vertex_slot(vertex)
    indptr, adj_e, _, _, _ = graph.csr()
    live_c = _live_color_slots(graph)
    sums = np.zeros(graph._pher.shape[1])
    _kernels.incident_sums(indptr, adj_e, graph._pher, slot, live_c, sums)
    cs = _kernels.dominant(sums, live_c, graph._v_color[slot])
    return None if cs < 0 else int(graph._c_ids[cs])


# -- the engine -----------------------------------------------------------------

class ColonyEngine:
    """All colonies living on one graph, advanced one step at a time.

    Parameters
    ----------
    graph : DynamicGraph
        Mutated in place by :meth:`apply` and :meth:`step`.
    params : ColonyParams
    seed : int
        Seeds the single random stream consumed by population management and
        ant moves.
    """

    def __init__(self, graph=None, params=None, seed=0):
        self.graph = graph if graph is not None else DynamicGraph()
        self.params = params if params is not None else ColonyParams()
        self.rng = np.random.default_rng(seed)
        self.deposits_enabled = True
        self.step_index = 0
        self._next_ant = 0
        tau = self.params.tau
        self._ant_id = np.zeros(0, dtype=np.int64)
        self._ant_col = np.zeros(0, dtype=np.int64)
        self._ant_loc = np.zeros(0, dtype=np.int64)
        self._tabu = np.full((0, tau), -1, dtype=np.int64)

    # -- events -------------------------------------------------------------

    def apply(self, event):
        self.graph.apply(event)
        return self

    def apply_all(self, events):
        for event in events:
            self.graph.apply(event)
        return self

    # -- ants ---------------------------------------------------------------

    @property
    def n_ants(self):
        return int(self._ant_id.shape[0])

    def ants(self):
        """Snapshot of every ant in processing order."""
        g = self.graph
        out = []
        for k in range(self.n_ants):
            tabu = tuple(int(t) for t in self._tabu[k] if t >= 0)
            out.append(Ant(int(self._ant_id[k]), int(g._c_ids[self._ant_col[k]]),
                           int(g._v_ids[self._ant_loc[k]]), tabu))
        return out

    def colony_sizes(self):
        g = self.graph
        return {c: int(np.count_nonzero(self._ant_col == g._c_slot[c])) for c in g.colors()}

    def add_ant(self, color, vertex, tabu=()):
        """Place one ant explicitly; returns its id."""
        g = self.graph
        cs = g._color_slot(color)
        vs = g._vertex_slot(vertex)
        row = np.full((1, self.params.tau), -1, dtype=np.int64)
        tabu = list(tabu)[-self.params.tau:] if self.params.tau else []
        if tabu:
            row[0, -len(tabu):] = tabu
        self._append(np.array([cs]), np.array([vs]), row)
        self._sort_ants()
        return self._next_ant - 1

    def _append(self, cols, locs, tabu_rows):
        n = cols.shape[0]
        ids = np.arange(self._next_ant, self._next_ant + n, dtype=np.int64)
        self._next_ant += n
        self._ant_id = np.concatenate([self._ant_id, ids])
        self._ant_col = np.concatenate([self._ant_col, cols.astype(np.int64)])
        self._ant_loc = np.concatenate([self._ant_loc, locs.astype(np.int64)])
        self._tabu = np.concatenate([self._tabu, tabu_rows])

    def _keep(self, mask):
        self._ant_id = self._ant_id[mask]
        self._ant_col = self._ant_col[mask]
        self._ant_loc = self._ant_loc[mask]
        self._tabu = self._tabu[mask]

    def _sort_ants(self):
        self._reorder(np.lexsort((self._ant_id, self._ant_col)))

    def _reorder(self, order):
        self._ant_id = self._ant_id[order]
        self._ant_col = self._ant_col[order]
        self._ant_loc = self._ant_loc[order]
        self._tabu = np.ascontiguousarray(self._tabu[order])

    def manage_population(self):
        """Bring every live colony to ``ceil(eta * |V|)`` ants.

        Drops colonies of removed colors, re-seats ants whose vertex vanished,
        removes uniformly chosen surplus ants and spawns missing ones on
        uniformly chosen live vertices.
        """
        g = self.graph
        rng = self.rng
        dropped_v, dropped_c = g.drain_removed()
        if dropped_c:
            self._keep(~np.isin(self._ant_col, dropped_c))
        live_v = g.live_vertex_slots()
        n_live = live_v.shape[0]
        if dropped_v and n_live:
            lost = np.flatnonzero(np.isin(self._ant_loc, dropped_v))
            if lost.size:
                self._ant_loc[lost] = live_v[rng.integers(0, n_live, size=lost.size)]
                self._tabu[lost] = -1
        target = math.ceil(self.params.eta * n_live)
        # ants are kept sorted by (colony slot, id), so each colony is one run
        col = self._ant_col
        keep = None
        new_cols, new_locs = [], []
        for cs in sorted(g._c_slot.values()):
            lo, hi = np.searchsorted(col, [cs, cs + 1])
            have = int(hi - lo)
            if have > target:
                drop = rng.choice(have, size=have - target, replace=False)
                if keep is None:
                    keep = np.ones(self.n_ants, dtype=bool)
                keep[lo + drop] = False
            elif have < target:
                spots = live_v[rng.integers(0, n_live, size=target - have)]
                new_cols.append(np.full(target - have, cs, dtype=np.int64))
                new_locs.append(spots)
        if keep is not None:
            self._keep(keep)
        if new_cols:
            cols = np.concatenate(new_cols)
            self._append(cols, np.concatenate(new_locs),
                         np.full((cols.shape[0], self.params.tau), -1, dtype=np.int64))
            # newcomers carry the largest ids, a stable sort on slot restores the order
            self._reorder(np.argsort(self._ant_col, kind="stable"))
        return self

    def move_all(self):
        """Move every ant once in processing order; returns how many got stuck."""
        g = self.graph
        indptr, adj_e, adj_nbr, adj_nbr_id, live_v = g.csr()
        draws = self.rng.random((self.n_ants, 2))
        if self.n_ants and live_v.shape[0] == 0:
            raise EmptyGraph("ants exist but the graph has no live vertex")
        p = self.params
        return int(_kernels.move_ants(indptr, adj_e, adj_nbr, adj_nbr_id, g._e_w, g._pher,
                                      live_v, self._ant_col, self._ant_loc, self._tabu,
                                      draws, p.q, self.deposits_enabled,
                                      p.alpha, p.beta, p.gamma, p.epsilon))

    def evaporate(self):
        evaporate(self.graph, self.params)
        return self

    def recolor(self):
        """Recolor every vertex from its dominant pheromone; returns the number changed."""
        g = self.graph
        indptr, adj_e, _, _, live_v = g.csr()
        return int(_kernels.recolor(indptr, adj_e, g._pher, live_v, _live_color_slots(g),
                                    g._v_color, g._v_streak))

    def step(self):
        """Advance one step and return the resulting vertex -> color map."""
        self.manage_population()
        self.move_all()
        self.evaporate()
        self.recolor()
        self.step_index += 1
        return self.graph.assignment()

    def run(self, n_steps):
        assignment = self.graph.assignment()
        for _ in range(n_steps):
            assignment = self.step()
        return assignment

    def color_slots(self):
        """Per-live-vertex color slots (``-1`` unassigned) in vertex id order."""
        g = self.graph
        return g._v_color[g.live_vertex_slots()].copy()


__all__ = ["Ant", "ColonyEngine", "ColonyParams", "STUCK", "UNASSIGNED", "choose_edge",
           "dominant_color", "edge_attractiveness", "edge_probabilities", "evaporate",
           "move_and_deposit"]
