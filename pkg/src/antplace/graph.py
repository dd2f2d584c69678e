"""Event-sourced dynamic weighted graph.

Vertices are entities, edges are communication links, and every edge carries
one pheromone value per live color. Storage is slot-based: each live element
occupies a row of a numpy array so the ant kernels can work on the raw
buffers, and freed rows are recycled (lowest slot first) so memory stays
bounded under churn. Public identifiers are never reused within a graph.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import _kernels
from .exceptions import DuplicateId, NegativeWeight, SelfLoop, UnknownId

UNASSIGNED = -1


# -- events -----------------------------------------------------------------

@dataclass(frozen=True)
class AddVertex:
    vertex: int


@dataclass(frozen=True)
class RemoveVertex:
    vertex: int


@dataclass(frozen=True)
class AddEdge:
    edge: int
    u: int
    v: int
    weight: float


@dataclass(frozen=True)
class RemoveEdge:
    edge: int


@dataclass(frozen=True)
class SetWeight:
    edge: int
    weight: float


@dataclass(frozen=True)
class AddColor:
    color: int


@dataclass(frozen=True)
class RemoveColor:
    color: int


@dataclass(frozen=True)
class Tick:
    pass


GraphEvent = (AddVertex, RemoveVertex, AddEdge, RemoveEdge, SetWeight,
              AddColor, RemoveColor, Tick)


# -- read-only views ----------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    id: int
    endpoints: tuple
    weight: float
    pheromone: Mapping[int, float]


@dataclass(frozen=True)
class Vertex:
    id: int
    incident: frozenset
    color: Optional[int]
    color_streak: int


def _check_weight(weight):
    weight = float(weight)
    if not weight >= 0.0 or weight == float("inf"):
        raise NegativeWeight(f"invalid edge weight {weight!r}")
    return weight


def _check_id(value, kind):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
        raise ValueError(f"{kind} id must be a non-negative integer, got {value!r}")
    return int(value)


class _SlotPool:
    """Lowest-free-first slot allocator."""

    def __init__(self):
        self.free = []
        self.high = 0

    def take(self):
        if self.free:
            return heapq.heappop(self.free)
        self.high += 1
        return self.high - 1

    def give(self, slot):
        heapq.heappush(self.free, slot)


class _IdOrder:
    """Slots sorted by the id they held when added.

    Removals are detected lazily (the slot no longer holds that id) and
    additions are merged in, so keeping the order costs linear time per
    refresh instead of a sort.
    """

    def __init__(self):
        self.slots = np.zeros(0, dtype=np.int64)
        self.ids = np.zeros(0, dtype=np.int64)
        self.pending = []

    def add(self, slot, ident):
        self.pending.append((ident, slot))

    def current(self, slot_ids):
        alive = slot_ids[self.slots] == self.ids
        if not alive.all():
            self.slots, self.ids = self.slots[alive], self.ids[alive]
        if self.pending:
            new = np.array(sorted(self.pending), dtype=np.int64).reshape(-1, 2)
            self.pending = []
            # a slot may have been added and freed again before this refresh
            new = new[slot_ids[new[:, 1]] == new[:, 0]]
            at = np.searchsorted(self.ids, new[:, 0])
            self.ids = np.insert(self.ids, at, new[:, 0])
            self.slots = np.insert(self.slots, at, new[:, 1])
        return self.slots


def _grow(arr, size, fill):
    if size <= arr.shape[0]:
        return arr
    new_len = max(size, 2 * arr.shape[0], 8)
    out = np.full((new_len,) + arr.shape[1:], fill, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


class DynamicGraph:
    """Weighted undirected graph driven by :class:`GraphEvent` objects.

    ``apply`` is the only mutator used by the simulation; everything else is
    a query. Colors are registered on the graph because every edge holds a
    pheromone entry per live color.
    """

    def __init__(self):
        self._v_slot = {}
        self._v_pool = _SlotPool()
        self._v_ids = np.full(8, -1, dtype=np.int64)
        self._v_color = np.full(8, UNASSIGNED, dtype=np.int64)
        self._v_streak = np.zeros(8, dtype=np.int64)
        self._incident = {}

        self._e_slot = {}
        self._e_pool = _SlotPool()
        self._e_ids = np.full(8, -1, dtype=np.int64)
        self._e_u = np.full(8, -1, dtype=np.int64)
        self._e_v = np.full(8, -1, dtype=np.int64)
        self._e_w = np.zeros(8, dtype=np.float64)
        self._pairs = {}

        self._c_slot = {}
        self._c_pool = _SlotPool()
        self._c_ids = np.full(4, -1, dtype=np.int64)
        self._pher = np.zeros((8, 4), dtype=np.float64)

        self._retired = {"vertex": set(), "edge": set(), "color": set()}
        self.version = 0
        self._csr_cache = None
        # live slots ordered by id, patched lazily so csr() never sorts
        self._v_order = _IdOrder()
        self._e_order = _IdOrder()
        # slots freed since the engine last looked; see drain_removed()
        self._dropped_v = []
        self._dropped_c = []

    # -- mutation -------------------------------------------------------------

    def apply(self, event):
        """Apply one event in place. Returns ``self`` for chaining."""
        if isinstance(event, AddVertex):
            self._add_vertex(event.vertex)
        elif isinstance(event, RemoveVertex):
            self._remove_vertex(event.vertex)
        elif isinstance(event, AddEdge):
            self._add_edge(event.edge, event.u, event.v, event.weight)
        elif isinstance(event, RemoveEdge):
            self._remove_edge(event.edge)
        elif isinstance(event, SetWeight):
            slot = self._edge_slot(event.edge)
            self._e_w[slot] = _check_weight(event.weight)
        elif isinstance(event, AddColor):
            self._add_color(event.color)
        elif isinstance(event, RemoveColor):
            self._remove_color(event.color)
        elif isinstance(event, Tick):
            pass
        else:
            raise TypeError(f"not a graph event: {event!r}")
        return self

    def apply_all(self, events: Iterable):
        for event in events:
            self.apply(event)
        return self

    def _claim(self, kind, ident, table):
        ident = _check_id(ident, kind)
        if ident in table or ident in self._retired[kind]:
            raise DuplicateId(f"{kind} {ident} already exists or was used before")
        return ident

    def _add_vertex(self, vid):
        vid = self._claim("vertex", vid, self._v_slot)
        slot = self._v_pool.take()
        self._v_ids = _grow(self._v_ids, slot + 1, -1)
        self._v_color = _grow(self._v_color, slot + 1, UNASSIGNED)
        self._v_streak = _grow(self._v_streak, slot + 1, 0)
        self._v_ids[slot] = vid
        self._v_color[slot] = UNASSIGNED
        self._v_streak[slot] = 0
        self._v_slot[vid] = slot
        self._incident[vid] = set()
        self._v_order.add(slot, vid)
        self.version += 1

    def _remove_vertex(self, vid):
        slot = self._vertex_slot(vid)
        for eid in sorted(self._incident[vid]):
            self._remove_edge(eid)
        del self._incident[vid]
        del self._v_slot[vid]
        self._v_ids[slot] = -1
        self._v_color[slot] = UNASSIGNED
        self._v_streak[slot] = 0
        self._v_pool.give(slot)
        self._retired["vertex"].add(vid)
        self._dropped_v.append(slot)
        self.version += 1

    def _add_edge(self, eid, u, v, weight):
        eid = _check_id(eid, "edge")
        if u == v:
            raise SelfLoop(f"edge {eid} would join vertex {u} to itself")
        su, sv = self._vertex_slot(u), self._vertex_slot(v)
        weight = _check_weight(weight)
        eid = self._claim("edge", eid, self._e_slot)
        key = (min(u, v), max(u, v))
        if key in self._pairs:
            raise DuplicateId(f"vertices {u} and {v} are already joined by edge {self._pairs[key]}")
        slot = self._e_pool.take()
        self._e_ids = _grow(self._e_ids, slot + 1, -1)
        self._e_u = _grow(self._e_u, slot + 1, -1)
        self._e_v = _grow(self._e_v, slot + 1, -1)
        self._e_w = _grow(self._e_w, slot + 1, 0.0)
        self._pher = _grow(self._pher, slot + 1, 0.0)
        self._e_ids[slot] = eid
        self._e_u[slot] = su
        self._e_v[slot] = sv
        self._e_w[slot] = weight
        self._pher[slot] = 0.0
        self._e_slot[eid] = slot
        self._e_order.add(slot, eid)
        self._pairs[key] = eid
        self._incident[u].add(eid)
        self._incident[v].add(eid)
        self.version += 1

    def _remove_edge(self, eid):
        slot = self._edge_slot(eid)
        u = int(self._v_ids[self._e_u[slot]])
        v = int(self._v_ids[self._e_v[slot]])
        self._incident[u].discard(eid)
        self._incident[v].discard(eid)
        del self._pairs[(min(u, v), max(u, v))]
        del self._e_slot[eid]
        self._e_ids[slot] = -1
        self._e_u[slot] = -1
        self._e_v[slot] = -1
        self._e_w[slot] = 0.0
        self._pher[slot] = 0.0
        self._e_pool.give(slot)
        self._retired["edge"].add(eid)
        self.version += 1

    def _add_color(self, cid):
        cid = self._claim("color", cid, self._c_slot)
        slot = self._c_pool.take()
        if slot >= self._c_ids.shape[0]:
            self._c_ids = _grow(self._c_ids, slot + 1, -1)
            pher = np.zeros((self._pher.shape[0], self._c_ids.shape[0]))
            pher[:, : self._pher.shape[1]] = self._pher
            self._pher = pher
        self._c_ids[slot] = cid
        self._pher[:, slot] = 0.0
        self._c_slot[cid] = slot

    def _remove_color(self, cid):
        slot = self._color_slot(cid)
        self._pher[:, slot] = 0.0
        hit = self._v_color == slot
        self._v_color[hit] = UNASSIGNED
        self._v_streak[hit] = 0
        self._c_ids[slot] = -1
        del self._c_slot[cid]
        self._c_pool.give(slot)
        self._retired["color"].add(cid)
        self._dropped_c.append(slot)

    # -- lookups --------------------------------------------------------------

    def _vertex_slot(self, vid):
        try:
            return self._v_slot[vid]
        except (KeyError, TypeError):
            raise UnknownId(f"no live vertex {vid!r}") from None

    def _edge_slot(self, eid):
        try:
            return self._e_slot[eid]
        except (KeyError, TypeError):
            raise UnknownId(f"no live edge {eid!r}") from None

    def _color_slot(self, cid):
        try:
            return self._c_slot[cid]
        except (KeyError, TypeError):
            raise UnknownId(f"no live color {cid!r}") from None

    def has_vertex(self, vid):
        return vid in self._v_slot

    def has_edge(self, eid):
        return eid in self._e_slot

    def has_color(self, cid):
        return cid in self._c_slot

    @property
    def n_vertices(self):
        return len(self._v_slot)

    @property
    def n_edges(self):
        return len(self._e_slot)

    @property
    def n_colors(self):
        return len(self._c_slot)

    def vertices(self):
        return sorted(self._v_slot)

    def edges(self):
        return sorted(self._e_slot)

    def colors(self):
        return sorted(self._c_slot)

    def colony_order(self):
        """Live colors ordered by colony slot (the ant processing order)."""
        return sorted(self._c_slot, key=self._c_slot.__getitem__)

    def incident(self, vid):
        try:
            return frozenset(self._incident[vid])
        except KeyError:
            raise UnknownId(f"no live vertex {vid!r}") from None

    def endpoints(self, eid):
        slot = self._edge_slot(eid)
        return int(self._v_ids[self._e_u[slot]]), int(self._v_ids[self._e_v[slot]])

    def weight(self, eid):
        return float(self._e_w[self._edge_slot(eid)])

    def pheromone(self, eid, cid):
        return float(self._pher[self._edge_slot(eid), self._color_slot(cid)])

    def set_pheromone(self, eid, cid, value):
        value = float(value)
        if not value >= 0.0:
            raise ValueError(f"pheromone must be non-negative, got {value!r}")
        self._pher[self._edge_slot(eid), self._color_slot(cid)] = value

    def edge(self, eid):
        slot = self._edge_slot(eid)
        pher = {c: float(self._pher[slot, s]) for c, s in sorted(self._c_slot.items())}
        return Edge(eid, self.endpoints(eid), float(self._e_w[slot]), pher)

    def vertex(self, vid):
        slot = self._vertex_slot(vid)
        return Vertex(vid, frozenset(self._incident[vid]), self.color_of(vid),
                      int(self._v_streak[slot]))

    def color_of(self, vid):
        slot = self._v_color[self._vertex_slot(vid)]
        return None if slot == UNASSIGNED else int(self._c_ids[slot])

    def streak(self, vid):
        return int(self._v_streak[self._vertex_slot(vid)])

    def assignment(self):
        """Current vertex -> color map (``None`` for unassigned), ordered by id."""
        live = self._v_order.current(self._v_ids)
        cs = self._v_color[live]
        colors = np.where(cs == UNASSIGNED, -1, self._c_ids[np.maximum(cs, 0)]).tolist()
        return {vid: (None if c < 0 else c)
                for vid, c in zip(self._v_ids[live].tolist(), colors)}

    def streaks(self):
        return {vid: int(self._v_streak[self._v_slot[vid]]) for vid in sorted(self._v_slot)}

    def incident_pheromone(self, vid, cid):
        """Sum of color ``cid`` pheromone over the edges touching ``vid``."""
        self._vertex_slot(vid)
        cs = self._color_slot(cid)
        total = 0.0
        for eid in sorted(self._incident[vid]):
            total += self._pher[self._e_slot[eid], cs]
        return float(total)

    def total_weight(self):
        return float(sum(self._e_w[self._e_slot[e]] for e in sorted(self._e_slot)))

    def edge_arrays(self):
        """Live edges as ``(ids, u_ids, v_ids, weights)`` arrays sorted by edge id."""
        slots = np.fromiter((self._e_slot[e] for e in sorted(self._e_slot)),
                            dtype=np.int64, count=len(self._e_slot))
        return (self._e_ids[slots].copy(), self._v_ids[self._e_u[slots]],
                self._v_ids[self._e_v[slots]], self._e_w[slots].copy())

    # -- engine support -------------------------------------------------------

    def set_vertex_color(self, vid, cid, streak=None):
        """Overwrite a vertex's color (``None`` clears it)."""
        slot = self._vertex_slot(vid)
        if cid is None:
            self._v_color[slot] = UNASSIGNED
            self._v_streak[slot] = 0
            return
        self._v_color[slot] = self._color_slot(cid)
        if streak is not None:
            self._v_streak[slot] = int(streak)

    def drain_removed(self):
        """Return and forget vertex/color slots freed since the previous call."""
        v, c = self._dropped_v, self._dropped_c
        self._dropped_v, self._dropped_c = [], []
        return v, c

    def live_vertex_slots(self):
        """Slots of live vertices ordered by vertex id."""
        return self.csr()[4]

    def csr(self):
        """Adjacency in CSR form over vertex slots, neighbors ordered by edge id.

        Returns ``(indptr, adj_edge_slot, adj_nbr_slot, adj_nbr_id, live_v_slots)``.
        Rebuilt only when the structure changed since the last call.
        """
        if self._csr_cache is not None and self._csr_cache[0] == self.version:
            return self._csr_cache[1]
        live_e = self._e_order.current(self._e_ids)
        live_v = self._v_order.current(self._v_ids)
        indptr, adj_e, adj_nbr = _kernels.build_csr(live_e, self._e_u, self._e_v,
                                                    self._v_ids.shape[0])
        built = (indptr, adj_e, adj_nbr, self._v_ids[adj_nbr], live_v)
        self._csr_cache = (self.version, built)
        return built

    def check_invariants(self):
        """Assert the structural invariants; used by tests."""
        degree_sum = 0
        for vid, inc in self._incident.items():
            degree_sum += len(inc)
            for eid in inc:
                assert vid in self.endpoints(eid)
        for eid in self._e_slot:
            u, v = self.endpoints(eid)
            assert u != v
            assert eid in self._incident[u] and eid in self._incident[v]
        assert degree_sum == 2 * self.n_edges
        live_e = self._e_ids >= 0
        assert (self._e_w[live_e] >= 0).all()
        assert (self._pher >= 0).all()
        dead_c = self._c_ids < 0
        assert (self._pher[:, : dead_c.shape[0]][:, dead_c] == 0).all()
        assert (self._pher[~live_e] == 0).all()
        for vid, slot in self._v_slot.items():
            if self._v_color[slot] == UNASSIGNED:
                assert self._v_streak[slot] == 0
            else:
                assert self._c_ids[self._v_color[slot]] >= 0
