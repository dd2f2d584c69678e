import itertools
import math

import numpy as np
import pytest

from antplace.exceptions import ScheduleError
from antplace.graph import (AddColor, AddEdge, AddVertex, DynamicGraph, RemoveColor,
                            RemoveEdge, RemoveVertex, SetWeight, Tick)
from antplace.metrics import balance, brute_force_optimum, cut_ratio, score
from antplace.workloads import (ChurnSchedule, CommunitySpec, Flock, FlockSpec, VertexChurn,
                                community_edges, flock_labels, gen_churn, gen_communities,
                                gen_flocking)


def kinds(events):
    out = {}
    for ev in events:
        out[type(ev).__name__] = out.get(type(ev).__name__, 0) + 1
    return out


def replay(events):
    """Replay a stream; returns the graph and the graph state after every tick."""
    g = DynamicGraph()
    ticks = 0
    for ev in events:
        g.apply(ev)
        ticks += isinstance(ev, Tick)
    return g, ticks


# -- communities ---------------------------------------------------------------

def test_two_triangles():
    events, labels = gen_communities(CommunitySpec(3, 2, p_in=1.0, p_out=0.0))
    assert kinds(events) == {"AddVertex": 6, "AddEdge": 6, "Tick": 1}
    assert isinstance(events[-1], Tick)
    g, _ = replay(events)
    assert {g.endpoints(e) for e in g.edges()} == {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}
    assert labels == {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1}


def test_edgeless():
    events, _ = gen_communities(CommunitySpec(5, 3, p_in=0.0, p_out=0.0))
    assert kinds(events) == {"AddVertex": 15, "Tick": 1}


def test_single_community_constant_truth():
    _, labels = gen_communities(CommunitySpec(6, 1, p_in=0.5))
    assert set(labels.values()) == {0}


def test_weights_follow_membership():
    spec = CommunitySpec(6, 3, w_in=2.0, w_out=0.25, p_in=0.7, p_out=0.3, seed=4)
    events, labels = gen_communities(spec)
    for ev in events:
        if isinstance(ev, AddEdge):
            same = labels[ev.u] == labels[ev.v]
            assert ev.weight == (2.0 if same else 0.25)
            assert ev.u < ev.v


def test_deterministic_per_seed():
    spec = CommunitySpec(7, 3, p_in=0.5, p_out=0.2, seed=11)
    assert gen_communities(spec) == gen_communities(spec)
    other = gen_communities(CommunitySpec(7, 3, p_in=0.5, p_out=0.2, seed=12))
    assert other[0] != gen_communities(spec)[0]


def test_edge_density_matches_probabilities():
    spec = CommunitySpec(40, 3, p_in=0.3, p_out=0.05, seed=2)
    u, v, _ = community_edges(spec)
    same = (u // 40) == (v // 40)
    n_in, n_out = 3 * 40 * 39 // 2, 3 * 40 * 40
    # binomial standard errors are ~0.008 and ~0.0036
    assert same.sum() / n_in == pytest.approx(0.3, abs=0.03)
    assert (~same).sum() / n_out == pytest.approx(0.05, abs=0.015)
    assert len(set(zip(u.tolist(), v.tolist()))) == u.shape[0]


def test_invalid_spec():
    with pytest.raises(ValueError):
        CommunitySpec(p_in=1.5)
    with pytest.raises(ValueError):
        CommunitySpec(w_out=-1)
    with pytest.raises(ValueError):
        CommunitySpec(k=0)


@pytest.mark.parametrize("seed", range(10))
def test_ground_truth_beats_every_equal_size_partition(seed):
    spec = CommunitySpec(4, 2, w_in=1.0, w_out=1.0, p_in=0.9, p_out=0.2, seed=seed)
    events, labels = gen_communities(spec)
    g, _ = replay(events)
    truth = cut_ratio(g, labels)
    for half in itertools.combinations(range(8), 4):
        part = {v: int(v in half) for v in range(8)}
        assert truth <= cut_ratio(g, part) + 1e-12
    # and no assignment at all beats it on the balanced tradeoff
    best, _ = brute_force_optimum(g, 2)
    assert score(truth, balance(labels, [0, 1])) == pytest.approx(best, abs=1e-12)


# -- churn ---------------------------------------------------------------------

def _base(n=4, k=2, ticks=1):
    events, labels = gen_communities(CommunitySpec(n, k, p_in=1.0, p_out=0.0))
    return events + [Tick()] * (ticks - 1), labels


def test_empty_schedule_is_identity():
    base, labels = _base(ticks=5)
    assert list(gen_churn(base, ChurnSchedule(), labels)) == base


def test_merge_adds_all_cross_edges_after_the_tick():
    base, labels = _base(n=3, ticks=1)
    out = list(gen_churn(base, ChurnSchedule(merges=[(100, 0, 1, 1.0)], horizon=120), labels))
    ticks = [i for i, ev in enumerate(out) if isinstance(ev, Tick)]
    assert len(ticks) == 120
    hundredth = ticks[99]
    added = [ev for ev in out if isinstance(ev, AddEdge) and labels[ev.u] != labels[ev.v]]
    assert len(added) == 9
    positions = [i for i, ev in enumerate(out) if ev in added]
    assert all(hundredth < p < ticks[100] for p in positions)
    assert all(ev.weight == 1.0 for ev in added)


def test_split_removes_cross_edges():
    base, labels = _base(n=3)
    sched = ChurnSchedule(merges=[(2, 0, 1, 1.0)], splits=[(5, 0, 1)], horizon=6)
    g, ticks = replay(gen_churn(base, sched, labels))
    assert ticks == 6
    assert all(labels[g.endpoints(e)[0]] == labels[g.endpoints(e)[1]] for e in g.edges())


def test_remove_color_precedes_its_tick():
    base, labels = _base()
    sched = ChurnSchedule(add_colors=[(1, 0), (1, 1)], remove_colors=[(50, 1)], horizon=60)
    out = list(gen_churn(base, sched, labels))
    ticks = [i for i, ev in enumerate(out) if isinstance(ev, Tick)]
    rc = out.index(RemoveColor(1))
    assert ticks[48] < rc < ticks[49]
    assert out.index(AddColor(0)) < ticks[0]


def test_new_community_gets_fresh_ids_and_labels():
    base, labels = _base(n=4)
    sink = {}
    sched = ChurnSchedule(new_communities=[(1, 4)], horizon=2, p_in=1.0, p_out=0.0)
    out = list(gen_churn(base, sched, labels, label_sink=sink))
    assert sink == {8: 2, 9: 2, 10: 2, 11: 2}
    g, _ = replay(out)
    assert g.n_vertices == 12 and g.n_edges == 12 + 6


def test_vertex_churn_replays_cleanly_and_is_deterministic():
    base, labels = gen_communities(CommunitySpec(10, 3, p_in=0.6, p_out=0.05, seed=1))
    sched = ChurnSchedule(vertex_churn=VertexChurn(1, 80, 0.05, 0.05), horizon=100,
                          p_in=0.6, p_out=0.05)
    a = list(gen_churn(base, sched, labels, seed=3))
    b = list(gen_churn(base, sched, labels, seed=3))
    assert a == b
    g, ticks = replay(a)
    assert ticks == 100
    assert any(isinstance(ev, RemoveVertex) for ev in a)
    assert max(ev.vertex for ev in a if isinstance(ev, AddVertex)) >= 30
    g.check_invariants()


def test_schedule_errors():
    base, labels = _base()
    with pytest.raises(ScheduleError):
        gen_churn(base, ChurnSchedule(merges=[(1, 0, 7, 1.0)]), labels)
    with pytest.raises(ScheduleError):
        gen_churn(base, ChurnSchedule(add_colors=[(0, 1)]), labels)
    with pytest.raises(ScheduleError):
        gen_churn(base, ChurnSchedule(add_colors=[(9, 1)], horizon=5), labels)
    with pytest.raises(ScheduleError):
        list(gen_churn(base, ChurnSchedule(add_colors=[(9, 1)]), labels))


# -- flocking -------------------------------------------------------------------

def _still(positions, comm_radius=5.0, world=100.0):
    spec = FlockSpec(n_agents=len(positions), world=world, comm_radius=comm_radius,
                     predator_count=0, duration=1, n_schools=1)
    return spec, Flock(spec, positions=positions, velocities=np.zeros((len(positions), 2)))


def test_close_pair_gets_one_edge():
    spec, flock = _still([[10.0, 10.0], [13.0, 10.0]])
    events = list(gen_flocking(spec, flock))
    edges = [ev for ev in events if isinstance(ev, AddEdge)]
    assert len(edges) == 1
    assert edges[0].weight == pytest.approx(1 - 3.0 / 5.0, abs=1e-12)


def test_far_pair_has_no_edge():
    spec, flock = _still([[10.0, 10.0], [16.0, 10.0]])
    assert not any(isinstance(ev, AddEdge) for ev in gen_flocking(spec, flock))


def test_distance_wraps_around_the_torus():
    spec, flock = _still([[0.5, 50.0], [99.5, 50.0]])
    edges = [ev for ev in gen_flocking(spec, flock) if isinstance(ev, AddEdge)]
    assert len(edges) == 1 and edges[0].weight == pytest.approx(0.8)


def _pairwise(pos, r, L):
    """Loop-based proximity graph, independent of the vectorized one."""
    out = {}
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            dx = abs(pos[i][0] - pos[j][0])
            dy = abs(pos[i][1] - pos[j][1])
            dx, dy = min(dx, L - dx), min(dy, L - dy)
            d = math.hypot(dx, dy)
            if d < r:
                out[(i, j)] = 1 - d / r
    return out


def test_deltas_rebuild_the_proximity_graph_every_tick():
    spec = FlockSpec(n_agents=40, world=40.0, comm_radius=4.0, n_schools=3, duration=60, seed=5)
    shadow = Flock(spec)
    g = DynamicGraph()
    seen_pairs = {}
    t = 0
    for ev in gen_flocking(spec):
        if isinstance(ev, Tick):
            if t:
                shadow.update()
            want = _pairwise(shadow.pos.tolist(), spec.comm_radius, spec.world)
            got = {}
            for e in g.edges():
                u, v = g.endpoints(e)
                got[(min(u, v), max(u, v))] = g.weight(e)
            assert got.keys() == want.keys()
            for k in want:
                assert got[k] == pytest.approx(want[k], abs=1e-9)
            t += 1
            continue
        if isinstance(ev, AddEdge):
            # a persisting pair is never re-added
            assert (ev.u, ev.v) not in seen_pairs or seen_pairs[(ev.u, ev.v)] is None
            seen_pairs[(ev.u, ev.v)] = ev.edge
        if isinstance(ev, RemoveEdge):
            u, v = g.endpoints(ev.edge)
            seen_pairs[(min(u, v), max(u, v))] = None
        g.apply(ev)
    assert t == 60


def test_flocking_is_deterministic():
    spec = FlockSpec(n_agents=30, duration=20, seed=9)
    assert list(gen_flocking(spec)) == list(gen_flocking(spec))
    assert flock_labels(spec) == {i: i % spec.n_schools for i in range(30)}


def _edge_counts(predators):
    spec = FlockSpec(n_agents=20, world=100.0, comm_radius=5.0, n_schools=1,
                     predator_count=len(predators), duration=150, seed=0)
    rng = np.random.default_rng(1)
    pos = np.array([50.0, 50.0]) + rng.normal(0, 2, (20, 2))
    flock = Flock(spec, positions=pos, velocities=np.zeros((20, 2)), predators=predators,
                  predator_velocities=[[1.5, 0.0]] * len(predators))
    g, counts = DynamicGraph(), []
    for ev in gen_flocking(spec, flock):
        if isinstance(ev, Tick):
            counts.append(g.n_edges)
        else:
            g.apply(ev)
    return counts


def test_predator_pass_breaks_then_reforms_the_school():
    calm = _edge_counts([])
    hunted = _edge_counts([[0.0, 50.0]])
    before = hunted[25]
    assert calm[:26] == hunted[:26]            # predator still far away
    # the school scatters while the predator crosses it ...
    assert min(hunted[26:60]) < 0.5 * before
    assert min(calm[26:60]) > 0.9 * before
    # ... and its proximity edges re-form once it has passed
    assert max(hunted[60:]) >= 0.95 * before


def test_invalid_flock_spec():
    with pytest.raises(ValueError):
        FlockSpec(comm_radius=200.0, world=100.0)
    with pytest.raises(ValueError):
        FlockSpec(n_agents=0)
