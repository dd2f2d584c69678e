import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antplace.advisor import Advisor, Move, bind_resources
from antplace.exceptions import NoLiveResources

RED, BLUE = 0, 1


def test_bind_fresh():
    assert bind_resources({1, 2}) == {1: 1, 2: 2}


def test_bind_keeps_existing_pairs():
    assert bind_resources({1, 2, 3}, {1: 1, 2: 2}) == {1: 1, 2: 2, 3: 3}


def test_bind_releases_removed_colors():
    assert bind_resources({2}, {1: 1, 2: 2}) == {2: 2}


def test_resource_ids_are_not_recycled():
    adv = Advisor()
    adv.rebind([RED, BLUE])
    adv.rebind([BLUE])
    assert adv.rebind([BLUE, 7]) == {BLUE: 2, 7: 3}


def _placed(adv, v, color):
    """Place ``v`` on ``color``'s resource as if it had always been there."""
    adv.rebind(sorted(set(adv.binding) | {color}))
    adv.placement[v] = adv.binding[color]


def test_move_after_h_steps():
    adv = Advisor(h=5)
    adv.rebind([RED, BLUE])
    _placed(adv, 0, RED)
    advice = adv.advise({0: BLUE}, {0: 5}, [RED, BLUE], step=9)
    assert advice.moves == [Move(0, adv.binding[RED], adv.binding[BLUE])]
    assert advice.step == 9
    assert adv.placement[0] == adv.binding[BLUE]


def test_no_move_before_h_steps():
    adv = Advisor(h=5)
    adv.rebind([RED, BLUE])
    _placed(adv, 0, RED)
    assert adv.advise({0: BLUE}, {0: 2}, [RED, BLUE]).moves == []
    assert adv.placement[0] == adv.binding[RED]


def test_new_unassigned_vertex_goes_to_least_loaded():
    adv = Advisor()
    adv.rebind([RED, BLUE])
    for v in range(3):
        adv.placement[v] = adv.binding[RED]
    for v in range(3, 5):
        adv.placement[v] = adv.binding[BLUE]
    assignment = {v: (RED if v < 3 else BLUE) for v in range(5)}
    assignment[5] = None
    advice = adv.advise(assignment, dict.fromkeys(range(6), 1), [RED, BLUE])
    assert advice.moves == []
    assert adv.placement[5] == adv.binding[BLUE]


def test_least_loaded_tie_goes_to_lowest_resource():
    adv = Advisor()
    adv.advise({0: None}, {0: 0}, [BLUE, RED])
    assert adv.placement[0] == min(adv.binding.values())


def test_unassigned_vertex_keeps_its_placement():
    adv = Advisor(h=1)
    adv.advise({0: RED}, {0: 1}, [RED, BLUE])
    placed = adv.placement[0]
    assert adv.advise({0: None}, {0: 0}, [RED, BLUE]).moves == []
    assert adv.placement[0] == placed


def test_colored_vertex_first_seen_is_placed_silently():
    adv = Advisor(h=5)
    advice = adv.advise({0: BLUE, 1: RED}, {0: 1, 1: 1}, [RED, BLUE])
    assert advice.moves == []
    assert adv.placement == {0: adv.binding[BLUE], 1: adv.binding[RED]}


def test_no_live_resources():
    with pytest.raises(NoLiveResources):
        Advisor().advise({0: None}, {0: 0}, [])


def test_removed_vertices_leave_the_placement():
    adv = Advisor()
    adv.advise({0: RED, 1: RED}, {0: 1, 1: 1}, [RED])
    adv.advise({1: RED}, {1: 2}, [RED])
    assert set(adv.placement) == {1}


def test_vanished_resource_rehomes_without_moves():
    adv = Advisor(h=1)
    adv.advise({0: RED, 1: BLUE, 2: BLUE}, {0: 1, 1: 1, 2: 1}, [RED, BLUE])
    advice = adv.advise({0: None, 1: BLUE, 2: BLUE}, {0: 0, 1: 2, 2: 2}, [BLUE, 5])
    assert advice.moves == []
    # the orphan goes to the least-loaded live resource (the new, empty one)
    assert adv.placement[0] == adv.binding[5]


def test_h_must_be_positive_integer():
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            Advisor(h=bad)


# -- properties ------------------------------------------------------------------

colors_st = st.lists(st.integers(0, 3), min_size=1, max_size=4, unique=True)


@st.composite
def histories(draw):
    """A run of (assignment, colors) steps with streaks derived from it."""
    n = draw(st.integers(1, 6))
    steps = draw(st.integers(1, 30))
    out, streak, prev = [], dict.fromkeys(range(n), 0), {}
    colors = draw(colors_st)
    for _ in range(steps):
        if draw(st.integers(0, 9)) == 0:
            colors = draw(colors_st)
        a = {v: draw(st.one_of(st.none(), st.sampled_from(colors))) for v in range(n)}
        for v, c in a.items():
            if c is None:
                streak[v] = 0
            elif prev.get(v) == c:
                streak[v] += 1
            else:
                streak[v] = 1
        prev = a
        out.append((a, dict(streak), list(colors)))
    return out


@settings(max_examples=200, deadline=None)
@given(histories(), st.integers(1, 6))
def test_advice_invariants(history, h):
    adv = Advisor(h=h)
    last_move = {}
    for t, (a, streaks, colors) in enumerate(history, 1):
        advice = adv.advise(a, streaks, colors, step=t)
        seen = set()
        for m in advice.moves:
            assert m.source != m.target
            assert m.vertex not in seen
            seen.add(m.vertex)
            # anti-thrash: at most one move per vertex per h steps
            assert t - last_move.get(m.vertex, -10 ** 9) >= h
            last_move[m.vertex] = t
        # totality: every live vertex sits on exactly one live resource
        assert set(adv.placement) == set(a)
        assert set(adv.placement.values()) <= set(adv.binding.values())
        assert set(adv.binding) == set(colors)
        # idempotence: same input again gives nothing new
        assert adv.advise(a, streaks, colors, step=t).moves == []
