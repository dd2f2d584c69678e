"""Turn the evolving coloring into migration advice.

Each live color is bound to one computing resource. A vertex is advised to
move only after its color has pointed at another resource for ``h``
consecutive steps, and advice is assumed to be followed immediately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .exceptions import NoLiveResources


class Move(NamedTuple):
    vertex: int
    source: int
    target: int


@dataclass
class MigrationAdvice:
    step: int
    moves: list = field(default_factory=list)

    def __len__(self):
        return len(self.moves)


def bind_resources(colors, previous=None, next_id=None):
    """Map live colors to resource ids, keeping every surviving pair.

    New colors get fresh ids in increasing color order, starting above both
    ``next_id`` and every id in ``previous``; colors that vanished release
    their resource.
    """
    previous = previous or {}
    colors = sorted(set(colors))
    fresh = max([next_id or 1] + [r + 1 for r in previous.values()])
    binding = {}
    for c in colors:
        if c in previous:
            binding[c] = previous[c]
        else:
            binding[c] = fresh
            fresh += 1
    return binding


class Advisor:
    """Stateful placement tracker.

    Parameters
    ----------
    h : int
        Hysteresis: minimum color streak before a move is advised.
    """

    def __init__(self, h=5):
        if int(h) != h or h < 1:
            raise ValueError(f"h must be an integer >= 1, got {h!r}")
        self.h = int(h)
        self.binding = {}
        self.placement = {}
        self._next_id = 1

    def rebind(self, colors):
        self.binding = bind_resources(colors, self.binding, self._next_id)
        if self.binding:
            self._next_id = max(self._next_id, max(self.binding.values()) + 1)
        return self.binding

    def loads(self):
        counts = dict.fromkeys(sorted(self.binding.values()), 0)
        for r in self.placement.values():
            if r in counts:
                counts[r] += 1
        return counts

    def advise(self, assignment, streaks, colors, step=0):
        """Compute the moves for one step and update the placement.

        ``assignment`` maps every live vertex to a color id or ``None``,
        ``streaks`` maps vertices to their color streak, and ``colors`` lists
        the live colors.
        """
        colors = list(colors)
        if not colors:
            raise NoLiveResources("no live color to place entities on")
        binding = self.rebind(colors)
        live = set(binding.values())
        # entities on a vanished resource are re-placed as if new
        self.placement = {v: r for v, r in self.placement.items()
                          if v in assignment and r in live}
        loads = self.loads()
        advice = MigrationAdvice(step)
        for v in sorted(assignment):
            c = assignment[v]
            here = self.placement.get(v)
            if here is None:
                target = binding[c] if c is not None else min(loads, key=lambda r: (loads[r], r))
                self.placement[v] = target
                loads[target] += 1
            elif c is not None and binding[c] != here and streaks.get(v, 0) >= self.h:
                target = binding[c]
                advice.moves.append(Move(v, here, target))
                self.placement[v] = target
                loads[here] -= 1
                loads[target] += 1
        return advice
