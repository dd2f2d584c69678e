"""Ant-colony placement advice for dynamic communication graphs.

Colored ant colonies walk a weighted, changing graph; the pheromone they leave
colors every vertex, and the coloring is turned into migration advice for the
computing resources the colors stand for.
"""

from .advisor import Advisor, MigrationAdvice, Move, bind_resources
from .colony import (Ant, ColonyEngine, ColonyParams, choose_edge, dominant_color,
                     edge_attractiveness, evaporate, move_and_deposit)
from .exceptions import (AntPlaceError, DuplicateId, EmptyGraph, GraphError, NegativeWeight,
                         NoLiveResources, ScheduleError, SelfLoop, TooLarge, TraceSyntaxError,
                         UnknownId)
from .graph import (UNASSIGNED, AddColor, AddEdge, AddVertex, DynamicGraph, RemoveColor,
                    RemoveEdge, RemoveVertex, SetWeight, Tick)
from .metrics import (MetricsRecord, balance, brute_force_optimum, cut_ratio, evaluate, score,
                      stability)
from .runner import RunConfig, parse_config, run

__version__ = "0.1.0"


def __getattr__(name):
    # sklearn is only needed for the estimator wrapper
    if name == "AntColonyPartitioner":
        from .estimator import AntColonyPartitioner
        return AntColonyPartitioner
    raise AttributeError(name)
