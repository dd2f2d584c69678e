"""scikit-learn style wrapper: partition a weighted adjacency matrix."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .colony import ColonyEngine, ColonyParams
from .graph import AddColor, AddEdge, AddVertex, DynamicGraph, RemoveEdge, SetWeight
from .metrics import evaluate


def _check_adjacency(X):
    X = check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
    n, m = X.shape
    if n != m:
        raise ValueError(f"adjacency must be square, got shape {X.shape}")
    if not np.allclose(X, X.T):
        raise ValueError("adjacency must be symmetric")
    if (X < 0).any():
        raise ValueError("adjacency weights must be non-negative")
    return X


class AntColonyPartitioner(ClusterMixin, BaseEstimator):
    """Color the vertices of a weighted graph with ``n_colors`` ant colonies.

    ``X`` is a symmetric ``(n, n)`` matrix of communication weights; zero
    means no edge and the diagonal is ignored. ``labels_`` holds the color of
    every vertex, ``-1`` for vertices no pheromone has reached.

    ``partial_fit`` keeps the colonies alive and replays only the weight
    changes between the previous matrix and the new one, so repeated calls
    model a graph that evolves while the ants keep working.
    """

    def __init__(self, n_colors=2, n_steps=2000, alpha=ColonyParams.alpha,
                 beta=ColonyParams.beta, gamma=ColonyParams.gamma, rho=ColonyParams.rho,
                 q=ColonyParams.q, epsilon=ColonyParams.epsilon,
                 phi_min=ColonyParams.phi_min, eta=ColonyParams.eta, tau=ColonyParams.tau,
                 lam=0.5, random_state=0):
        self.n_colors = n_colors
        self.n_steps = n_steps
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.rho = rho
        self.q = q
        self.epsilon = epsilon
        self.phi_min = phi_min
        self.eta = eta
        self.tau = tau
        self.lam = lam
        self.random_state = random_state

    def _params(self):
        return ColonyParams(**{name: getattr(self, name) for name in ColonyParams.field_names()})

    def fit(self, X, y=None):
        X = _check_adjacency(X)
        if int(self.n_colors) < 1:
            raise ValueError("n_colors must be at least 1")
        if int(self.n_steps) < 0:
            raise ValueError("n_steps must be non-negative")
        graph = DynamicGraph()
        graph.apply_all(AddVertex(i) for i in range(X.shape[0]))
        graph.apply_all(AddColor(c) for c in range(int(self.n_colors)))
        self._edge_ids = {}
        self._next_edge = 0
        self._sync(graph, X)
        seed = 0 if self.random_state is None else int(self.random_state)
        self.engine_ = ColonyEngine(graph, self._params(), seed)
        self.engine_.run(int(self.n_steps))
        self._store(X)
        return self

    def partial_fit(self, X, y=None, n_steps=None):
        """Update the edge weights to ``X`` and run ``n_steps`` more steps."""
        if not hasattr(self, "engine_"):
            return self.fit(X)
        X = _check_adjacency(X)
        if X.shape != self.adjacency_.shape:
            raise ValueError("partial_fit needs the same vertex set as fit")
        self._sync(self.engine_.graph, X)
        self.engine_.run(int(self.n_steps if n_steps is None else n_steps))
        self._store(X)
        return self

    def _sync(self, graph, X):
        iu, ju = np.triu_indices(X.shape[0], k=1)
        for i, j, w in zip(iu.tolist(), ju.tolist(), X[iu, ju].tolist()):
            eid = self._edge_ids.get((i, j))
            if eid is None and w > 0:
                eid = self._next_edge
                self._next_edge += 1
                self._edge_ids[(i, j)] = eid
                graph.apply(AddEdge(eid, i, j, w))
            elif eid is not None and w > 0:
                if graph.weight(eid) != w:
                    graph.apply(SetWeight(eid, w))
            elif eid is not None:
                graph.apply(RemoveEdge(eid))
                del self._edge_ids[(i, j)]

    def _store(self, X):
        self.adjacency_ = X
        assignment = self.engine_.graph.assignment()
        self.labels_ = np.array([-1 if assignment[i] is None else assignment[i]
                                 for i in range(X.shape[0])], dtype=np.int64)
        self.n_features_in_ = X.shape[1]

    def score(self, X=None, y=None):
        """Tradeoff score of the current coloring (higher is better)."""
        check_is_fitted(self, "engine_")
        g = self.engine_.graph
        return evaluate(g, g.assignment(), lam=self.lam).score
