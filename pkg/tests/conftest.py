"""Shared instance builders for the test suite."""

import numpy as np
import pytest

from opiniongame.network import InfluenceNetwork

X0_LADDER = np.array([0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95])


def complete_uniform_net(n, w, k, x0, T, name=""):
    edges = {(i, j): float(w) for i in range(n) for j in range(n) if i != j}
    return InfluenceNetwork(n=n, edges=edges, k=np.full(n, float(k)),
                            x0=np.asarray(x0, dtype=float), T=T, name=name)


def leader_net(n, w1, k, x0, T, name=""):
    """Star into agent 1; w1 may be a scalar or a per-follower array."""
    w1 = np.broadcast_to(np.asarray(w1, dtype=float), (n,))
    edges = {(i, 0): float(w1[i]) for i in range(1, n)}
    k = np.broadcast_to(np.asarray(k, dtype=float), (n,))
    return InfluenceNetwork(n=n, edges=edges, k=np.array(k),
                            x0=np.asarray(x0, dtype=float), T=T, name=name)


def random_net(rng, n=None, T=None, edge_prob=0.5, w_max=3.0, k_max=1.0):
    """Moderately stiff random instance; horizons stay short enough for the
    general (augmented-exponential) route to keep full accuracy."""
    n = int(n if n is not None else rng.integers(3, 13))
    edges = {}
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < edge_prob:
                edges[(i, j)] = float(rng.uniform(0.0, w_max))
    return InfluenceNetwork(
        n=n, edges=edges,
        k=rng.uniform(0.0, k_max, n),
        x0=rng.uniform(0.0, 1.0, n),
        T=float(T if T is not None else rng.uniform(1.0, 3.0)),
    )


@pytest.fixture
def fig1b_net():
    return complete_uniform_net(10, 2.0, 0.2, X0_LADDER, 5.0, name="fig1b")


@pytest.fixture
def fig2b_net():
    return leader_net(10, 2.0, 0.2, X0_LADDER, 5.0, name="fig2b")
