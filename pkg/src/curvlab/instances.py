"""Small graph families with known curvature constants."""

from __future__ import annotations

import numpy as np

from .graph_core import WeightedGraph, graph_from_matrices


def complete_graph(m) -> WeightedGraph:
    """Complete graph with b = m ⊗ m; m is normalised to a probability vector."""
    m = np.asarray(m, dtype=float)
    m = m / m.sum()
    b = np.outer(m, m)
    np.fill_diagonal(b, 0.0)
    return graph_from_matrices(m, b)


def uniform_complete_graph(n: int) -> WeightedGraph:
    return complete_graph(np.full(n, 1.0 / n))


def two_point_graph(lam: float) -> WeightedGraph:
    return graph_from_matrices([lam, 1 - lam], [[0.0, lam * (1 - lam)], [lam * (1 - lam), 0.0]])


def path_graph(n: int, m: float = 1.0, b: float = 1.0) -> WeightedGraph:
    weights = np.zeros((n, n))
    for i in range(n - 1):
        weights[i, i + 1] = weights[i + 1, i] = b
    return graph_from_matrices(np.full(n, float(m)), weights)


def epsilon_graph(eps: float) -> WeightedGraph:
    """Three vertices, b(1,2) = 10, b(2,3) = 1, m = (1/ε, 1, 1/20)."""
    b = np.zeros((3, 3))
    b[0, 1] = b[1, 0] = 10.0
    b[1, 2] = b[2, 1] = 1.0
    return graph_from_matrices([1.0 / eps, 1.0, 1.0 / 20.0], b, vertices=(1, 2, 3))


def random_graph(rng: np.random.Generator, n: int, density: float = 0.5) -> WeightedGraph:
    """Connected random graph (spanning path plus random chords)."""
    b = np.zeros((n, n))
    order = rng.permutation(n)
    for i in range(n - 1):
        x, y = order[i], order[i + 1]
        b[x, y] = b[y, x] = rng.uniform(0.2, 2.0)
    for x in range(n):
        for y in range(x + 1, n):
            if b[x, y] == 0 and rng.random() < density:
                b[x, y] = b[y, x] = rng.uniform(0.2, 2.0)
    return graph_from_matrices(rng.uniform(0.5, 2.0, n), b)


def random_subunit_degree_graph(rng: np.random.Generator, n: int, density: float = 0.5) -> WeightedGraph:
    """Random connected graph rescaled so that Σ_z P(x, z) <= 1 everywhere."""
    g = random_graph(rng, n, density)
    m = g.b.sum(axis=1) / rng.uniform(0.3, 1.0, n)
    return graph_from_matrices(m, g.b)
