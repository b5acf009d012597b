"""Finite weighted graphs and their first-order calculus.

Vertex functions are numpy vectors indexed by vertex position. Edge fields
are numpy vectors indexed by the directed edges ``g.edges`` (all ordered
pairs with positive weight, in row-major order).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """A triple (X, b, m): vertices, symmetric edge weights, vertex measure."""

    vertices: tuple
    m: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        n = len(self.vertices)
        if len(set(self.vertices)) != n:
            raise ValidationError("vertex labels must be unique")
        if self.m.shape != (n,) or self.b.shape != (n, n):
            raise ValidationError("shape mismatch between vertices, m and b")
        if np.any(~np.isfinite(self.m)) or np.any(self.m <= 0):
            raise ValidationError("vertex measure must be positive")
        if np.any(self.b < 0) or np.any(~np.isfinite(self.b)):
            raise ValidationError("edge weights must be nonnegative")
        if np.any(np.diag(self.b) != 0):
            raise ValidationError("self-loops are not allowed")
        if not np.array_equal(self.b, self.b.T):
            raise ValidationError("edge weights must be symmetric")

    @property
    def size(self) -> int:
        return len(self.vertices)

    @cached_property
    def transition(self) -> np.ndarray:
        """Jump rates P(x, y) = b(x, y) / m(x)."""
        return self.b / self.m[:, None]

    @cached_property
    def degree(self) -> np.ndarray:
        return self.transition.sum(axis=1)

    @cached_property
    def edges(self) -> tuple:
        xs, ys = np.nonzero(self.b > 0)
        return tuple(zip(xs.tolist(), ys.tolist()))

    @cached_property
    def edge_index(self) -> dict:
        return {e: k for k, e in enumerate(self.edges)}

    @cached_property
    def edge_weights(self) -> np.ndarray:
        return np.array([self.b[x, y] for x, y in self.edges])

    @cached_property
    def reversal(self) -> np.ndarray:
        """Permutation sending edge (x, y) to the position of (y, x)."""
        return np.array([self.edge_index[(y, x)] for x, y in self.edges], dtype=int)

    def index(self, label) -> int:
        return self.vertices.index(label)


def build_graph(vertices, m, edges) -> WeightedGraph:
    """Validate and assemble a graph from undirected weighted edges.

    :param vertices: ordered labels.
    :param m: mapping label -> positive measure, or a sequence in vertex order.
    :param edges: iterable of ``(u, v, w)`` with ``w >= 0``; each unordered
        pair may appear at most once.
    """
    vertices = tuple(vertices)
    if len(set(vertices)) != len(vertices):
        raise ValidationError("duplicate vertex label")
    pos = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    if isinstance(m, dict):
        missing = [v for v in vertices if v not in m]
        if missing:
            raise ValidationError(f"measure missing for vertices {missing}")
        extra = [v for v in m if v not in pos]
        if extra:
            raise ValidationError(f"measure given for unknown vertices {extra}")
        mvec = np.array([float(m[v]) for v in vertices])
    else:
        mvec = np.asarray(m, dtype=float)
        if mvec.shape != (n,):
            raise ValidationError("measure length does not match vertex count")
    if np.any(mvec <= 0):
        raise ValidationError("vertex measure must be positive")
    b = np.zeros((n, n))
    seen = set()
    for k, edge in enumerate(edges):
        try:
            u, v, w = edge
        except (TypeError, ValueError):
            raise ValidationError(f"edge #{k} must be a triple (u, v, w)") from None
        if u not in pos or v not in pos:
            raise ValidationError(f"edge #{k} references unknown vertex")
        if u == v:
            raise ValidationError(f"edge #{k} is a self-loop")
        w = float(w)
        if w < 0 or not np.isfinite(w):
            raise ValidationError(f"edge #{k} has negative weight")
        key = frozenset((u, v))
        if key in seen:
            raise ValidationError(f"edge #{k} duplicates an earlier edge")
        seen.add(key)
        b[pos[u], pos[v]] = b[pos[v], pos[u]] = w
    return WeightedGraph(vertices, mvec, b)


def graph_from_matrices(m, b, vertices=None) -> WeightedGraph:
    m = np.asarray(m, dtype=float)
    b = np.asarray(b, dtype=float)
    if vertices is None:
        vertices = tuple(range(len(m)))
    return WeightedGraph(tuple(vertices), m, b)


def graph_from_json(data: dict) -> WeightedGraph:
    """Parse ``{"vertices": [...], "m": {v: x}, "edges": [[u, v, w]]}``."""
    for key in ("vertices", "m", "edges"):
        if key not in data:
            raise ValidationError(f"graph JSON: missing key {key!r}")
    vertices = [str(v) for v in data["vertices"]]
    m = {str(k): v for k, v in data["m"].items()}
    edges = [(str(e[0]), str(e[1]), e[2]) if isinstance(e, (list, tuple)) and len(e) == 3 else e for e in data["edges"]]
    return build_graph(vertices, m, edges)


def graph_to_json(g: WeightedGraph) -> dict:
    labels = [str(v) for v in g.vertices]
    return {
        "vertices": labels,
        "m": {labels[i]: float(g.m[i]) for i in range(g.size)},
        "edges": [[labels[x], labels[y], float(g.b[x, y])] for x, y in g.edges if x < y],
    }


def inner_vertex(g: WeightedGraph, f, h) -> complex:
    """⟨f, h⟩_m, antilinear in the first slot."""
    return complex(np.sum(np.conj(f) * h * g.m))


def inner_edge(g: WeightedGraph, xi, eta) -> complex:
    """⟨ξ, η⟩ in ℓ²(X×X, b/2)."""
    return complex(0.5 * np.sum(g.edge_weights * np.conj(xi) * eta))


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Dense matrix of Lf(x) = (1/m(x)) Σ_y b(x,y)(f(x) - f(y))."""
    return (np.diag(g.b.sum(axis=1)) - g.b) / g.m[:, None]


def gradient_matrix(g: WeightedGraph) -> np.ndarray:
    """Matrix of ∂ from vertex functions to edge fields."""
    d = np.zeros((len(g.edges), g.size))
    for k, (x, y) in enumerate(g.edges):
        d[k, x] = 1.0
        d[k, y] = -1.0
    return d


def gradient(g: WeightedGraph, f) -> np.ndarray:
    """(∂f)(x, y) = f(x) - f(y) on directed edges."""
    f = np.asarray(f)
    xs = np.array([x for x, _ in g.edges], dtype=int)
    ys = np.array([y for _, y in g.edges], dtype=int)
    return f[xs] - f[ys]


def gradient_adjoint_matrix(g: WeightedGraph) -> np.ndarray:
    """∂* with respect to ⟨·,·⟩_{b/2} and ⟨·,·⟩_m."""
    return (gradient_matrix(g).T * (0.5 * g.edge_weights)[None, :]) / g.m[:, None]


def gradient_adjoint(g: WeightedGraph, xi) -> np.ndarray:
    return gradient_adjoint_matrix(g) @ np.asarray(xi)


def carre_du_champ(g: WeightedGraph, f, h=None) -> np.ndarray:
    """Γ(f, h)(x) = (1/2m(x)) Σ_y b(x,y) conj(f(x)-f(y)) (h(x)-h(y))."""
    f = np.asarray(f)
    h = f if h is None else np.asarray(h)
    diff_f = f[:, None] - f[None, :]
    diff_h = h[:, None] - h[None, :]
    return (g.b * np.conj(diff_f) * diff_h).sum(axis=1) / (2 * g.m)


def gamma2(g: WeightedGraph, f, h=None) -> np.ndarray:
    """Γ₂(f, h) = ½(Γ(Lf, h) + Γ(f, Lh) - LΓ(f, h))."""
    f = np.asarray(f)
    h = f if h is None else np.asarray(h)
    lap = laplacian(g)
    return 0.5 * (carre_du_champ(g, lap @ f, h) + carre_du_champ(g, f, lap @ h) - lap @ carre_du_champ(g, f, h))


def _symmetrized_spectrum(g: WeightedGraph):
    root = np.sqrt(g.m)
    sym = laplacian(g) * root[:, None] / root[None, :]
    sym = 0.5 * (sym + sym.T)
    return np.linalg.eigh(sym) + (root,)


class HeatSemigroup:
    """P_t = exp(-tL), evaluated from one symmetric eigendecomposition."""

    def __init__(self, g: WeightedGraph):
        self.graph = g
        self.eigenvalues, self.vectors, self._root = _symmetrized_spectrum(g)
        self.eigenvalues = np.clip(self.eigenvalues, 0.0, None)

    def __call__(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValidationError("heat semigroup needs t >= 0")
        core = (self.vectors * np.exp(-t * self.eigenvalues)) @ self.vectors.T
        return core / self._root[:, None] * self._root[None, :]


def heat_semigroup(g: WeightedGraph, t: float) -> np.ndarray:
    """Matrix of P_t = exp(-tL) for t >= 0."""
    return HeatSemigroup(g)(t)
