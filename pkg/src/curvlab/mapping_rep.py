"""Mapping representations of graph Laplacians.

A mapping representation writes the Laplacian as
``Lf(x) = Σ_δ c(x, δ) (f(x) - f(δx))`` for a finite family of maps δ of the
vertex set. Tangent vectors then live on pairs (x, δ) with ``c(x, δ) > 0``,
weighted by ``w = c·m / 2``; pairs with zero rate carry no mass and are left
out of the coordinate space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from .errors import CertificationError, ValidationError
from .graph_core import WeightedGraph, graph_from_matrices, laplacian
from .graph_curvature import (
    CERTIFY_TOL,
    tangent_pencils,
    vertex_pencil_report,
)
from .optimize import DEFAULT_TRUNCATION
from .report import CurvatureReport

RATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MappingRep:
    """Validated mapping representation (G, c) of a graph Laplacian.

    ``maps[k][x]`` is the image of vertex x under the k-th map, ``c[x, k]``
    its rate and ``inverse[k]`` the index of the inverse map.
    """

    graph: WeightedGraph
    maps: np.ndarray
    c: np.ndarray
    inverse: tuple

    @property
    def n_maps(self) -> int:
        return self.maps.shape[0]

    @cached_property
    def support(self) -> tuple:
        xs, ks = np.nonzero(self.c > 0)
        return tuple(zip(xs.tolist(), ks.tolist()))

    @cached_property
    def support_index(self) -> dict:
        return {s: i for i, s in enumerate(self.support)}

    @cached_property
    def weights(self) -> np.ndarray:
        """w(x, δ) = c(x, δ) m(x) on the support."""
        return np.array([self.c[x, k] * self.graph.m[x] for x, k in self.support])

    def target(self, x: int, k: int) -> int:
        return int(self.maps[k, x])


def _laplacian_from_maps(n, maps, c):
    lap = np.zeros((n, n))
    for k in range(maps.shape[0]):
        for x in range(n):
            lap[x, x] += c[x, k]
            lap[x, maps[k, x]] -= c[x, k]
    return lap


def build_mapping_rep(g: WeightedGraph, maps, c, inverse, tol: float = 1e-10) -> MappingRep:
    """Validate a mapping representation against the graph.

    Checks the three defining properties: (a) the Laplacian formula,
    (b) δ⁻¹(δx) = x where c(x, δ) > 0, (c) detailed balance. Detailed balance
    is checked exactly on indicator functions of X×G, which is equivalent to
    checking it for every F.
    """
    n = g.size
    maps = np.asarray(maps, dtype=int)
    c = np.asarray(c, dtype=float)
    inverse = tuple(int(k) for k in inverse)
    if maps.ndim != 2 or maps.shape[1] != n:
        raise ValidationError("maps must be an array of shape (number of maps, number of vertices)")
    k_maps = maps.shape[0]
    if c.shape != (n, k_maps):
        raise ValidationError("rates must have shape (number of vertices, number of maps)")
    if len(inverse) != k_maps or any(not 0 <= k < k_maps for k in inverse):
        raise ValidationError("inverse must assign a map index to every map")
    if np.any(maps < 0) or np.any(maps >= n):
        raise ValidationError("maps must send vertices to vertices")
    if np.any(c < 0):
        raise ValidationError("rates must be nonnegative")

    lap = _laplacian_from_maps(n, maps, c)
    scale = max(1.0, float(np.abs(laplacian(g)).max()))
    if np.abs(lap - laplacian(g)).max() > tol * scale:
        raise ValidationError("property (a) fails: the maps do not reproduce the graph Laplacian")
    for k in range(k_maps):
        inv = inverse[k]
        for x in range(n):
            if c[x, k] > 0 and maps[inv, maps[k, x]] != x:
                raise ValidationError(f"property (b) fails: map {inv} does not invert map {k} at vertex {g.vertices[x]!r}")
    w = c * g.m[:, None]
    pushed = np.zeros_like(w)
    for x, k in product(range(n), range(k_maps)):
        pushed[maps[k, x], inverse[k]] += w[x, k]
    if np.abs(pushed - w).max() > tol * max(1.0, float(w.max())):
        raise ValidationError("property (c) fails: detailed balance is violated")
    induced = np.zeros((n, n))
    for x, k in product(range(n), range(k_maps)):
        y = maps[k, x]
        if y != x:
            induced[x, y] += w[x, k]
    if np.abs(induced - g.b).max() > tol * max(1.0, float(g.b.max())):
        raise ValidationError("edge weights are not induced by the rates")
    return MappingRep(g, maps, c, inverse)


def mapping_from_json(g: WeightedGraph, data: dict) -> MappingRep:
    """Parse ``{"maps": [{v: v}], "c": [[v, k, rate]], "inverse": [k]}``."""
    for key in ("maps", "c", "inverse"):
        if key not in data:
            raise ValidationError(f"mapping JSON: missing key {key!r}")
    labels = [str(v) for v in g.vertices]
    pos = {v: i for i, v in enumerate(labels)}
    maps = []
    for k, table in enumerate(data["maps"]):
        try:
            maps.append([pos[str(table[v])] for v in labels])
        except KeyError as exc:
            raise ValidationError(f"mapping JSON: map #{k} is not defined on vertex {exc}") from None
    c = np.zeros((len(labels), len(maps)))
    for entry in data["c"]:
        v, k, rate = entry
        if str(v) not in pos or not 0 <= int(k) < len(maps):
            raise ValidationError(f"mapping JSON: bad rate entry {entry!r}")
        c[pos[str(v)], int(k)] = float(rate)
    return build_mapping_rep(g, maps, c, data["inverse"])


def check_conditions(mr: MappingRep) -> dict:
    """Flags for commuting maps, translation invariant rates and involutions."""
    maps, c = mr.maps, mr.c
    k_maps, n = maps.shape
    commuting = all(np.array_equal(maps[a][maps[b]], maps[b][maps[a]]) for a in range(k_maps) for b in range(k_maps))
    invariant = all(
        np.abs(c[maps[d], gm] - c[:, gm]).max() <= RATE_TOL * max(1.0, float(c.max()))
        for d in range(k_maps)
        for gm in range(k_maps)
    )
    involutive = all(np.array_equal(maps[d][maps[d]], np.arange(n)) for d in range(k_maps))
    return {"commuting": bool(commuting), "invariant_rates": bool(invariant), "involutive": bool(involutive)}


# ---------------------------------------------------------------- tangent calculus


def nabla_matrix(mr: MappingRep) -> np.ndarray:
    """∇f(x, δ) = f(x) - f(δx) on the support."""
    mat = np.zeros((len(mr.support), mr.graph.size))
    for i, (x, k) in enumerate(mr.support):
        mat[i, x] += 1.0
        mat[i, mr.target(x, k)] -= 1.0
    return mat


def tangent_gamma_weights(mr: MappingRep) -> np.ndarray:
    """Row x is the diagonal of ξ ↦ Γ⃗(ξ)(x) = ½ Σ_δ c(x, δ)|ξ(x, δ)|²."""
    q = np.zeros((mr.graph.size, len(mr.support)))
    for i, (x, k) in enumerate(mr.support):
        q[x, i] = 0.5 * mr.c[x, k]
    return q


def tangent_jmap_matrix(mr: MappingRep) -> np.ndarray:
    """Real R with 𝒥ξ = R conj ξ, where 𝒥ξ(x, δ) = -conj ξ(δx, δ⁻¹)."""
    idx = mr.support_index
    r = np.zeros((len(mr.support), len(mr.support)))
    for i, (x, k) in enumerate(mr.support):
        partner = (mr.target(x, k), mr.inverse[k])
        if partner not in idx:
            raise ValidationError("reversed pair has zero rate; the tangent reversal is undefined")
        r[i, idx[partner]] = -1.0
    return r


def isometry_V(mr: MappingRep) -> np.ndarray:
    """Matrix of V: 𝟙_(x,y) ↦ Σ_{δx=y} 𝟙_(x,δ)."""
    g = mr.graph
    mat = np.zeros((len(mr.support), len(g.edges)))
    for i, (x, k) in enumerate(mr.support):
        y = mr.target(x, k)
        if y != x:
            mat[i, g.edge_index[(x, y)]] = 1.0
    return mat


def isometry_V_adjoint(mr: MappingRep) -> np.ndarray:
    """V* with respect to the b/2 and w/2 inner products."""
    v = isometry_V(mr)
    return (v.T * (0.5 * mr.weights)[None, :]) / (0.5 * mr.graph.edge_weights)[:, None]


@dataclass
class TangentHodge:
    """Operator on ℓ²(X×G, w/2) with its certification residuals."""

    rep: MappingRep
    matrix: np.ndarray
    construction: str
    intertwining_residual: float
    reversal_residual: float
    tolerance: float = CERTIFY_TOL
    params: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.intertwining_residual <= self.tolerance and self.reversal_residual <= self.tolerance


def certify_tangent_hodge(mr: MappingRep, matrix, construction="custom", tol=CERTIFY_TOL, **params) -> TangentHodge:
    matrix = np.asarray(matrix)
    dim = len(mr.support)
    if matrix.shape != (dim, dim):
        raise ValidationError(f"tangent operator must be {dim}x{dim}")
    nab = nabla_matrix(mr)
    lap = laplacian(mr.graph)
    scale = max(1.0, float(np.abs(lap).max()))
    inter = float(np.abs(matrix @ nab - nab @ lap).max(initial=0.0)) / scale
    r = tangent_jmap_matrix(mr)
    rev = float(np.abs(r @ np.conj(matrix) - matrix @ r).max(initial=0.0)) / scale
    return TangentHodge(mr, matrix, construction, inter, rev, tol, params)


def min_positive_rate(mr: MappingRep) -> float:
    return float(mr.c[mr.c > 0].min())


def mapping_hodge(mr: MappingRep, variant: str = "commuting", K: float | None = None) -> TangentHodge:
    """Hodge operator from the commuting-maps construction.

    ``commuting``: L⃗ξ(x,δ) = Σ_γ c(x,γ)(ξ(x,δ) - ξ(γx,δ)); needs commuting
    maps and translation invariant rates.
    ``involutive``: L⃗ + 2Kζ with ζ(x,δ) = ½(ξ(x,δ) + ξ(δx,δ)); additionally
    needs every map to be an involution. K defaults to 2·min c.
    """
    flags = check_conditions(mr)
    needed = ["commuting", "invariant_rates"] + (["involutive"] if variant == "involutive" else [])
    if variant not in ("commuting", "involutive"):
        raise ValidationError(f"unknown variant {variant!r}")
    missing = [name for name in needed if not flags[name]]
    if missing:
        raise ValidationError(f"{variant} construction needs conditions that fail: {', '.join(missing)}")
    if variant == "involutive" and any(mr.inverse[k] != k for k in range(mr.n_maps)):
        raise ValidationError("involutive construction needs every map paired with itself as inverse")
    idx = mr.support_index
    dim = len(mr.support)
    mat = np.zeros((dim, dim))
    for i, (x, k) in enumerate(mr.support):
        for gm in range(mr.n_maps):
            rate = mr.c[x, gm]
            if rate > 0:
                mat[i, i] += rate
                mat[i, idx[(mr.target(x, gm), k)]] -= rate
    params = {}
    if variant == "involutive":
        K = 2 * min_positive_rate(mr) if K is None else float(K)
        for i, (x, k) in enumerate(mr.support):
            mat[i, i] += K
            mat[i, idx[(mr.target(x, k), k)]] += K
        params["K"] = K
    hodge = certify_tangent_hodge(mr, mat, variant, **params)
    if not hodge.certified:
        raise CertificationError(f"{variant} tangent operator failed certification")
    return hodge


def intertwining_curvature_mapping(
    mr: MappingRep, hodge: TangentHodge, truncation: float = DEFAULT_TRUNCATION
) -> CurvatureReport:
    """Per-vertex intertwining pencils on ℓ²(X×G, w/2)."""
    if not hodge.certified:
        raise CertificationError("tangent operator is not certified")
    h = hodge.matrix
    h = np.real(h) if not np.iscomplexobj(h) or not np.abs(h.imag).any() else h
    lefts, rights = tangent_pencils(laplacian(mr.graph), h, tangent_gamma_weights(mr))
    return vertex_pencil_report(
        mr.graph,
        lefts,
        rights,
        truncation,
        "intertwining_mapping",
        {"truncation": truncation, "certification": hodge.tolerance},
        {"hodge": hodge.construction, **hodge.params, "guaranteed": guaranteed_bound(mr, hodge.construction)},
    )


def guaranteed_bound(mr: MappingRep, variant: str) -> float:
    """Curvature bound guaranteed for the given variant of mapping representation."""
    return 2 * min_positive_rate(mr) if variant == "involutive" else 0.0


def pull_back(mr: MappingRep, tangent_matrix) -> np.ndarray:
    """V* L⃗ V, an operator on ℓ²(X×X, b/2)."""
    return isometry_V_adjoint(mr) @ tangent_matrix @ isometry_V(mr)


def push_forward(mr: MappingRep, edge_matrix, K: float) -> np.ndarray:
    """V L⃗ V* + K(1 - VV*), an operator on ℓ²(X×G, w/2)."""
    v = isometry_V(mr)
    vs = isometry_V_adjoint(mr)
    return v @ edge_matrix @ vs + K * (np.eye(v.shape[0]) - v @ vs)


# ---------------------------------------------------------------- families


def hypercube(d: int, kappa: float = 1.0, m: float = 1.0) -> MappingRep:
    """{0,1}^d with coordinate flips at constant rate κ; each flip is its own inverse."""
    n = 2**d
    maps = np.array([[x ^ (1 << i) for x in range(n)] for i in range(d)])
    c = np.full((n, d), float(kappa))
    b = np.zeros((n, n))
    for x in range(n):
        for i in range(d):
            b[x, x ^ (1 << i)] = kappa * m
    labels = tuple(format(x, f"0{d}b") for x in range(n))
    g = graph_from_matrices(np.full(n, float(m)), b, vertices=labels)
    return build_mapping_rep(g, maps, c, list(range(d)))


def cyclic_shifts(k: int, kappa: float = 1.0, m: float = 1.0) -> MappingRep:
    """Z_k with the shifts +1 and -1 at constant rate κ."""
    plus = [(x + 1) % k for x in range(k)]
    minus = [(x - 1) % k for x in range(k)]
    maps = np.array([plus, minus])
    c = np.full((k, 2), float(kappa))
    b = np.zeros((k, k))
    for x in range(k):
        b[x, plus[x]] += kappa * m
        b[x, minus[x]] += kappa * m
    np.fill_diagonal(b, 0.0)
    g = graph_from_matrices(np.full(k, float(m)), b)
    return build_mapping_rep(g, maps, c, [1, 0])
