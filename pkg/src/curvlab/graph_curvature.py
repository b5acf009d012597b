"""Curvature bounds for weighted graphs.

Three families are covered:

* Bakry–Émery: the largest K with Γ₂(f) ≥ KΓ(f) pointwise.
* Intertwining: the largest K certified by an operator L⃗ on edge fields that
  intertwines with the Laplacian (L⃗∂ = ∂L), commutes with the edge
  reversal 𝒥, and satisfies a vertex-wise Γ₂ type inequality.
* Gradient estimates GE_Λ for an operator mean Λ, explored by sampling and
  falsification, with the two-point graph as an exactly solvable case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CertificationError, ValidationError
from .graph_core import (
    HeatSemigroup,
    WeightedGraph,
    gradient_matrix,
    laplacian,
)
from .means import MeanFunction, builtin_mean
from .optimize import DEFAULT_TRUNCATION, parallel_map, pencil_min_eig
from .report import CurvatureReport

CERTIFY_TOL = 1e-10
DEFAULT_T_GRID = (0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0)


# ---------------------------------------------------------------- edge calculus


def edge_gamma_weights(g: WeightedGraph) -> np.ndarray:
    """Row x holds the diagonal of the form ξ ↦ Γ⃗(ξ)(x) over directed edges."""
    q = np.zeros((g.size, len(g.edges)))
    for k, (x, y) in enumerate(g.edges):
        q[x, k] = g.b[x, y] / (2 * g.m[x])
    return q


def vec_gamma(g: WeightedGraph, xi, eta=None) -> np.ndarray:
    """Γ⃗(ξ, η)(x) = (1/2m(x)) Σ_y b(x,y) conj ξ(x,y) η(x,y)."""
    xi = np.asarray(xi)
    eta = xi if eta is None else np.asarray(eta)
    return edge_gamma_weights(g) @ (np.conj(xi) * eta)


def jmap_matrix(g: WeightedGraph) -> np.ndarray:
    """Real matrix R with 𝒥ξ = R conj(ξ)."""
    r = np.zeros((len(g.edges), len(g.edges)))
    r[np.arange(len(g.edges)), g.reversal] = -1.0
    return r


def jmap(g: WeightedGraph, xi) -> np.ndarray:
    """𝒥ξ(x, y) = -conj ξ(y, x)."""
    return -np.conj(np.asarray(xi)[g.reversal])


# ---------------------------------------------------------------- Hodge operators


@dataclass
class HodgeOperator:
    """Operator on edge fields together with its certification residuals."""

    graph: WeightedGraph
    matrix: np.ndarray
    construction: str
    intertwining_residual: float = np.nan
    reversal_residual: float = np.nan
    tolerance: float = CERTIFY_TOL
    params: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.intertwining_residual <= self.tolerance and self.reversal_residual <= self.tolerance

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix) or np.abs(self.matrix.imag).max(initial=0.0) == 0


def certify_hodge(g: WeightedGraph, matrix, construction: str = "custom", tol: float = CERTIFY_TOL, **params) -> HodgeOperator:
    """Measure ‖L⃗∂ - ∂L‖ and ‖L⃗𝒥 - 𝒥L⃗‖ and wrap the matrix."""
    matrix = np.asarray(matrix)
    ne = len(g.edges)
    if matrix.shape != (ne, ne):
        raise ValidationError(f"Hodge matrix must be {ne}x{ne} over directed edges")
    d = gradient_matrix(g)
    lap = laplacian(g)
    scale = max(1.0, float(np.abs(lap).max()))
    inter = float(np.abs(matrix @ d - d @ lap).max(initial=0.0)) / scale
    r = jmap_matrix(g)
    rev = float(np.abs(r @ np.conj(matrix) - matrix @ r).max(initial=0.0)) / scale
    return HodgeOperator(g, matrix, construction, inter, rev, tol, params)


def idle_hodge(g: WeightedGraph) -> HodgeOperator:
    """L⃗ξ(x,y) = -Σ_z (P(y,z) ξ(y,z) + P(x,z) ξ(z,x))."""
    p = g.transition
    idx = g.edge_index
    mat = np.zeros((len(g.edges), len(g.edges)))
    for k, (x, y) in enumerate(g.edges):
        for z in np.nonzero(g.b[y] > 0)[0]:
            mat[k, idx[(y, int(z))]] -= p[y, z]
        for z in np.nonzero(g.b[x] > 0)[0]:
            mat[k, idx[(int(z), x)]] -= p[x, z]
    hodge = certify_hodge(g, mat, "idle")
    if not hodge.certified:
        raise CertificationError("idle Hodge operator failed certification")
    return hodge


def gradient_projection(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal projection onto ran ∂ in ℓ²(b/2), and a left inverse of ∂."""
    d = gradient_matrix(g)
    w = 0.5 * g.edge_weights
    gram = d.T @ (w[:, None] * d)
    pinv = np.linalg.pinv(gram, rcond=1e-12, hermitian=True) @ (d.T * w[None, :])
    return d @ pinv, pinv


def splitting_hodge(g: WeightedGraph, K: float) -> HodgeOperator:
    """∂f + η ↦ ∂Lf + 2Kη for η orthogonal to the gradients."""
    proj, pinv = gradient_projection(g)
    d = gradient_matrix(g)
    mat = d @ laplacian(g) @ pinv + 2 * K * (np.eye(len(g.edges)) - proj)
    hodge = certify_hodge(g, mat, "splitting", K=K)
    if not hodge.certified:
        raise CertificationError("splitting Hodge operator failed certification")
    return hodge


# ---------------------------------------------------------------- pencils


def vertex_pencil_report(g, left_forms, right_forms, truncation, kind, tolerances, details=None):
    results = parallel_map(lambda lr: pencil_min_eig(lr[0], lr[1], truncation), zip(left_forms, right_forms))
    per_site = {str(g.vertices[x]): r.value for x, r in enumerate(results)}
    values = np.array([r.value for r in results])
    finite_or_neg = values[values < np.inf]
    bound = float(finite_or_neg.min()) if finite_or_neg.size else np.inf
    witness = None
    if np.isfinite(bound):
        x = int(np.argmin(values))
        witness = {"vertex": str(g.vertices[x]), "vector": results[x].witness}
    return CurvatureReport(kind, bound, per_site, witness, "exact_pencil", tolerances=tolerances, details=details or {})


def bakry_emery_forms(g: WeightedGraph):
    """Per-vertex matrices of f ↦ Γ₂(f)(x) and f ↦ Γ(f)(x) on real f."""
    d = gradient_matrix(g)
    lap = laplacian(g)
    q = edge_gamma_weights(g)
    gam = [d.T @ (q[x][:, None] * d) for x in range(g.size)]
    gam2 = []
    for x in range(g.size):
        mix = sum(lap[x, z] * gam[z] for z in range(g.size) if lap[x, z] != 0)
        gam2.append(0.5 * (lap.T @ gam[x] + gam[x] @ lap - mix))
    return gam2, gam


def bakry_emery_curvature(g: WeightedGraph, truncation: float = DEFAULT_TRUNCATION) -> CurvatureReport:
    """Largest K with Γ₂(f)(x) ≥ KΓ(f)(x) at every vertex.

    Isolated vertices get ``+inf`` and do not enter the minimum.
    """
    gam2, gam = bakry_emery_forms(g)
    return vertex_pencil_report(g, gam2, gam, truncation, "bakry_emery", {"truncation": truncation})


def tangent_pencils(lap, h, q):
    """Per-vertex forms ½(H*Q_x + Q_x H - Σ_z L(x,z) Q_z) and Q_x.

    ``q[x]`` is the diagonal of the form ξ ↦ Γ⃗(ξ)(x) on the tangent space.
    """
    lefts, rights = [], []
    for x in range(lap.shape[0]):
        qx = q[x]
        mix = lap[x] @ q
        lefts.append(0.5 * (h.conj().T * qx[None, :] + qx[:, None] * h) - 0.5 * np.diag(mix))
        rights.append(np.diag(qx))
    return lefts, rights


def intertwining_forms(g: WeightedGraph, hodge: HodgeOperator, field_kind: str = "auto"):
    """Per-vertex left and right forms of the intertwining inequality."""
    h = hodge.matrix
    real = hodge.is_real if field_kind == "auto" else field_kind == "real"
    h = np.real(h) if real else h.astype(complex)
    lefts, rights = tangent_pencils(laplacian(g), h, edge_gamma_weights(g))
    return lefts, rights, ("real" if real else "complex")


def intertwining_curvature(
    g: WeightedGraph, hodge: HodgeOperator, truncation: float = DEFAULT_TRUNCATION, field_kind: str = "auto"
) -> CurvatureReport:
    """Largest K with ½(Γ⃗(L⃗ξ,ξ) + Γ⃗(ξ,L⃗ξ) - LΓ⃗(ξ)) ≥ KΓ⃗(ξ) at each vertex.

    A real Hodge matrix is handled over real edge fields, which gives the same
    value as the complex computation; ``field_kind="complex"`` forces the
    complex path.
    """
    if not hodge.certified:
        raise CertificationError(
            f"Hodge operator not certified (intertwining {hodge.intertwining_residual:.3g}, "
            f"reversal {hodge.reversal_residual:.3g})"
        )
    lefts, rights, used = intertwining_forms(g, hodge, field_kind)
    tolerances = {"truncation": truncation, "certification": hodge.tolerance}
    details = {"hodge": hodge.construction, "field": used, **{k: v for k, v in hodge.params.items()}}
    return vertex_pencil_report(g, lefts, rights, truncation, "intertwining", tolerances, details)


def universal_bound(g: WeightedGraph, tol: float = 1e-12) -> float:
    """-3/2 - 1/P_min for graphs whose vertex degrees Σ_z P(x,z) are at most 1."""
    deg = g.degree
    bad = np.nonzero(deg > 1 + tol)[0]
    if bad.size:
        x = int(bad[0])
        raise ValidationError(f"vertex {g.vertices[x]!r} has degree {deg[x]:.6g} > 1")
    p = g.transition[g.b > 0]
    if p.size == 0:
        raise ValidationError("graph has no edges")
    return -1.5 - 1.0 / float(p.min())


# ---------------------------------------------------------------- gradient estimates


def _resolve_mean(mean) -> MeanFunction:
    return builtin_mean(mean) if isinstance(mean, str) else mean


def ge_forms(g: WeightedGraph, mean, rho):
    """Quadratic forms (numerator, denominator) of the GE derivative ratio in f.

    The estimate at (f, ρ) is numerator(f) / (2 denominator(f)).
    """
    mean = _resolve_mean(mean)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValidationError("density must be strictly positive")
    d = gradient_matrix(g)
    lap = laplacian(g)
    xs = np.array([x for x, _ in g.edges], dtype=int)
    ys = np.array([y for _, y in g.edges], dtype=int)
    w = 0.5 * g.edge_weights
    lam = mean(rho[xs], rho[ys])
    d1, d2 = mean.partials(rho[xs], rho[ys])
    flow = -(lap @ rho)
    dlam = d1 * flow[xs] + d2 * flow[ys]
    weighted = (w * lam)[:, None] * d
    den = d.T @ weighted
    cross = (d @ lap).T @ weighted
    num = cross + cross.T + d.T @ ((w * dlam)[:, None] * d)
    return num, den


def ge_rate_estimate(g: WeightedGraph, mean, f, rho) -> float:
    """Largest K consistent with the t = 0 derivative of GE_Λ at (f, ρ).

    Returns ``nan`` when the Λ-weighted energy of f vanishes (no information).
    """
    num, den = ge_forms(g, mean, rho)
    f = np.asarray(f, dtype=float)
    denom = float(f @ den @ f)
    if denom <= 1e-14:
        return np.nan
    return float(f @ num @ f) / (2 * denom)


def ge_rate_profile(g: WeightedGraph, mean, rho, truncation: float = DEFAULT_TRUNCATION):
    """inf over f of the GE derivative ratio at fixed ρ, with the minimising f."""
    num, den = ge_forms(g, mean, rho)
    res = pencil_min_eig(num, den, truncation)
    return 0.5 * res.value, res.witness


def _project_simplex(v, floor):
    """Euclidean projection onto {x >= floor, Σx = 1}."""
    n = v.size
    budget = 1.0 - n * floor
    u = v - floor
    s = np.sort(u)[::-1]
    css = np.cumsum(s)
    k = np.nonzero(s * np.arange(1, n + 1) > css - budget)[0][-1]
    theta = (css[k] - budget) / (k + 1)
    return np.maximum(u - theta, 0.0) + floor


@dataclass
class GeSearchConfig:
    samples: int = 1000
    seed: int = 0
    refine_steps: int = 200
    log_scale: float = 3.0
    floor: float = 1e-12

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError("samples must be at least 1")


def _refine_density(objective, rho, value, steps, floor):
    step = 0.1
    n = rho.size
    for _ in range(steps):
        h = 1e-7
        grad = np.empty(n)
        for i in range(n):
            up = rho.copy()
            up[i] += h
            if rho[i] - h > floor:
                dn = rho.copy()
                dn[i] -= h
                grad[i] = (objective(up) - objective(dn)) / (2 * h)
            else:
                grad[i] = (objective(up) - value) / h
        grad -= grad.mean()
        gnorm = np.linalg.norm(grad)
        if not np.isfinite(gnorm) or gnorm < 1e-14:
            break
        improved = False
        while step > 1e-14:
            cand = _project_simplex(rho - step * grad / gnorm, floor)
            fc = objective(cand)
            if fc < value:
                rho, value, improved = cand, fc, True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
    return rho, value


def ge_curvature_search(g: WeightedGraph, mean, cfg: GeSearchConfig | None = None) -> CurvatureReport:
    """Sampled upper estimate of the best GE_Λ constant.

    For each density ρ the infimum over f is computed exactly as a pencil, so
    only ρ is searched: point masses and the uniform density first, then
    ``cfg.samples`` densities ``exp(gaussian)``. Every sample that sets a new
    record is refined by projected gradient descent on the simplex.
    """
    cfg = cfg or GeSearchConfig()
    mean = _resolve_mean(mean)
    n = g.size
    floor = cfg.floor

    def objective(rho):
        return ge_rate_profile(g, mean, rho / rho.sum())[0]

    starts = [np.full(n, 1.0 / n)]
    for x in range(n):
        corner = np.full(n, floor)
        corner[x] = 1.0 - (n - 1) * floor
        starts.append(corner)
    rng = np.random.default_rng(cfg.seed)
    best_val, best_rho, record = np.inf, starts[0], np.inf
    for k in range(len(starts) + cfg.samples):
        if k < len(starts):
            rho = starts[k]
        else:
            rho = np.exp(cfg.log_scale * rng.standard_normal(n))
            rho = np.maximum(rho / rho.sum(), floor)
            rho /= rho.sum()
        val = objective(rho)
        if val < best_val:
            best_val, best_rho = val, rho
        if val < record:
            record = val
            rrho, rval = _refine_density(objective, rho, val, cfg.refine_steps, floor)
            if rval < best_val:
                best_val, best_rho = rval, rrho
    _, f = ge_rate_profile(g, mean, best_rho)
    witness = {"rho": best_rho, "f": None if f is None else np.real(f)}
    return CurvatureReport(
        "ge_search",
        float(best_val),
        {},
        witness,
        "sampled",
        samples=cfg.samples,
        seed=cfg.seed,
        tolerances={"density_floor": floor, "truncation": DEFAULT_TRUNCATION},
        details={"mean": mean.name},
    )


@dataclass
class GeFalsifyConfig:
    samples: int = 1000
    seed: int = 0
    t_grid: tuple = DEFAULT_T_GRID
    tol: float = 1e-9
    log_scale: float = 2.0


@dataclass
class GeCounterexample:
    f: np.ndarray
    rho: np.ndarray
    t: float
    lhs: float
    rhs: float

    def to_dict(self):
        return {"f": self.f, "rho": self.rho, "t": self.t, "lhs": self.lhs, "rhs": self.rhs}


def ge_sides(g: WeightedGraph, mean, K, f, rho, t, semigroup: HeatSemigroup | None = None):
    """Both sides of GE_Λ(K) at time t, vectorised over rows of f and rho."""
    mean = _resolve_mean(mean)
    semigroup = semigroup or HeatSemigroup(g)
    pt = semigroup(t)
    f = np.atleast_2d(f)
    rho = np.atleast_2d(rho)
    d = gradient_matrix(g)
    w = 0.5 * g.edge_weights
    xs = np.array([x for x, _ in g.edges], dtype=int)
    ys = np.array([y for _, y in g.edges], dtype=int)
    grad_t = (f @ pt.T) @ d.T
    grad_0 = f @ d.T
    rho_t = np.clip(rho @ pt.T, 0.0, None)
    lhs = (w * mean(rho[:, xs], rho[:, ys]) * np.abs(grad_t) ** 2).sum(axis=1)
    rhs = np.exp(-2 * K * t) * (w * mean(rho_t[:, xs], rho_t[:, ys]) * np.abs(grad_0) ** 2).sum(axis=1)
    return lhs, rhs


def ge_falsify(g: WeightedGraph, mean, K: float, cfg: GeFalsifyConfig | None = None) -> GeCounterexample | None:
    """Search for (f, ρ, t) violating GE_Λ(K) by more than ``cfg.tol`` (relative)."""
    cfg = cfg or GeFalsifyConfig()
    mean = _resolve_mean(mean)
    rng = np.random.default_rng(cfg.seed)
    n = g.size
    f = rng.standard_normal((cfg.samples, n))
    rho = np.exp(cfg.log_scale * rng.standard_normal((cfg.samples, n)))
    rho /= rho.sum(axis=1, keepdims=True)
    semigroup = HeatSemigroup(g)
    for t in cfg.t_grid:
        lhs, rhs = ge_sides(g, mean, K, f, rho, t, semigroup)
        bad = np.nonzero(lhs - rhs > cfg.tol * np.maximum(np.abs(rhs), 1e-300))[0]
        if bad.size:
            i = int(bad[0])
            return GeCounterexample(f[i], rho[i], float(t), float(lhs[i]), float(rhs[i]))
    return None


# ---------------------------------------------------------------- two-point graph


def two_point_entropic_integrand(lam: float, beta):
    log_mean = builtin_mean("logarithmic")
    beta = np.asarray(beta, dtype=float)
    return log_mean(lam * (1 + beta), (1 - lam) * (1 - beta)) / (1 - beta**2)


def two_point_entropic_exact(lam: float) -> float:
    """Exact entropic curvature of the two-point graph with m = (λ, 1-λ).

    The infimum over β in (-1, 1) is bracketed on a grid and then located by
    golden-section search.
    """
    if not 0 < lam < 1:
        raise ValidationError("lambda must lie strictly between 0 and 1")
    grid = np.linspace(-1, 1, 4001)[1:-1]
    vals = two_point_entropic_integrand(lam, grid)
    i = int(np.argmin(vals))
    i = min(max(i, 1), grid.size - 2)
    res = minimize_scalar(
        lambda b: float(two_point_entropic_integrand(lam, b)),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        tol=1e-12,
    )
    return 0.5 + float(min(res.fun, vals[i]))
