"""Curvature of quantum Markov semigroups.

Matrix inequalities ``X ⪰ K Y`` are reduced to vector states: for a unit
vector v both sides become quadratic forms in A (or ξ), the best constant for
that v is a pencil eigenvalue, and the bound is the infimum over v found by a
seeded sphere search. Reports always record ``mode = "sampled"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationError, ValidationError
from .graph_curvature import DEFAULT_T_GRID
from .means import MeanFunction, divided_difference
from .optimize import DEFAULT_TRUNCATION, SearchConfig, parallel_map, pencil_min_eig, sphere_search
from .qms_core import (
    DensityMatrix,
    Fodc,
    QmsGenerator,
    _as_state,
    _resolve_mean,
    density_matrix,
    family_generator,
    hermitian_basis,
    lambda_inner,
    lambda_weights,
    random_hermitian,
    random_state,
    semigroup,
    unvec,
    vec,
)
from .report import CurvatureReport

CERTIFY_TOL = 1e-10
ENTROPY_CLIP = 1e-14


def _vec_state_form(n: int, d: int, y) -> np.ndarray:
    """Q(Y) with ξ^H Q(Y) η = Σ_j tr(Y ξ_j* η_j); Q(vv*) gives v*(ξ|η)v."""
    return np.kron(np.eye(d * n), np.asarray(y).T)


def _unit_complex(x, n):
    return x[:n] + 1j * x[n:]


def _default_starts(n):
    starts = []
    eye = np.eye(2 * n)
    for k in range(n):
        starts.append(eye[k])
    for k in range(n):
        for l in range(k + 1, n):
            starts.append(eye[k] + eye[l])
            starts.append(eye[k] + eye[n + l])
    return starts


def _real_restriction(mat, basis):
    """Form restricted to the real span of the columns of ``basis``."""
    return np.real(basis.conj().T @ mat @ basis)


def _search(objective, n, cfg):
    return sphere_search(objective, 2 * n, cfg, starts=_default_starts(n))


def _sampled_report(kind, gen, res_all, res_real, cfg, truncation, details, real_label):
    v = _unit_complex(res_all.argmin, gen.n)
    witness = {"v": v}
    if res_real is not None:
        witness[f"v_{real_label}"] = _unit_complex(res_real.argmin, gen.n)
        details = {**details, f"bound_{real_label}": res_real.value}
    return CurvatureReport(
        kind,
        float(res_all.value),
        {},
        witness,
        "sampled",
        samples=cfg.samples,
        seed=cfg.seed,
        tolerances={"truncation": truncation},
        details=details,
    )


# ---------------------------------------------------------------- Bakry–Émery


def be_forms(gen: QmsGenerator, calc: Fodc, v):
    """Forms a ↦ v*Γ₂(A)v and a ↦ v*Γ(A)v in a = vec(A)."""
    n, d = gen.n, gen.d
    p = np.outer(v, v.conj())
    grad = calc.gradient
    g_v = grad.conj().T @ _vec_state_form(n, d, p) @ grad
    pulled = unvec(gen.dual @ vec(p), n)
    pulled = 0.5 * (pulled + pulled.conj().T)
    g_l = grad.conj().T @ _vec_state_form(n, d, pulled) @ grad
    s = gen.superoperator
    left = 0.5 * (s.conj().T @ g_v + g_v @ s - g_l)
    return 0.5 * (left + left.conj().T), 0.5 * (g_v + g_v.conj().T)


def be_curvature_qms(
    gen: QmsGenerator, cfg: SearchConfig | None = None, truncation: float = DEFAULT_TRUNCATION, self_adjoint: bool = True
) -> CurvatureReport:
    """Sampled largest K with Γ₂(A) ⪰ KΓ(A).

    ``bound`` is over all A; ``details.bound_self_adjoint`` restricts to
    Hermitian A. A zero generator gives ``+inf``.
    """
    cfg = cfg or SearchConfig()
    calc = Fodc(gen)
    n = gen.n
    herm = np.array([vec(h) for h in hermitian_basis(n)]).T

    def value(x, real):
        v = _unit_complex(x, n)
        v = v / np.linalg.norm(v)
        left, right = be_forms(gen, calc, v)
        if real:
            left, right = _real_restriction(left, herm), _real_restriction(right, herm)
        return pencil_min_eig(left, right, truncation).value

    res_all = _search(lambda x: value(x, False), n, cfg)
    res_sa = _search(lambda x: value(x, True), n, cfg) if self_adjoint else None
    return _sampled_report("qms_bakry_emery", gen, res_all, res_sa, cfg, truncation, {}, "self_adjoint")


# ---------------------------------------------------------------- Hodge operators


@dataclass
class QmsHodge:
    """Operator on F = M_n^d with its certification residuals."""

    calc: Fodc
    matrix: np.ndarray
    construction: str
    intertwining_residual: float = np.nan
    reversal_residual: float = np.nan
    modular_residual: float = np.nan
    tolerance: float = CERTIFY_TOL
    params: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return max(self.intertwining_residual, self.reversal_residual, self.modular_residual) <= self.tolerance


def certify_qms_hodge(calc: Fodc, matrix, construction: str = "custom", tol: float = CERTIFY_TOL, times=(0.3, 1.7), **params) -> QmsHodge:
    """Measure ‖L⃗∂ - ∂L‖, ‖L⃗𝒥 - 𝒥L⃗‖ and ‖L⃗V_t - V_tL⃗‖ (relative to |L|)."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (calc.dim, calc.dim):
        raise ValidationError(f"Hodge matrix must be {calc.dim}x{calc.dim}")
    gen = calc.generator
    scale = max(1.0, float(np.abs(gen.superoperator).max(initial=0.0)))
    grad = calc.gradient
    inter = float(np.abs(matrix @ grad - grad @ gen.superoperator).max(initial=0.0)) / scale
    r = calc.jmap_matrix
    rev = float(np.abs(r @ np.conj(matrix) - matrix @ r).max(initial=0.0)) / scale
    mod = 0.0
    for t in times:
        vt = calc.modular_matrix(t)
        mod = max(mod, float(np.abs(vt @ matrix - matrix @ vt).max(initial=0.0)) / scale)
    return QmsHodge(calc, matrix, construction, inter, rev, mod, tol, params)


def _require_certified(hodge: QmsHodge):
    if not hodge.certified:
        raise CertificationError(
            f"Hodge operator not certified (intertwining {hodge.intertwining_residual:.3g}, "
            f"reversal {hodge.reversal_residual:.3g}, modular {hodge.modular_residual:.3g})"
        )


def gradient_projection_qms(calc: Fodc):
    """Projection onto ran ∂ orthogonal for tau((·|·)σ), and a left inverse of ∂."""
    w = calc.weight
    grad = calc.gradient
    gram = grad.conj().T @ w @ grad
    pinv = np.linalg.pinv(gram, rcond=1e-12, hermitian=True) @ grad.conj().T @ w
    return grad @ pinv, pinv


def splitting_hodge_qms(calc: Fodc, K: float) -> QmsHodge:
    """∂A + η ↦ ∂(LA) + 2Kη for η orthogonal to ran ∂."""
    proj, pinv = gradient_projection_qms(calc)
    mat = calc.gradient @ calc.generator.superoperator @ pinv + 2 * K * (np.eye(calc.dim) - proj)
    hodge = certify_qms_hodge(calc, mat, "splitting", K=K)
    _require_certified(hodge)
    return hodge


def product_hodge(gen: QmsGenerator, family_hodges) -> QmsHodge:
    """⊕_k (L⃗_k + Σ_{l≠k} L_l on each component) for a commuting sum.

    ``family_hodges[k]`` must be a certified Hodge operator for the generator
    made of family k alone, with jumps in the same order.
    """
    if len(family_hodges) != len(gen.families):
        raise ValidationError("one Hodge operator per family is required")
    n = gen.n
    m = n * n
    parts = []
    for k, hodge in enumerate(family_hodges):
        _require_certified(hodge)
        fam = gen.families[k]
        fam_gen = hodge.calc.generator
        if fam_gen.d != len(fam) or any(
            np.abs(fam_gen.jumps[i] - gen.jumps[j]).max() > 1e-12 for i, j in enumerate(fam)
        ):
            raise ValidationError(f"Hodge operator {k} does not match family {k}")
        parts.append(family_generator(gen, k).superoperator)
    calc = Fodc(gen)
    mat = np.zeros((calc.dim, calc.dim), dtype=complex)
    for k, hodge in enumerate(family_hodges):
        fam = gen.families[k]
        others = sum((parts[l] for l in range(len(parts)) if l != k), np.zeros((m, m), dtype=complex))
        for a, ja in enumerate(fam):
            for b, jb in enumerate(fam):
                block = hodge.matrix[a * m:(a + 1) * m, b * m:(b + 1) * m]
                if a == b:
                    block = block + others
                mat[ja * m:(ja + 1) * m, jb * m:(jb + 1) * m] = block
    hodge = certify_qms_hodge(calc, mat, "product", families=len(family_hodges))
    _require_certified(hodge)
    return hodge


# ---------------------------------------------------------------- intertwining


def intertwining_forms_qms(hodge: QmsHodge, v):
    """Forms ξ ↦ v*[½((L⃗ξ|ξ) + (ξ|L⃗ξ) - L(ξ|ξ))]v and ξ ↦ v*(ξ|ξ)v."""
    calc = hodge.calc
    gen = calc.generator
    n, d = gen.n, gen.d
    p = np.outer(v, v.conj())
    q_v = _vec_state_form(n, d, p)
    pulled = unvec(gen.dual @ vec(p), n)
    pulled = 0.5 * (pulled + pulled.conj().T)
    h = hodge.matrix
    left = 0.5 * (h.conj().T @ q_v + q_v @ h - _vec_state_form(n, d, pulled))
    return 0.5 * (left + left.conj().T), q_v


def jmap_real_basis(calc: Fodc) -> np.ndarray:
    """Columns spanning (over R) the fixed points of 𝒥."""
    r = calc.jmap_matrix
    rr, ri = r.real, r.imag
    real_map = np.block([[rr, ri], [ri, -rr]])
    dim = calc.dim
    _, sv, vt = np.linalg.svd(real_map - np.eye(2 * dim))
    null = vt[sv <= 1e-10 * max(1.0, sv.max(initial=0.0))]
    return (null[:, :dim] + 1j * null[:, dim:]).T


def intertwining_curvature_qms(
    hodge: QmsHodge, cfg: SearchConfig | None = None, truncation: float = DEFAULT_TRUNCATION, real_structure: bool = True
) -> CurvatureReport:
    """Sampled largest K with ½((L⃗ξ|ξ) + (ξ|L⃗ξ) - L(ξ|ξ)) ⪰ K(ξ|ξ).

    ``bound`` is over all ξ in F; ``details.bound_jmap_real`` restricts to
    the real subspace fixed by 𝒥, which contains ∂A for σ^{1/2}A*σ^{-1/2} = A.
    """
    _require_certified(hodge)
    cfg = cfg or SearchConfig()
    gen = hodge.calc.generator
    n = gen.n
    basis = jmap_real_basis(hodge.calc) if real_structure else None

    def value(x, real):
        v = _unit_complex(x, n)
        v = v / np.linalg.norm(v)
        left, right = intertwining_forms_qms(hodge, v)
        if real:
            left, right = _real_restriction(left, basis), _real_restriction(right, basis)
        return pencil_min_eig(left, right, truncation).value

    res_all = _search(lambda x: value(x, False), n, cfg)
    res_real = _search(lambda x: value(x, True), n, cfg) if real_structure else None
    details = {"hodge": hodge.construction, **hodge.params}
    return _sampled_report("qms_intertwining", gen, res_all, res_real, cfg, truncation, details, "jmap_real")


def witness_upper_bound(hodge: QmsHodge, xi, truncation: float = DEFAULT_TRUNCATION) -> float:
    """Largest K with ½((L⃗ξ|ξ) + (ξ|L⃗ξ) - L(ξ|ξ)) ⪰ K(ξ|ξ) for this one ξ.

    Any intertwining constant certified by this Hodge operator is at most the
    returned value.
    """
    calc = hodge.calc
    gen = calc.generator
    xi = calc.to_tuple(np.asarray(xi, dtype=complex))
    hxi = calc.to_tuple(hodge.matrix @ vec(xi))
    right = calc.pairing(xi)
    if np.abs(right).max(initial=0.0) <= 1e-14:
        raise ValidationError("(ξ|ξ) vanishes; no upper bound from this ξ")
    cross = calc.pairing(hxi, xi)
    left = 0.5 * (cross + cross.conj().T - gen(right))
    return pencil_min_eig(0.5 * (left + left.conj().T), 0.5 * (right + right.conj().T), truncation).value


@dataclass
class SweepResult:
    grid: tuple
    bounds: tuple
    best_K: float
    best_bound: float


def splitting_sweep(calc: Fodc, k_grid, cfg: SearchConfig | None = None) -> SweepResult:
    """Sampled intertwining bound of the splitting family over a grid of K."""
    cfg = cfg or SearchConfig(samples=64, steps=100)
    bounds = []
    for k in k_grid:
        rep = intertwining_curvature_qms(splitting_hodge_qms(calc, k), cfg, real_structure=False)
        bounds.append(rep.bound)
    i = int(np.argmax(bounds))
    return SweepResult(tuple(float(k) for k in k_grid), tuple(bounds), float(k_grid[i]), float(bounds[i]))


# ---------------------------------------------------------------- gradient estimates


@dataclass
class GeViolation:
    t: float
    lhs: float
    rhs: float
    A: np.ndarray
    rho: np.ndarray

    def to_dict(self):
        return {"t": self.t, "lhs": self.lhs, "rhs": self.rhs, "A": self.A, "rho": self.rho}


@dataclass
class CheckResult:
    holds: bool
    violation: GeViolation | None = None
    checked: int = 0


def _check_self_adjoint(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("A must be a square matrix")
    if np.abs(a - a.conj().T).max() > 1e-12 * max(1.0, float(np.abs(a).max())):
        raise ValidationError("A must be self-adjoint")
    return a


class _Evolution:
    """Cached P_t and P_t† superoperators on a time grid."""

    def __init__(self, gen: QmsGenerator, t_grid):
        self.gen = gen
        self.t_grid = tuple(float(t) for t in t_grid)
        if any(t < 0 for t in self.t_grid):
            raise ValidationError("time grid must be nonnegative")
        self.forward = {t: semigroup(gen, t) for t in self.t_grid}

    def ge_sides(self, calc, mean, K, a, rho_mat, t):
        n = self.gen.n
        p = self.forward[t]
        a_t = unvec(p @ vec(a), n)
        rho_t = unvec(p.conj().T @ vec(rho_mat), n)
        rho_t = 0.5 * (rho_t + rho_t.conj().T)
        lhs = lambda_inner(calc, mean, DensityMatrix(rho_mat, True), calc.partial(a_t), calc.partial(a_t)).real
        rhs = np.exp(-2 * K * t) * lambda_inner(calc, mean, DensityMatrix(rho_t, True), calc.partial(a), calc.partial(a)).real
        return float(lhs), float(rhs)


def ge_check_qms(gen: QmsGenerator, mean, K: float, a, rho, t_grid=DEFAULT_T_GRID, calc: Fodc | None = None) -> CheckResult:
    """Check ‖∂P_tA‖²_{Λ,ρ} ≤ e^{-2Kt}‖∂A‖²_{Λ,P_t†ρ} on a time grid.

    A violation is lhs > rhs (1 + 1e-9) + 1e-12.
    """
    mean = _resolve_mean(mean)
    a = _check_self_adjoint(a)
    rho = _as_state(rho)
    calc = calc or Fodc(gen)
    evo = _Evolution(gen, t_grid)
    return _ge_check(evo, calc, mean, K, a, rho.matrix)


def _ge_check(evo, calc, mean, K, a, rho_mat):
    for t in evo.t_grid:
        lhs, rhs = evo.ge_sides(calc, mean, K, a, rho_mat, t)
        if lhs > rhs * (1 + 1e-9) + 1e-12:
            return CheckResult(False, GeViolation(t, lhs, rhs, a, rho_mat), 1)
    return CheckResult(True, None, 1)


def ge_falsify_qms(gen: QmsGenerator, mean, K: float, samples: int = 1000, seed: int = 0, t_grid=DEFAULT_T_GRID, log_scale: float = 2.0) -> CheckResult:
    """Search random self-adjoint A and positive definite ρ for a GE violation."""
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    mean = _resolve_mean(mean)
    calc = Fodc(gen)
    evo = _Evolution(gen, t_grid)
    rng = np.random.default_rng(seed)
    n = gen.n
    for k in range(samples):
        a = random_hermitian(rng, n)
        rho = random_state(rng, n, log_scale)
        res = _ge_check(evo, calc, mean, K, a, rho)
        if not res.holds:
            res.checked = k + 1
            return res
    return CheckResult(True, None, samples)


def _lambda_derivative_weights(calc: Fodc, mean: MeanFunction, rho: DensityMatrix):
    """Divided differences of the multipliers in the left and right eigenvalue."""
    lam, _ = rho.spectrum
    d, n = calc.d, calc.n
    w = np.exp(calc.generator.omegas)
    # left slot: F(a, b) = Λ(b, e^ω a) varied in a
    a = w[:, None, None, None] * lam[None, :, None, None]
    a2 = w[:, None, None, None] * lam[None, None, :, None]
    b = np.broadcast_to(lam[None, None, None, :], (d, n, n, n))
    left = w[:, None, None, None] * divided_difference(mean, 2, np.broadcast_to(a, (d, n, n, n)), np.broadcast_to(a2, (d, n, n, n)), b)
    # right slot: F(a, b) varied in b, indexed [j, p, q, q']
    fixed = np.broadcast_to(w[:, None, None, None] * lam[None, :, None, None], (d, n, n, n))
    bq = np.broadcast_to(lam[None, None, :, None], (d, n, n, n))
    bq2 = np.broadcast_to(lam[None, None, None, :], (d, n, n, n))
    right = divided_difference(mean, 1, bq, bq2, fixed)
    return left, right


def _ge_bilinear_parts(calc, mean, rho, xs, ys, delta):
    """Re<ξ, η>_{Λ,ρ} and its derivative along ρ + sΔ for stacks of tuples."""
    weights, u = lambda_weights(calc, mean, rho)
    left, right = _lambda_derivative_weights(calc, mean, rho)
    xt = u.conj().T @ xs @ u
    yt = u.conj().T @ ys @ u
    dt = u.conj().T @ delta @ u
    n = calc.n
    base = np.einsum("ajpq,jpq,bjpq->ab", np.conj(xt), weights, yt) / n
    # left term Σ conj(ξ[p,q]) Δ[p,p'] η[p',q] F1(λ_p, λ_p'; λ_q)
    dl = np.einsum("ajpq,pr,jprq,bjrq->ab", np.conj(xt), dt, left, yt) / n
    # right term Σ conj(ξ[p,q]) η[p,q'] Δ[q',q] F2(λ_p; λ_q, λ_q')
    dr = np.einsum("ajpq,bjps,sq,jpqs->ab", np.conj(xt), yt, dt, right) / n
    return base, dl + dr


def ge_forms_qms(gen: QmsGenerator, mean, rho, basis=None, calc: Fodc | None = None):
    """Real forms (numerator, denominator) of the t = 0 GE ratio over a basis.

    The estimate at A = Σ c_k B_k is c·num·c / (2 c·den·c). The default basis
    is the Hermitian matrices.
    """
    mean = _resolve_mean(mean)
    rho = _as_state(rho)
    calc = calc or Fodc(gen)
    n = gen.n
    basis = hermitian_basis(n) if basis is None else np.asarray(basis, dtype=complex)
    grads = np.array([calc.partial(b) for b in basis])
    lgrads = np.array([calc.partial(gen(b)) for b in basis])
    flow = -gen.apply_dual(rho.matrix)
    flow = 0.5 * (flow + flow.conj().T)
    den, dden = _ge_bilinear_parts(calc, mean, rho, grads, grads, flow)
    cross, _ = _ge_bilinear_parts(calc, mean, rho, lgrads, grads, np.zeros((n, n)))
    num = cross + cross.conj().T + dden
    return np.real(0.5 * (num + num.conj().T)), np.real(0.5 * (den + den.conj().T))


def ge_derivative_estimate(gen: QmsGenerator, mean, a, rho) -> float:
    """Largest K consistent with the t = 0 derivative of GE_Λ at (A, ρ).

    The derivative of the ρ-dependent multipliers along -L†ρ uses
    Daleckii–Krein divided differences in the eigenbasis of ρ.
    """
    a = _check_self_adjoint(a)
    num, den = ge_forms_qms(gen, mean, rho, basis=[a])
    if den[0, 0] <= 1e-14:
        raise ValidationError("‖∂A‖²_{Λ,ρ} vanishes; the estimate is undefined")
    return float(num[0, 0] / (2 * den[0, 0]))


def ge_functional(gen: QmsGenerator, mean, K, a, rho, t) -> float:
    """‖∂P_tA‖²_{Λ,ρ} - e^{-2Kt}‖∂A‖²_{Λ,P_t†ρ}; defined for t of either sign."""
    from scipy.linalg import expm

    mean = _resolve_mean(mean)
    rho = _as_state(rho)
    calc = Fodc(gen)
    n = gen.n
    p = expm(-t * gen.superoperator)
    a_t = unvec(p @ vec(a), n)
    rho_t = unvec(p.conj().T @ vec(rho.matrix), n)
    rho_t = DensityMatrix(0.5 * (rho_t + rho_t.conj().T), True)
    return float(
        lambda_inner(calc, mean, rho, calc.partial(a_t), calc.partial(a_t)).real
        - np.exp(-2 * K * t) * lambda_inner(calc, mean, rho_t, calc.partial(a), calc.partial(a)).real
    )


def ge_rate_profile_qms(gen: QmsGenerator, mean, rho, truncation: float = DEFAULT_TRUNCATION, calc=None):
    """Infimum over self-adjoint A of the t = 0 GE ratio at fixed ρ, with the minimizer."""
    n = gen.n
    basis = hermitian_basis(n)
    num, den = ge_forms_qms(gen, mean, rho, basis=basis, calc=calc)
    res = pencil_min_eig(num, den, truncation)
    a = None if res.witness is None else np.tensordot(np.real(res.witness), basis, axes=1)
    return 0.5 * res.value, a


def ge_derivative_infimum(gen: QmsGenerator, mean, samples: int = 1000, seed: int = 0, log_scale: float = 2.0) -> CurvatureReport:
    """Sampled infimum of the t = 0 GE ratio.

    Densities are drawn at random (σ first); for each one the infimum over
    self-adjoint A is exact. The result estimates the best GE_Λ constant from
    above.
    """
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    mean = _resolve_mean(mean)
    calc = Fodc(gen)
    rng = np.random.default_rng(seed)
    n = gen.n
    rhos = [gen.sigma.matrix] + [random_state(rng, n, log_scale) for _ in range(samples)]

    def one(rho):
        return ge_rate_profile_qms(gen, mean, rho, calc=calc)

    results = parallel_map(one, rhos)
    values = np.array([r[0] for r in results])
    i = int(np.argmin(values))
    return CurvatureReport(
        "qms_ge_search",
        float(values[i]),
        {},
        {"rho": rhos[i], "A": results[i][1]},
        "sampled",
        samples=samples,
        seed=seed,
        tolerances={"truncation": DEFAULT_TRUNCATION},
        details={"mean": mean.name},
    )


# ---------------------------------------------------------------- entropy decay


def relative_entropy(rho, sigma) -> float:
    """D(ρ‖σ) = tau(ρ(log ρ - log σ)); eigenvalues clipped at 1e-14, 0 log 0 = 0."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    lam, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    lam = np.clip(lam, 0.0, None)
    safe = np.clip(lam, ENTROPY_CLIP, None)
    ent = np.where(lam > 0, lam * np.log(safe), 0.0).sum() / rho.shape[0]
    mu, w = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    log_sigma = (w * np.log(mu)) @ w.conj().T
    cross = np.real(np.trace(rho @ log_sigma)) / rho.shape[0]
    return float(ent - cross)


@dataclass
class MlsiViolation:
    t: float
    entropy: float
    bound: float
    rho: np.ndarray

    def to_dict(self):
        return {"t": self.t, "entropy": self.entropy, "bound": self.bound, "rho": self.rho}


def mlsi_decay_check(gen: QmsGenerator, rate: float, rho0, t_grid=DEFAULT_T_GRID, evo: _Evolution | None = None) -> CheckResult:
    """Check D(P_t†ρ₀‖σ) ≤ e^{-rate t} D(ρ₀‖σ) on a time grid (rate = 2K)."""
    rho0 = density_matrix(rho0, positive_definite=False)
    evo = evo or _Evolution(gen, t_grid)
    n = gen.n
    sigma = gen.sigma.matrix
    d0 = relative_entropy(rho0.matrix, sigma)
    for t in evo.t_grid:
        rho_t = unvec(evo.forward[t].conj().T @ vec(rho0.matrix), n)
        dt = relative_entropy(rho_t, sigma)
        bound = np.exp(-rate * t) * d0
        if dt > bound * (1 + 1e-9) + 1e-12:
            return CheckResult(False, MlsiViolation(t, dt, bound, rho0.matrix), 1)
    return CheckResult(True, None, 1)


def random_mixed_state(rng, n):
    """Random state mixing a random pure state with the identity; covers
    near-pure and near-identity states."""
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    weight = rng.uniform(0.0, 1.0) ** 3 if rng.random() < 0.5 else 1 - rng.uniform(0.0, 1.0) ** 3
    rho = weight * n * np.outer(psi, psi.conj()) + (1 - weight) * np.eye(n)
    return 0.5 * (rho + rho.conj().T)


def mlsi_falsify(gen: QmsGenerator, rate: float, samples: int = 1000, seed: int = 0, t_grid=DEFAULT_T_GRID) -> CheckResult:
    """Search random states for a violation of entropy decay at ``rate``."""
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    evo = _Evolution(gen, t_grid)
    for k in range(samples):
        res = mlsi_decay_check(gen, rate, random_mixed_state(rng, gen.n), evo=evo)
        if not res.holds:
            res.checked = k + 1
            return res
    return CheckResult(True, None, samples)
