"""GNS-symmetric quantum Markov semigroups on M_n.

Conventions
-----------
* ``tau`` is the normalized trace, ``tau(1) = 1``. Density matrices are
  normalized by ``tau(rho) = 1``, so their ordinary trace is ``n``.
* Matrices are vectorized row-major, so ``vec(X A Y) = kron(X, Y.T) vec(A)``.
  A superoperator is the ``n² x n²`` matrix acting on these vectors.
* The generator ``L`` is the positive operator with ``P_t = exp(-tL)``:
  ``L(A) = Σ_j e^{-ω_j/2} (V_j*[V_j, A] - [V_j*, A] V_j)``.
* Tangent vectors are tuples ``ξ = (ξ_j)_j`` stored as arrays of shape
  ``(d, n, n)``; ``∂_j A = e^{-ω_j/4}[V_j, A]`` and the matrix valued pairing
  is ``(ξ|η) = Σ_j ξ_j* η_j``, which gives ``Γ(A, B) = (∂A|∂B)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .errors import CertificationError, ValidationError
from .means import MeanFunction, builtin_mean
from .optimize import SearchConfig, sphere_search

TOL = 1e-10
STATE_TOL = 1e-12


# ---------------------------------------------------------------- basic helpers


def tau(a) -> complex:
    a = np.asarray(a)
    return np.trace(a) / a.shape[0]


def vec(a) -> np.ndarray:
    return np.asarray(a).reshape(-1)


def unvec(v, n: int) -> np.ndarray:
    return np.asarray(v).reshape(n, n)


def left_mult(x) -> np.ndarray:
    """Superoperator A ↦ XA."""
    x = np.asarray(x)
    return np.kron(x, np.eye(x.shape[0]))


def right_mult(y) -> np.ndarray:
    """Superoperator A ↦ AY."""
    y = np.asarray(y)
    return np.kron(np.eye(y.shape[0]), y.T)


def apply_super(s, a) -> np.ndarray:
    a = np.asarray(a)
    return unvec(s @ vec(a), a.shape[0])


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_function(a, func) -> np.ndarray:
    lam, u = np.linalg.eigh(0.5 * (a + _dagger(a)))
    return (u * func(lam)) @ u.conj().T


def matrix_units(n: int):
    for p in range(n):
        for q in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = 1.0
            yield e


def hermitian_basis(n: int) -> np.ndarray:
    """Real basis of the Hermitian n x n matrices, orthonormal for Re tau(X*Y)."""
    out = []
    root = np.sqrt(n)
    for p in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[p, p] = root
        out.append(e)
    for p in range(n):
        for q in range(p + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = e[q, p] = root / np.sqrt(2)
            out.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[p, q] = -1j * root / np.sqrt(2)
            f[q, p] = 1j * root / np.sqrt(2)
            out.append(f)
    return np.array(out)


def transpose_permutation(n: int) -> np.ndarray:
    """Permutation matrix P with vec(A.T) = P vec(A)."""
    idx = np.arange(n * n).reshape(n, n).T.reshape(-1)
    return np.eye(n * n)[idx]


# ---------------------------------------------------------------- states


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian matrix with tau = 1; ``positive`` records strict positivity."""

    matrix: np.ndarray
    positive: bool

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self):
        return np.linalg.eigh(self.matrix)


def density_matrix(mat, positive_definite: bool = True, tol: float = STATE_TOL) -> DensityMatrix:
    """Validate Hermiticity, normalization and (strict) positivity."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError("density matrix must be square")
    scale = max(1.0, float(np.abs(mat).max()))
    if np.abs(mat - mat.conj().T).max() > tol * scale:
        raise ValidationError("density matrix is not Hermitian")
    if abs(tau(mat) - 1) > tol * scale:
        raise ValidationError("density matrix must satisfy tau(rho) = 1")
    mat = 0.5 * (mat + mat.conj().T)
    lam = np.linalg.eigvalsh(mat)
    if positive_definite and lam.min() <= 0:
        raise ValidationError("density matrix must be positive definite")
    if lam.min() < -tol * scale:
        raise ValidationError("density matrix must be positive semidefinite")
    return DensityMatrix(mat, bool(lam.min() > 0))


def identity_state(n: int) -> DensityMatrix:
    return DensityMatrix(np.eye(n, dtype=complex), True)


# ---------------------------------------------------------------- generators


@dataclass(frozen=True, eq=False)
class QmsGenerator:
    """Alicki data (V_j, ω_j) with respect to σ, plus the star pairing j ↦ j*.

    ``families`` groups jump indices; a generator built from a single list of
    jumps has one family.
    """

    jumps: tuple
    omegas: np.ndarray
    sigma: DensityMatrix
    star_pairing: tuple
    families: tuple

    @property
    def n(self) -> int:
        return self.sigma.n

    @property
    def d(self) -> int:
        return len(self.jumps)

    @cached_property
    def superoperator(self) -> np.ndarray:
        return _alicki_superoperator(self.jumps, self.omegas, self.n)

    @cached_property
    def dual(self) -> np.ndarray:
        return self.superoperator.conj().T

    def __call__(self, a) -> np.ndarray:
        return apply_super(self.superoperator, a)

    def apply_dual(self, a) -> np.ndarray:
        return apply_super(self.dual, a)


def _alicki_superoperator(jumps, omegas, n) -> np.ndarray:
    s = np.zeros((n * n, n * n), dtype=complex)
    eye = np.eye(n)
    for v, w in zip(jumps, omegas):
        vv = v.conj().T @ v
        s += np.exp(-w / 2) * (np.kron(vv, eye) + np.kron(eye, vv.T) - 2 * np.kron(v.conj().T, v.T))
    return s


def _scale(jumps):
    return max([1.0] + [float(np.abs(v).max()) ** 2 for v in jumps])


def _find_star_pairing(jumps, omegas, tol):
    pairing = []
    for j, v in enumerate(jumps):
        target = v.conj().T
        scale = max(1.0, float(np.abs(v).max()))
        match = [
            k
            for k, u in enumerate(jumps)
            if np.abs(u - target).max() <= tol * scale and abs(omegas[k] + omegas[j]) <= 1e-8 * max(1.0, abs(omegas[j]))
        ]
        if not match:
            raise ValidationError(f"condition (c) fails: the adjoint of jump {j} is not in the family")
        pairing.append(match[0])
    return tuple(pairing)


def build_qms(
    jumps,
    omegas=None,
    sigma=None,
    orthogonalize: bool = False,
    families=None,
    tol: float = TOL,
) -> QmsGenerator:
    """Validate Alicki data and assemble the generator.

    Conditions checked: (a) every jump is traceless, (b) distinct jumps of a
    family are tau-orthogonal, (c) the family is closed under adjoints and
    (d) σV_jσ⁻¹ = e^{-ω_j}V_j. With ``orthogonalize=True`` a failure of (b) is
    repaired by re-deriving an orthogonal jump family with the same generator;
    otherwise it is an error.

    :param jumps: sequence of n x n matrices.
    :param omegas: Bohr frequencies, default zero.
    :param sigma: reference state with tau(σ) = 1, default the identity.
    :param families: optional list of index lists; orthogonality (b) is only
        required inside each family.
    """
    jumps = tuple(np.asarray(v, dtype=complex) for v in jumps)
    if sigma is None:
        if not jumps:
            raise ValidationError("dimension unknown: give sigma or at least one jump")
        sigma = identity_state(jumps[0].shape[0])
    elif not isinstance(sigma, DensityMatrix):
        sigma = density_matrix(sigma)
    if not sigma.positive:
        raise ValidationError("sigma must be positive definite")
    n = sigma.n
    omegas = np.zeros(len(jumps)) if omegas is None else np.asarray(omegas, dtype=float).reshape(-1)
    if omegas.shape != (len(jumps),):
        raise ValidationError("one Bohr frequency per jump is required")
    for j, v in enumerate(jumps):
        if v.shape != (n, n):
            raise ValidationError(f"jump {j} must be a {n}x{n} matrix")
    families = (tuple(range(len(jumps))),) if families is None else tuple(tuple(int(i) for i in f) for f in families)
    if sorted(i for f in families for i in f) != list(range(len(jumps))):
        raise ValidationError("families must partition the jump indices")
    scale = _scale(jumps)

    for j, v in enumerate(jumps):
        if abs(tau(v)) > tol * max(1.0, float(np.abs(v).max())):
            raise ValidationError(f"condition (a) fails: jump {j} is not traceless")
    s = sigma.matrix
    s_inv = np.linalg.inv(s)
    for j, v in enumerate(jumps):
        if np.abs(s @ v @ s_inv - np.exp(-omegas[j]) * v).max() > tol * max(1.0, float(np.abs(v).max())) * np.abs(s).max() * np.abs(s_inv).max():
            raise ValidationError(f"condition (d) fails: jump {j} is not a modular eigenvector with frequency {omegas[j]:.6g}")
    pairing = _find_star_pairing(jumps, omegas, tol)
    for j, k in enumerate(pairing):
        if next(i for i, f in enumerate(families) if j in f) != next(i for i, f in enumerate(families) if k in f):
            raise ValidationError(f"condition (c) fails: jump {j} and its adjoint lie in different families")

    orthogonal = True
    for fam in families:
        for a in fam:
            for b in fam:
                if a < b and abs(tau(jumps[a].conj().T @ jumps[b])) > tol * scale:
                    orthogonal = False
                    bad = (a, b)
    if not orthogonal:
        if not orthogonalize:
            raise ValidationError(f"condition (b) fails: jumps {bad[0]} and {bad[1]} are not tau-orthogonal")
        rebuilt = []
        for fam in families:
            sub = _alicki_superoperator([jumps[i] for i in fam], omegas[list(fam)], n)
            fam_jumps, fam_omegas = alicki_decomposition(sub, sigma, tol=tol)
            rebuilt.append((fam_jumps, fam_omegas))
        all_j, all_w, new_fams = [], [], []
        for fam_jumps, fam_omegas in rebuilt:
            new_fams.append(list(range(len(all_j), len(all_j) + len(fam_jumps))))
            all_j.extend(fam_jumps)
            all_w.extend(fam_omegas)
        return build_qms(all_j, all_w, sigma, orthogonalize=False, families=new_fams, tol=tol)

    return QmsGenerator(jumps, omegas, sigma, pairing, families)


def qms_from_json(data: dict) -> QmsGenerator:
    """Parse ``{"n", "sigma"?, "jumps": [{"v": matrix, "omega"?}], "families"?}``.

    Matrix entries are numbers or ``[re, im]`` pairs.
    """
    from .report import decode_complex_matrix

    if "preset" in data:
        return _preset_from_json(data)
    if "jumps" not in data:
        raise ValidationError("QMS JSON: missing key 'jumps'")
    try:
        jumps = [decode_complex_matrix(j["v"]) for j in data["jumps"]]
        omegas = [float(j.get("omega", 0.0)) for j in data["jumps"]]
        sigma = decode_complex_matrix(data["sigma"]) if data.get("sigma") is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"QMS JSON: malformed jump or sigma entry ({exc})") from None
    n = data.get("n")
    if sigma is None and n is not None:
        sigma = np.eye(int(n))
    if n is not None and any(v.shape != (int(n), int(n)) for v in jumps):
        raise ValidationError(f"QMS JSON: every jump must be {n}x{n}")
    return build_qms(jumps, omegas, sigma, families=data.get("families"), orthogonalize=bool(data.get("orthogonalize", False)))


def _preset_from_json(data: dict) -> QmsGenerator:
    """Named generators: depolarizing, dephasing, commuting_projections."""
    from .report import decode_complex_matrix

    name = data["preset"]
    try:
        if name == "depolarizing":
            return depolarizing(int(data["n"]))
        if name == "dephasing":
            sigma = decode_complex_matrix(data["sigma"]) if data.get("sigma") is not None else None
            return dephasing(data["expectation"], sigma)
        if name == "commuting_projections":
            projections = [decode_complex_matrix(p) for p in data["projections"]]
            return commuting_projections(projections, [float(a) for a in data["alphas"]])
    except KeyError as exc:
        raise ValidationError(f"QMS JSON: preset {name!r} needs key {exc}") from None
    raise ValidationError(f"QMS JSON: unknown preset {name!r}")


def qms_to_json(gen: QmsGenerator) -> dict:
    from .report import encode_value

    return encode_value(
        {
            "n": gen.n,
            "sigma": gen.sigma.matrix,
            "jumps": [{"v": v, "omega": float(w)} for v, w in zip(gen.jumps, gen.omegas)],
            "families": [list(f) for f in gen.families],
        }
    )


def family_generator(gen: QmsGenerator, k: int) -> QmsGenerator:
    """Generator made of the jumps of family k only."""
    fam = gen.families[k]
    return build_qms([gen.jumps[i] for i in fam], gen.omegas[list(fam)], gen.sigma)


# ---------------------------------------------------------------- superoperators


def generator_superoperator(gen: QmsGenerator) -> np.ndarray:
    return gen.superoperator


def dual_superoperator(gen: QmsGenerator) -> np.ndarray:
    """L† with tau(L(A)B) = tau(A L†(B)): the conjugate transpose."""
    return gen.dual


def gns_weight(sigma: DensityMatrix) -> np.ndarray:
    """Gram matrix W with tau(A* B σ) = vec(A)^H W vec(B) / n."""
    return np.kron(np.eye(sigma.n), sigma.matrix.T)


def gns_residual(gen: QmsGenerator) -> float:
    """max |<LA, B>_σ - <A, LB>_σ| over matrix units, relative to |L|."""
    w = gns_weight(gen.sigma)
    s = gen.superoperator
    return float(np.abs(s.conj().T @ w - w @ s).max(initial=0.0)) / max(1.0, float(np.abs(s).max(initial=0.0)))


def semigroup(gen: QmsGenerator, t: float) -> np.ndarray:
    """Superoperator of P_t = exp(-tL), by scaling and squaring."""
    if t < 0:
        raise ValidationError("semigroup needs t >= 0")
    return expm(-t * gen.superoperator)


def choi_matrix(superop, n: int) -> np.ndarray:
    """Σ_{ij} E_ij ⊗ T(E_ij)."""
    s = np.asarray(superop).reshape(n, n, n, n)
    return s.transpose(2, 0, 3, 1).reshape(n * n, n * n)


def is_completely_positive(superop, n: int, tol: float = 1e-10) -> bool:
    c = choi_matrix(superop, n)
    return bool(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min() >= -tol)


def gamma(gen: QmsGenerator, a, b=None) -> np.ndarray:
    """Γ(A, B) = ½(L(A)*B + A*L(B) - L(A*B))."""
    a = np.asarray(a, dtype=complex)
    b = a if b is None else np.asarray(b, dtype=complex)
    la, lb = gen(a), gen(b)
    return 0.5 * (la.conj().T @ b + a.conj().T @ lb - gen(a.conj().T @ b))


def gamma2(gen: QmsGenerator, a, b=None) -> np.ndarray:
    """Γ₂(A, B) = ½(Γ(LA, B) + Γ(A, LB) - LΓ(A, B))."""
    a = np.asarray(a, dtype=complex)
    b = a if b is None else np.asarray(b, dtype=complex)
    return 0.5 * (gamma(gen, gen(a), b) + gamma(gen, a, gen(b)) - gen(gamma(gen, a, b)))


# ---------------------------------------------------------------- first order calculus


@dataclass(frozen=True, eq=False)
class Fodc:
    """Differential calculus of an Alicki generator on F = M_n^d."""

    generator: QmsGenerator

    @property
    def n(self) -> int:
        return self.generator.n

    @property
    def d(self) -> int:
        return self.generator.d

    @property
    def dim(self) -> int:
        return self.d * self.n * self.n

    @cached_property
    def gradient(self) -> np.ndarray:
        """Matrix of ∂ from vec(A) to the stacked vec(ξ_j)."""
        gen = self.generator
        n = self.n
        if not gen.jumps:
            return np.zeros((0, n * n), dtype=complex)
        blocks = [np.exp(-w / 4) * (left_mult(v) - right_mult(v)) for v, w in zip(gen.jumps, gen.omegas)]
        return np.vstack(blocks)

    @cached_property
    def jmap_matrix(self) -> np.ndarray:
        """Matrix R with vec(𝒥ξ) = R conj(vec ξ)."""
        gen = self.generator
        n = self.n
        root = hermitian_function(gen.sigma.matrix, np.sqrt)
        root_inv = hermitian_function(gen.sigma.matrix, lambda x: 1 / np.sqrt(x))
        block = -np.kron(root, root_inv.T) @ transpose_permutation(n)
        r = np.zeros((self.dim, self.dim), dtype=complex)
        m = n * n
        for j, k in enumerate(gen.star_pairing):
            r[j * m:(j + 1) * m, k * m:(k + 1) * m] = block
        return r

    @cached_property
    def weight(self) -> np.ndarray:
        """Gram matrix of <ξ, η> = tau((ξ|η)σ), up to the factor 1/n."""
        return np.kron(np.eye(self.d), gns_weight(self.generator.sigma))

    def modular_matrix(self, t: float) -> np.ndarray:
        """Matrix of V_t ξ = (e^{iω_j t} σ^{it} ξ_j σ^{-it})_j."""
        gen = self.generator
        lam, u = np.linalg.eigh(gen.sigma.matrix)
        fwd = (u * np.exp(1j * t * np.log(lam))) @ u.conj().T
        bwd = fwd.conj().T
        core = np.kron(fwd, bwd.T)
        return np.kron(np.diag(np.exp(1j * gen.omegas * t)), core)

    def to_tuple(self, v) -> np.ndarray:
        return np.asarray(v).reshape(self.d, self.n, self.n)

    def partial(self, a) -> np.ndarray:
        return self.to_tuple(self.gradient @ vec(np.asarray(a, dtype=complex)))

    def jmap(self, xi) -> np.ndarray:
        return self.to_tuple(self.jmap_matrix @ np.conj(vec(xi)))

    def modular(self, xi, t: float) -> np.ndarray:
        return self.to_tuple(self.modular_matrix(t) @ vec(xi))

    def pairing(self, xi, eta=None) -> np.ndarray:
        """(ξ|η) = Σ_j ξ_j* η_j."""
        xi = self.to_tuple(xi)
        eta = xi if eta is None else self.to_tuple(eta)
        return np.einsum("jki,jkl->il", np.conj(xi), eta)

    def inner(self, xi, eta) -> complex:
        """tau((ξ|η)σ)."""
        return complex(tau(self.pairing(xi, eta) @ self.generator.sigma.matrix))


def fodc(gen: QmsGenerator, samples: int = 8, seed: int = 0, tol: float = 1e-9) -> Fodc:
    """Build the calculus and verify its identities on random matrices.

    Checked: Leibniz rule, Γ(A, B) = (∂A|∂B), 𝒥∂A = ∂(σ^{1/2}A*σ^{-1/2}),
    modular covariance, ∂†∂ = L and isometry of 𝒥. Residuals are relative to
    the size of the generator.
    """
    calc = Fodc(gen)
    n = gen.n
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.abs(gen.superoperator).max(initial=0.0)))
    s = gen.sigma.matrix
    root = hermitian_function(s, np.sqrt)
    root_inv = hermitian_function(s, lambda x: 1 / np.sqrt(x))
    worst = {}

    def record(name, value):
        worst[name] = max(worst.get(name, 0.0), float(value) / scale)

    for _ in range(samples):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        da, db = calc.partial(a), calc.partial(b)
        record("leibniz", np.abs(calc.partial(a @ b) - (a[None] @ db + da @ b[None])).max(initial=0.0))
        record("gamma", np.abs(gamma(gen, a, b) - calc.pairing(da, db)).max(initial=0.0))
        record("jmap", np.abs(calc.jmap(da) - calc.partial(root @ a.conj().T @ root_inv)).max(initial=0.0))
        for t in (0.3, 1.7):
            lam, u = np.linalg.eigh(s)
            st = (u * np.exp(1j * t * np.log(lam))) @ u.conj().T
            record("modular", np.abs(calc.partial(st @ a @ st.conj().T) - calc.modular(da, t)).max(initial=0.0))
        xi = rng.standard_normal((gen.d, n, n)) + 1j * rng.standard_normal((gen.d, n, n))
        record("isometry", abs(calc.inner(xi, xi) - calc.inner(calc.jmap(xi), calc.jmap(xi))))
    w = calc.weight
    grad = calc.gradient
    lap = np.linalg.solve(gns_weight(gen.sigma), grad.conj().T @ w @ grad) if gen.d else np.zeros((n * n, n * n))
    record("laplacian", np.abs(lap - gen.superoperator).max(initial=0.0))
    failed = {k: v for k, v in worst.items() if v > tol}
    if failed:
        raise CertificationError(f"calculus identities fail: {failed}")
    return calc


def lambda_weights(calc: Fodc, mean: MeanFunction, rho: DensityMatrix):
    """Entrywise multipliers of the Λ-weighted norm in the eigenbasis of ρ.

    Entry (p, q) of ξ_j is weighted by Λ(λ_q, e^{ω_j} λ_p), which is the
    trace formula tau[(ξ|f(Δ_ρ)ξ)ρ] written out for Λ(s, t) = s f(t/s).
    """
    lam, u = rho.spectrum
    w = np.exp(calc.generator.omegas)[:, None, None]
    left = np.broadcast_to(lam[None, :, None] * w, (calc.d, calc.n, calc.n))
    right = np.broadcast_to(lam[None, None, :], (calc.d, calc.n, calc.n))
    return mean(right, left), u


def _resolve_mean(mean):
    return builtin_mean(mean) if isinstance(mean, str) else mean


def _as_state(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        if not rho.positive:
            raise ValidationError("rho must be positive definite")
        return rho
    return density_matrix(rho, positive_definite=True)


def lambda_inner(calc: Fodc, mean, rho, xi, eta) -> complex:
    """<ξ, η>_{Λ,ρ}."""
    mean = _resolve_mean(mean)
    rho = _as_state(rho)
    weights, u = lambda_weights(calc, mean, rho)
    xt = u.conj().T @ calc.to_tuple(xi) @ u
    et = u.conj().T @ calc.to_tuple(eta) @ u
    return complex(np.sum(weights * np.conj(xt) * et) / calc.n)


def lambda_norm(calc: Fodc, mean, rho, xi) -> float:
    """‖ξ‖²_{Λ,ρ}; for the left trivial mean this is tau((ξ|ξ)ρ)."""
    return float(lambda_inner(calc, mean, rho, xi, xi).real)


# ---------------------------------------------------------------- Alicki decomposition


def _modular_basis(sigma: DensityMatrix, group_tol: float = 1e-9):
    """τ-orthonormal traceless basis of Δ-eigenvectors, grouped by frequency.

    Returns a list of (ω, basis array). The ω = 0 group consists of Hermitian
    matrices; the others are rotated matrix units √n U E_pq U*.
    """
    n = sigma.n
    lam, u = sigma.spectrum
    root = np.sqrt(n)
    groups: dict = {}
    for p in range(n):
        for q in range(n):
            w = float(np.log(lam[q] / lam[p]))
            if abs(w) <= group_tol:
                continue
            key = next((k for k in groups if abs(k - w) <= group_tol), w)
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = root
            groups.setdefault(key, []).append(u @ e @ u.conj().T)
    zero = []
    for h in hermitian_basis(n):
        h_rot = u @ h @ u.conj().T
        rows, cols = np.nonzero(np.abs(h) > 0)
        if all(abs(np.log(lam[c] / lam[r])) <= group_tol for r, c in zip(rows, cols)):
            zero.append(h_rot)
    zero = np.array(zero)
    coords = np.array([np.real(vec(z)) for z in zero] + [np.imag(vec(z)) for z in zero]).reshape(2, len(zero), -1)
    flat = np.concatenate([coords[0], coords[1]], axis=1)
    ident = np.concatenate([vec(np.eye(n)).real, np.zeros(n * n)])
    ident /= np.linalg.norm(ident)
    flat = flat - np.outer(flat @ ident, ident)
    uu, sv, vt = np.linalg.svd(flat, full_matrices=False)
    keep = sv > 1e-10 * sv.max()
    comps = vt[keep]
    herm = (comps[:, : n * n] + 1j * comps[:, n * n:]).reshape(-1, n, n) * root
    out = [(0.0, herm)] if len(herm) else []
    out.extend((k, np.array(v)) for k, v in sorted(groups.items()))
    return out


def alicki_decomposition(superop, sigma, tol: float = TOL):
    """Jumps and frequencies reproducing a GNS-symmetric generator.

    The Kossakowski matrix of -L is taken in a basis of modular eigenvectors.
    It is block diagonal over Bohr frequencies; each block is diagonalised and
    the eigenvectors become jumps V = sqrt(γ e^{ω/2}/2) W. Positive
    frequencies are paired with the adjoints of their jumps. The result is
    rebuilt and compared with the input.

    :raises ValidationError: if the input is not of this form.
    """
    if not isinstance(sigma, DensityMatrix):
        sigma = density_matrix(sigma)
    n = sigma.n
    s = np.asarray(superop, dtype=complex)
    scale = max(1.0, float(np.abs(s).max(initial=0.0)))
    t = (-s).reshape(n, n, n, n)
    jumps, omegas = [], []
    for w, basis in _modular_basis(sigma):
        if w < 0:
            continue
        chi = np.einsum("kca,abcd,ldb->kl", basis, t, np.conj(basis)) / n**2
        chi = 0.5 * (chi + chi.conj().T)
        if w == 0.0:
            if np.abs(chi.imag).max(initial=0.0) > tol * scale:
                raise ValidationError("generator has no Hermitian Alicki family at zero frequency")
            chi = chi.real
        gam, vecs = np.linalg.eigh(chi)
        if gam.min(initial=0.0) < -tol * scale:
            raise ValidationError("generator is not completely dissipative")
        for g, e in zip(gam, vecs.T):
            if g <= tol * scale:
                continue
            coeff = np.conj(e) * np.sqrt(g * np.exp(w / 2) / 2)
            v = np.tensordot(coeff, basis, axes=1)
            jumps.append(v)
            omegas.append(w)
            if w > 0:
                jumps.append(v.conj().T)
                omegas.append(-w)
    rebuilt = _alicki_superoperator(jumps, np.array(omegas), n)
    if np.abs(rebuilt - s).max(initial=0.0) > 1e-8 * scale:
        raise ValidationError("generator is not of Alicki form for this sigma")
    return jumps, np.array(omegas)


# ---------------------------------------------------------------- conditional expectations


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    """A conditional expectation E on M_n given by its superoperator."""

    kind: str
    n: int
    superop: np.ndarray
    params: dict = field(default_factory=dict)

    def __call__(self, a) -> np.ndarray:
        return apply_super(self.superop, a)


def _pinching(projections, n):
    s = np.zeros((n * n, n * n), dtype=complex)
    for p in projections:
        s += np.kron(p, p.T)
    return s


def conditional_expectation(spec) -> ConditionalExpectation:
    """Parse an expectation description.

    Accepted forms (``kind`` key):

    * ``{"kind": "trace", "n": n}``: A ↦ tau(A)1.
    * ``{"kind": "identity", "n": n}``.
    * ``{"kind": "blocks", "sizes": [n1, n2, ...]}``: block diagonal part.
    * ``{"kind": "projections", "projections": [P1, ...]}``: Σ P_k A P_k for
      orthogonal projections summing to 1.
    * ``{"kind": "partial_trace", "dims": [n1, n2]}``: A ↦ tr_2(A)/n2 ⊗ 1.
    """
    if isinstance(spec, ConditionalExpectation):
        return spec
    from .report import decode_complex_matrix

    kind = spec.get("kind")
    if kind == "trace":
        n = int(spec["n"])
        s = np.outer(vec(np.eye(n)), vec(np.eye(n))).astype(complex) / n
        return ConditionalExpectation("trace", n, s, {"n": n})
    if kind == "identity":
        n = int(spec["n"])
        return ConditionalExpectation("identity", n, np.eye(n * n, dtype=complex), {"n": n})
    if kind == "blocks":
        sizes = [int(k) for k in spec["sizes"]]
        if any(k < 1 for k in sizes):
            raise ValidationError("block sizes must be positive")
        n = sum(sizes)
        projections, start = [], 0
        for k in sizes:
            p = np.zeros((n, n), dtype=complex)
            p[start:start + k, start:start + k] = np.eye(k)
            projections.append(p)
            start += k
        return ConditionalExpectation("blocks", n, _pinching(projections, n), {"sizes": sizes})
    if kind == "projections":
        projections = [decode_complex_matrix(p) if not isinstance(p, np.ndarray) else p.astype(complex) for p in spec["projections"]]
        n = projections[0].shape[0]
        total = sum(projections)
        for k, p in enumerate(projections):
            if np.abs(p @ p - p).max() > TOL or np.abs(p - p.conj().T).max() > TOL:
                raise ValidationError(f"projection {k} is not an orthogonal projection")
        if np.abs(total - np.eye(n)).max() > TOL:
            raise ValidationError("projections must sum to the identity")
        return ConditionalExpectation("projections", n, _pinching(projections, n), {"count": len(projections)})
    if kind == "partial_trace":
        n1, n2 = (int(k) for k in spec["dims"])
        n = n1 * n2
        s = np.zeros((n * n, n * n), dtype=complex)
        for a in matrix_units(n):
            blocks = a.reshape(n1, n2, n1, n2)
            reduced = np.einsum("ikjk->ij", blocks) / n2
            s[:, vec(a).nonzero()[0][0]] = vec(np.kron(reduced, np.eye(n2)))
        return ConditionalExpectation("partial_trace", n, s, {"dims": [n1, n2]})
    raise ValidationError(f"unknown conditional expectation kind {kind!r}")


def _check_expectation(e: ConditionalExpectation, sigma: DensityMatrix):
    s = e.superop
    n = e.n
    if np.abs(s @ s - s).max() > 1e-9:
        raise ValidationError("expectation is not idempotent")
    if np.abs(s @ vec(np.eye(n)) - vec(np.eye(n))).max() > 1e-9:
        raise ValidationError("expectation is not unital")
    if not is_completely_positive(s, n):
        raise ValidationError("expectation is not completely positive")
    pushed = apply_super(s.conj().T, sigma.matrix)
    if np.abs(pushed - sigma.matrix).max() > 1e-9:
        raise ValidationError("sigma is incompatible with the expectation: tau(E(A)σ) != tau(Aσ)")


# ---------------------------------------------------------------- builders


def depolarizing(n: int) -> QmsGenerator:
    """Generator L(A) = A - tau(A)1 with jumps F/(√2 n), F a τ-orthonormal
    traceless Hermitian basis."""
    if n < 2:
        raise ValidationError("depolarizing semigroup needs n >= 2")
    basis = [h for h in hermitian_basis(n)]
    flat = np.array([np.concatenate([vec(h).real, vec(h).imag]) for h in basis])
    ident = np.concatenate([vec(np.eye(n)).real, np.zeros(n * n)])
    ident /= np.linalg.norm(ident)
    flat = flat - np.outer(flat @ ident, ident)
    _, sv, vt = np.linalg.svd(flat, full_matrices=False)
    comps = vt[sv > 1e-10 * sv.max()]
    herm = (comps[:, : n * n] + 1j * comps[:, n * n:]).reshape(-1, n, n) * np.sqrt(n)
    return build_qms(list(herm / (np.sqrt(2) * n)), None, identity_state(n))


def dephasing(spec, sigma=None) -> QmsGenerator:
    """Generator L(A) = A - E(A) in Alicki form.

    :param spec: conditional expectation or a spec accepted by
        :func:`conditional_expectation`.
    :param sigma: reference state; must satisfy tau(E(A)σ) = tau(Aσ).
    """
    e = conditional_expectation(spec)
    sigma = identity_state(e.n) if sigma is None else (sigma if isinstance(sigma, DensityMatrix) else density_matrix(sigma))
    if sigma.n != e.n:
        raise ValidationError("sigma and expectation act on different dimensions")
    _check_expectation(e, sigma)
    lap = np.eye(e.n * e.n) - e.superop
    jumps, omegas = alicki_decomposition(lap, sigma)
    return build_qms(jumps, omegas, sigma) if jumps else QmsGenerator((), np.zeros(0), sigma, (), ((),))


def commuting_sum(families, sigma=None, tol: float = 1e-11) -> QmsGenerator:
    """Sum of Alicki generators whose jumps commute across families.

    :param families: list of families, each a list of ``(V, ω)`` pairs.
    Jumps from different families need not be orthogonal.
    """
    families = [[(np.asarray(v, dtype=complex), float(w)) for v, w in fam] for fam in families]
    if not families or not all(families):
        raise ValidationError("every family needs at least one jump")
    for k, fam in enumerate(families):
        for l, other in enumerate(families):
            if k >= l:
                continue
            for i, (v, _) in enumerate(fam):
                for j, (u, _) in enumerate(other):
                    scale = max(1.0, float(np.abs(v).max() * np.abs(u).max()))
                    if np.abs(v @ u - u @ v).max() > tol * scale:
                        raise ValidationError(f"jump {i} of family {k} does not commute with jump {j} of family {l}")
    jumps, omegas, index = [], [], []
    for fam in families:
        index.append(list(range(len(jumps), len(jumps) + len(fam))))
        jumps.extend(v for v, _ in fam)
        omegas.extend(w for _, w in fam)
    gen = build_qms(jumps, omegas, sigma, families=index)
    parts = [family_generator(gen, k).superoperator for k in range(len(families))]
    for a in range(len(parts)):
        for b in range(a + 1, len(parts)):
            comm = parts[a] @ parts[b] - parts[b] @ parts[a]
            if np.abs(comm).max() > 1e-9 * max(1.0, np.abs(parts[a]).max() * np.abs(parts[b]).max()):
                raise ValidationError(f"generators of families {a} and {b} do not commute")
    return gen


def projection_family(p, alpha: float):
    """Single jump √α (p - tau(p)) giving α(pA + Ap - 2pAp)."""
    p = np.asarray(p, dtype=complex)
    return [(np.sqrt(alpha) * (p - tau(p) * np.eye(p.shape[0])), 0.0)]


def commuting_projections(projections, alphas) -> QmsGenerator:
    return commuting_sum([projection_family(p, a) for p, a in zip(projections, alphas)])


# ---------------------------------------------------------------- Pimsner–Popa index


@dataclass
class PimsnerPopaResult:
    value: float
    witness: np.ndarray | None
    mode: str
    samples: int | None = None
    seed: int | None = None


def pimsner_popa_direction(e: ConditionalExpectation, v) -> float:
    """Largest C with E(vv*) - C vv* ⪰ 0, for a unit vector v."""
    v = np.asarray(v, dtype=complex)
    ev = e(np.outer(v, v.conj()))
    ev = 0.5 * (ev + ev.conj().T)
    lam, u = np.linalg.eigh(ev)
    keep = lam > 1e-12 * max(lam.max(), 1e-300)
    coords = u.conj().T @ v
    if np.abs(coords[~keep]).max(initial=0.0) > 1e-9:
        return 0.0
    quad = float(np.sum(np.abs(coords[keep]) ** 2 / lam[keep]))
    return 1.0 / quad


def pimsner_popa(spec, cfg: SearchConfig | None = None) -> PimsnerPopaResult:
    """Index C(E): the largest C with C A ⪯ E(A) for all positive A.

    Positive matrices are reduced to rank one, so C(E) is the infimum over
    unit vectors of :func:`pimsner_popa_direction`. The trace expectation
    returns its closed form 1/n; other expectations are searched with
    ``cfg.samples`` seeded directions and local descent.
    """
    e = conditional_expectation(spec)
    n = e.n
    if e.kind == "trace":
        return PimsnerPopaResult(1.0 / n, None, "exact")
    if e.kind == "identity":
        return PimsnerPopaResult(1.0, None, "exact")
    cfg = cfg or SearchConfig(samples=512, steps=100)

    def objective(x):
        return pimsner_popa_direction(e, x[:n] + 1j * x[n:])

    starts = [np.eye(2 * n)[k] for k in range(n)]
    res = sphere_search(objective, 2 * n, cfg, starts=starts)
    v = res.argmin[:n] + 1j * res.argmin[n:]
    return PimsnerPopaResult(float(res.value), v, "sampled", cfg.samples, cfg.seed)


# ---------------------------------------------------------------- sampling helpers


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def random_state(rng: np.random.Generator, n: int, log_scale: float = 2.0) -> np.ndarray:
    """Positive definite matrix with tau = 1 and log-normal spectrum."""
    p = np.exp(log_scale * rng.standard_normal(n))
    p = n * p / p.sum()
    u = random_unitary(rng, n)
    rho = (u * p) @ u.conj().T
    return 0.5 * (rho + rho.conj().T)
