"""Numerical kernels shared by the curvature solvers.

``pencil_min_eig`` answers the question "what is the largest K with
left - K * right positive semidefinite", which is how every ``≥ K Γ`` type
inequality is turned into a finite computation. ``sphere_search`` is the
seeded sampler used wherever an infimum over unit vectors is needed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

DEFAULT_TRUNCATION = 1e-11
HERMITIAN_TOL = 1e-12


@dataclass
class PencilResult:
    """Outcome of a pencil computation.

    ``value`` is ``+inf`` when the right form vanishes (``empty_range``) and
    ``-inf`` when the left form is negative somewhere on the kernel of the
    right form, so that no finite constant works.
    """

    value: float
    witness: np.ndarray | None
    empty_range: bool = False
    rank: int = 0


def _check_hermitian(mat, name, tol):
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    if np.abs(mat - mat.conj().T).max(initial=0.0) > tol * scale:
        raise ValidationError(f"{name} form is not Hermitian")


def pencil_min_eig(left, right, truncation: float = DEFAULT_TRUNCATION, hermitian_tol: float = HERMITIAN_TOL) -> PencilResult:
    """Largest ``K`` such that ``left - K * right`` is positive semidefinite.

    The right form is diagonalised and eigenvalues below
    ``truncation * max`` are treated as its kernel. Directions in that kernel
    are eliminated through a Schur complement of the left form, so coupling
    between the kernel and the range is taken into account. The reduced pencil
    is whitened and its smallest eigenvalue returned with a witness vector.

    :param left: Hermitian matrix.
    :param right: positive semidefinite matrix of the same size.
    :param truncation: relative threshold for the range of ``right``.
    :returns: :class:`PencilResult`.
    """
    left = np.asarray(left)
    right = np.asarray(right)
    if left.shape != right.shape or left.ndim != 2 or left.shape[0] != left.shape[1]:
        raise ValidationError("pencil forms must be square and of equal size")
    _check_hermitian(left, "left", hermitian_tol)
    _check_hermitian(right, "right", hermitian_tol)
    left = 0.5 * (left + left.conj().T)
    right = 0.5 * (right + right.conj().T)
    dim = left.shape[0]
    if dim == 0:
        return PencilResult(np.inf, None, empty_range=True)

    beta, basis = np.linalg.eigh(right)
    top = beta.max()
    if top <= 0:
        return PencilResult(np.inf, None, empty_range=True)
    if beta.min() < -1e-12 * max(1.0, top) - hermitian_tol:
        raise ValidationError("right form is not positive semidefinite")
    keep = beta > truncation * top
    ur, un = basis[:, keep], basis[:, ~keep]
    br = beta[keep]

    a_rr = ur.conj().T @ left @ ur
    scale = max(float(np.abs(left).max()), 1e-300)
    correction = None
    if un.shape[1]:
        a_nn = un.conj().T @ left @ un
        a_rn = ur.conj().T @ left @ un
        alpha, z = np.linalg.eigh(0.5 * (a_nn + a_nn.conj().T))
        pos = alpha > 1e-10 * scale
        if alpha.min() < -1e-10 * scale:
            w = un @ z[:, 0]
            return PencilResult(-np.inf, w / np.linalg.norm(w), rank=int(keep.sum()))
        if (~pos).any():
            leak = np.abs(a_rn @ z[:, ~pos]).max()
            if leak > 1e-8 * scale:
                return PencilResult(-np.inf, None, rank=int(keep.sum()))
        if pos.any():
            zp = z[:, pos]
            correction = zp @ np.diag(1.0 / alpha[pos]) @ zp.conj().T
            a_rr = a_rr - a_rn @ correction @ a_rn.conj().T

    inv_sqrt = 1.0 / np.sqrt(br)
    reduced = inv_sqrt[:, None] * a_rr * inv_sqrt[None, :]
    reduced = 0.5 * (reduced + reduced.conj().T)
    mu, vecs = np.linalg.eigh(reduced)
    y = inv_sqrt * vecs[:, 0]
    witness = ur @ y
    if correction is not None:
        a_nr = un.conj().T @ left @ ur
        witness = witness - un @ (correction @ (a_nr @ y))
    witness = witness / np.linalg.norm(witness)
    return PencilResult(float(mu[0]), witness, rank=int(keep.sum()))


@dataclass
class SearchConfig:
    samples: int = 512
    steps: int = 200
    seed: int = 0
    grad_step: float = 1e-6

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError("samples must be at least 1")


@dataclass
class SearchResult:
    value: float
    argmin: np.ndarray
    evaluations: int = 0
    refined: list = field(default_factory=list)


def _normalize(v):
    return v / np.linalg.norm(v)


def refine_on_sphere(objective, x0, value0, steps: int = 200, grad_step: float = 1e-6):
    """Projected gradient descent on the unit sphere with step halving.

    The gradient is estimated by central differences in the tangent space.
    Returns the best point seen and its value, never worse than the start.
    """
    x, fx = _normalize(np.asarray(x0, dtype=float)), float(value0)
    if not np.isfinite(fx):
        return x, fx
    step = 0.5
    dim = x.size
    eye = np.eye(dim)
    for _ in range(steps):
        grad = np.empty(dim)
        for i in range(dim):
            e = eye[i]
            grad[i] = (objective(_normalize(x + grad_step * e)) - objective(_normalize(x - grad_step * e))) / (2 * grad_step)
        grad = grad - x * (x @ grad)
        gnorm = np.linalg.norm(grad)
        if not np.isfinite(gnorm) or gnorm < 1e-14:
            break
        improved = False
        while step > 1e-12:
            cand = _normalize(x - step * grad / gnorm)
            fc = objective(cand)
            if fc < fx:
                x, fx = cand, fc
                improved = True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
    return x, fx


def sphere_search(objective, dim: int, cfg: SearchConfig | None = None, starts=None) -> SearchResult:
    """Seeded infimum search of ``objective`` over the unit sphere in R^dim.

    Samples are drawn one after another from a seeded Gaussian. Every sample
    that improves the running minimum is refined by :func:`refine_on_sphere`.
    Because both the sample stream and the set of record-setting samples only
    grow with the budget, a larger budget never returns a worse value.

    :param starts: optional deterministic starting vectors evaluated before
        the random samples.
    """
    cfg = cfg or SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    best_val, best_x = np.inf, None
    record = np.inf
    refined = []
    count = 0
    pool = [np.asarray(s, dtype=float) for s in (starts or [])]
    total = len(pool) + cfg.samples
    for k in range(total):
        x = _normalize(pool[k] if k < len(pool) else rng.standard_normal(dim))
        fx = float(objective(x))
        count += 1
        if fx < best_val or best_x is None:
            best_val, best_x = fx, x
        if fx < record:
            record = fx
            rx, rf = refine_on_sphere(objective, x, fx, cfg.steps, cfg.grad_step)
            refined.append(rf)
            if rf < best_val:
                best_val, best_x = rf, rx
    return SearchResult(best_val, best_x, evaluations=count, refined=refined)


def thread_count() -> int:
    """Worker count from ``CURVLAB_THREADS`` (default 1)."""
    raw = os.environ.get("CURVLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(func, items):
    """Order-preserving map, threaded when ``CURVLAB_THREADS`` > 1."""
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))
