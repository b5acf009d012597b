"""Operator mean functions.

A mean is stored through its representing function ``h(r) = mean(1, r)`` so
that ``mean(s, t) = s * h(t / s)`` for ``s > 0``. Boundary values at ``s = 0``
are hard-coded per mean instead of being obtained as limits.

All evaluators accept numpy arrays and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError

EQUAL_ARGUMENT_THRESHOLD = 1e-9

_SERIES_RADIUS = 1e-3


@dataclass(frozen=True)
class MeanFunction:
    """A two-variable mean ``Λ(s, t)`` with its first partial derivatives.

    Attributes
    ----------
    name : str
        Identifier used on the command line and in reports.
    eval : callable
        ``(s, t) -> Λ(s, t)`` for ``s, t >= 0``.
    partials : callable
        ``(s, t) -> (∂₁Λ, ∂₂Λ)`` for ``s, t > 0``.
    symmetric : bool
        Whether ``Λ(s, t) = Λ(t, s)``.
    """

    name: str
    eval: Callable
    partials: Callable
    symmetric: bool

    def __call__(self, s, t):
        return self.eval(s, t)

    def h(self, r):
        """Representing function ``r -> Λ(1, r)``."""
        return self.eval(np.ones_like(np.asarray(r, dtype=float)), r)


def _log_h(r):
    r = np.asarray(r, dtype=float)
    u = r - 1.0
    near = np.abs(u) < _SERIES_RADIUS
    far_r = np.where(near | (r <= 0), 2.0, r)
    far = (far_r - 1.0) / np.log(far_r)
    series = 1 + u / 2 - u**2 / 12 + u**3 / 24 - 19 * u**4 / 720 + 3 * u**5 / 160
    out = np.where(near, series, far)
    return np.where(r <= 0, 0.0, out)


def _log_dh(r):
    r = np.asarray(r, dtype=float)
    u = r - 1.0
    near = np.abs(u) < _SERIES_RADIUS
    rr = np.where(near, 2.0, r)
    lg = np.log(rr)
    far = (lg - (rr - 1.0) / rr) / lg**2
    series = 0.5 - u / 6 + u**2 / 8 - 19 * u**3 / 180 + 3 * u**4 / 32
    return np.where(near, series, far)


# name -> (h, h', value at s = 0 as a function of t, symmetric)
_TABLE = {
    "left_trivial": (
        lambda r: np.ones_like(r),
        lambda r: np.zeros_like(r),
        lambda t: np.zeros_like(t),
        False,
    ),
    "right_trivial": (
        lambda r: r,
        lambda r: np.ones_like(r),
        lambda t: t,
        False,
    ),
    "arithmetic": (
        lambda r: 0.5 * (1.0 + r),
        lambda r: np.full_like(r, 0.5),
        lambda t: 0.5 * t,
        True,
    ),
    "geometric": (
        lambda r: np.sqrt(r),
        lambda r: 0.5 / np.sqrt(r),
        lambda t: np.zeros_like(t),
        True,
    ),
    "harmonic": (
        lambda r: 2.0 * r / (1.0 + r),
        lambda r: 2.0 / (1.0 + r) ** 2,
        lambda t: np.zeros_like(t),
        True,
    ),
    "logarithmic": (_log_h, _log_dh, lambda t: np.zeros_like(t), True),
}

MEAN_NAMES = tuple(_TABLE)


def _from_representing(name, h, dh, at_zero, symmetric) -> MeanFunction:
    def evaluate(s, t):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        if np.any(s < 0) or np.any(t < 0):
            raise ValidationError(f"{name} mean needs nonnegative arguments")
        pos = s > 0
        safe_s = np.where(pos, s, 1.0)
        val = np.where(pos, safe_s * h(t / safe_s), at_zero(t))
        return val[()] if val.ndim == 0 else val

    def partials(s, t):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        if np.any(s <= 0) or np.any(t <= 0):
            raise ValidationError(f"{name} mean partials need positive arguments")
        r = t / s
        d2 = dh(r)
        d1 = h(r) - r * d2
        if d1.ndim == 0:
            return float(d1), float(d2)
        return d1, d2

    return MeanFunction(name=name, eval=evaluate, partials=partials, symmetric=symmetric)


def builtin_mean(name: str) -> MeanFunction:
    """Return one of the built-in means by name.

    :param name: one of ``left_trivial``, ``right_trivial``, ``arithmetic``,
        ``geometric``, ``harmonic``, ``logarithmic``.
    """
    try:
        h, dh, at_zero, symmetric = _TABLE[name]
    except KeyError:
        raise ValidationError(f"unknown mean {name!r}; expected one of {', '.join(MEAN_NAMES)}") from None
    return _from_representing(name, h, dh, at_zero, symmetric)


def custom_mean(name: str, evaluate: Callable, partials: Callable, symmetric: bool) -> MeanFunction:
    """Wrap a user supplied mean. Operator monotonicity is not checked."""
    return MeanFunction(name=name, eval=evaluate, partials=partials, symmetric=symmetric)


def mean_partials(mean: MeanFunction, s, t):
    """First partial derivatives ``(∂₁Λ, ∂₂Λ)`` at positive ``(s, t)``."""
    if np.any(np.asarray(s) <= 0) or np.any(np.asarray(t) <= 0):
        raise ValidationError("mean partials need positive arguments")
    return mean.partials(s, t)


def divided_difference(mean: MeanFunction, slot: int, a, a2, fixed):
    """First divided difference of ``mean`` in one slot.

    For ``slot == 1`` this is ``(Λ(a, fixed) - Λ(a2, fixed)) / (a - a2)``, and
    for ``slot == 2`` the same with the moving argument second. Pairs closer
    than ``1e-9`` fall back to the partial derivative.
    """
    a, a2, fixed = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(a2, dtype=float), np.asarray(fixed, dtype=float)
    )
    if slot not in (1, 2):
        raise ValidationError("slot must be 1 or 2")
    close = np.abs(a - a2) < EQUAL_ARGUMENT_THRESHOLD
    denom = np.where(close, 1.0, a - a2)
    if slot == 1:
        quotient = (mean(a, fixed) - mean(a2, fixed)) / denom
        limit = mean.partials(a, fixed)[0]
    else:
        quotient = (mean(fixed, a) - mean(fixed, a2)) / denom
        limit = mean.partials(fixed, a)[1]
    out = np.where(close, limit, quotient)
    return out[()] if out.ndim == 0 else out
