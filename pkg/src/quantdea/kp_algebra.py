"""Kolm-Pollack arithmetic and its tropical limits.

For a finite nonzero ``alpha`` the quantized addition is

    a (+)_alpha b = (1/alpha) * ln(exp(alpha*a) + exp(alpha*b))

and the matching multiplication is ordinary ``+``.  As ``alpha -> +inf`` the
addition degenerates to ``max`` and as ``alpha -> -inf`` to ``min``.  All
finite-alpha evaluations go through a max-shifted log-sum-exp so that
``|alpha|`` in the tens does not overflow doubles.

Sentinels: ``-inf`` is the additive zero when ``alpha > 0`` and ``+inf`` when
``alpha < 0``.  The opposite infinity is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import NumericalFailure, PreconditionError

__all__ = [
    "Alpha",
    "AlphaLike",
    "SIMPLEX_TOL",
    "kp_add",
    "kp_mean",
    "kp_combine",
    "simplex_weights_valid",
    "simplex_normalize",
]

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Alpha:
    """Deformation parameter: a finite nonzero real, ``+inf`` or ``-inf``."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if math.isnan(v):
            raise PreconditionError("alpha must not be NaN")
        if v == 0.0:
            raise PreconditionError("alpha must be nonzero (the logarithmic case is not supported)")
        object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, a: "AlphaLike") -> "Alpha":
        if isinstance(a, Alpha):
            return a
        if isinstance(a, str):
            return cls.parse(a)
        return cls(float(a))

    @classmethod
    def parse(cls, text: str) -> "Alpha":
        s = text.strip().lower()
        if s in ("+inf", "inf", "+infinity", "infinity"):
            return cls(math.inf)
        if s in ("-inf", "-infinity"):
            return cls(-math.inf)
        try:
            return cls(float(s))
        except ValueError:
            pass
        try:
            return cls(float(Fraction(s)))
        except (ValueError, ZeroDivisionError) as exc:
            raise PreconditionError(f"cannot parse alpha from {text!r}") from exc

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def sign(self) -> int:
        return 1 if self.value > 0 else -1

    @property
    def zero(self) -> float:
        """Additive neutral element of the semiring (``-inf`` or ``+inf``)."""
        return -math.inf if self.value > 0 else math.inf

    def __str__(self) -> str:
        if self.value == math.inf:
            return "+inf"
        if self.value == -math.inf:
            return "-inf"
        r = repr(self.value)
        return r[:-2] if r.endswith(".0") else r


AlphaLike = Union[Alpha, float, int, str]


def _check_sentinels(v: np.ndarray, alpha: Alpha) -> None:
    if np.isnan(v).any():
        raise PreconditionError("NaN operand")
    forbidden = -alpha.zero
    if (v == forbidden).any():
        raise PreconditionError(f"{forbidden} is not an element of the alpha={alpha} semiring")


def kp_add(a: float, b: float, alpha: AlphaLike) -> float:
    """Quantized addition ``a (+)_alpha b``."""
    al = Alpha.of(alpha)
    _check_sentinels(np.array([a, b], dtype=float), al)
    if not al.is_finite:
        return max(a, b) if al.value > 0 else min(a, b)
    # dominant operand first, so the remaining exponent is <= 0
    hi, lo = (a, b) if al.value * a >= al.value * b else (b, a)
    if math.isinf(hi):
        return hi
    if math.isinf(lo):
        return float(hi)
    out = hi + math.log1p(math.exp(al.value * (lo - hi))) / al.value
    if not math.isfinite(out):
        raise NumericalFailure(f"kp_add overflow at alpha={al}")
    return out


def kp_mean(values: Sequence[float] | np.ndarray, alpha: AlphaLike, axis: int | None = None):
    """Generalized Kolm-Pollack mean ``(1/alpha) ln sum exp(alpha v_i)``.

    With ``axis`` given, reduces along that axis of an array and returns an
    array; otherwise returns a float.  At ``alpha = +/-inf`` this is the max /
    min of the values.
    """
    al = Alpha.of(alpha)
    v = np.asarray(values, dtype=float)
    if v.size == 0 or (axis is not None and v.shape[axis] == 0):
        raise PreconditionError("kp_mean of an empty sequence")
    _check_sentinels(v, al)
    if not al.is_finite:
        out = v.max(axis=axis) if al.value > 0 else v.min(axis=axis)
        return float(out) if axis is None else out
    a = al.value
    m = v.max(axis=axis, keepdims=True) if a > 0 else v.min(axis=axis, keepdims=True)
    all_zero = ~np.isfinite(m)
    m_safe = np.where(all_zero, 0.0, m)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        s = np.exp(a * (v - m_safe)).sum(axis=axis, keepdims=True)
        out = m_safe + np.log(s) / a
    out = np.where(all_zero, m, out)
    if not np.all(np.isfinite(out) | all_zero):
        raise NumericalFailure(f"kp_mean overflow at alpha={al}")
    if axis is None:
        return float(out.reshape(-1)[0])
    return np.squeeze(out, axis=axis)


def kp_combine(points, t, alpha: AlphaLike) -> np.ndarray:
    """Elementwise ``(+)_alpha`` over k of ``t_k * 1 + points[k]``.

    ``points`` has shape (l, d); ``t`` has length l.  Sentinel weights
    (``-inf`` for positive alpha, ``+inf`` for negative) exclude a point.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(t, dtype=float).reshape(-1)
    if P.shape[0] != w.shape[0] or w.shape[0] == 0:
        raise PreconditionError(
            f"kp_combine needs one weight per point, got {P.shape[0]} points and {w.shape[0]} weights"
        )
    with np.errstate(invalid="ignore"):
        shifted = w[:, None] + P
    return kp_mean(shifted, alpha, axis=0)


def simplex_weights_valid(t, alpha: AlphaLike, tol: float = SIMPLEX_TOL) -> bool:
    """True when ``t`` lies on the generalized sigma_alpha-simplex."""
    al = Alpha.of(alpha)
    w = np.asarray(t, dtype=float).reshape(-1)
    if w.size == 0 or np.isnan(w).any():
        return False
    if (w == -al.zero).any():
        return False
    if al.is_finite:
        if np.all(w == al.zero):
            return False
        return abs(kp_mean(w, al)) <= tol
    finite = w[np.isfinite(w)]
    if finite.size == 0:
        return False
    if al.value > 0:
        return bool(np.all(finite <= 0.0) and finite.max() == 0.0)
    return bool(np.all(finite >= 0.0) and finite.min() == 0.0)


def simplex_normalize(tau, alpha: AlphaLike) -> np.ndarray:
    """Shift ``tau`` by a constant so that it lands on the sigma_alpha-simplex."""
    w = np.asarray(tau, dtype=float)
    return w - kp_mean(w, alpha)
