"""Hull membership for sigma_alpha-convex, tropical and B-convex sets, plus
sampled limit experiments.

A hull is spanned by generators z_1..z_l in R^d.  The affine hull uses
weights on the sigma_alpha-simplex; the conic (translation-homothetic) hull
allows any weights.  For finite alpha membership is an LP in
``u_k = exp(alpha t_k)``; at alpha = +/-inf it is decided exactly by
residuation, i.e. by computing the largest (resp. smallest) admissible weights
and checking whether they reproduce the query point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, PreconditionError
from .kp_algebra import Alpha, AlphaLike, kp_combine, kp_mean
from .lp import LpProblem, solve

__all__ = [
    "MembershipResult",
    "HullSpec",
    "member_sigma_alpha",
    "member_tropical",
    "member_bconvex",
    "member",
    "sample_hull",
    "hausdorff",
    "limit_gap",
    "LIMIT_EXAMPLE",
    "RECON_TOL",
]

RECON_TOL = 1e-9

# Five generators in the plane used for the hull-limit experiments.  They are
# an arbitrary choice: in general position, two of them inside the convex
# hull of the rest.
LIMIT_EXAMPLE = np.array([[0.0, 3.0], [1.0, 1.0], [3.0, 0.0], [2.0, 2.5], [4.0, 2.0]])


@dataclass
class MembershipResult:
    member: bool
    witness: np.ndarray | None = None
    reconstruction: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.member


@dataclass(frozen=True, eq=False)
class HullSpec:
    points: np.ndarray
    alpha: Alpha
    conic: bool = False

    def __post_init__(self) -> None:
        P = np.array(self.points, dtype=float, ndmin=2)
        if P.ndim != 2 or P.shape[0] == 0 or P.shape[1] == 0:
            raise PreconditionError("a hull needs at least one generator of positive dimension")
        if not np.all(np.isfinite(P)):
            raise PreconditionError("generators must be finite")
        P.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "alpha", Alpha.of(self.alpha))

    @classmethod
    def of(cls, points, alpha: AlphaLike, conic: bool = False) -> "HullSpec":
        return cls(np.asarray(points, dtype=float), Alpha.of(alpha), conic)

    @property
    def ell(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _query(h: HullSpec, z) -> np.ndarray:
    q = np.asarray(z, dtype=float).reshape(-1)
    if q.shape[0] != h.d:
        raise PreconditionError(f"query has dimension {q.shape[0]}, hull has {h.d}")
    return q


def member_sigma_alpha(h: HullSpec, z) -> MembershipResult:
    """LP membership for finite alpha: ``exp(alpha z) = sum u_k exp(alpha z_k)``, ``u >= 0``."""
    if not h.alpha.is_finite:
        raise PreconditionError("member_sigma_alpha needs a finite alpha")
    q = _query(h, z)
    a = h.alpha.value
    with np.errstate(over="ignore"):
        E = np.exp(a * (h.points - q[None, :]))
    if not np.all(np.isfinite(E)):
        raise NumericalFailure(f"exponential transform overflows at alpha={a}")
    lp = LpProblem(np.zeros(h.ell), "min")
    for j in range(h.d):
        lp.add(E[:, j], "==", 1.0)
    if not h.conic:
        lp.add(np.ones(h.ell), "==", 1.0)
    sol = solve(lp)
    if not sol.optimal:
        return MembershipResult(False)
    with np.errstate(divide="ignore"):
        t = np.log(sol.x) / a
    recon = kp_combine(h.points, t, h.alpha)
    ok = bool(np.max(np.abs(recon - q)) <= RECON_TOL * (1.0 + np.abs(q).max()))
    return MembershipResult(ok, t, recon)


def member_tropical(h: HullSpec, z) -> MembershipResult:
    """Residuation membership at alpha = +inf (max-plus) or -inf (min-plus)."""
    if h.alpha.is_finite:
        raise PreconditionError("member_tropical needs alpha = +inf or -inf")
    q = _query(h, z)
    P = h.points
    if h.alpha.sign > 0:
        t = (q[None, :] - P).min(axis=1)
        if not h.conic:
            if t.max() < 0:
                return MembershipResult(False)
            t = np.minimum(t, 0.0)
        recon = (t[:, None] + P).max(axis=0)
    else:
        t = (q[None, :] - P).max(axis=1)
        if not h.conic:
            if t.min() > 0:
                return MembershipResult(False)
            t = np.maximum(t, 0.0)
        recon = (t[:, None] + P).min(axis=0)
    ok = bool(np.max(np.abs(recon - q)) <= RECON_TOL * (1.0 + np.abs(q).max()))
    return MembershipResult(ok, t, recon)


def member(h: HullSpec, z) -> MembershipResult:
    return member_sigma_alpha(h, z) if h.alpha.is_finite else member_tropical(h, z)


def member_bconvex(points, z, inverse: bool = False) -> MembershipResult:
    """Multiplicative residuation for B-convex hulls.

    ``inverse=False``: z = max_k t_k z_k with t in [0, 1] and max t = 1.
    ``inverse=True``: z = min_k t_k z_k with t >= 1 and min t = 1; all
    coordinates must be strictly positive.
    """
    P = np.array(points, dtype=float, ndmin=2)
    q = np.asarray(z, dtype=float).reshape(-1)
    if q.shape[0] != P.shape[1]:
        raise PreconditionError(f"query has dimension {q.shape[0]}, hull has {P.shape[1]}")
    if inverse:
        if np.any(P <= 0) or np.any(q <= 0):
            raise PreconditionError("the inverse B-convex hull needs strictly positive coordinates")
        t = (q[None, :] / P).max(axis=1)
        if t.min() > 1.0:
            return MembershipResult(False)
        t = np.maximum(t, 1.0)
        recon = (t[:, None] * P).min(axis=0)
    else:
        if np.any(P < 0) or np.any(q < 0):
            raise PreconditionError("B-convex hulls live in the nonnegative orthant")
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(P > 0, q[None, :] / np.where(P > 0, P, 1.0), np.inf)
        t = R.min(axis=1)
        if t.max() < 1.0:
            return MembershipResult(False)
        t = np.minimum(t, 1.0)
        recon = (t[:, None] * P).max(axis=0)
    ok = bool(np.all(np.abs(recon - q) <= RECON_TOL * np.maximum(1.0, np.abs(q))))
    return MembershipResult(ok, t, recon)


# --- sampling -------------------------------------------------------------------


def _span(P: np.ndarray) -> float:
    return float(np.ptp(P)) + 1.0


def _draw(h_ell: int, count: int, sign: int, conic: bool, R: float, rng: np.random.Generator):
    """Raw weights with one coordinate pinned at 0, plus optional shifts."""
    tau = rng.uniform(0.0, R, size=(count, h_ell))
    tau[np.arange(count), rng.integers(h_ell, size=count)] = 0.0
    tau = -tau if sign > 0 else tau
    shift = rng.uniform(-R, R, size=count) if conic else np.zeros(count)
    return tau, shift


def _combine_rows(P: np.ndarray, tau: np.ndarray, shift: np.ndarray, alpha: Alpha) -> np.ndarray:
    out = np.empty((tau.shape[0], P.shape[1]))
    for r in range(tau.shape[0]):
        t = tau[r] - kp_mean(tau[r], alpha)
        out[r] = kp_combine(P, t + shift[r], alpha)
    return out


def sample_hull(h: HullSpec, count: int, seed: int) -> np.ndarray:
    """``count`` seeded points of the hull, one per row.

    Raw weights are uniform on ``[-R, 0]`` (``[0, R]`` for negative alpha)
    with one coordinate set to 0; they are then shifted onto the
    sigma_alpha-simplex.  At alpha = +/-inf the raw weights already lie on
    it.  Conic hulls add a uniform shift.
    """
    if count < 1:
        raise PreconditionError("count must be >= 1")
    rng = np.random.default_rng(seed)
    tau, shift = _draw(h.ell, count, h.alpha.sign, h.conic, _span(h.points), rng)
    return _combine_rows(h.points, tau, shift, h.alpha)


def hausdorff(p, q) -> float:
    """Symmetric Hausdorff distance between finite point sets (Euclidean)."""
    P = np.array(p, dtype=float, ndmin=2)
    Q = np.array(q, dtype=float, ndmin=2)
    if P.size == 0 or Q.size == 0:
        raise PreconditionError("hausdorff needs two nonempty sets")
    if P.shape[1] != Q.shape[1]:
        raise PreconditionError("point sets differ in dimension")
    D = np.sqrt(((P[:, None, :] - Q[None, :, :]) ** 2).sum(axis=2))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def limit_gap(points, alphas, sign: int, samples: int, seed: int) -> list[tuple[float, float]]:
    """Hausdorff gap between sampled affine hulls at each alpha and at ``sign * inf``.

    The same raw weight draws are used for every alpha and for the limit, so
    the gap isolates the deformation of the hull.
    """
    P = np.array(points, dtype=float, ndmin=2)
    if sign not in (1, -1):
        raise PreconditionError("sign must be +1 or -1")
    als = [Alpha.of(a) for a in alphas]
    for a in als:
        if not a.is_finite or a.sign != sign:
            raise PreconditionError(f"alpha {a} is not a finite value on the side of the {'+' if sign > 0 else '-'}inf target")
    rng = np.random.default_rng(seed)
    tau, shift = _draw(P.shape[0], samples, sign, False, _span(P), rng)
    limit = _combine_rows(P, tau, shift, Alpha(sign * math.inf))
    return [(a.value, hausdorff(_combine_rows(P, tau, shift, a), limit)) for a in als]
