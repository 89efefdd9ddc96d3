"""Technology descriptors and membership predicates.

Every family is generated by a finite point set A = {(x_k, y_k)} and is
strongly disposable: inputs may grow and outputs may shrink.  The quantized
families aggregate with the Kolm-Pollack sum; at alpha = +inf / -inf they are
the Max-Plus / Min-Plus polytopal technologies and membership is decided by
residuation instead of an LP.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import PointSet
from .errors import DataError, NumericalFailure, PreconditionError
from .kp_algebra import Alpha, AlphaLike
from .lp import LpProblem, solve

__all__ = [
    "Family",
    "Returns",
    "TechSpec",
    "Point",
    "Membership",
    "membership",
    "contains",
    "AxiomReport",
    "verify_axioms",
]


class Family(str, enum.Enum):
    QUANT_VRS = "quant-vrs"
    QUANT_CRS = "quant-crs"
    CONVEX_VRS = "convex-vrs"
    CONVEX_CRS = "convex-crs"
    FDH = "fdh"


class Returns(str, enum.Enum):
    CRS = "crs"
    VRS = "vrs"


@dataclass(frozen=True)
class TechSpec:
    family: Family
    alpha: Alpha | None = None
    discrete: bool = False

    def __post_init__(self) -> None:
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        quant = fam in (Family.QUANT_VRS, Family.QUANT_CRS)
        if quant and self.alpha is None:
            raise PreconditionError(f"{fam.value} needs an alpha")
        if not quant and self.alpha is not None:
            raise PreconditionError(f"{fam.value} takes no alpha")
        if self.alpha is not None:
            object.__setattr__(self, "alpha", Alpha.of(self.alpha))

    @classmethod
    def quantized(cls, alpha: AlphaLike, returns: Returns | str, discrete: bool = False) -> "TechSpec":
        fam = Family.QUANT_CRS if Returns(returns) is Returns.CRS else Family.QUANT_VRS
        return cls(fam, Alpha.of(alpha), discrete)

    @classmethod
    def parse(cls, text: str) -> "TechSpec":
        """Read ``convex-vrs``, ``fdh``, ``quant-crs:+inf``, ``quant-vrs:0.5:discrete`` etc."""
        parts = [p.strip() for p in text.strip().split(":")]
        discrete = False
        if len(parts) > 1 and parts[-1].lower() == "discrete":
            discrete = True
            parts = parts[:-1]
        try:
            fam = Family(parts[0].lower())
        except ValueError:
            raise PreconditionError(f"unknown technology {parts[0]!r}") from None
        if fam in (Family.QUANT_VRS, Family.QUANT_CRS):
            if len(parts) != 2:
                raise PreconditionError(f"{fam.value} needs exactly one alpha, e.g. {fam.value}:+inf")
            return cls(fam, Alpha.parse(parts[1]), discrete)
        if len(parts) != 1:
            raise PreconditionError(f"unexpected parameters in {text!r}")
        return cls(fam, None, discrete)

    def __str__(self) -> str:
        s = self.family.value
        if self.alpha is not None:
            s += f":{self.alpha}"
        return s + (":discrete" if self.discrete else "")

    @property
    def returns(self) -> Returns | None:
        if self.family in (Family.QUANT_CRS, Family.CONVEX_CRS):
            return Returns.CRS
        if self.family in (Family.QUANT_VRS, Family.CONVEX_VRS):
            return Returns.VRS
        return None

    @property
    def is_quantized(self) -> bool:
        return self.alpha is not None

    @property
    def is_tropical(self) -> bool:
        return self.alpha is not None and not self.alpha.is_finite

    @property
    def translation_homothetic(self) -> bool:
        return self.family is Family.QUANT_CRS

    @property
    def continuous(self) -> "TechSpec":
        return TechSpec(self.family, self.alpha, False)


@dataclass(frozen=True, eq=False)
class Point:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise PreconditionError("point coordinates must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    __hash__ = None  # type: ignore[assignment]

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.x >= 0) and np.all(self.y >= 0))

    @property
    def is_integer(self) -> bool:
        z = np.concatenate([self.x, self.y])
        return bool(np.all(z == np.floor(z)))

    def shifted(self, dx: float = 0.0, dy: float = 0.0) -> "Point":
        return Point(self.x + dx, self.y + dy)

    def tolist(self) -> dict[str, list[float]]:
        return {"x": self.x.tolist(), "y": self.y.tolist()}


@dataclass
class Membership:
    member: bool
    weights: np.ndarray | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.member


def _check_dims(ds: PointSet, p: Point) -> None:
    if p.x.shape[0] != ds.m or p.y.shape[0] != ds.n:
        raise DataError(f"point has dimensions ({p.x.shape[0]}, {p.y.shape[0]}), data has ({ds.m}, {ds.n})")


def _member_tropical(X, Y, x, y, sign: int, vrs: bool) -> Membership:
    if sign > 0:
        # largest weights the input bound allows
        t = (x[None, :] - X).min(axis=1)
        if vrs:
            if t.max() < 0:
                return Membership(False, reason="no generator fits under the input bound")
            t = np.minimum(t, 0.0)
        ok = bool(np.all((t[:, None] + Y).max(axis=0) >= y))
    else:
        # smallest weights the output bound allows
        t = (y[None, :] - Y).max(axis=1)
        if vrs:
            if t.min() > 0:
                return Membership(False, reason="no generator reaches the output bound")
            t = np.maximum(t, 0.0)
        ok = bool(np.all((t[:, None] + X).min(axis=0) <= x))
    return Membership(ok, t if ok else None)


def _member_lp(Xg: np.ndarray, Yg: np.ndarray, xr: np.ndarray, yr: np.ndarray, vrs: bool, flip: bool) -> Membership:
    """Feasibility of sum s_k Xg_k <= xr, sum s_k Yg_k >= yr, s >= 0 (relations swapped when ``flip``)."""
    ell = Xg.shape[0]
    lp = LpProblem(np.zeros(ell), "min")
    le, ge = ("<=", ">=") if not flip else (">=", "<=")
    for i in range(Xg.shape[1]):
        lp.add(Xg[:, i], le, xr[i])
    for j in range(Yg.shape[1]):
        lp.add(Yg[:, j], ge, yr[j])
    if vrs:
        lp.add(np.ones(ell), "==", 1.0)
    sol = solve(lp)
    if sol.optimal:
        return Membership(True, sol.x)
    return Membership(False, reason=sol.status.value)


def _exp_rel(V: np.ndarray, v: np.ndarray, a: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        E = np.exp(a * (V - v[None, :]))
    if not np.all(np.isfinite(E)):
        raise NumericalFailure(f"exponential transform overflows at alpha={a}")
    return E


def membership(tech: TechSpec, ds: PointSet, p: Point, strict: bool = True) -> Membership:
    """Decide ``p in tech(ds)`` and return witness weights when it is.

    Witness weights are ``t`` (additive, on the sigma_alpha scale) for the
    tropical families, ``s = exp(alpha t)`` for finite alpha, convex weights
    for the convex families and a unit vector for FDH.
    """
    _check_dims(ds, p)
    if tech.discrete and not p.is_integer:
        return Membership(False, reason="point is not integer-valued")
    if strict and not p.nonnegative:
        return Membership(False, reason="point leaves the nonnegative orthant")
    X, Y, x, y = ds.X, ds.Y, p.x, p.y
    fam = tech.family
    if fam is Family.FDH:
        ok = np.all(X <= x, axis=1) & np.all(Y >= y, axis=1)
        if not ok.any():
            return Membership(False, reason="no dominating observation")
        w = np.zeros(ds.ell)
        w[int(np.argmax(ok))] = 1.0
        return Membership(True, w)
    vrs = tech.returns is Returns.VRS
    if fam in (Family.CONVEX_VRS, Family.CONVEX_CRS):
        return _member_lp(X, Y, x, y, vrs, flip=False)
    a = tech.alpha.value
    if not tech.alpha.is_finite:
        return _member_tropical(X, Y, x, y, tech.alpha.sign, vrs)
    # exp(alpha z) is increasing for alpha > 0 and decreasing for alpha < 0;
    # rows are taken relative to the query point to keep entries moderate
    Xg, Yg = _exp_rel(X, x, a), _exp_rel(Y, y, a)
    return _member_lp(Xg, Yg, np.ones(ds.m), np.ones(ds.n), vrs, flip=a < 0)


def contains(tech: TechSpec, ds: PointSet, p: Point, strict: bool = True) -> bool:
    return membership(tech, ds, p, strict).member


@dataclass
class AxiomReport:
    tech: str
    trials: int
    t3_checked: int = 0
    t3_violations: list = field(default_factory=list)
    t4_checked: int = 0
    t4_violations: list = field(default_factory=list)
    t4_expected: bool = False

    @property
    def t3_pass(self) -> bool:
        return not self.t3_violations

    @property
    def t4_pass(self) -> bool:
        return not self.t4_violations

    @property
    def ok(self) -> bool:
        """Free disposal always; translation homotheticity only where it is claimed."""
        return self.t3_pass and (self.t4_pass or not self.t4_expected)


def verify_axioms(tech: TechSpec, ds: PointSet, trials: int, seed: int) -> AxiomReport:
    """Randomized free-disposal and graph-translation checks.

    Members are generated by disposing from observed firms and then probing
    the boundary: the point is pushed along the unit direction until it
    leaves the set, so translation failures of non-homothetic technologies
    are actually exercised.
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    rep = AxiomReport(str(tech), trials, t4_expected=tech.translation_homothetic)
    span = float(max(np.ptp(np.concatenate([ds.X.ravel(), ds.Y.ravel()])), 1.0))
    for _ in range(trials):
        k = int(rng.integers(ds.ell))
        x = ds.X[k] + rng.uniform(0, span / 2, ds.m) * (rng.random(ds.m) < 0.5)
        y = ds.Y[k] * rng.uniform(0.5, 1.0, ds.n)
        if tech.discrete:
            x, y = np.ceil(x), np.floor(y)
        p = Point(x, y)
        if not contains(tech, ds, p):
            continue
        # T3: more input, less output
        u = rng.uniform(0, span / 2, ds.m)
        v = y * rng.uniform(0, 1, ds.n)
        if tech.discrete:
            u, v = np.floor(u), np.floor(v)
        q = Point(x + u, y - v)
        rep.t3_checked += 1
        if not contains(tech, ds, q):
            rep.t3_violations.append((p.tolist(), q.tolist()))
        # T4: slide along the diagonal, staying in the orthant
        lo = -min(x.min(), y.min())
        delta = float(rng.uniform(lo, span))
        if tech.discrete:
            delta = float(math.ceil(delta))
        r = Point(x + delta, y + delta)
        if not r.nonnegative:
            continue
        rep.t4_checked += 1
        if not contains(tech, ds, r):
            rep.t4_violations.append((p.tolist(), delta))
    return rep
