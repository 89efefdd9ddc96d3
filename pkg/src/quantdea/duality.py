"""Quantized inner product, cost and revenue functions, and duality checks.

Prices are normalized so that ``<w, 0>_alpha = 0``, i.e.
``sum_i exp(alpha w_i) = 1``.  Cost and revenue are evaluated on the
constraint system of the quantized technology (no orthant clamp), which is
the same system the distance programs use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import PointSet
from .distance import Orientation, distance_quantized_lp
from .errors import NumericalFailure, PreconditionError
from .kp_algebra import Alpha, AlphaLike, kp_mean
from .lp import LpProblem, Status, solve
from .technology import Returns, TechSpec

__all__ = [
    "PriceVector",
    "q_inner",
    "q_cost",
    "q_revenue",
    "witness_prices",
    "DualityReport",
    "duality_check",
    "NORMALIZATION_TOL",
]

NORMALIZATION_TOL = 1e-9
WEAK_TOL = 1e-9
STRONG_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PriceVector:
    w: np.ndarray
    alpha: Alpha

    def __post_init__(self) -> None:
        al = Alpha.of(self.alpha)
        if not al.is_finite:
            raise PreconditionError("price vectors need a finite alpha")
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.size == 0 or np.isnan(w).any() or np.any(w == -al.zero):
            raise PreconditionError("price entries must be reals or the semiring zero")
        total = float(np.exp(al.value * w).sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise PreconditionError(f"prices are not normalized: sum exp(alpha w) = {total!r}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "alpha", al)

    @classmethod
    def from_weights(cls, u, alpha: AlphaLike) -> "PriceVector":
        """Prices with ``exp(alpha w_i)`` proportional to the nonnegative ``u``."""
        al = Alpha.of(alpha)
        u = np.asarray(u, dtype=float).reshape(-1)
        if np.any(u < 0) or not np.any(u > 0):
            raise PreconditionError("weights must be nonnegative and not all zero")
        with np.errstate(divide="ignore"):
            logu = np.log(u / u.sum())
        return cls(logu / al.value, al)

    @classmethod
    def from_log_weights(cls, logu, alpha: AlphaLike) -> "PriceVector":
        """As :meth:`from_weights` with ``log u`` given (``-inf`` for zero weight)."""
        al = Alpha.of(alpha)
        lu = np.asarray(logu, dtype=float).reshape(-1)
        return cls((lu - kp_mean(lu, 1.0)) / al.value, al)

    @classmethod
    def random(cls, d: int, alpha: AlphaLike, rng: np.random.Generator) -> "PriceVector":
        return cls.from_weights(rng.dirichlet(np.ones(d)), alpha)

    @property
    def d(self) -> int:
        return self.w.shape[0]


def q_inner(v: PriceVector, z) -> float:
    """``(1/alpha) ln sum_i exp(alpha (w_i + z_i))``."""
    q = np.asarray(z, dtype=float).reshape(-1)
    if q.shape[0] != v.d:
        raise PreconditionError(f"price dimension {v.d} does not match vector dimension {q.shape[0]}")
    return kp_mean(v.w + q, v.alpha)


def _check(v: PriceVector, tech: TechSpec, dim: int, what: str) -> float:
    if not tech.is_quantized or not tech.alpha.is_finite:
        raise PreconditionError("cost and revenue functions need a finite-alpha quantized technology")
    if tech.alpha.value != v.alpha.value:
        raise PreconditionError(f"price alpha {v.alpha} differs from technology alpha {tech.alpha}")
    if v.d != dim:
        raise PreconditionError(f"{what} prices have dimension {v.d}, expected {dim}")
    return v.alpha.value


def _log_weights(v: PriceVector, V: np.ndarray) -> np.ndarray:
    """``ln sum_i exp(alpha (w_i + V_ki))`` for every row k."""
    a = v.alpha.value
    return a * kp_mean(v.w[None, :] + V, v.alpha, axis=1)


def _rel_exp(V: np.ndarray, ref: np.ndarray, a: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        E = np.exp(a * (V - ref[None, :]))
    if not np.all(np.isfinite(E)):
        raise NumericalFailure(f"exponential transform overflows at alpha={a}")
    return E


def _optimize(logc: np.ndarray, E: np.ndarray, rel: str, vrs: bool, sense: str):
    """Optimize ``sum_k s_k exp(logc_k)`` over ``E^T s rel 1``; returns log of the optimum."""
    shift = float(logc.max())
    lp = LpProblem(np.exp(logc - shift), sense)
    for j in range(E.shape[1]):
        lp.add(E[:, j], rel, 1.0)
    if vrs:
        lp.add(np.ones(E.shape[0]), "==", 1.0)
    # many thousands of these run per sampled-duality check; float accuracy is plenty
    sol = solve(lp, polish=False)
    if sol.status is Status.INFEASIBLE:
        return None
    if not sol.optimal:
        raise NumericalFailure(f"cost/revenue program is {sol.status.value}")
    if sol.objective <= 0:
        raise NumericalFailure("nonpositive cost/revenue optimum")
    return shift + math.log(sol.objective)


def q_cost(w: PriceVector, y, tech: TechSpec, ds: PointSet) -> float:
    """Least quantized cost of producing ``y``; ``+inf`` when no input vector can."""
    a = _check(w, tech, ds.m, "input")
    y = np.asarray(y, dtype=float).reshape(-1)
    E = _rel_exp(ds.Y, y, a)
    logc = _log_weights(w, ds.X)
    # alpha < 0 reverses every transformed inequality and the sense
    val = _optimize(logc, E, ">=" if a > 0 else "<=", tech.returns is Returns.VRS, "min" if a > 0 else "max")
    return math.inf if val is None else val / a


def q_revenue(p: PriceVector, x, tech: TechSpec, ds: PointSet) -> float:
    """Largest quantized revenue obtainable from ``x``; ``-inf`` when no output vector is."""
    a = _check(p, tech, ds.n, "output")
    x = np.asarray(x, dtype=float).reshape(-1)
    E = _rel_exp(ds.X, x, a)
    logr = _log_weights(p, ds.Y)
    val = _optimize(logr, E, "<=" if a > 0 else ">=", tech.returns is Returns.VRS, "max" if a > 0 else "min")
    return -math.inf if val is None else val / a


def witness_prices(duals: np.ndarray, ref: np.ndarray, rows: slice, alpha: Alpha) -> PriceVector | None:
    """Prices read off the distance program's multipliers on the rows in ``rows``.

    The distance rows are divided by ``exp(alpha ref)``, so the price
    weights are ``|dual_i| exp(-alpha ref_i)``, normalized.  Returns None
    when every multiplier is zero.
    """
    pi = np.abs(np.asarray(duals, dtype=float)[rows])
    if not np.any(pi > 0):
        return None
    with np.errstate(divide="ignore"):
        logu = np.log(pi) - alpha.value * np.asarray(ref, dtype=float)
    return PriceVector.from_log_weights(logu, alpha)


@dataclass
class DualityReport:
    firm: str
    orientation: Orientation
    alpha: float
    returns: str
    distance: float
    samples: int
    weak_violations: int = 0
    worst_weak_margin: float = math.inf
    strong_gap: float | None = None
    witness: PriceVector | None = None
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        strong_ok = self.degenerate or (self.strong_gap is not None and self.strong_gap <= STRONG_TOL)
        return self.weak_violations == 0 and strong_ok

    def to_dict(self) -> dict:
        def enc(v):
            return v if math.isfinite(v) else ("+inf" if v > 0 else "-inf")

        return {
            "firm": self.firm,
            "orientation": self.orientation.value,
            "alpha": self.alpha,
            "returns": self.returns,
            "distance": enc(self.distance),
            "samples": self.samples,
            "weak_violations": self.weak_violations,
            "worst_weak_margin": enc(self.worst_weak_margin),
            "strong_gap": self.strong_gap,
            "degenerate": self.degenerate,
            "witness_prices": None if self.witness is None else [enc(v) for v in self.witness.w.tolist()],
        }


def duality_check(
    ds: PointSet,
    k: int | str,
    tech: TechSpec,
    o: Orientation | str,
    trials: int,
    seed: int,
    cache: dict | None = None,
) -> DualityReport:
    """Sampled weak duality and LP-dual strong duality for one firm.

    Input orientation compares ``<w, x> - C(w, y)`` with ``D_in``; output
    orientation compares ``R(p, x) - <p, y>`` with ``D_out``.  ``cache`` may
    be shared between calls on the same data and technology: cost and
    revenue values only depend on the price vector and on ``y`` (resp. ``x``).
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    if not tech.is_quantized or not tech.alpha.is_finite:
        raise PreconditionError("duality checks need a finite-alpha quantized technology")
    o = Orientation.parse(o)
    i = ds.index_of(k)
    x, y = ds.X[i], ds.Y[i]
    al = tech.alpha
    rec = distance_quantized_lp(ds, i, al, tech.returns, o)
    D = rec.delta
    cache = {} if cache is None else cache
    rep = DualityReport(ds.ids[i], o, al.value, tech.returns.value, D, trials)

    def gap_at(v: PriceVector) -> float:
        if o is Orientation.IN:
            key = ("c", str(tech), v.w.tobytes(), y.tobytes())
            if key not in cache:
                cache[key] = q_cost(v, y, tech, ds)
            return q_inner(v, x) - cache[key]
        key = ("r", str(tech), v.w.tobytes(), x.tobytes())
        if key not in cache:
            cache[key] = q_revenue(v, x, tech, ds)
        return cache[key] - q_inner(v, y)

    rng = np.random.default_rng(seed)
    dim = ds.m if o is Orientation.IN else ds.n
    for _ in range(trials):
        margin = gap_at(PriceVector.random(dim, al, rng)) - D
        rep.worst_weak_margin = min(rep.worst_weak_margin, margin)
        if margin < -WEAK_TOL:
            rep.weak_violations += 1

    rows = slice(0, ds.m) if o is Orientation.IN else slice(ds.m, ds.m + ds.n)
    ref = x if o is Orientation.IN else y
    wit = witness_prices(rec.duals, ref, rows, al)
    if wit is None:
        rep.degenerate = True
        rep.notes.append("all multipliers on the priced rows are zero")
        return rep
    rep.witness = wit
    rep.strong_gap = abs(gap_at(wit) - D)
    return rep
