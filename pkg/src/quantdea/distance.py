"""Translation distance functions for every technology family.

``D_in`` is the largest ``delta`` with ``(x - delta 1, y)`` feasible and
``D_out`` the largest with ``(x, y + delta 1)`` feasible.  Tropical families
use closed forms built on the beta tables; Min-Plus scores go through the
swap ``(x, y) -> (-y, -x)`` which turns a Min-Plus technology on A into a
Max-Plus technology on the swapped data.  Finite alpha and convex families
are solved as linear programs; FDH by enumeration.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import PointSet, swap_negate
from .errors import NumericalFailure, PreconditionError
from .kp_algebra import Alpha, AlphaLike
from .lp import LpProblem, Status, solve
from .technology import Family, Point, Returns, TechSpec, contains

__all__ = [
    "Orientation",
    "TropicalVariant",
    "ScoreRecord",
    "BetaTable",
    "beta_tables",
    "maxplus_distance",
    "minplus_distance",
    "distance_tropical",
    "distance_quantized_lp",
    "distance_convex",
    "distance_fdh",
    "distance_at",
    "farrell",
    "score_all",
    "audit_benchmark",
    "report_json",
    "report_csv",
    "INTEGER_SLACK",
]

# floor() slack when a continuous LP score is projected onto the integer lattice
INTEGER_SLACK = 1e-9


class Orientation(str, enum.Enum):
    IN = "in"
    OUT = "out"

    @classmethod
    def parse(cls, text: "str | Orientation") -> "Orientation":
        if isinstance(text, Orientation):
            return text
        s = str(text).strip().lower()
        if s in ("in", "input"):
            return cls.IN
        if s in ("out", "output"):
            return cls.OUT
        raise PreconditionError(f"orientation must be 'in' or 'out', got {text!r}")

    @property
    def other(self) -> "Orientation":
        return Orientation.OUT if self is Orientation.IN else Orientation.IN


class TropicalVariant(str, enum.Enum):
    MAXPLUS_VRS = "maxplus-vrs"
    MAXPLUS_CRS = "maxplus-crs"
    MINPLUS_VRS = "minplus-vrs"
    MINPLUS_CRS = "minplus-crs"

    @property
    def sign(self) -> int:
        return 1 if self.value.startswith("max") else -1

    @property
    def returns(self) -> Returns:
        return Returns.CRS if self.value.endswith("crs") else Returns.VRS

    @property
    def tech(self) -> TechSpec:
        return TechSpec.quantized(math.inf * self.sign, self.returns)

    @classmethod
    def of(cls, sign: int, returns: Returns) -> "TropicalVariant":
        return cls(f"{'max' if sign > 0 else 'min'}plus-{Returns(returns).value}")


@dataclass
class ScoreRecord:
    firm_id: str
    tech: TechSpec
    orientation: Orientation
    delta: float
    benchmark: Point
    farrell: float | None = None
    duals: np.ndarray | None = None
    integral: bool = False
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "firm": self.firm_id,
            "delta": _json_num(self.delta),
            "benchmark": self.benchmark.tolist(),
            "integral": self.integral,
            "flags": list(self.flags),
        }
        if self.farrell is not None:
            d["farrell"] = _json_num(self.farrell)
        return d


@dataclass(frozen=True)
class BetaTable:
    beta: np.ndarray
    beta_c: np.ndarray


def beta_tables(ds: PointSet) -> BetaTable:
    """``beta[a, k] = min_i (x_a,i - x_k,i)`` and ``beta_c[a, k] = min_j (y_k,j - y_a,j)``."""
    beta = (ds.X[:, None, :] - ds.X[None, :, :]).min(axis=2)
    beta_c = (ds.Y[None, :, :] - ds.Y[:, None, :]).min(axis=2)
    return BetaTable(beta, beta_c)


# --- tropical closed forms -------------------------------------------------


def maxplus_distance(X, Y, x, y, returns: Returns, o: Orientation) -> float:
    """Max-Plus distance of ``(x, y)`` to the technology generated by rows of X, Y.

    Returns ``-inf`` when no shift puts the point in the technology.
    """
    beta = (np.asarray(x)[None, :] - X).min(axis=1)
    G = Y - np.asarray(y)[None, :]
    if Returns(returns) is Returns.CRS:
        return float((G + beta[:, None]).max(axis=0).min())
    if o is Orientation.OUT:
        if beta.max() < 0:
            return -math.inf
        return float((G + np.minimum(beta, 0.0)[:, None]).max(axis=0).min())
    inner = np.where(G >= 0, G + beta[:, None], -np.inf).max(axis=0)
    return float(min(inner.min(), beta.max()))


def minplus_distance(X, Y, x, y, returns: Returns, o: Orientation) -> float:
    """Direct Min-Plus closed forms (the mirror image of :func:`maxplus_distance`)."""
    beta_c = (Y - np.asarray(y)[None, :]).min(axis=1)
    H = np.asarray(x)[None, :] - X
    if Returns(returns) is Returns.CRS:
        return float((H + beta_c[:, None]).max(axis=0).min())
    if o is Orientation.IN:
        if beta_c.max() < 0:
            return -math.inf
        return float((H + np.minimum(beta_c, 0.0)[:, None]).max(axis=0).min())
    inner = np.where(H >= 0, H + beta_c[:, None], -np.inf).max(axis=0)
    return float(min(inner.min(), beta_c.max()))


def _benchmark(x, y, delta: float, o: Orientation) -> Point:
    if o is Orientation.IN:
        return Point(np.asarray(x) - delta, y)
    return Point(x, np.asarray(y) + delta)


def _flags(bm: Point) -> list[str]:
    return [] if bm.nonnegative else ["benchmark-outside-orthant"]


def _integral(ds: PointSet, delta: float, bm: Point) -> bool:
    return bool(ds.integral and math.isfinite(delta) and delta == math.floor(delta) and bm.is_integer and bm.nonnegative)


def distance_tropical(
    ds: PointSet,
    k: int | str,
    variant: TropicalVariant | str,
    o: Orientation | str,
    path: str = "swap",
) -> ScoreRecord:
    """Closed-form tropical distance of observed firm ``k``.

    ``path="swap"`` evaluates Min-Plus variants as Max-Plus distances on the
    swapped data; ``path="direct"`` uses the mirrored Min-Plus formulas.
    Both must agree; the swap is the default.
    """
    i = ds.index_of(k)
    v = TropicalVariant(variant)
    o = Orientation.parse(o)
    x, y = ds.X[i], ds.Y[i]
    if v.sign > 0:
        delta = maxplus_distance(ds.X, ds.Y, x, y, v.returns, o)
    elif path == "swap":
        sw = swap_negate(ds)
        delta = maxplus_distance(sw.X, sw.Y, sw.X[i], sw.Y[i], v.returns, o.other)
    elif path == "direct":
        delta = minplus_distance(ds.X, ds.Y, x, y, v.returns, o)
    else:
        raise PreconditionError(f"unknown evaluation path {path!r}")
    bm = _benchmark(x, y, delta, o)
    return ScoreRecord(ds.ids[i], v.tech, o, delta, bm, integral=_integral(ds, delta, bm), flags=_flags(bm))


# --- finite alpha ------------------------------------------------------------


def _exp_rel(V: np.ndarray, v: np.ndarray, a: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        E = np.exp(a * (V - v[None, :]))
    if not np.all(np.isfinite(E)):
        raise NumericalFailure(f"exponential transform overflows at alpha={a}")
    return E


def quantized_lp(ds: PointSet, x, y, a: float, returns: Returns, o: Orientation) -> LpProblem:
    """The transformed program in variables ``(lambda | theta, s_1..s_l)``.

    Rows are ordered inputs, outputs, then the normalization row for VRS.
    Each input row is divided by ``exp(a x_i)`` and each output row by
    ``exp(a y_j)``, which leaves the optimum unchanged.
    """
    ell = ds.ell
    EX, EY = _exp_rel(ds.X, np.asarray(x, float), a), _exp_rel(ds.Y, np.asarray(y, float), a)
    pos = a > 0
    if o is Orientation.IN:
        lp = LpProblem(np.r_[1.0, np.zeros(ell)], "min" if pos else "max")
        for i in range(ds.m):
            lp.add(np.r_[1.0, -EX[:, i]], ">=" if pos else "<=", 0.0)
        for j in range(ds.n):
            lp.add(np.r_[0.0, EY[:, j]], ">=" if pos else "<=", 1.0)
    else:
        lp = LpProblem(np.r_[1.0, np.zeros(ell)], "max" if pos else "min")
        for i in range(ds.m):
            lp.add(np.r_[0.0, EX[:, i]], "<=" if pos else ">=", 1.0)
        for j in range(ds.n):
            lp.add(np.r_[1.0, -EY[:, j]], "<=" if pos else ">=", 0.0)
    if Returns(returns) is Returns.VRS:
        lp.add(np.r_[0.0, np.ones(ell)], "==", 1.0)
    return lp


def _quantized_point(ds: PointSet, x, y, a: float, returns: Returns, o: Orientation):
    sol = solve(quantized_lp(ds, x, y, a, returns, o))
    if sol.status is Status.INFEASIBLE:
        return -math.inf, None, sol
    if sol.status is Status.UNBOUNDED:
        raise NumericalFailure("quantized distance program is unbounded")
    scale = sol.x[0]
    if scale <= 0:
        raise NumericalFailure(f"nonpositive efficiency ratio {scale!r} at alpha={a}")
    delta = (-math.log(scale) / a if o is Orientation.IN else math.log(scale) / a) + 0.0  # no -0.0
    return delta, scale, sol


def distance_quantized_lp(
    ds: PointSet, k: int | str, alpha: AlphaLike, returns: Returns | str, o: Orientation | str
) -> ScoreRecord:
    al = Alpha.of(alpha)
    if not al.is_finite:
        raise PreconditionError("distance_quantized_lp needs a finite alpha; use distance_tropical")
    i = ds.index_of(k)
    o = Orientation.parse(o)
    returns = Returns(returns)
    x, y = ds.X[i], ds.Y[i]
    delta, scale, sol = _quantized_point(ds, x, y, al.value, returns, o)
    if not math.isfinite(delta):
        raise NumericalFailure(f"observed firm {ds.ids[i]!r} reported outside its own technology")
    bm = _benchmark(x, y, delta, o)
    tech = TechSpec.quantized(al, returns)
    return ScoreRecord(ds.ids[i], tech, o, delta, bm, farrell=scale, duals=sol.duals, flags=_flags(bm))


# --- convex DEA ----------------------------------------------------------------


def _convex_point(ds: PointSet, x, y, returns: Returns, o: Orientation) -> tuple[float, object]:
    ell = ds.ell
    # variables: delta+, delta-, t_1..t_l
    lp = LpProblem(np.r_[1.0, -1.0, np.zeros(ell)], "max")
    din = 1.0 if o is Orientation.IN else 0.0
    for i in range(ds.m):
        lp.add(np.r_[din, -din, ds.X[:, i]], "<=", x[i])
    for j in range(ds.n):
        lp.add(np.r_[din - 1.0, 1.0 - din, ds.Y[:, j]], ">=", y[j])
    if Returns(returns) is Returns.VRS:
        lp.add(np.r_[0.0, 0.0, np.ones(ell)], "==", 1.0)
    sol = solve(lp)
    if sol.status is Status.UNBOUNDED:
        return math.inf, sol
    if sol.status is Status.INFEASIBLE:
        return -math.inf, sol
    return float(sol.objective) + 0.0, sol


def distance_convex(ds: PointSet, k: int | str, returns: Returns | str, o: Orientation | str) -> ScoreRecord:
    i = ds.index_of(k)
    o = Orientation.parse(o)
    returns = Returns(returns)
    x, y = ds.X[i], ds.Y[i]
    delta, sol = _convex_point(ds, x, y, returns, o)
    fam = Family.CONVEX_CRS if returns is Returns.CRS else Family.CONVEX_VRS
    flags = []
    if math.isinf(delta):
        flags.append("unbounded")
        bm = Point(x, y)
    else:
        bm = _benchmark(x, y, delta, o)
        flags += _flags(bm)
    ref = x if o is Orientation.IN else y
    far = farrell(ds, i, fam, o) if np.any(ref != 0) else None
    return ScoreRecord(ds.ids[i], TechSpec(fam), o, delta, bm, farrell=far, duals=sol.duals, flags=flags)


# --- FDH -------------------------------------------------------------------------


def _fdh_value(X, Y, x, y, o: Orientation) -> float:
    if o is Orientation.OUT:
        ok = np.all(X <= x, axis=1)
        if not ok.any():
            return -math.inf
        return float((Y[ok] - y).min(axis=1).max())
    ok = np.all(Y >= y, axis=1)
    if not ok.any():
        return -math.inf
    return float((x - X[ok]).min(axis=1).max())


def distance_fdh(ds: PointSet, k: int | str, o: Orientation | str) -> ScoreRecord:
    i = ds.index_of(k)
    o = Orientation.parse(o)
    x, y = ds.X[i], ds.Y[i]
    delta = _fdh_value(ds.X, ds.Y, x, y, o)
    bm = _benchmark(x, y, delta, o)
    ref = x if o is Orientation.IN else y
    far = farrell(ds, i, Family.FDH, o) if np.any(ref != 0) else None
    return ScoreRecord(
        ds.ids[i], TechSpec(Family.FDH), o, delta, bm, farrell=far, integral=_integral(ds, delta, bm), flags=_flags(bm)
    )


# --- Farrell measures --------------------------------------------------------------


def farrell(ds: PointSet, k: int | str, family: Family | str, o: Orientation | str) -> float:
    """Radial efficiency: ``min lambda`` with ``(lambda x, y)`` feasible, or ``max theta`` with ``(x, theta y)``."""
    i = ds.index_of(k)
    fam = Family(family)
    o = Orientation.parse(o)
    x, y = ds.X[i], ds.Y[i]
    ref = x if o is Orientation.IN else y
    if not np.any(ref != 0):
        raise PreconditionError(f"firm {ds.ids[i]!r} has a zero {'input' if o is Orientation.IN else 'output'} vector")
    if fam is Family.FDH:
        with np.errstate(divide="ignore", invalid="ignore"):
            if o is Orientation.IN:
                ok = np.all(ds.Y >= y, axis=1)
                R = np.where(x > 0, ds.X / np.where(x > 0, x, 1.0), np.where(ds.X > 0, np.inf, 0.0))
                return float(R[ok].max(axis=1).min())
            ok = np.all(ds.X <= x, axis=1)
            R = np.where(y > 0, ds.Y / np.where(y > 0, y, 1.0), np.inf)
            return float(R[ok].min(axis=1).max())
    if fam not in (Family.CONVEX_CRS, Family.CONVEX_VRS):
        raise PreconditionError(f"farrell is defined here for convex and FDH families, not {fam.value}")
    ell = ds.ell
    if o is Orientation.IN:
        lp = LpProblem(np.r_[1.0, np.zeros(ell)], "min")
        for r in range(ds.m):
            lp.add(np.r_[-x[r], ds.X[:, r]], "<=", 0.0)
        for j in range(ds.n):
            lp.add(np.r_[0.0, ds.Y[:, j]], ">=", y[j])
    else:
        lp = LpProblem(np.r_[1.0, np.zeros(ell)], "max")
        for r in range(ds.m):
            lp.add(np.r_[0.0, ds.X[:, r]], "<=", x[r])
        for j in range(ds.n):
            lp.add(np.r_[-y[j], ds.Y[:, j]], ">=", 0.0)
    if fam is Family.CONVEX_VRS:
        lp.add(np.r_[0.0, np.ones(ell)], "==", 1.0)
    sol = solve(lp)
    if sol.status is Status.UNBOUNDED:
        return math.inf
    if not sol.optimal:
        raise NumericalFailure(f"Farrell program for firm {ds.ids[i]!r} is {sol.status.value}")
    return float(sol.objective)


# --- arbitrary points -----------------------------------------------------------------


def distance_at(tech: TechSpec, ds: PointSet, p: Point, o: Orientation | str, tol: float = 1e-9) -> float:
    """Distance of an arbitrary point.

    Tropical and FDH technologies use the closed forms (valid at any point);
    finite alpha and convex families solve their programs at ``p``.  Returns
    ``-inf`` when no shift makes the point feasible.
    """
    o = Orientation.parse(o)
    x, y = p.x, p.y
    if tech.family is Family.FDH:
        d = _fdh_value(ds.X, ds.Y, x, y, o)
    elif tech.is_tropical:
        f = maxplus_distance if tech.alpha.sign > 0 else minplus_distance
        d = f(ds.X, ds.Y, x, y, tech.returns, o)
    elif tech.is_quantized:
        d = _quantized_point(ds, x, y, tech.alpha.value, tech.returns, o)[0]
    else:
        d = _convex_point(ds, x, y, tech.returns, o)[0]
    if tech.discrete and math.isfinite(d):
        d = float(math.floor(d + tol))
    return d


# --- dispatch ------------------------------------------------------------------------------


def _continuous_record(ds: PointSet, i: int, tech: TechSpec, o: Orientation) -> ScoreRecord:
    if tech.family is Family.FDH:
        return distance_fdh(ds, i, o)
    if tech.family in (Family.CONVEX_CRS, Family.CONVEX_VRS):
        return distance_convex(ds, i, tech.returns, o)
    if tech.is_tropical:
        return distance_tropical(ds, i, TropicalVariant.of(tech.alpha.sign, tech.returns), o)
    return distance_quantized_lp(ds, i, tech.alpha, tech.returns, o)


def score_all(ds: PointSet, tech: TechSpec | str, o: Orientation | str) -> list[ScoreRecord]:
    """One record per firm.

    Discrete variants require integral data.  Tropical and FDH scores are
    already integers there and carry over unchanged; convex and finite-alpha
    scores are rounded down onto the lattice.
    """
    if isinstance(tech, str):
        tech = TechSpec.parse(tech)
    o = Orientation.parse(o)
    if tech.discrete and not ds.integral:
        raise PreconditionError("discrete technologies need nonnegative integer data")
    out = []
    for i in range(ds.ell):
        rec = _continuous_record(ds, i, tech.continuous, o)
        rec.tech = tech
        if tech.discrete:
            d = rec.delta
            if math.isfinite(d) and d != math.floor(d):
                d = float(math.floor(d + INTEGER_SLACK))
                rec.delta = d
                rec.farrell = None
                rec.benchmark = _benchmark(ds.X[i], ds.Y[i], d, o)
                rec.flags = _flags(rec.benchmark) + ["lattice-projected"]
            rec.integral = _integral(ds, rec.delta, rec.benchmark)
        out.append(rec)
    return out


def audit_benchmark(rec: ScoreRecord, ds: PointSet, tol: float = 1e-7) -> bool:
    """Check that the benchmark lies in the technology.

    Continuous benchmarks sit on the frontier, so they are probed ``tol``
    (relative) back along the scoring direction.  Lattice benchmarks are
    tested as they are.  Benchmarks flagged as leaving the orthant are
    tested against the constraint system only.
    """
    if not math.isfinite(rec.delta):
        return True
    bm = rec.benchmark
    if not rec.tech.discrete:
        slack = tol * (1.0 + abs(rec.delta))
        bm = bm.shifted(dx=slack) if rec.orientation is Orientation.IN else bm.shifted(dy=-slack)
    return contains(rec.tech, ds, bm, strict=bm.nonnegative)


# --- reports --------------------------------------------------------------------------------


def _json_num(v: float):
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


def report_json(records: list[ScoreRecord], dataset: str, tech: TechSpec, o: Orientation) -> str:
    doc = {
        "dataset": dataset,
        "technology": str(tech),
        "orientation": Orientation.parse(o).value,
        "scores": [r.to_dict() for r in records],
    }
    return json.dumps(doc, indent=2) + "\n"


def _fmt(v: float, digits: int | None) -> str:
    if not math.isfinite(v):
        return str(_json_num(v))
    if digits is not None:
        return f"{round(v, digits):.{digits}f}"
    return format(v, ".17g")


def report_csv(records: list[ScoreRecord], digits: int | None = None) -> str:
    if not records:
        return "firm,delta\n"
    m, n = records[0].benchmark.x.shape[0], records[0].benchmark.y.shape[0]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["firm", "technology", "orientation", "delta", "farrell"]
        + [f"bx{i + 1}" for i in range(m)]
        + [f"by{j + 1}" for j in range(n)]
        + ["integral", "flags"]
    )
    for r in records:
        w.writerow(
            [r.firm_id, str(r.tech), r.orientation.value, _fmt(r.delta, digits)]
            + ["" if r.farrell is None else _fmt(r.farrell, digits)]
            + [_fmt(v, digits) for v in r.benchmark.x]
            + [_fmt(v, digits) for v in r.benchmark.y]
            + [str(r.integral).lower(), ";".join(r.flags)]
        )
    return buf.getvalue()
