"""Brute-force verification engines.

Nothing here reuses the scoring code it checks: membership for FDH and the
tropical technologies is re-derived from the defining inequalities,
distances come from doubling plus bisection on membership alone, LP optima
are recomputed by grid search over the weight simplex or by enumerating
basic solutions.  The engine is called only to obtain the values under test.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import distance as engine
from . import lp as lp_engine
from .dataset import Dataset, PointSet, swap_negate
from .errors import PreconditionError
from .technology import Family, Point, Returns, TechSpec

__all__ = [
    "OracleReport",
    "oracle_contains",
    "bisect_distance",
    "integer_scan",
    "grid_lp_check",
    "vertex_enumeration",
    "verify_suite",
    "reports_json",
]

BRACKET_CAP = 2.0**40


@dataclass(frozen=True)
class OracleReport:
    check: str
    instance: str
    oracle: float
    engine: float
    gap: float
    tol: float
    passed: bool

    @classmethod
    def compare(cls, check: str, instance: str, oracle: float, engine_value: float, tol: float) -> "OracleReport":
        if math.isinf(oracle) or math.isinf(engine_value):
            gap = 0.0 if oracle == engine_value else math.inf
        else:
            gap = abs(oracle - engine_value)
        return cls(check, instance, float(oracle), float(engine_value), gap, tol, bool(gap <= tol))


def reports_json(reports: list[OracleReport]) -> str:
    def enc(v):
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        return v

    rows = [{k: enc(v) for k, v in asdict(r).items()} for r in reports]
    return json.dumps({"passed": all(r.passed for r in reports), "reports": rows}, indent=1) + "\n"


# --- independent membership ---------------------------------------------------------


def _tropical_member(X, Y, x, y, sign: int, vrs: bool) -> bool:
    ell, m = X.shape
    n = Y.shape[1]
    if sign > 0:
        # max-plus: t_k + x_k <= x, y <= max_k (t_k + y_k), max t = 0
        best = []
        for k in range(ell):
            best.append(min(x[i] - X[k, i] for i in range(m)))
        if vrs:
            if max(best) < 0:
                return False
            best = [min(b, 0.0) for b in best]
        return all(max(best[k] + Y[k, j] for k in range(ell)) >= y[j] for j in range(n))
    # min-plus: x >= min_k (t_k + x_k), y <= t_k + y_k, min t = 0
    least = []
    for k in range(ell):
        least.append(max(y[j] - Y[k, j] for j in range(n)))
    if vrs:
        if min(least) > 0:
            return False
        least = [max(v, 0.0) for v in least]
    return all(min(least[k] + X[k, i] for k in range(ell)) <= x[i] for i in range(m))


def _lp_member(X, Y, x, y, alpha: float | None, vrs: bool) -> bool:
    ell = X.shape[0]
    if alpha is None:
        GX, GY, gx, gy, flip = X, Y, x, y, False
    else:
        GX, GY = np.exp(alpha * X), np.exp(alpha * Y)
        gx, gy = np.exp(alpha * np.asarray(x)), np.exp(alpha * np.asarray(y))
        flip = alpha < 0
    prob = lp_engine.LpProblem(np.zeros(ell), "min")
    for i in range(X.shape[1]):
        prob.add(GX[:, i], ">=" if flip else "<=", gx[i])
    for j in range(Y.shape[1]):
        prob.add(GY[:, j], "<=" if flip else ">=", gy[j])
    if vrs:
        prob.add(np.ones(ell), "==", 1.0)
    return lp_engine.solve(prob).optimal


def oracle_contains(tech: TechSpec, ds: PointSet, x, y) -> bool:
    """Membership on the constraint system (no orthant restriction)."""
    X, Y = ds.X, ds.Y
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if tech.discrete and not (np.all(x == np.floor(x)) and np.all(y == np.floor(y))):
        return False
    if tech.family is Family.FDH:
        for k in range(ds.ell):
            if np.all(X[k] <= x) and np.all(Y[k] >= y):
                return True
        return False
    vrs = tech.returns is Returns.VRS
    if tech.is_tropical:
        return _tropical_member(X, Y, x, y, tech.alpha.sign, vrs)
    return _lp_member(X, Y, x, y, tech.alpha.value if tech.is_quantized else None, vrs)


def _shifted(p: Point, delta: float, o) -> tuple[np.ndarray, np.ndarray]:
    if engine.Orientation.parse(o) is engine.Orientation.IN:
        return p.x - delta, p.y
    return p.x, p.y + delta


def bisect_distance(tech: TechSpec, ds: PointSet, p: Point, o, tol: float = 1e-9) -> float:
    """Largest feasible shift, located by doubling then bisection on membership."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")

    def feasible(d: float) -> bool:
        return oracle_contains(tech, ds, *_shifted(p, d, o))

    if not feasible(0.0):
        raise PreconditionError("bisect_distance needs a feasible starting point")
    scale = max(1.0, float(np.abs(np.concatenate([ds.X.ravel(), ds.Y.ravel()])).max()))
    lo, hi = 0.0, 1.0
    while feasible(hi):
        lo, hi = hi, 2.0 * hi
        if hi > BRACKET_CAP * scale:
            return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def integer_scan(tech: TechSpec, ds: PointSet, p: Point, o, limit: int = 10_000) -> int:
    """Largest integer shift keeping the point feasible, by linear scan."""
    if not oracle_contains(tech, ds, *_shifted(p, 0.0, o)):
        raise PreconditionError("integer_scan needs a feasible starting point")
    d = 0
    while d < limit and oracle_contains(tech, ds, *_shifted(p, d + 1, o)):
        d += 1
    return d


# --- grid search over the weight simplex ---------------------------------------------


def _simplex_grid(ell: int, step: float) -> np.ndarray:
    n = int(round(1.0 / step))
    if ell == 1:
        return np.ones((1, 1))
    if ell == 2:
        a = np.arange(n + 1) / n
        return np.column_stack([a, 1 - a])
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = i + j <= n
    a, b = i[keep] / n, j[keep] / n
    return np.column_stack([a, b, 1 - a - b])


def grid_lp_check(
    ds: PointSet,
    k: int,
    alpha: float,
    o,
    grid: float = 1e-3,
    returns: Returns | str = Returns.VRS,
) -> OracleReport:
    """Compare the quantized LP distance with an exhaustive grid over the weights.

    Every grid point is feasible, so the LP may only beat the grid, and by
    no more than a Lipschitz allowance of two grid steps.
    """
    if ds.ell > 3:
        raise PreconditionError("grid_lp_check enumerates the weight simplex and needs at most 3 firms")
    a = float(alpha)
    o = engine.Orientation.parse(o)
    returns = Returns(returns)
    x, y = ds.X[k], ds.Y[k]
    EX = np.exp(a * (ds.X - x))  # (l, m)
    EY = np.exp(a * (ds.Y - y))  # (l, n)
    S = _simplex_grid(ds.ell, grid)
    gx, gy = S @ EX, S @ EY  # aggregated transformed inputs / outputs per grid point
    pos = a > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        if o is engine.Orientation.IN:
            # lambda (the input contraction factor) must dominate every input row
            need = gx.max(axis=1) if pos else gx.min(axis=1)
            if returns is Returns.VRS:
                ok = np.all(gy >= 1, axis=1) if pos else np.all(gy <= 1, axis=1)
                vals = np.where(ok, need, np.inf if pos else -np.inf)
            else:
                r = 1.0 / (gy.min(axis=1) if pos else gy.max(axis=1))
                vals = need * r
            best = vals.min() if pos else vals.max()
            oracle = -math.log(best) / a
        else:
            reach = gy.min(axis=1) if pos else gy.max(axis=1)
            if returns is Returns.VRS:
                ok = np.all(gx <= 1, axis=1) if pos else np.all(gx >= 1, axis=1)
                vals = np.where(ok, reach, -np.inf if pos else np.inf)
            else:
                r = 1.0 / (gx.max(axis=1) if pos else gx.min(axis=1))
                vals = reach * r
            best = vals.max() if pos else vals.min()
            oracle = math.log(best) / a
    got = engine.distance_quantized_lp(ds, k, a, returns, o).delta
    E = np.concatenate([EX.ravel(), EY.ravel()])
    lip = ds.ell * float(E.max() / E.min()) / abs(a)
    slack = 2.0 * grid * lip
    inst = f"l={ds.ell} firm={k} alpha={a:g} {returns.value} {o.value} grid={grid:g}"
    engine_ahead = got - oracle
    passed = bool(-1e-9 <= engine_ahead <= slack + 1e-9)
    return OracleReport("grid-lp", inst, oracle, got, abs(engine_ahead), slack, passed)


# --- LP vertex enumeration ---------------------------------------------------------------


def _vertices(G: np.ndarray, h: np.ndarray, eq: list[bool]) -> list[np.ndarray]:
    """Basic feasible points of ``{x : G_i x <= h_i, = for rows flagged eq}``."""
    n = G.shape[1]
    eq_idx = [i for i, e in enumerate(eq) if e]
    free = [i for i, e in enumerate(eq) if not e]
    ineq = np.array(free, dtype=int)
    # dependent (e.g. all-zero) equality rows do not pin any direction
    need = n - (int(np.linalg.matrix_rank(G[eq_idx])) if eq_idx else 0)
    out = []
    for extra in itertools.combinations(free, need):
        act = eq_idx + list(extra)
        Ga, ha = G[act], h[act]
        if np.linalg.matrix_rank(Ga) < n:
            continue
        xs = np.linalg.lstsq(Ga, ha, rcond=None)[0]
        tol = 1e-9 * (1.0 + float(np.abs(G).max() * np.abs(xs).max() + np.abs(ha).max()))
        viol = G @ xs - h
        if np.any(np.abs(viol[act]) > tol) or np.any(viol[ineq] > tol):
            continue
        out.append(xs)
    return out


def vertex_enumeration(problem: "lp_engine.LpProblem") -> tuple[str, float | None]:
    """Status and optimum of a small LP by enumerating basic solutions.

    ``x >= 0`` makes the feasible set pointed, so it is empty iff it has no
    vertex, and a bounded optimum sits at a vertex.  Unboundedness is decided
    on the recession cone cut by ``sum d = 1``: the LP is unbounded iff one of
    that polytope's vertices improves the objective.
    """
    A, b, rel = problem.matrices()
    c = problem.objective
    n = c.shape[0]
    sgn = 1.0 if problem.sense == "min" else -1.0
    G, h, eq = [], [], []
    for i, r in enumerate(rel):
        s = -1.0 if r.value == ">=" else 1.0
        G.append(s * A[i])
        h.append(s * b[i])
        eq.append(r.value == "==")
    G = np.vstack([np.array(G).reshape(-1, n), -np.eye(n)])
    h = np.concatenate([np.array(h, dtype=float), np.zeros(n)])
    eq = eq + [False] * n
    verts = _vertices(G, h, eq)
    if not verts:
        return "infeasible", None
    Gd = np.vstack([G, np.ones((1, n))])
    hd = np.concatenate([np.zeros(len(h)), [1.0]])
    scale = 1e-9 * (1.0 + float(np.abs(c).max()))
    if any(sgn * float(c @ d) < -scale for d in _vertices(Gd, hd, eq + [True])):
        return "unbounded", None
    return "optimal", sgn * min(sgn * float(c @ x) for x in verts)


# --- battery ---------------------------------------------------------------------------------


def _random_dataset(rng: np.random.Generator, integer: bool, max_ell: int = 6, max_dim: int = 3) -> Dataset:
    ell = int(rng.integers(1, max_ell + 1))
    m, n = int(rng.integers(1, max_dim + 1)), int(rng.integers(1, max_dim + 1))
    if integer:
        X = rng.integers(0, 8, size=(ell, m)).astype(float)
        Y = rng.integers(0, 8, size=(ell, n)).astype(float)
    else:
        X = np.round(rng.uniform(0, 5, size=(ell, m)), 3)
        Y = np.round(rng.uniform(0, 5, size=(ell, n)), 3)
    return Dataset(X, Y)


def _describe(ds: PointSet) -> str:
    return f"X={ds.X.tolist()} Y={ds.Y.tolist()}"


def _closed_form_tech(sign: int, returns: Returns) -> TechSpec:
    return TechSpec.quantized(sign * math.inf, returns)


def verify_suite(seed: int = 0) -> list[OracleReport]:
    """Deterministic randomized battery; every report should pass."""
    rng = np.random.default_rng(seed)
    out: list[OracleReport] = []
    O = engine.Orientation

    # closed forms and FDH against bisection / integer scan
    for integer in (False, True):
        for _ in range(12):
            ds = _random_dataset(rng, integer)
            k = int(rng.integers(ds.ell))
            o = O.IN if rng.random() < 0.5 else O.OUT
            p = Point(ds.X[k], ds.Y[k])
            cases = [(TechSpec(Family.FDH), engine.distance_fdh(ds, k, o).delta)]
            for v in engine.TropicalVariant:
                cases.append((_closed_form_tech(v.sign, v.returns), engine.distance_tropical(ds, k, v, o).delta))
            for tech, val in cases:
                inst = f"{tech} {o.value} firm={k} {_describe(ds)}"
                if integer:
                    out.append(OracleReport.compare("integer-scan", inst, integer_scan(tech, ds, p, o), val, 0.0))
                else:
                    out.append(OracleReport.compare("bisection", inst, bisect_distance(tech, ds, p, o), val, 1e-6))

    # finite alpha LP against bisection on the transformed membership program
    for _ in range(4):
        ds = _random_dataset(rng, False, max_ell=4, max_dim=2)
        k = int(rng.integers(ds.ell))
        a = float(rng.choice([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]))
        ret = Returns.VRS if rng.random() < 0.5 else Returns.CRS
        o = O.IN if rng.random() < 0.5 else O.OUT
        tech = TechSpec.quantized(a, ret)
        got = engine.distance_quantized_lp(ds, k, a, ret, o).delta
        ref = bisect_distance(tech, ds, Point(ds.X[k], ds.Y[k]), o, tol=1e-8)
        out.append(OracleReport.compare("bisection-lp", f"{tech} {o.value} firm={k} {_describe(ds)}", ref, got, 1e-5))

    # grid search for tiny data
    for _ in range(4):
        ds = _random_dataset(rng, False, max_ell=3, max_dim=2)
        k = int(rng.integers(ds.ell))
        a = float(rng.choice([-1.0, -0.5, 0.5, 1.0]))
        o = O.IN if rng.random() < 0.5 else O.OUT
        out.append(grid_lp_check(ds, k, a, o, grid=2e-3 if ds.ell == 3 else 1e-4))

    # duality swap identities, closed forms on both sides
    for _ in range(8):
        ds = _random_dataset(rng, False)
        sw = swap_negate(ds)
        k = int(rng.integers(ds.ell))
        for ret in Returns:
            for o in O:
                lhs = engine.minplus_distance(ds.X, ds.Y, ds.X[k], ds.Y[k], ret, o)
                rhs = engine.maxplus_distance(sw.X, sw.Y, sw.X[k], sw.Y[k], ret, o.other)
                out.append(OracleReport.compare("swap", f"minplus-{ret.value} {o.value} firm={k} {_describe(ds)}", rhs, lhs, 1e-12))

    # LP solver against vertex enumeration
    for _ in range(12):
        nv, nc = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        prob = lp_engine.LpProblem(rng.integers(-3, 4, nv).astype(float), "min" if rng.random() < 0.5 else "max")
        for _ in range(nc):
            prob.add(rng.integers(-3, 4, nv).astype(float), "<=" if rng.random() < 0.5 else ">=", float(rng.integers(-3, 4)))
        status, val = vertex_enumeration(prob)
        sol = lp_engine.solve(prob)
        inst = f"lp {prob.sense} c={prob.objective.tolist()} rows={[(c.coeffs.tolist(), c.relation.value, c.rhs) for c in prob.constraints]}"
        if status != sol.status.value:
            out.append(OracleReport(f"lp-status:{status}/{sol.status.value}", inst, math.nan, math.nan, math.inf, 0.0, False))
        elif status == "optimal":
            out.append(OracleReport.compare("lp", inst, val, sol.objective, 1e-7))
    return out
