"""Dense two-phase primal simplex with dual multipliers.

Problems here are tiny (a few dozen rows and columns) but can be badly scaled:
rows built from ``exp(alpha * data)`` span hundreds of orders of magnitude
when ``|alpha|`` is large.  The solver therefore equilibrates rows and columns
with power-of-two factors (exact in binary floating point) before pivoting,
and recomputes the final primal and dual values from the optimal basis.

Variables are implicitly bounded below by zero.  Dual multipliers are
reported as shadow prices, ``d(objective) / d(rhs_i)`` in the problem's own
sense, so that on an optimal solution ``objective == duals @ rhs``.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, PreconditionError

__all__ = ["Relation", "Status", "Constraint", "LpProblem", "LpSolution", "solve"]

PIVOT_TOL = 1e-9
RESIDUAL_TOL = 1e-8
SLACKNESS_TOL = 1e-7
_OPT_TOL = 1e-10
AUDIT_TOL = 1e-9
# scaled matrices spanning more than this go straight to exact arithmetic
MAX_FLOAT_RANGE = 1e12


class Relation(str, enum.Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class Constraint:
    coeffs: np.ndarray
    relation: Relation
    rhs: float


@dataclass
class LpProblem:
    """``min|max c @ x`` subject to linear rows, with ``x >= 0``."""

    objective: np.ndarray
    sense: str = "min"
    constraints: list[Constraint] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.sense not in ("min", "max"):
            raise PreconditionError(f"sense must be 'min' or 'max', got {self.sense!r}")

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    def add(self, coeffs, relation: str | Relation, rhs: float) -> "LpProblem":
        a = np.asarray(coeffs, dtype=float).reshape(-1)
        if a.shape[0] != self.num_vars:
            raise PreconditionError(f"row has {a.shape[0]} coefficients, problem has {self.num_vars} variables")
        self.constraints.append(Constraint(a, Relation(relation), float(rhs)))
        return self

    def matrices(self) -> tuple[np.ndarray, np.ndarray, list[Relation]]:
        if self.constraints:
            A = np.vstack([c.coeffs for c in self.constraints])
        else:
            A = np.zeros((0, self.num_vars))
        b = np.array([c.rhs for c in self.constraints], dtype=float)
        return A, b, [c.relation for c in self.constraints]


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def audit(self, problem: LpProblem) -> dict[str, float]:
        """Scale-relative primal residual, dual residual and slackness gaps."""
        if not self.optimal:
            raise PreconditionError("only optimal solutions can be audited")
        A, b, rel = problem.matrices()
        x, y = self.x, self.duals
        c = problem.objective
        ax = A @ x
        row_scale = 1.0 + np.abs(A) @ np.abs(x) + np.abs(b)
        viol = np.zeros(len(b))
        for i, r in enumerate(rel):
            if r is Relation.LE:
                viol[i] = max(ax[i] - b[i], 0.0)
            elif r is Relation.GE:
                viol[i] = max(b[i] - ax[i], 0.0)
            else:
                viol[i] = abs(ax[i] - b[i])
        primal = float(np.max(viol / row_scale, initial=0.0))
        primal = max(primal, float(np.max(-x, initial=0.0)))
        # reduced costs of the problem in its own sense
        rc = c - A.T @ y
        sgn = 1.0 if problem.sense == "min" else -1.0
        col_scale = 1.0 + np.abs(c) + np.abs(A).T @ np.abs(y)
        dual = float(np.max(np.maximum(-sgn * rc, 0.0) / col_scale, initial=0.0))
        # shadow-price signs: loosening a row can only help the objective
        wrong = np.zeros(len(b))
        for i, r in enumerate(rel):
            if r is Relation.LE:
                wrong[i] = max(sgn * y[i], 0.0)
            elif r is Relation.GE:
                wrong[i] = max(-sgn * y[i], 0.0)
        ysc = 1.0 + np.abs(y).max(initial=0.0)
        dual = max(dual, float(np.max(wrong, initial=0.0)) / ysc)
        slack_rows = np.abs(y * (ax - b)) / (1.0 + np.abs(y) * row_scale)
        slack_cols = np.abs(x * rc) / (1.0 + np.abs(x) * col_scale)
        slack = float(max(np.max(slack_rows, initial=0.0), np.max(slack_cols, initial=0.0)))
        gap = abs(self.objective - float(y @ b)) / (1.0 + abs(self.objective))
        return {"primal": primal, "dual": dual, "slackness": slack, "duality_gap": gap}


def _pow2(v: np.ndarray) -> np.ndarray:
    return np.exp2(np.round(np.log2(v)))


def _equilibrate(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Power-of-two row and column factors bringing nonzeros toward 1.

    Rows, then columns, then rows again are scaled so that their largest
    magnitude is about 1.  Unlike iterated geometric-mean scaling this cannot
    drift, since every factor is pinned by an actual matrix entry.
    """
    r, n = A.shape
    absA = np.abs(A)
    nz = absA > 0
    if not nz.any():
        return np.ones(r), np.ones(n)
    L = np.where(nz, np.log2(np.where(nz, absA, 1.0)), -np.inf)
    row_ok = nz.any(axis=1)
    col_ok = nz.any(axis=0)

    def row_factors(lc):
        top = (L + lc).max(axis=1)
        return np.where(row_ok, -np.where(row_ok, top, 0.0), 0.0)

    lr = row_factors(np.zeros(n))
    top = (L + lr[:, None]).max(axis=0)
    lc = np.where(col_ok, -np.where(col_ok, top, 0.0), 0.0)
    lr = row_factors(lc)
    return np.exp2(np.round(lr)), np.exp2(np.round(lc))


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], exact: bool):
        self.T = T
        self.basis = basis
        self.exact = exact

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] = T[row] / T[row, col]
        colv = T[:, col].copy()
        colv[row] = 0
        T -= np.outer(colv, T[row])
        T[:, col] = 0
        T[row, col] = 1
        self.basis[row] = col


def _simplex(tab: _Tableau, cost: np.ndarray, allowed: np.ndarray, budget: int, bland_after: int) -> tuple[str, int]:
    """Minimize ``cost @ x`` from the current basic feasible tableau.

    In exact mode every tolerance is zero.
    """
    T = tab.T
    ncols = T.shape[1] - 1
    opt_tol = 0 if tab.exact else _OPT_TOL * (1.0 + float(np.abs(cost).max(initial=0.0)))
    piv_tol = 0 if tab.exact else PIVOT_TOL
    it = 0
    while True:
        cb = cost[tab.basis]
        rc = cost - cb @ T[:, :ncols]
        rc[~allowed] = 0
        cand = np.flatnonzero(rc < -opt_tol)
        if cand.size == 0:
            return "optimal", it
        if it >= budget:
            raise NumericalFailure(f"simplex did not converge within {budget} iterations")
        bland = it >= bland_after
        q = int(cand[0]) if bland else int(cand[np.argmin(rc[cand])])
        colq = T[:, q]
        rows = np.flatnonzero(colq > piv_tol)
        if rows.size == 0:
            return "unbounded", it
        ratios = T[rows, -1] / colq[rows]
        if tab.exact:
            best = min(ratios)
            ties = rows[ratios == best]
        else:
            ratios = np.maximum(ratios, 0.0)
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        if bland:
            p = int(min(ties, key=lambda i: tab.basis[i]))
        else:
            p = int(ties[np.argmax(np.abs(colq[ties]))])
        tab.pivot(p, q)
        it += 1


@dataclass
class _Core:
    status: Status
    x: np.ndarray | None
    y: np.ndarray | None
    iterations: int


def _frac_solve(B: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan elimination over the rationals; None if ``B`` is singular."""
    r = len(rhs)
    aug = [row[:] + [v] for row, v in zip(B, rhs)]
    for col in range(r):
        piv = next((i for i in range(col, r) if aug[i][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        prow = [v / p for v in aug[col]]
        aug[col] = prow
        for i in range(r):
            f = aug[i][col]
            if i != col and f != 0:
                aug[i] = [a - f * q for a, q in zip(aug[i], prow)]
    return [aug[i][r] for i in range(r)]


def _exact_basis(M: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: list[int], allowed: np.ndarray, is_art: np.ndarray):
    """Re-solve the final float basis in rational arithmetic.

    Returns exact ``(x_B, y)`` when the basis is primal and dual feasible for
    the float data taken at face value, otherwise None.  This strips the
    rounding noise of the float pivots from solutions that are exact
    vertices (e.g. a score of exactly zero).
    """
    r = len(basis)
    F = [[Fraction(float(v)) for v in row] for row in M]
    B = [[F[i][j] for j in basis] for i in range(r)]
    xb = _frac_solve(B, [Fraction(float(v)) for v in b])
    if xb is None or any(v < 0 for v in xb):
        return None
    if any(is_art[j] and v != 0 for j, v in zip(basis, xb)):
        return None
    cb = [Fraction(float(cost[j])) for j in basis]
    y = _frac_solve([list(col) for col in zip(*B)], cb)
    inb = set(basis)
    for j in range(M.shape[1]):
        if allowed[j] and j not in inb:
            if Fraction(float(cost[j])) - sum(y[i] * F[i][j] for i in range(r)) < 0:
                return None
    return xb, y


def _solve_core(A: np.ndarray, b: np.ndarray, rel: list[Relation], c: np.ndarray, exact: bool, polish: bool = False) -> _Core:
    """Two-phase simplex for ``min c @ x`` with ``x >= 0``.

    Returns primal values and shadow prices of the rows as given.  Arrays
    are float in float mode and hold ``Fraction`` objects in exact mode.
    With ``polish`` a float solve re-derives its final vertex exactly when
    that vertex checks out in rational arithmetic.
    """
    r, n = A.shape
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    flip = [(-1 if b[i] < 0 else 1) for i in range(r)]
    A = A * np.array(flip, dtype=A.dtype)[:, None]
    b = b * np.array(flip, dtype=b.dtype)
    rel_eff = []
    for i, rl in enumerate(rel):
        if flip[i] < 0 and rl is not Relation.EQ:
            rl = Relation.GE if rl is Relation.LE else Relation.LE
        rel_eff.append(rl)

    # columns: structural | slack/surplus | artificial
    n_slack = sum(1 for rl in rel_eff if rl is not Relation.EQ)
    n_art = sum(1 for rl in rel_eff if rl is not Relation.LE)
    N = n + n_slack + n_art
    T = np.full((r, N + 1), zero, dtype=object if exact else float)
    T[:, :n] = A
    T[:, -1] = b
    basis = [0] * r
    unit_col = [0] * r  # column holding e_i in the initial tableau
    si, ai = n, n + n_slack
    is_art = np.zeros(N, dtype=bool)
    for i, rl in enumerate(rel_eff):
        if rl is Relation.LE:
            T[i, si] = one
            basis[i] = unit_col[i] = si
            si += 1
            continue
        if rl is Relation.GE:
            T[i, si] = -one
            si += 1
        T[i, ai] = one
        basis[i] = unit_col[i] = ai
        is_art[ai] = True
        ai += 1
    M = T[:, :N].copy()

    tab = _Tableau(T, basis, exact)
    size = r + N
    bland_after = 3 * size
    budget = 50 * size + 500
    iters = 0

    if n_art:
        cost1 = np.where(is_art, one, zero)
        _, k = _simplex(tab, cost1, np.ones(N, dtype=bool), budget, bland_after)
        iters += k
        infeas = sum(tab.T[i, -1] for i in range(r) if is_art[tab.basis[i]])
        limit = 0 if exact else RESIDUAL_TOL * max(1.0, float(np.abs(b).max(initial=0.0)))
        if infeas > limit:
            return _Core(Status.INFEASIBLE, None, None, iters)
        # drive zero-level artificials out; rows where that is impossible are
        # redundant and keep their artificial basic at zero for good
        for i in range(r):
            if not is_art[tab.basis[i]]:
                continue
            row = tab.T[i, :N]
            mag = np.abs(row)
            cand = np.flatnonzero((mag > (0 if exact else PIVOT_TOL)) & ~is_art)
            if cand.size:
                tab.pivot(i, int(cand[np.argmax(mag[cand])]))

    cost2 = np.full(N, zero, dtype=object if exact else float)
    cost2[:n] = c
    status, k = _simplex(tab, cost2, ~is_art, budget, bland_after)
    iters += k
    if status == "unbounded":
        return _Core(Status.UNBOUNDED, None, None, iters)

    cb = cost2[tab.basis]
    if exact:
        xb = tab.T[:, -1]
        y = cb @ tab.T[:, unit_col]
    elif polish and (ex := _exact_basis(M, b, cost2, tab.basis, ~is_art, is_art)) is not None:
        xb = np.array([float(v) for v in ex[0]])
        y = np.array([float(v) for v in ex[1]])
    else:
        # recompute from the final basis for accuracy
        B = M[:, tab.basis]
        try:
            xb = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, cb)
        except np.linalg.LinAlgError:
            xb = tab.T[:, -1].copy()
            y = cb @ tab.T[:, unit_col]
        if np.any(xb < -1e-7 * (1.0 + np.abs(xb).max(initial=0.0))):
            xb = tab.T[:, -1].copy()
        xb = np.maximum(xb, 0.0)
    xs = np.full(N, zero, dtype=object if exact else float)
    xs[tab.basis] = xb
    y = y * np.array(flip, dtype=y.dtype)
    return _Core(Status.OPTIMAL, xs[:n], y, iters)


def _dynamic_range(A: np.ndarray) -> float:
    nz = np.abs(A[A != 0])
    if nz.size == 0:
        return 1.0
    return float(nz.max() / nz.min())


def _to_fractions(v: np.ndarray) -> np.ndarray:
    out = np.empty(v.shape, dtype=object)
    for idx, val in np.ndenumerate(v):
        out[idx] = Fraction(float(val))
    return out


def _within_audit(sol: "LpSolution", problem: LpProblem) -> bool:
    return max(sol.audit(problem).values()) <= AUDIT_TOL


def solve(problem: LpProblem, scale: bool = True, exact: bool | None = None, polish: bool = True) -> LpSolution:
    """Solve ``problem`` with the two-phase method.

    ``exact=None`` (default) solves in floating point after power-of-two
    equilibration and falls back to exact rational arithmetic when the
    scaled matrix is too ill-conditioned for fixed tolerances or the float
    answer fails its audit.  ``exact=True`` / ``False`` forces a mode.
    ``polish`` re-solves the final float basis exactly (see ``_exact_basis``).
    """
    A0, b0, rel = problem.matrices()
    c0 = problem.objective.copy()
    if not (np.all(np.isfinite(A0)) and np.all(np.isfinite(b0)) and np.all(np.isfinite(c0))):
        raise PreconditionError("LP coefficients must be finite")
    r, n = A0.shape
    sense_sign = 1.0 if problem.sense == "min" else -1.0
    c = sense_sign * c0

    if scale and r > 0:
        R, D = _equilibrate(A0)
    else:
        R, D = np.ones(r), np.ones(n)
    A = A0 * R[:, None] * D[None, :]
    b = b0 * R
    cs = c * D
    cmax = np.abs(cs).max(initial=0.0)
    sigma = float(_pow2(np.array([cmax]))[0]) if cmax > 0 else 1.0
    cs = cs / sigma

    def finish(core: _Core, mode_exact: bool) -> LpSolution:
        if core.status is not Status.OPTIMAL:
            return LpSolution(core.status, iterations=core.iterations)
        xs = np.array([float(v) for v in core.x]) if mode_exact else core.x
        ys = np.array([float(v) for v in core.y]) if mode_exact else core.y
        x = xs * D
        y = ys * R * sigma * sense_sign
        return LpSolution(Status.OPTIMAL, x=x, objective=float(c0 @ x), duals=y, iterations=core.iterations)

    if exact is None:
        exact_first = r > 0 and _dynamic_range(A) > MAX_FLOAT_RANGE
    else:
        exact_first = exact
    if not exact_first:
        try:
            sol = finish(_solve_core(A, b, rel, cs, exact=False, polish=polish), False)
        except NumericalFailure:
            if exact is False:
                raise
            sol = None
        if exact is False or (sol is not None and (not sol.optimal or _within_audit(sol, problem))):
            return sol
    core = _solve_core(_to_fractions(A), _to_fractions(b), rel, _to_fractions(cs), exact=True)
    return finish(core, True)
