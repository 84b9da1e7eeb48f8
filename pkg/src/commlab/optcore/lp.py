"""Dense two-phase simplex with deterministic pivoting and a rational fallback.

The float path keeps the full tableau in numpy with an appended inverse-basis
block, so duals come out for free.  The exact path mirrors the same algorithm
on Fractions and is used for tiny instances where float noise would blur an
integral optimum (e.g. zero-error partition-bound values).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITER_LIMIT = "iter_limit"

FEAS_TOL = 1e-9
GAP_TOL = 1e-6
RESID_TOL = 1e-7
MAX_PIVOTS = 20000
DEGENERATE_RUN = 40  # consecutive degenerate pivots before Bland's rule

MAX_VARS = 4000
MAX_ROWS = 20000
EXACT_VAR_LIMIT = 64


class LPLimitError(ValueError):
    pass


@dataclass
class LinearProgram:
    maximize: bool = False
    obj: list = field(default_factory=list)
    lo: list = field(default_factory=list)
    hi: list = field(default_factory=list)
    names: list = field(default_factory=list)
    rows: list = field(default_factory=list)  # (coeff dict, rel, rhs)

    @property
    def num_vars(self):
        return len(self.obj)

    @property
    def num_rows(self):
        return len(self.rows)

    def add_var(self, name="", obj=0.0, lo=0.0, hi=None):
        """Add a variable; lo=None means unbounded below."""
        self.obj.append(obj)
        self.lo.append(lo)
        self.hi.append(hi)
        self.names.append(name or f"x{len(self.obj) - 1}")
        if len(self.obj) > MAX_VARS:
            raise LPLimitError(f"more than {MAX_VARS} variables")
        return len(self.obj) - 1

    def add_vars(self, count, prefix="x", obj=0.0, lo=0.0, hi=None):
        return [self.add_var(f"{prefix}{i}", obj, lo, hi) for i in range(count)]

    def add_constraint(self, coeffs, rel, rhs):
        if rel not in ("<=", ">=", "=="):
            raise ValueError(f"bad relation {rel!r}")
        if isinstance(coeffs, dict):
            coeffs = dict(coeffs)
        else:
            arr = np.asarray(coeffs, dtype=float)
            coeffs = {i: float(v) for i, v in enumerate(arr) if v != 0.0}
        if not all(np.isfinite(v) for v in coeffs.values()) or not np.isfinite(rhs):
            raise ValueError("non-finite constraint data")
        self.rows.append((coeffs, rel, float(rhs)))
        if len(self.rows) > MAX_ROWS:
            raise LPLimitError(f"more than {MAX_ROWS} constraints")
        return len(self.rows) - 1

    def copy(self):
        lp = LinearProgram(self.maximize)
        lp.obj = list(self.obj)
        lp.lo = list(self.lo)
        lp.hi = list(self.hi)
        lp.names = list(self.names)
        lp.rows = [(dict(c), r, b) for (c, r, b) in self.rows]
        return lp


@dataclass
class LPSolution:
    status: str
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    objective: float = float("nan")
    dual_objective: float = float("nan")
    gap: float = float("nan")
    residual: float = float("nan")
    pivots: int = 0
    cuts_used: int = 0
    exact_resolved: bool = False

    def value(self, i):
        return float(self.x[i])


# ---------------------------------------------------------------------------
# Standard-form conversion
# ---------------------------------------------------------------------------


def _var_layout(lp: LinearProgram, num):
    """Column layout: per original variable (pos_col, neg_col|None, shift)."""
    cols = []
    c = []
    next_col = 0
    extra_rows = []
    for j in range(lp.num_vars):
        lo, hi = lp.lo[j], lp.hi[j]
        objj = num(lp.obj[j]) * (num(-1) if lp.maximize else num(1))
        if lo is None:
            cols.append((next_col, next_col + 1, num(0)))
            next_col += 2
            c.extend([objj, -objj])
            if hi is not None:
                extra_rows.append((j, num(hi)))
        else:
            cols.append((next_col, None, num(lo)))
            next_col += 1
            c.append(objj)
            if hi is not None:
                extra_rows.append((j, num(hi) - num(lo)))
    return cols, c, next_col, extra_rows


def _to_standard_float(lp: LinearProgram):
    """Vectorized standard-form build: A x = b, x >= 0, b >= 0 (numpy)."""
    cols, c, next_col, extra_rows = _var_layout(lp, float)
    m = lp.num_rows + len(extra_rows)
    n_slack = sum(1 for _, rel, _ in lp.rows if rel != "==") + len(extra_rows)
    total = next_col + n_slack
    A = np.zeros((m, total))
    b = np.zeros(m)
    row_sign = np.ones(m)
    si = next_col
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        shift_amount = 0.0
        for var, coef in coeffs.items():
            pos, neg, shift = cols[var]
            A[i, pos] += coef
            if neg is not None:
                A[i, neg] -= coef
            shift_amount += coef * shift
        b[i] = rhs - shift_amount
        if rel == "<=":
            A[i, si] = 1.0
            si += 1
        elif rel == ">=":
            A[i, si] = -1.0
            si += 1
    for k, (var, ub) in enumerate(extra_rows):
        i = lp.num_rows + k
        pos, neg, _ = cols[var]
        A[i, pos] += 1.0
        if neg is not None:
            A[i, neg] -= 1.0
        b[i] = ub
        A[i, si] = 1.0
        si += 1
    neg_rows = b < 0
    A[neg_rows] *= -1.0
    b[neg_rows] *= -1.0
    row_sign[neg_rows] = -1.0
    cvec = np.array(c + [0.0] * n_slack)
    return A, b, cvec, cols, row_sign, lp.num_rows, next_col


def _to_standard(lp: LinearProgram, num):
    """Standard form on exact scalars (Fraction path).

    `num` converts literals; used by the rational solver and by the dual
    bookkeeping, which only needs b and the shift costs.
    """
    n = lp.num_vars
    cols = []  # per original var: (pos_col, neg_col or None, shift)
    c = []
    next_col = 0
    extra_rows = []  # upper-bound rows: (col, ub_shifted)
    for j in range(n):
        lo, hi = lp.lo[j], lp.hi[j]
        objj = num(lp.obj[j]) * (num(-1) if lp.maximize else num(1))
        if lo is None:
            pos, neg = next_col, next_col + 1
            next_col += 2
            c.extend([objj, -objj])
            cols.append((pos, neg, num(0)))
            if hi is not None:
                extra_rows.append((j, num(hi)))
        else:
            pos = next_col
            next_col += 1
            c.append(objj)
            cols.append((pos, None, num(lo)))
            if hi is not None:
                extra_rows.append((j, num(hi) - num(lo)))

    rows_A = []
    rows_b = []
    row_sign = []
    slack_of_row = []
    for coeffs, rel, rhs in lp.rows:
        a = [num(0)] * next_col
        shift_amount = num(0)
        for var, coef in coeffs.items():
            coefn = num(coef)
            pos, neg, shift = cols[var]
            a[pos] += coefn
            if neg is not None:
                a[neg] -= coefn
            shift_amount += coefn * shift
        rows_A.append(a)
        rows_b.append(num(rhs) - shift_amount)
        row_sign.append(1)
        slack_of_row.append(rel)

    for var, ub in extra_rows:
        a = [num(0)] * next_col
        pos, neg, _ = cols[var]
        a[pos] += num(1)
        if neg is not None:
            a[neg] -= num(1)
        rows_A.append(a)
        rows_b.append(ub)
        row_sign.append(1)
        slack_of_row.append("<=")

    # slacks
    m = len(rows_A)
    n_slack = sum(1 for r in slack_of_row if r in ("<=", ">="))
    total = next_col + n_slack
    A = [[num(0)] * total for _ in range(m)]
    si = next_col
    for i in range(m):
        for j, v in enumerate(rows_A[i]):
            A[i][j] = v
        if slack_of_row[i] == "<=":
            A[i][si] = num(1)
            si += 1
        elif slack_of_row[i] == ">=":
            A[i][si] = num(-1)
            si += 1
    c = c + [num(0)] * n_slack
    b = rows_b
    # normalize b >= 0
    for i in range(m):
        if b[i] < 0:
            b[i] = -b[i]
            A[i] = [-v for v in A[i]]
            row_sign[i] = -1
    n_main_rows = lp.num_rows
    return A, b, c, cols, row_sign, n_main_rows, next_col


# ---------------------------------------------------------------------------
# Float simplex
# ---------------------------------------------------------------------------


def _simplex_float(A, b, c, maxit=MAX_PIVOTS):
    """Two-phase tableau simplex; returns (status, x, y, pivots).

    The tableau carries an explicit inverse-basis block so that duals
    y = c_B B^{-1} can be read off at the end.
    """
    m = len(A)
    if m == 0:
        if any(ci < 0 for ci in c):
            return UNBOUNDED, None, None, 0
        return OPTIMAL, np.zeros(len(c)), np.zeros(0), 0
    n = len(c)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    T = np.zeros((m, n + m + 1))
    T[:, :n] = A
    T[:, n : n + m] = np.eye(m)
    T[:, -1] = b
    # rows whose slack column forms a clean +1 unit column can start basic,
    # skipping phase-1 work for them (typical for <=-rich cut LPs)
    basis = list(range(n, n + m))
    needs_artificial = np.ones(m, dtype=bool)
    c_arr = np.asarray(c, dtype=float)
    colnnz = np.count_nonzero(A, axis=0)
    for j in np.nonzero((colnnz == 1) & (c_arr == 0.0))[0]:
        i = int(np.argmax(np.abs(A[:, j])))
        if A[i, j] == 1.0 and needs_artificial[i]:
            basis[i] = int(j)
            needs_artificial[i] = False
    pivots1 = 0
    if needs_artificial.any():
        cost1 = np.zeros(n + m)
        for i in range(m):
            if needs_artificial[i]:
                cost1[n + i] = 1.0
        status, pivots1 = _simplex_core(T, basis, cost1, allow=n + m, phase1=True, maxit=maxit)
        if status == ITER_LIMIT:
            return ITER_LIMIT, None, None, pivots1
        phase1_obj = sum(T[i, -1] for i in range(m) if basis[i] >= n)
        if phase1_obj > 1e-7:
            return INFEASIBLE, None, None, pivots1
        for i in range(m):
            if basis[i] >= n:
                row = T[i, :n]
                j = int(np.argmax(np.abs(row)))
                if abs(row[j]) > FEAS_TOL:
                    _pivot(T, basis, i, j)
                # else: redundant row, keep the artificial at value 0
    cost2 = np.zeros(n + m)
    cost2[:n] = np.asarray(c, dtype=float)
    status, pivots2 = _simplex_core(T, basis, cost2, allow=n, phase1=False, maxit=maxit)
    if status != OPTIMAL:
        return status, None, None, pivots1 + pivots2
    x = np.zeros(n)
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = T[i, -1]
    cB = cost2[basis]
    y = cB @ T[:, n : n + m]
    return OPTIMAL, x, y, pivots1 + pivots2


def _pivot(T, basis, i, j):
    T[i] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i])
    basis[i] = j


def _simplex_core(T, basis, cost, allow, phase1, maxit):
    """Largest-coefficient pricing with a lexicographic ratio test.

    Ratio-test ties are broken by lexicographic comparison over the
    inverse-basis block, which rules out cycling; Bland's entering rule
    additionally kicks in after a long degenerate run.
    """
    m = T.shape[0]
    n_total = T.shape[1] - 1
    inv_lo = n_total - m  # the inverse-basis block columns
    pivots = 0
    degen_run = 0
    while pivots < maxit:
        cB = cost[basis]
        z = cB @ T[:, :allow]
        r = cost[:allow] - z
        candidates = np.where(r < -1e-10)[0]
        if len(candidates) == 0:
            return OPTIMAL, pivots
        if degen_run >= DEGENERATE_RUN:
            j = int(candidates[0])  # Bland
        else:
            j = int(candidates[np.argmin(r[candidates])])
        colj = T[:, j]
        mask = colj > FEAS_TOL
        if not mask.any():
            return UNBOUNDED, pivots
        ratios = np.full(m, np.inf)
        ratios[mask] = T[mask, -1] / colj[mask]
        best = ratios.min()
        ties = np.where(ratios <= best + 1e-12)[0]
        if len(ties) == 1:
            i = int(ties[0])
        else:
            # lexicographic: minimize (row / pivot entry) over the inverse block
            i = int(ties[0])
            best_row = T[i, inv_lo:] / colj[i]
            for t in ties[1:]:
                t = int(t)
                cand = T[t, inv_lo:] / colj[t]
                diff = cand - best_row
                nz = np.nonzero(np.abs(diff) > 1e-12)[0]
                if len(nz) and diff[nz[0]] < 0:
                    i, best_row = t, cand
        degen_run = degen_run + 1 if T[i, -1] <= 1e-11 else 0
        _pivot(T, basis, i, j)
        pivots += 1
    return ITER_LIMIT, pivots


# ---------------------------------------------------------------------------
# Exact simplex on Fractions (small instances)
# ---------------------------------------------------------------------------


def _simplex_exact(A, b, c, maxit=MAX_PIVOTS):
    m = len(A)
    n = len(c)
    zero, one = Fraction(0), Fraction(1)
    if m == 0:
        if any(ci < 0 for ci in c):
            return UNBOUNDED, None, None, 0
        return OPTIMAL, [zero] * n, [], 0
    width = n + m + 1
    T = [list(A[i]) + [one if k == i else zero for k in range(m)] + [b[i]] for i in range(m)]
    basis = list(range(n, n + m))
    cost1 = [zero] * n + [one] * m

    def run(cost, allow):
        pivots = 0
        degen = 0
        while pivots < maxit:
            cB = [cost[bi] for bi in basis]
            best_j, best_r = -1, zero
            for j in range(allow):
                r = cost[j] - sum(cB[i] * T[i][j] for i in range(m))
                if r < best_r or (degen >= DEGENERATE_RUN and r < 0):
                    best_j, best_r = j, r
                    if degen >= DEGENERATE_RUN:
                        break
            if best_j < 0:
                return OPTIMAL, pivots
            j = best_j
            best_i, best_ratio = -1, None
            for i in range(m):
                if T[i][j] > 0:
                    ratio = T[i][width - 1] / T[i][j]
                    if best_ratio is None or ratio < best_ratio or (
                        ratio == best_ratio and basis[i] < basis[best_i]
                    ):
                        best_i, best_ratio = i, ratio
            if best_i < 0:
                return UNBOUNDED, pivots
            i = best_i
            degen = degen + 1 if T[i][width - 1] == 0 else 0
            piv = T[i][j]
            T[i] = [v / piv for v in T[i]]
            for k in range(m):
                if k != i and T[k][j] != 0:
                    f = T[k][j]
                    T[k] = [a - f * bb for a, bb in zip(T[k], T[i])]
            basis[i] = j
            pivots += 1
        return ITER_LIMIT, pivots

    status, p1 = run(cost1, n + m)
    if status != OPTIMAL:
        return status, None, None, p1
    if sum(T[i][width - 1] for i in range(m) if basis[i] >= n) > 0:
        return INFEASIBLE, None, None, p1
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if T[i][j] != 0:
                    piv = T[i][j]
                    T[i] = [v / piv for v in T[i]]
                    for k in range(m):
                        if k != i and T[k][j] != 0:
                            f = T[k][j]
                            T[k] = [a - f * bb for a, bb in zip(T[k], T[i])]
                    basis[i] = j
                    break
    cost2 = list(c) + [zero] * m
    status, p2 = run(cost2, n)
    if status != OPTIMAL:
        return status, None, None, p1 + p2
    x = [zero] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = T[i][width - 1]
    cB = [cost2[bi] for bi in basis]
    y = [sum(cB[i] * T[i][n + k] for i in range(m)) for k in range(m)]
    return OPTIMAL, x, y, p1 + p2


# ---------------------------------------------------------------------------
# Public interface
# ---------------------------------------------------------------------------


def solve_lp(lp: LinearProgram, exact=False, maxit=MAX_PIVOTS) -> LPSolution:
    """Solve with the dense simplex; on numerical trouble retry exactly.

    Optimal solutions satisfy the residual and duality-gap invariants; if the
    float path cannot certify them and the instance is small, the exact
    rational path re-solves and its result is rounded back to floats.
    """
    if exact:
        return _solve_exact(lp, maxit)
    A, b, c, cols, row_sign, n_main, n_struct = _to_standard_float(lp)
    status, x_std, y_std, pivots = _simplex_float(A, b, c, maxit)
    if status != OPTIMAL:
        if lp.num_vars <= EXACT_VAR_LIMIT and status in (ITER_LIMIT,):
            return _solve_exact(lp, maxit)
        return LPSolution(status=status, pivots=pivots)
    sol = _extract(lp, x_std, y_std, cols, row_sign, n_main, b, c)
    sol.pivots = pivots
    bad = sol.gap > GAP_TOL * (1.0 + abs(sol.objective)) or sol.residual > RESID_TOL
    if bad and lp.num_vars <= EXACT_VAR_LIMIT:
        out = _solve_exact(lp, maxit)
        out.exact_resolved = True
        return out
    return sol


def _solve_exact(lp: LinearProgram, maxit=MAX_PIVOTS) -> LPSolution:
    A, b, c, cols, row_sign, n_main, n_struct = _to_standard(lp, Fraction)
    status, x_std, y_std, pivots = _simplex_exact(A, b, c, maxit)
    if status != OPTIMAL:
        return LPSolution(status=status, pivots=pivots)
    sol = _extract(lp, x_std, y_std, cols, row_sign, n_main, b, c)
    sol.pivots = pivots
    sol.exact_resolved = True
    return sol


def _extract(lp, x_std, y_std, cols, row_sign, n_main, b_std, c_std):
    n = lp.num_vars
    x = np.zeros(n)
    exact_vals = []
    for j in range(n):
        pos, neg, shift = cols[j]
        v = x_std[pos] + shift - (x_std[neg] if neg is not None else 0)
        exact_vals.append(v)
        x[j] = float(v)
    objective = float(sum(o * v for o, v in zip(lp.obj, exact_vals) if o != 0))
    # Dual objective in standard space is y.b over all rows (bound rows
    # included); variable shifts contribute c.shift to both objectives, so
    # the gap is computed on the shifted pair consistently.
    shift_cost = sum(
        float(c_std[cols[j][0]]) * float(cols[j][2]) for j in range(n) if cols[j][2] != 0
    )
    dual_obj = sum(float(y_std[i]) * float(b_std[i]) for i in range(len(y_std)))
    dual_obj += shift_cost
    if lp.maximize:
        dual_obj = -dual_obj
    sense = -1.0 if lp.maximize else 1.0
    duals = np.zeros(n_main)
    for i in range(n_main):
        duals[i] = float(y_std[i]) * float(row_sign[i]) * sense
    gap = abs(objective - dual_obj)
    # primal feasibility residual on the declared rows
    resid = 0.0
    for coeffs, rel, rhs in lp.rows:
        lhs = sum(lp_coef * x[var] for var, lp_coef in coeffs.items())
        if rel == "<=":
            resid = max(resid, lhs - rhs)
        elif rel == ">=":
            resid = max(resid, rhs - lhs)
        else:
            resid = max(resid, abs(lhs - rhs))
    for j in range(n):
        if lp.lo[j] is not None:
            resid = max(resid, lp.lo[j] - x[j])
        if lp.hi[j] is not None:
            resid = max(resid, x[j] - lp.hi[j])
    return LPSolution(
        status=OPTIMAL,
        x=x,
        duals=duals,
        objective=objective,
        dual_objective=dual_obj,
        gap=gap,
        residual=max(resid, 0.0),
    )


def solve_lp_lazy(lp: LinearProgram, cut_source, tol=1e-7, max_rounds=500, exact=False):
    """Cutting-plane loop: solve the restricted LP, add violated constraints.

    `cut_source(solution)` returns a list of (coeffs, rel, rhs) with violation
    above tol, or [] when the current solution satisfies the implicit family.
    Cuts already present are skipped; a round producing only known cuts ends
    the loop (the oracle found nothing new within its tolerance).
    """
    work = lp.copy()
    seen = set()
    for coeffs, rel, rhs in work.rows:
        seen.add(_cut_key(coeffs, rel, rhs))
    cuts = 0
    sol = None
    for _ in range(max_rounds):
        sol = solve_lp(work, exact=exact)
        if sol.status != OPTIMAL:
            sol.cuts_used = cuts
            return sol
        new = cut_source(sol)
        fresh = 0
        for coeffs, rel, rhs in new:
            key = _cut_key(coeffs, rel, rhs)
            if key in seen:
                continue
            seen.add(key)
            work.add_constraint(coeffs, rel, rhs)
            cuts += 1
            fresh += 1
        if fresh == 0:
            sol.cuts_used = cuts
            return sol
    sol = solve_lp(work, exact=exact)
    sol.status = ITER_LIMIT if sol.status == OPTIMAL else sol.status
    sol.cuts_used = cuts
    return sol


def _cut_key(coeffs, rel, rhs):
    if isinstance(coeffs, dict):
        items = tuple(sorted((int(k), round(float(v), 12)) for k, v in coeffs.items()))
    else:
        arr = np.asarray(coeffs, dtype=float)
        items = tuple((int(i), round(float(v), 12)) for i, v in enumerate(arr) if v != 0.0)
    return (items, rel, round(float(rhs), 12))
