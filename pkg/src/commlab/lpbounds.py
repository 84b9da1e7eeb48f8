"""Rectangle-family lower bounds as concrete optimization problems.

Discrepancy, weak regularity, the rectangle / smooth-rectangle LP bounds,
the partition-bound family, and a product-distribution discrepancy upper
bound.  Every rectangle-indexed program is solved on the side with
polynomially many variables; the exponentially many rectangle constraints
come from the RectangleOracle lazily.  With the exact oracle the values are
exact LP optima; with the heuristic oracle results are flagged one-sided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matrices import BOOL, CommMatrix, Distribution
from .optcore.lp import LinearProgram, OPTIMAL, UNBOUNDED, solve_lp, solve_lp_lazy
from .optcore.oracle import RectangleOracle, mask_to_bool

EXACT = "exact"
LOWER_ONLY = "lower_bound_only"
UPPER_ONLY = "upper_bound_only"
UNBOUNDED_KIND = "unbounded"

CUT_TOL = 1e-7
CERT_TOL = 1e-6

FIXED_PRT = "fixed"
POSITIVE_PRT = "positive"
WEAK_PRT = "weak"

KAPPA_CAP = 1e7  # inert at eps=0 (zero objective coefficient), guards the ray


@dataclass
class BoundRequest:
    matrix: CommMatrix
    epsilon: float = 1.0 / 3.0
    mu: Distribution | None = None
    exact: bool | None = None  # None = auto by oracle feasibility

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 0.5:
            raise ValueError("epsilon must lie in [0, 1/2)")
        if self.mu is not None and self.mu.weights.shape != self.matrix.data.shape:
            raise ValueError("distribution shape mismatch")


@dataclass
class BoundResult:
    value: float
    kind: str
    certificate: dict = field(default_factory=dict)
    certificate_value: float = float("nan")
    cuts_used: int = 0
    exact_oracle: bool = True

    def certified(self, tol=CERT_TOL):
        return abs(self.value - self.certificate_value) <= tol * (1 + abs(self.value))


class BoundSolveError(RuntimeError):
    """Raised when a restricted LP in a bound computation fails to solve."""


def _oracle_for(m: CommMatrix, exact=None, seed=7):
    return RectangleOracle(m.rows, m.cols, exact=exact, seed=seed)


def _accept(sol, what):
    """Return (sol, converged); raise only when no usable iterate exists."""
    if sol.x is None:
        raise BoundSolveError(f"{what}: LP finished with status {sol.status}")
    return sol, sol.status == OPTIMAL


def _sign_cells(m: CommMatrix):
    """+1 on 0-cells, -1 on 1-cells (the discrepancy sign convention)."""
    if m.convention != BOOL:
        raise ValueError("expected Boolean convention")
    return 1.0 - 2.0 * m.data.astype(float)


def _zmask(m: CommMatrix, z):
    return m.data == z


# ---------------------------------------------------------------------------
# Discrepancy and weak regularity
# ---------------------------------------------------------------------------


def discrepancy_under(m: CommMatrix, mu: Distribution, exact=None) -> BoundResult:
    """disc_mu: exact max over rectangles of the signed mu-mass imbalance."""
    s = _sign_cells(m)
    oracle = _oracle_for(m, exact)
    w = s * mu.weights
    val, rm, cm, sgn = oracle.max_abs_rectangle(w)
    kind = EXACT if oracle.exact else LOWER_ONLY
    # re-evaluate the certificate rectangle directly
    rows = mask_to_bool(rm, m.rows)
    cols = mask_to_bool(cm, m.cols)
    cert_val = abs(float(w[np.ix_(rows, cols)].sum())) if rm and cm else 0.0
    return BoundResult(
        value=val,
        kind=kind,
        certificate={"rowmask": rm, "colmask": cm, "sign": sgn},
        certificate_value=cert_val,
        exact_oracle=oracle.exact,
    )


def weak_regularity(m: CommMatrix, mu: Distribution, exact=None) -> BoundResult:
    """wreg^mu: max over rectangles and outputs of mu(R) - |Z| mu(R n f^-1(z))."""
    oracle = _oracle_for(m, exact)
    best = (0.0, 0, 0, None)  # empty rectangle is admissible, value 0
    for z in (0, 1):
        w = mu.weights * (1.0 - 2.0 * (m.data == z))
        val, rm, cm = oracle.max_rectangle(w)
        if val > best[0]:
            best = (val, rm, cm, z)
    val, rm, cm, z = best
    if z is None:
        cert_val = 0.0
    else:
        rows = mask_to_bool(rm, m.rows)
        cols = mask_to_bool(cm, m.cols)
        sub = mu.weights[np.ix_(rows, cols)]
        subz = sub[(m.data[np.ix_(rows, cols)] == z)]
        cert_val = float(sub.sum() - 2.0 * subz.sum())
    return BoundResult(
        value=val,
        kind=EXACT if oracle.exact else LOWER_ONLY,
        certificate={"rowmask": rm, "colmask": cm, "z": z},
        certificate_value=cert_val,
        exact_oracle=oracle.exact,
    )


def discrepancy(m: CommMatrix, exact=None, max_rounds=500) -> BoundResult:
    """disc = min over distributions of disc_mu, by LP with lazy rectangle cuts.

    Beyond the exact-oracle domain the cut chase cannot certify a minimum;
    rounds are capped and the restricted optimum is returned as a lower bound.
    """
    s = _sign_cells(m)
    oracle = _oracle_for(m, exact)
    if not oracle.exact:
        max_rounds = min(max_rounds, 40)
    r, c = m.rows, m.cols
    lp = LinearProgram()
    mu_vars = np.array(lp.add_vars(r * c, "mu")).reshape(r, c)
    t = lp.add_var("t", obj=1.0)
    lp.add_constraint({int(v): 1.0 for v in mu_vars.ravel()}, "==", 1.0)
    # full rectangle in both orientations keeps the first iterations sane
    for sgn in (1.0, -1.0):
        row = {int(mu_vars[i, j]): sgn * s[i, j] for i in range(r) for j in range(c)}
        row[t] = -1.0
        lp.add_constraint(row, "<=", 0.0)

    def cuts(sol):
        w = s * sol.x[mu_vars.ravel()].reshape(r, c)
        tval = sol.x[t]
        out = []
        for sgn in (1.0, -1.0):
            for val, rm, cm in oracle.top_rectangles(sgn * w, tval + CUT_TOL):
                rows = mask_to_bool(rm, r)
                cols = mask_to_bool(cm, c)
                row = {
                    int(mu_vars[i, j]): sgn * s[i, j]
                    for i in np.nonzero(rows)[0]
                    for j in np.nonzero(cols)[0]
                }
                row[t] = -1.0
                out.append((row, "<=", 0.0))
        return out

    sol, converged = _accept(solve_lp_lazy(lp, cuts, tol=CUT_TOL, max_rounds=max_rounds), "discrepancy")
    mu_star = np.maximum(sol.x[mu_vars.ravel()].reshape(r, c), 0.0)
    mu_star /= mu_star.sum()
    cert_val, *_ = oracle.max_abs_rectangle(s * mu_star)
    return BoundResult(
        value=sol.objective,
        kind=EXACT if (oracle.exact and converged) else LOWER_ONLY,
        certificate={"mu": mu_star},
        certificate_value=cert_val,
        cuts_used=sol.cuts_used,
        exact_oracle=oracle.exact,
    )


# ---------------------------------------------------------------------------
# Rectangle and smooth-rectangle LP bounds (dual side, lazy cuts)
# ---------------------------------------------------------------------------


def rectangle_bound_lp(m: CommMatrix, z, eps, exact=None, max_rounds=500) -> BoundResult:
    """LP rectangle bound for output z at error eps (covering-form optimum)."""
    zc = _zmask(m, z)
    oracle = _oracle_for(m, exact)
    if not oracle.exact:
        max_rounds = min(max_rounds, 40)
    r, c = m.rows, m.cols
    lp = LinearProgram(maximize=True)
    mu = np.array(
        [
            lp.add_var(f"mu{i},{j}", obj=(1.0 - eps) if zc[i, j] else -eps)
            for i in range(r)
            for j in range(c)
        ]
    ).reshape(r, c)

    def w_of(sol):
        vals = sol.x[mu.ravel()].reshape(r, c)
        return np.where(zc, vals, -vals)

    def add_rect(rm, cm):
        rows = mask_to_bool(rm, r)
        cols = mask_to_bool(cm, c)
        row = {}
        for i in np.nonzero(rows)[0]:
            for j in np.nonzero(cols)[0]:
                row[int(mu[i, j])] = 1.0 if zc[i, j] else -1.0
        return (row, "<=", 1.0)

    for i in range(r):
        for j in range(c):
            if zc[i, j]:
                lp.add_constraint({int(mu[i, j]): 1.0}, "<=", 1.0)
    lp.add_constraint(*add_rect((1 << r) - 1, (1 << c) - 1))

    def cuts(sol):
        return [
            add_rect(rm, cm)
            for _, rm, cm in oracle.top_rectangles(w_of(sol), 1.0 + CUT_TOL)
        ]

    sol, converged = _accept(solve_lp_lazy(lp, cuts, tol=CUT_TOL, max_rounds=max_rounds), "rectangle bound")
    feas, _, _ = oracle.max_rectangle(w_of(sol))
    cert_val = sol.objective if feas <= 1.0 + CERT_TOL else float("nan")
    return BoundResult(
        value=sol.objective,
        kind=EXACT if (oracle.exact and converged) else UPPER_ONLY,
        certificate={"mu": sol.x[mu.ravel()].reshape(r, c)},
        certificate_value=cert_val,
        cuts_used=sol.cuts_used,
        exact_oracle=oracle.exact,
    )


def smooth_rectangle_bound_lp(m: CommMatrix, z, eps, exact=None, max_rounds=500) -> BoundResult:
    """Smooth variant: z-cells also carry a subtracted phi >= 0 weight."""
    zc = _zmask(m, z)
    oracle = _oracle_for(m, exact)
    if not oracle.exact:
        max_rounds = min(max_rounds, 40)
    r, c = m.rows, m.cols
    lp = LinearProgram(maximize=True)
    mu = np.array(
        [
            lp.add_var(f"mu{i},{j}", obj=(1.0 - eps) if zc[i, j] else -eps)
            for i in range(r)
            for j in range(c)
        ]
    ).reshape(r, c)
    phi = {}
    for i in range(r):
        for j in range(c):
            if zc[i, j]:
                phi[(i, j)] = lp.add_var(f"phi{i},{j}", obj=-1.0)

    def w_of(sol):
        vals = sol.x[mu.ravel()].reshape(r, c).copy()
        w = np.where(zc, vals, -vals)
        for (i, j), p in phi.items():
            w[i, j] -= sol.x[p]
        return w

    def add_rect(rm, cm):
        rows = mask_to_bool(rm, r)
        cols = mask_to_bool(cm, c)
        row = {}
        for i in np.nonzero(rows)[0]:
            for j in np.nonzero(cols)[0]:
                row[int(mu[i, j])] = 1.0 if zc[i, j] else -1.0
                if (i, j) in phi:
                    row[phi[(i, j)]] = -1.0
        return (row, "<=", 1.0)

    for i in range(r):
        for j in range(c):
            if zc[i, j]:
                lp.add_constraint({int(mu[i, j]): 1.0, phi[(i, j)]: -1.0}, "<=", 1.0)
    lp.add_constraint(*add_rect((1 << r) - 1, (1 << c) - 1))

    def cuts(sol):
        return [
            add_rect(rm, cm)
            for _, rm, cm in oracle.top_rectangles(w_of(sol), 1.0 + CUT_TOL)
        ]

    sol, converged = _accept(solve_lp_lazy(lp, cuts, tol=CUT_TOL, max_rounds=max_rounds), "rectangle bound")
    feas, _, _ = oracle.max_rectangle(w_of(sol))
    cert_val = sol.objective if feas <= 1.0 + CERT_TOL else float("nan")
    return BoundResult(
        value=sol.objective,
        kind=EXACT if (oracle.exact and converged) else UPPER_ONLY,
        certificate={"mu": sol.x[mu.ravel()].reshape(r, c)},
        certificate_value=cert_val,
        cuts_used=sol.cuts_used,
        exact_oracle=oracle.exact,
    )


def rectangle_bound_conventional(m: CommMatrix, z, eps, lam: Distribution) -> BoundResult:
    """Corruption form: min 1/lambda(z-cells of R) over eps-admissible rectangles.

    Exhaustive over rectangles; sized for desk-scale matrices only.
    """
    if m.rows + m.cols > 20:
        raise ValueError("rectangle_bound_conventional caps at rows+cols <= 20")
    zc = _zmask(m, z)
    lz = float(lam.weights[zc].sum())
    if lz < 0.5:
        raise ValueError("lambda must put mass >= 0.5 on the z-cells")
    wz = np.where(zc, lam.weights, 0.0)
    woff = np.where(zc, 0.0, lam.weights)
    best = math.inf
    best_rect = None
    for rm in range(1, 1 << m.rows):
        rows = mask_to_bool(rm, m.rows)
        a_cols = wz[rows].sum(axis=0)
        b_cols = woff[rows].sum(axis=0)
        for cm in range(1, 1 << m.cols):
            cols = mask_to_bool(cm, m.cols)
            a = float(a_cols[cols].sum())
            b = float(b_cols[cols].sum())
            if eps * a > b and a > 0 and 1.0 / a < best:
                best = 1.0 / a
                best_rect = (rm, cm)
    if best_rect is None:
        return BoundResult(value=math.inf, kind=UNBOUNDED_KIND, certificate={})
    return BoundResult(
        value=best,
        kind=EXACT,
        certificate={"rowmask": best_rect[0], "colmask": best_rect[1]},
        certificate_value=best,
    )


def rectangle_bound_conventional_best(m: CommMatrix, z, eps, extra_candidates=()) -> BoundResult:
    """Best-of-candidate-distributions heuristic for the outer max over lambda."""
    r, c = m.rows, m.cols
    zc = _zmask(m, z)
    cands = []
    uniform = Distribution.uniform(r, c)
    cands.append(uniform)
    nz = int(zc.sum())
    if nz and nz < r * c:
        mix = np.where(zc, 0.5 / nz, 0.5 / (r * c - nz))
        cands.append(Distribution.from_weights(mix))
        heavy = np.where(zc, 0.75 / nz, 0.25 / (r * c - nz))
        cands.append(Distribution.from_weights(heavy))
    cands.extend(extra_candidates)
    best = None
    for lam in cands:
        if float(lam.weights[zc].sum()) < 0.5:
            continue
        res = rectangle_bound_conventional(m, z, eps, lam)
        if res.kind == UNBOUNDED_KIND:
            continue
        if best is None or res.value > best.value:
            best = res
    if best is None:
        return BoundResult(value=float("nan"), kind=LOWER_ONLY, certificate={})
    return BoundResult(
        value=best.value,
        kind=LOWER_ONLY,
        certificate=best.certificate,
        certificate_value=best.certificate_value,
    )


# ---------------------------------------------------------------------------
# Partition-bound family
# ---------------------------------------------------------------------------


def partition_bound(m: CommMatrix, eps, exact=None, exact_lp=False, max_rounds=500) -> BoundResult:
    """Partition bound: dual with per-output rectangle cuts.

    exact_lp routes the restricted LPs through rational arithmetic (tiny
    instances; pins integral optima like the zero-error equality value).
    """
    oracle = _oracle_for(m, exact)
    if not oracle.exact:
        max_rounds = min(max_rounds, 40)
    r, c = m.rows, m.cols
    data = m.data
    lp = LinearProgram(maximize=True)
    mu = np.array(
        [lp.add_var(f"mu{i},{j}", obj=1.0 - eps) for i in range(r) for j in range(c)]
    ).reshape(r, c)
    phi = np.array(
        [lp.add_var(f"phi{i},{j}", obj=1.0, lo=None) for i in range(r) for j in range(c)]
    ).reshape(r, c)

    def add_rect(z, rm, cm):
        rows = mask_to_bool(rm, r)
        cols = mask_to_bool(cm, c)
        row = {}
        for i in np.nonzero(rows)[0]:
            for j in np.nonzero(cols)[0]:
                row[int(phi[i, j])] = 1.0
                if data[i, j] == z:
                    row[int(mu[i, j])] = 1.0
        return (row, "<=", 1.0)

    for i in range(r):
        for j in range(c):
            for z in (0, 1):
                lp.add_constraint(*add_rect(z, 1 << i, 1 << j))
    for z in (0, 1):
        lp.add_constraint(*add_rect(z, (1 << r) - 1, (1 << c) - 1))

    def w_of(sol, z):
        muv = sol.x[mu.ravel()].reshape(r, c)
        phv = sol.x[phi.ravel()].reshape(r, c)
        return np.where(data == z, muv, 0.0) + phv

    def cuts(sol):
        out = []
        for z in (0, 1):
            for _, rm, cm in oracle.top_rectangles(w_of(sol, z), 1.0 + CUT_TOL):
                out.append(add_rect(z, rm, cm))
        return out

    sol, converged = _accept(solve_lp_lazy(lp, cuts, tol=CUT_TOL, max_rounds=max_rounds, exact=exact_lp), "partition bound")
    worst = max(oracle.max_rectangle(w_of(sol, z))[0] for z in (0, 1))
    cert_val = sol.objective if worst <= 1.0 + CERT_TOL else float("nan")
    return BoundResult(
        value=sol.objective,
        kind=EXACT if (oracle.exact and converged) else UPPER_ONLY,
        certificate={
            "mu": sol.x[mu.ravel()].reshape(r, c),
            "phi": sol.x[phi.ravel()].reshape(r, c),
        },
        certificate_value=cert_val,
        cuts_used=sol.cuts_used,
        exact_oracle=oracle.exact,
    )


def relaxed_partition_bound(m: CommMatrix, mu: Distribution, eps, exact=None, max_rounds=500) -> BoundResult:
    """Distributional relaxed partition bound, solved on the cut side.

    The normalized-strategy program maximizes eta; its dual minimizes gamma
    over alpha >= 0, beta >= 0 with (1-eps) alpha - sum(beta) >= 1 and
    alpha mu(R n f^-1(z)) - beta(R) <= gamma for every labelled rectangle
    (the empty rectangle gives gamma >= 0).  The bound value is 1/gamma*.
    """
    oracle = _oracle_for(m, exact)
    if not oracle.exact:
        max_rounds = min(max_rounds, 40)
    r, c = m.rows, m.cols
    data = m.data
    muw = mu.weights
    lp = LinearProgram()
    alpha = lp.add_var("alpha")
    beta = np.array(
        [lp.add_var(f"beta{i},{j}") for i in range(r) for j in range(c)]
    ).reshape(r, c)
    gamma = lp.add_var("gamma", obj=1.0)  # gamma >= 0 is the empty-rectangle cut
    row = {alpha: 1.0 - eps}
    for b in beta.ravel():
        row[int(b)] = -1.0
    lp.add_constraint(row, ">=", 1.0)

    def add_rect(z, rm, cm):
        rows = mask_to_bool(rm, r)
        cols = mask_to_bool(cm, c)
        row = {gamma: -1.0}
        amass = 0.0
        for i in np.nonzero(rows)[0]:
            for j in np.nonzero(cols)[0]:
                row[int(beta[i, j])] = -1.0
                if data[i, j] == z:
                    amass += muw[i, j]
        row[alpha] = amass
        return (row, "<=", 0.0)

    for i in range(r):
        for j in range(c):
            for z in (0, 1):
                lp.add_constraint(*add_rect(z, 1 << i, 1 << j))
    for z in (0, 1):
        lp.add_constraint(*add_rect(z, (1 << r) - 1, (1 << c) - 1))

    def w_of(sol, z):
        bv = sol.x[beta.ravel()].reshape(r, c)
        return np.where(data == z, sol.x[alpha] * muw, 0.0) - bv

    def cuts(sol):
        out = []
        for z in (0, 1):
            for _, rm, cm in oracle.top_rectangles(w_of(sol, z), sol.x[gamma] + CUT_TOL):
                out.append(add_rect(z, rm, cm))
        return out

    sol, converged = _accept(solve_lp_lazy(lp, cuts, tol=CUT_TOL, max_rounds=max_rounds), "relaxed partition bound")
    gamma_star = sol.objective
    value = 1.0 / gamma_star if gamma_star > 0 else math.inf
    worst = max(oracle.max_rectangle(w_of(sol, z))[0] for z in (0, 1))
    cert_val = value if worst <= sol.x[gamma] + CERT_TOL else float("nan")
    return BoundResult(
        value=value,
        kind=EXACT if (oracle.exact and converged) else UPPER_ONLY,
        certificate={"alpha": sol.x[alpha], "beta": sol.x[beta.ravel()].reshape(r, c), "gamma": gamma_star},
        certificate_value=cert_val,
        cuts_used=sol.cuts_used,
        exact_oracle=oracle.exact,
    )


def fontes_family(m: CommMatrix, mu: Distribution, eps, kind=FIXED_PRT, exact=None, max_rounds=500) -> BoundResult:
    """Fixed-distribution / positive / weak partition bounds.

    All three maximize sum(phi) - eps*kappa subject to
    phi(R) - kappa mu(R n f^-1(z)) <= 1 for every labelled rectangle; they
    differ in the sign/domination constraints on phi.
    """
    if kind not in (FIXED_PRT, POSITIVE_PRT, WEAK_PRT):
        raise ValueError(f"unknown kind {kind!r}")
    oracle = _oracle_for(m, exact)
    if not oracle.exact:
        max_rounds = min(max_rounds, 40)
    r, c = m.rows, m.cols
    data = m.data
    muw = mu.weights
    lp = LinearProgram(maximize=True)
    kappa = lp.add_var("kappa", obj=-eps, hi=KAPPA_CAP)
    lo = None if kind == FIXED_PRT else 0.0
    phi = np.array(
        [lp.add_var(f"phi{i},{j}", obj=1.0, lo=lo) for i in range(r) for j in range(c)]
    ).reshape(r, c)
    if kind == WEAK_PRT:
        for i in range(r):
            for j in range(c):
                lp.add_constraint({int(phi[i, j]): 1.0, kappa: -muw[i, j]}, "<=", 0.0)

    def add_rect(z, rm, cm):
        rows = mask_to_bool(rm, r)
        cols = mask_to_bool(cm, c)
        row = {}
        amass = 0.0
        for i in np.nonzero(rows)[0]:
            for j in np.nonzero(cols)[0]:
                row[int(phi[i, j])] = 1.0
                if data[i, j] == z:
                    amass += muw[i, j]
        row[kappa] = -amass
        return (row, "<=", 1.0)

    for i in range(r):
        for j in range(c):
            for z in (0, 1):
                lp.add_constraint(*add_rect(z, 1 << i, 1 << j))
    for z in (0, 1):
        lp.add_constraint(*add_rect(z, (1 << r) - 1, (1 << c) - 1))

    def w_of(sol, z):
        phv = sol.x[phi.ravel()].reshape(r, c)
        return phv - np.where(data == z, sol.x[kappa] * muw, 0.0)

    def cuts(sol):
        out = []
        for z in (0, 1):
            for _, rm, cm in oracle.top_rectangles(w_of(sol, z), 1.0 + CUT_TOL):
                out.append(add_rect(z, rm, cm))
        return out

    sol, converged = _accept(solve_lp_lazy(lp, cuts, tol=CUT_TOL, max_rounds=max_rounds), "fontes bound")
    worst = max(oracle.max_rectangle(w_of(sol, z))[0] for z in (0, 1))
    cert_val = sol.objective if worst <= 1.0 + CERT_TOL else float("nan")
    return BoundResult(
        value=sol.objective,
        kind=EXACT if (oracle.exact and converged) else UPPER_ONLY,
        certificate={"kappa": sol.x[kappa], "phi": sol.x[phi.ravel()].reshape(r, c)},
        certificate_value=cert_val,
        cuts_used=sol.cuts_used,
        exact_oracle=oracle.exact,
    )


# ---------------------------------------------------------------------------
# Product-distribution discrepancy (heuristic upper bound)
# ---------------------------------------------------------------------------


def product_discrepancy_upper(m: CommMatrix, restarts=4, seed=17, sweeps=4, exact=None) -> BoundResult:
    """Alternating-marginal minimization of disc under product distributions.

    Any product distribution upper-bounds the product-distribution minimum,
    so the best value across seeded restarts is reported as an upper bound.
    """
    s = _sign_cells(m)
    oracle = _oracle_for(m, exact)
    if not oracle.exact:
        oracle = RectangleOracle(m.rows, m.cols, exact=False, seed=7, restarts=8)
    r, c = m.rows, m.cols
    rng = np.random.default_rng(seed)

    def disc_of(p, q):
        val, *_ = oracle.max_abs_rectangle(s * np.outer(p, q))
        return val

    def optimize_side(fixed, side_len, other_weighted):
        """LP over one marginal with lazy rectangle cuts.

        other_weighted[y] rows: contribution of each own-index to rect sums.
        """
        lp = LinearProgram()
        pv = lp.add_vars(side_len, "p")
        t = lp.add_var("t", obj=1.0)
        lp.add_constraint({v: 1.0 for v in pv}, "==", 1.0)

        def cuts(sol):
            p = np.maximum(sol.x[np.array(pv)], 0.0)
            w = s * np.outer(p, fixed) if other_weighted else s * np.outer(fixed, p)
            out = []
            for sgn in (1.0, -1.0):
                val, rm, cm = oracle.max_rectangle(sgn * w)
                if val > sol.x[t] + CUT_TOL:
                    rows = mask_to_bool(rm, r)
                    cols = mask_to_bool(cm, c)
                    row = {t: -1.0}
                    if other_weighted:  # optimizing the row marginal
                        for i in np.nonzero(rows)[0]:
                            coef = sgn * float((s[i, cols] * fixed[cols]).sum())
                            row[pv[i]] = coef
                    else:
                        for j in np.nonzero(cols)[0]:
                            coef = sgn * float((s[rows, j] * fixed[rows]).sum())
                            row[pv[j]] = coef
                    out.append((row, "<=", 0.0))
            return out

        sol, _ = _accept(solve_lp_lazy(lp, cuts, tol=CUT_TOL, max_rounds=30), "product discrepancy")
        p = np.maximum(sol.x[np.array(pv)], 0.0)
        total = p.sum()
        return p / total if total > 0 else np.full(side_len, 1.0 / side_len)

    best = (math.inf, None, None)
    starts = [np.full(c, 1.0 / c)]
    for _ in range(max(0, restarts - 1)):
        q0 = rng.random(c) + 0.1
        starts.append(q0 / q0.sum())
    for q in starts:
        p = np.full(r, 1.0 / r)
        for _ in range(sweeps):
            p = optimize_side(q, r, other_weighted=True)
            q = optimize_side(p, c, other_weighted=False)
        val = disc_of(p, q)
        if val < best[0]:
            best = (val, p, q)
    val, p, q = best
    cert_val = disc_of(p, q)
    return BoundResult(
        value=val,
        kind=UPPER_ONLY,
        certificate={"row_marginal": p, "col_marginal": q},
        certificate_value=cert_val,
        exact_oracle=oracle.exact,
    )
