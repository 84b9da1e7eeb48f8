import numpy as np
import pytest

from commlab.optcore import (
    INFEASIBLE,
    ITER_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    ConeProgram,
    LinearProgram,
    RectangleOracle,
    solve_lp,
    solve_lp_lazy,
    solve_sdp,
)
from commlab.optcore.oracle import mask_to_bool
from commlab.optcore.sdp import CONVERGED


def test_lp_trivial_bounds():
    lp = LinearProgram(maximize=True)
    lp.add_var("x", obj=1.0, lo=0.0, hi=3.0)
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert abs(sol.objective - 3.0) < 1e-9


def test_lp_infeasible_and_unbounded():
    lp = LinearProgram(maximize=True)
    x = lp.add_var("x", obj=1.0)
    lp.add_constraint({x: 1.0}, "<=", -1.0)
    assert solve_lp(lp).status == INFEASIBLE

    lp2 = LinearProgram(maximize=True)
    lp2.add_var("x", obj=1.0)
    assert solve_lp(lp2).status == UNBOUNDED


def test_lp_duality_invariant_random_suite():
    rng = np.random.default_rng(11)
    for _ in range(50):
        nv = rng.integers(2, 7)
        nc = rng.integers(1, 6)
        lp = LinearProgram(maximize=bool(rng.integers(0, 2)))
        xs = [lp.add_var(f"x{i}", obj=float(rng.normal()), hi=5.0) for i in range(nv)]
        for _ in range(nc):
            coeffs = {x: float(rng.normal()) for x in xs}
            lp.add_constraint(coeffs, "<=", float(abs(rng.normal()) + 0.5))
        sol = solve_lp(lp)
        assert sol.status == OPTIMAL
        assert sol.gap <= 1e-6 * (1 + abs(sol.objective))
        assert sol.residual <= 1e-7


def test_lp_exact_rational():
    lp = LinearProgram(maximize=True)
    a = lp.add_var("a", obj=1.0)
    b = lp.add_var("b", obj=1.0)
    lp.add_constraint({a: 3.0, b: 1.0}, "<=", 1.0)
    lp.add_constraint({a: 1.0, b: 3.0}, "<=", 1.0)
    sol = solve_lp(lp, exact=True)
    assert sol.exact_resolved
    assert abs(sol.objective - 0.5) == 0.0


def test_lp_free_variables_and_equalities():
    lp = LinearProgram()
    x = lp.add_var("x", obj=1.0)
    y = lp.add_var("y", obj=1.0, lo=None)
    lp.add_constraint({x: 1.0, y: -1.0}, "==", 2.0)
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert abs(sol.objective - (-2.0)) < 1e-9


def test_lazy_terminates_immediately_when_no_cut():
    lp = LinearProgram(maximize=True)
    x = lp.add_var("x", obj=1.0, hi=2.0)
    sol = solve_lp_lazy(lp, lambda s: [])
    assert sol.status == OPTIMAL and sol.cuts_used == 0


def test_oracle_exact_matches_bruteforce():
    rng = np.random.default_rng(3)
    for _ in range(20):
        r, c = rng.integers(2, 5, size=2)
        w = rng.normal(size=(r, c))
        oracle = RectangleOracle(r, c)
        best = 0.0
        for rm in range(1, 1 << r):
            rows = mask_to_bool(rm, r)
            for cm in range(1, 1 << c):
                cols = mask_to_bool(cm, c)
                best = max(best, w[np.ix_(rows, cols)].sum())
        val, _, _ = oracle.max_rectangle(w)
        assert abs(val - best) < 1e-9


def test_oracle_heuristic_never_exceeds_exact():
    rng = np.random.default_rng(4)
    for _ in range(15):
        w = rng.normal(size=(6, 6))
        ex = RectangleOracle(6, 6).max_rectangle(w)[0]
        he = RectangleOracle(6, 6, exact=False).max_rectangle(w)[0]
        assert he <= ex + 1e-9


def test_lazy_equals_full_enumeration_rectangle_lps():
    """Lazy rectangle cuts vs. the fully enumerated constraint family."""
    rng = np.random.default_rng(9)
    for trial in range(50):
        r, c = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        s = np.where(rng.random((r, c)) < 0.5, 1.0, -1.0)
        oracle = RectangleOracle(r, c)

        def build_base():
            lp = LinearProgram()
            mus = lp.add_vars(r * c, "mu")
            t = lp.add_var("t", obj=1.0)
            lp.add_constraint({v: 1.0 for v in mus}, "==", 1.0)
            return lp, np.array(mus).reshape(r, c), t

        # full enumeration
        lp_full, mu_f, t_f = build_base()
        for rm in range(1, 1 << r):
            rows = mask_to_bool(rm, r)
            for cm in range(1, 1 << c):
                cols = mask_to_bool(cm, c)
                for sgn in (1.0, -1.0):
                    row = {
                        int(mu_f[i, j]): sgn * s[i, j]
                        for i in np.nonzero(rows)[0]
                        for j in np.nonzero(cols)[0]
                    }
                    row[t_f] = -1.0
                    lp_full.add_constraint(row, "<=", 0.0)
        full = solve_lp(lp_full)

        lp_lazy, mu_l, t_l = build_base()

        def cuts(sol):
            w = s * sol.x[mu_l.ravel()].reshape(r, c)
            out = []
            for sgn in (1.0, -1.0):
                for val, rm, cm in oracle.top_rectangles(sgn * w, sol.x[t_l] + 1e-8):
                    rows = mask_to_bool(rm, r)
                    cols = mask_to_bool(cm, c)
                    row = {
                        int(mu_l[i, j]): sgn * s[i, j]
                        for i in np.nonzero(rows)[0]
                        for j in np.nonzero(cols)[0]
                    }
                    row[t_l] = -1.0
                    out.append((row, "<=", 0.0))
            return out

        lazy = solve_lp_lazy(lp_lazy, cuts)
        assert lazy.status == OPTIMAL
        assert abs(lazy.objective - full.objective) < 1e-6, trial


def test_sdp_toy_and_gamma2_values():
    cp = ConeProgram(order=2, tdiag=(0, 1))
    cp.pin(0, 1, 1.0)
    sol = solve_sdp(cp, tol=1e-6)
    assert sol.status == CONVERGED
    assert abs(sol.value - 1.0) < 1e-4

    # all-ones 2x2 block program
    cp = ConeProgram(order=4, tdiag=(0, 1, 2, 3))
    for i in range(2):
        for j in range(2):
            cp.pin(i, 2 + j, 1.0)
    assert abs(solve_sdp(cp, tol=1e-6).value - 1.0) < 1e-4

    # 2x2 Hadamard: sqrt(2), certified by the trace/factorization sandwich
    cp = ConeProgram(order=4, tdiag=(0, 1, 2, 3))
    vals = [[1.0, 1.0], [1.0, -1.0]]
    for i in range(2):
        for j in range(2):
            cp.pin(i, 2 + j, vals[i][j])
    assert abs(solve_sdp(cp, tol=1e-6).value - np.sqrt(2)) < 1e-4


def test_sdp_deterministic():
    cp = ConeProgram(order=4, tdiag=(0, 1, 2, 3))
    vals = [[1.0, 0.0], [1.0, -1.0]]
    for i in range(2):
        for j in range(2):
            cp.pin(i, 2 + j, vals[i][j])
    a = solve_sdp(cp, tol=1e-6)
    b = solve_sdp(cp, tol=1e-6)
    assert a.value == b.value
    assert (a.block == b.block).all()


def test_sdp_nonconverged_status():
    cp = ConeProgram(order=4, tdiag=(0, 1, 2, 3))
    for i in range(2):
        for j in range(2):
            cp.pin(i, 2 + j, 1.0 if (i + j) % 2 == 0 else -1.0)
    sol = solve_sdp(cp, tol=1e-12, max_iter=5)
    assert sol.status != CONVERGED
    assert np.isfinite(sol.value)
