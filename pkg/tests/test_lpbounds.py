import math

import numpy as np
import pytest

from commlab import lpbounds as lb
from commlab import matrices as mm
from commlab.matrices import Distribution
from commlab.optcore.oracle import mask_to_bool

EQ1 = mm.gen_equality(1)
EQ2 = mm.gen_equality(2)
ONES3 = mm.CommMatrix(np.ones((3, 3), dtype=np.int8))
U22 = Distribution.uniform(2, 2)
U33 = Distribution.uniform(3, 3)
U44 = Distribution.uniform(4, 4)
HADB = mm.CommMatrix(np.array([[1, 1], [1, 0]], dtype=np.int8))


def _disc_under_oracle(m, mu):
    """Direct enumeration over all rectangles (independent oracle)."""
    s = 1.0 - 2.0 * m.data.astype(float)
    w = s * mu.weights
    best = 0.0
    for rmask in range(1, 1 << m.rows):
        rows = mask_to_bool(rmask, m.rows)
        for cmask in range(1, 1 << m.cols):
            cols = mask_to_bool(cmask, m.cols)
            best = max(best, abs(w[np.ix_(rows, cols)].sum()))
    return best


def test_disc_under_values():
    assert lb.discrepancy_under(ONES3, U33).value == 1.0
    # exhaustive over all 9 nonempty rectangles of EQ_1: best single cell 1/4
    assert abs(lb.discrepancy_under(EQ1, U22).value - 0.25) < 1e-12
    assert abs(lb.discrepancy_under(EQ1, U22).value - _disc_under_oracle(EQ1, U22)) < 1e-12
    assert abs(lb.discrepancy_under(HADB, U22).value - 0.5) < 1e-12


def test_disc_under_matches_oracle_random():
    rng = np.random.default_rng(12)
    for _ in range(15):
        a = (rng.random((3, 4)) < 0.5).astype(np.int8)
        m = mm.CommMatrix(a)
        w = rng.random((3, 4))
        mu = Distribution.from_weights(w)
        assert abs(lb.discrepancy_under(m, mu).value - _disc_under_oracle(m, mu)) < 1e-9


def test_disc_min_over_mu():
    res = lb.discrepancy(ONES3)
    assert abs(res.value - 1.0) < 1e-9
    res = lb.discrepancy(EQ2)
    assert res.kind == lb.EXACT
    assert res.certified()
    # certificate re-evaluates: disc under mu* equals the LP value
    mu = Distribution.from_weights(res.certificate["mu"])
    assert abs(_disc_under_oracle(EQ2, mu) - res.value) < 1e-6


def test_weak_regularity_equals_disc_mu():
    rng = np.random.default_rng(13)
    cases = [(EQ1, U22), (ONES3, U33), (EQ2, U44)]
    for _ in range(10):
        a = (rng.random((3, 3)) < 0.5).astype(np.int8)
        cases.append((mm.CommMatrix(a), U33))
    for m, mu in cases:
        wr = lb.weak_regularity(m, mu).value
        du = lb.discrepancy_under(m, mu).value
        assert abs(wr - du) <= 1e-9


def test_weak_regularity_constant_matrix():
    assert lb.weak_regularity(ONES3, U33).value == 1.0


def test_rectangle_bound_values():
    assert abs(lb.rectangle_bound_lp(ONES3, 1, 0.0).value - 1.0) < 1e-9
    assert abs(lb.rectangle_bound_lp(EQ1, 1, 0.0).value - 2.0) < 1e-9
    # monotone in eps
    hi = lb.rectangle_bound_lp(EQ2, 1, 0.0).value
    lo = lb.rectangle_bound_lp(EQ2, 1, 0.45).value
    assert lo <= hi + 1e-9


def test_smooth_rectangle_bound():
    assert abs(lb.smooth_rectangle_bound_lp(ONES3, 1, 0.0).value - 1.0) < 1e-9
    assert abs(lb.smooth_rectangle_bound_lp(EQ1, 1, 0.0).value - 2.0) < 1e-9
    rng = np.random.default_rng(14)
    for _ in range(8):
        a = (rng.random((3, 3)) < 0.5).astype(np.int8)
        m = mm.CommMatrix(a)
        for z in (0, 1):
            r = lb.rectangle_bound_lp(m, z, 0.2).value
            s = lb.smooth_rectangle_bound_lp(m, z, 0.2).value
            assert s >= r - 1e-7


def _rec_conventional_oracle(m, z, eps, lam):
    best = math.inf
    for rmask in range(1, 1 << m.rows):
        rows = mask_to_bool(rmask, m.rows)
        for cmask in range(1, 1 << m.cols):
            cols = mask_to_bool(cmask, m.cols)
            sub = lam.weights[np.ix_(rows, cols)]
            inz = m.data[np.ix_(rows, cols)] == z
            a = float(sub[inz].sum())
            b = float(sub[~inz].sum())
            if eps * a > b and a > 0:
                best = min(best, 1.0 / a)
    return best


def test_rectangle_conventional():
    assert lb.rectangle_bound_conventional(ONES3, 1, 0.25, U33).value == 1.0
    with pytest.raises(ValueError):
        lb.rectangle_bound_conventional(EQ2, 1, 0.25, U44)  # z-mass 1/4 < 0.5
    # with all mass on the diagonal the full rectangle has no corrupt mass,
    # so it is admissible and the minimum is 1 (enumeration oracle agrees)
    diag = Distribution.from_weights(np.eye(4))
    res = lb.rectangle_bound_conventional(EQ2, 1, 0.25, diag)
    assert res.value == _rec_conventional_oracle(EQ2, 1, 0.25, diag) == 1.0
    # a diagonal-heavy mix makes large rectangles corrupt; value rises
    mixed = Distribution.from_weights(np.eye(4) * 3.0 + np.ones((4, 4)))
    res_m = lb.rectangle_bound_conventional(EQ2, 1, 0.25, mixed)
    assert abs(res_m.value - _rec_conventional_oracle(EQ2, 1, 0.25, mixed)) < 1e-12
    assert res_m.value > 1.0
    # eps=0 admits no rectangle: strict corruption impossible
    res0 = lb.rectangle_bound_conventional(EQ2, 1, 0.0, diag)
    assert res0.kind == lb.UNBOUNDED_KIND


def test_partition_bound_values():
    res = lb.partition_bound(EQ1, 0.0, exact_lp=True)
    assert res.value == 4.0
    assert res.exact_oracle
    assert abs(lb.partition_bound(ONES3, 0.1).value - 1.0) < 1e-9
    for n in (1, 2):
        v = lb.partition_bound(mm.gen_equality(n), 1.0 / 3.0).value
        assert v <= 16.0 + 1e-9


def _relaxed_primal_oracle(m, mu, eps):
    """Full-enumeration primal of the normalized-strategy program (tiny)."""
    from commlab.optcore.lp import LinearProgram, solve_lp

    r, c = m.rows, m.cols
    rects = [(0, 0)]  # empty rectangle
    for rmask in range(1, 1 << r):
        for cmask in range(1, 1 << c):
            rects.append((rmask, cmask))
    lp = LinearProgram(maximize=True)
    eta = lp.add_var("eta", obj=1.0)
    pvars = {}
    for z in (0, 1):
        for rect in rects:
            pvars[(z, rect)] = lp.add_var(f"p{z},{rect}")
    lp.add_constraint({v: 1.0 for v in pvars.values()}, "==", 1.0)
    cover = {eta: -(1.0 - eps)}
    for (z, (rmask, cmask)), var in pvars.items():
        mass = 0.0
        for i in range(r):
            if not (rmask >> i) & 1:
                continue
            for j in range(c):
                if (cmask >> j) & 1 and m.data[i, j] == z:
                    mass += mu.weights[i, j]
        if mass:
            cover[var] = cover.get(var, 0.0) + mass
    lp.add_constraint(cover, ">=", 0.0)
    for i in range(r):
        for j in range(c):
            row = {eta: -1.0}
            for (z, (rmask, cmask)), var in pvars.items():
                if (rmask >> i) & 1 and (cmask >> j) & 1:
                    row[var] = 1.0
            lp.add_constraint(row, "<=", 0.0)
    sol = solve_lp(lp)
    return 1.0 / sol.objective


def test_relaxed_partition_bound():
    assert abs(lb.relaxed_partition_bound(ONES3, U33, 0.0).value - 1.0) < 1e-6
    for eps in (0.0, 0.25):
        mine = lb.relaxed_partition_bound(EQ1, U22, eps).value
        oracle = _relaxed_primal_oracle(EQ1, U22, eps)
        assert abs(mine - oracle) < 1e-6


def test_fontes_family_chains():
    rng = np.random.default_rng(15)
    mats = [EQ1, ONES3]
    for _ in range(6):
        a = (rng.random((3, 3)) < 0.5).astype(np.int8)
        mats.append(mm.CommMatrix(a))
    for m in mats:
        mu = Distribution.uniform(m.rows, m.cols)
        for eps in (0.0, 1.0 / 3.0):
            w = lb.fontes_family(m, mu, eps, lb.WEAK_PRT).value
            p = lb.fontes_family(m, mu, eps, lb.POSITIVE_PRT).value
            f = lb.fontes_family(m, mu, eps, lb.FIXED_PRT).value
            rp = lb.relaxed_partition_bound(m, mu, eps).value
            assert w <= p + 1e-6
            assert p <= f + 1e-6
            assert w <= rp + 1e-6
            assert rp <= f + 1e-6
            wr = lb.weak_regularity(m, mu).value
            if wr > 1e-9:
                assert w >= (1.0 - 2.0 * eps) / wr - 1e-6


def test_fontes_monochromatic():
    assert abs(lb.fontes_family(ONES3, U33, 0.0, lb.FIXED_PRT).value - 1.0) < 1e-6


def test_bound_certificates_reevaluate():
    for res in (
        lb.discrepancy(EQ2),
        lb.rectangle_bound_lp(EQ2, 1, 0.25),
        lb.smooth_rectangle_bound_lp(EQ2, 0, 0.25),
        lb.partition_bound(EQ2, 0.25),
        lb.fontes_family(EQ2, U44, 0.25, lb.WEAK_PRT),
        lb.relaxed_partition_bound(EQ2, U44, 0.25),
    ):
        assert res.certified(), res


def test_product_discrepancy():
    assert abs(lb.product_discrepancy_upper(ONES3).value - 1.0) < 1e-9
    res = lb.product_discrepancy_upper(HADB)
    assert res.value <= 0.5 + 1e-9
    assert res.kind == lb.UPPER_ONLY
    # certificate marginals re-evaluate to the reported value
    assert res.certified()


def test_lp_chain_vs_partition():
    rng = np.random.default_rng(16)
    for _ in range(6):
        a = (rng.random((3, 3)) < 0.5).astype(np.int8)
        m = mm.CommMatrix(a)
        prt = lb.partition_bound(m, 1.0 / 3.0).value
        for z in (0, 1):
            rec = lb.rectangle_bound_lp(m, z, 1.0 / 3.0).value
            srec = lb.smooth_rectangle_bound_lp(m, z, 1.0 / 3.0).value
            assert rec <= srec + 1e-6
            assert srec <= prt + 1e-6


def test_bad_epsilon_rejected():
    with pytest.raises(ValueError):
        lb.BoundRequest(EQ1, epsilon=0.5)
