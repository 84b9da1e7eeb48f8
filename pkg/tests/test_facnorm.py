import math

import numpy as np
import pytest

from commlab import facnorm as fn
from commlab import matrices as mm


def test_gamma2_equality_family():
    for n in range(1, 6):
        res = fn.gamma2(mm.gen_equality(n))
        assert abs(res.value - 1.0) < 1e-4
        cert = res.certificate
        assert cert.lower_value - 2e-5 <= res.value <= cert.upper_value + 2e-5


def test_gamma2_hadamard():
    h = np.array([[1.0, 1.0], [1.0, -1.0]])
    res = fn.gamma2(h)
    assert abs(res.value - math.sqrt(2)) < 1e-4
    assert abs(res.certificate.lower_value - math.sqrt(2)) < 1e-4


def test_gamma2_all_ones():
    res = fn.gamma2(np.ones((8, 8)))
    assert abs(res.value - 1.0) < 1e-4


def test_certificate_recheck_and_factor_residual():
    m = mm.gen_hamming_distance(3, 1)
    res = fn.gamma2(m)
    cert = res.certificate
    target = m.data.astype(float)
    assert cert.recheck(target)
    assert np.abs(cert.upper_a @ cert.upper_b - target).max() <= 1e-7


def test_gamma2_rank_one_sign_matrix():
    u = np.array([1, -1, 1, 1.0])
    s = np.outer(u, u)
    res = fn.gamma2(s)
    assert abs(res.value - 1.0) < 1e-4


def test_gamma2_scaling_homogeneous():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    v1 = fn.gamma2(a).value
    v3 = fn.gamma2(3.0 * a).value
    assert abs(v3 - 3.0 * v1) < 1e-4 * (1 + v3)


def test_gamma2_permutation_and_transpose_invariant():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 5))
    base = fn.gamma2(a).value
    perm = a[rng.permutation(4)][:, rng.permutation(5)]
    assert abs(fn.gamma2(perm).value - base) < 1e-5 * (1 + base)
    assert abs(fn.gamma2(a.T).value - base) < 1e-5 * (1 + base)


def test_hd1_bracket():
    for n in range(2, 7):
        m = mm.gen_hamming_distance(n, 1)
        res = fn.gamma2(m)
        lo = float(mm.hypercube_trace_lower(n))
        assert lo - 1e-4 <= res.value <= math.sqrt(n) + 1e-4


def test_trace_lower_examples():
    m = mm.gen_hamming_distance(2, 1).data.astype(float)
    u = np.full(4, 0.5)
    assert abs(fn.trace_norm_lower(m, u, u) - 1.0) < 1e-9
    eye = np.eye(4)
    assert abs(fn.trace_norm_lower(eye, u, u) - 1.0) < 1e-9
    ones = np.ones((4, 4))
    assert abs(fn.trace_norm_lower(ones, u, u) - 1.0) < 1e-9
    with pytest.raises(fn.Gamma2Error):
        fn.trace_norm_lower(eye, 2 * u, u)


def test_variant_requires_sign():
    with pytest.raises(fn.Gamma2Error):
        fn.gamma2_inf(mm.gen_equality(2))


def test_variant_chain_random_sign_matrices():
    rng = np.random.default_rng(6)
    for _ in range(6):
        s = np.where(rng.random((5, 5)) < 0.5, -1.0, 1.0)
        g = fn.gamma2(s).value
        ga = fn.gamma2_alpha(s, 3.0).value
        gi = fn.gamma2_inf(s).value
        rank = np.linalg.matrix_rank(s)
        slack = 2e-5 * (1 + g)
        assert gi <= ga + slack
        assert ga <= g + slack
        assert g <= math.sqrt(rank) + 1e-4


def test_variant_all_plus():
    s = np.ones((3, 3))
    assert abs(fn.gamma2_alpha(s, 2.0).value - 1.0) < 1e-4
    assert abs(fn.gamma2_inf(s).value - 1.0) < 1e-4


def test_variant_inf_below_plain_on_sign_eq():
    s = mm.gen_equality(2).to_sign()
    gi = fn.gamma2_inf(s).value
    g = fn.gamma2(s.data.astype(float)).value
    assert gi <= g + 2e-5 * (1 + g)


def test_acceptance_gamma2_check():
    p = np.where(np.eye(4) > 0, 1.0, 0.5)
    assert fn.acceptance_gamma2_check(p, 2)
    assert fn.acceptance_gamma2_check(np.eye(4), 0)
    had = 0.5 + 0.5 * np.array([[1.0, 1.0], [1.0, -1.0]])
    assert not fn.acceptance_gamma2_check(had, 0)
    with pytest.raises(fn.Gamma2Error):
        fn.acceptance_gamma2_check(np.array([[1.5]]), 1)


def test_size_cap():
    with pytest.raises(fn.Gamma2Error):
        fn.gamma2(np.ones((100, 100)))
