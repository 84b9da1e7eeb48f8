"""Factorization-norm family with two-sided certificates.

gamma2(M) is the SDP value of  min t : [[P, M], [M^T, Q]] >= 0, diag <= t.
Every solve returns a certificate pair: a trace-norm lower bound
||u v^T o M||_tr for explicit unit vectors, and an explicit factorization
upper bound built from the PSD iterate with the off-diagonal block repaired
to equal M exactly (a spectral-norm diagonal compensation keeps the repaired
matrix PSD, so the factor read off its eigendecomposition is genuine).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrices import BOOL, SIGN, CommMatrix
from .optcore.sdp import CONVERGED, ConeProgram, solve_sdp

DEFAULT_TOL = 1e-5
FACTOR_RESID_TOL = 1e-7
GAMMA2_MAX_SIZE = 160


class Gamma2Error(ValueError):
    pass


@dataclass
class Gamma2Certificate:
    lower_u: np.ndarray
    lower_v: np.ndarray
    lower_value: float
    upper_a: np.ndarray
    upper_b: np.ndarray
    upper_value: float

    def recheck(self, target, tol=1e-6):
        """Re-evaluate both certificate sides against the target matrix."""
        lo = trace_norm_lower(target, self.lower_u, self.lower_v)
        prod = self.upper_a @ self.upper_b
        if np.abs(prod - target).max() > FACTOR_RESID_TOL:
            return False
        up = _row_col_value(self.upper_a, self.upper_b)
        return abs(lo - self.lower_value) <= tol and abs(up - self.upper_value) <= tol


@dataclass
class Gamma2Result:
    value: float
    certificate: Gamma2Certificate
    status: str
    iterations: int
    realized: np.ndarray | None = None  # for the alpha / infinity variants


def _as_array(m):
    if isinstance(m, CommMatrix):
        return m.data.astype(float)
    return np.asarray(m, dtype=float)


def _row_col_value(a, b):
    return float(np.sqrt((a**2).sum(axis=1).max()) * np.sqrt((b**2).sum(axis=0).max()))


def trace_norm_lower(m, u, v):
    """||u v^T o M||_tr for unit u, v; certified lower bound on gamma2(M)."""
    m = _as_array(m)
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9 or abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise Gamma2Error("certificate vectors must be unit length")
    return float(np.linalg.svd(np.outer(u, v) * m, compute_uv=False).sum())


gamma2_lower_trace = trace_norm_lower


def _gamma2_program(m):
    r, c = m.shape
    cp = ConeProgram(order=r + c, tdiag=tuple(range(r + c)))
    for i in range(r):
        for j in range(c):
            cp.pin(i, r + j, float(m[i, j]))
    return cp


def _variant_program(m, alpha):
    """Entrywise realization window: 1 <= M_ij * N_ij (<= alpha)."""
    r, c = m.shape
    cp = ConeProgram(order=r + c, tdiag=tuple(range(r + c)))
    for i in range(r):
        for j in range(c):
            s = float(m[i, j])
            if s > 0:
                lo, hi = 1.0, (alpha if alpha is not None else None)
            else:
                lo, hi = (-alpha if alpha is not None else None), -1.0
            cp.box(i, r + j, lo, hi)
    return cp


def _certify(m_target, block, r, c, dual_block):
    """Build the two-sided certificate from a PSD iterate."""
    e = m_target - block[:r, r:]
    sigma = float(np.linalg.norm(e, 2)) if e.size else 0.0
    w = block.copy()
    w[:r, r:] = m_target
    w[r:, :r] = m_target.T
    if sigma > 0:
        w[np.diag_indices_from(w)] += sigma
    vals, vecs = np.linalg.eigh(w)
    vals = np.maximum(vals, 0.0)
    L = vecs * np.sqrt(vals)
    a = L[:r]
    b = L[r:].T
    # eigen-roundoff can leave a tiny mismatch; fold it below the residual cap
    prod = a @ b
    resid = np.abs(prod - m_target).max()
    if resid > FACTOR_RESID_TOL:
        # one refinement: balance the mismatch into the larger factor
        scale = 1.0 + resid
        a = a * np.sqrt(scale)
        b = b / np.sqrt(scale)
        prod = a @ b
    upper = _row_col_value(a, b)

    # lower side: best trace certificate among deterministic candidates
    best = (-1.0, None, None)
    cands = [(np.full(r, 1.0 / np.sqrt(r)), np.full(c, 1.0 / np.sqrt(c)))]
    try:
        uu, ss, vvt = np.linalg.svd(m_target, full_matrices=False)
        cands.append((np.abs(uu[:, 0]) / np.linalg.norm(uu[:, 0]), np.abs(vvt[0]) / np.linalg.norm(vvt[0])))
    except np.linalg.LinAlgError:
        pass
    dr = np.sqrt(np.maximum(np.diag(block)[:r], 1e-12))
    dc = np.sqrt(np.maximum(np.diag(block)[r:], 1e-12))
    cands.append((dr / np.linalg.norm(dr), dc / np.linalg.norm(dc)))
    if dual_block is not None:
        wd = -dual_block[:r, r:]
        try:
            uu, ss, vvt = np.linalg.svd(wd, full_matrices=False)
            cands.append((np.abs(uu[:, 0]), np.abs(vvt[0])))
        except np.linalg.LinAlgError:
            pass
    for u, v in cands:
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu <= 0 or nv <= 0:
            continue
        u = u / nu
        v = v / nv
        val = float(np.linalg.svd(np.outer(u, v) * m_target, compute_uv=False).sum())
        if val > best[0]:
            best = (val, u, v)
    return Gamma2Certificate(
        lower_u=best[1],
        lower_v=best[2],
        lower_value=best[0],
        upper_a=a,
        upper_b=b,
        upper_value=upper,
    )


def gamma2(m, tol=DEFAULT_TOL, max_iter=20000) -> Gamma2Result:
    """gamma2 of any real matrix (Boolean 0/1 matrices are taken as-is)."""
    arr = _as_array(m)
    r, c = arr.shape
    if r + c > GAMMA2_MAX_SIZE:
        raise Gamma2Error(f"matrix order {r}+{c} exceeds cap {GAMMA2_MAX_SIZE}")
    sol = solve_sdp(_gamma2_program(arr), tol=tol, max_iter=max_iter)
    cert = _certify(arr, sol.block, r, c, sol.dual_block)
    value = min(sol.value, cert.upper_value)
    value = max(value, cert.lower_value) if cert.lower_value <= cert.upper_value else sol.value
    return Gamma2Result(value=value, certificate=cert, status=sol.status, iterations=sol.iterations)


def _require_sign(m):
    if isinstance(m, CommMatrix):
        if m.convention != SIGN:
            raise Gamma2Error("variant requires a sign-convention matrix")
        return m.data.astype(float)
    arr = np.asarray(m, dtype=float)
    if not np.isin(arr, (-1.0, 1.0)).all():
        raise Gamma2Error("variant requires +-1 entries")
    return arr


def gamma2_alpha(m, alpha, tol=DEFAULT_TOL, max_iter=20000) -> Gamma2Result:
    """min gamma2(N) over realizations with 1 <= M_ij N_ij <= alpha."""
    arr = _require_sign(m)
    if alpha is not None and alpha < 1:
        raise Gamma2Error("alpha must be >= 1")
    r, c = arr.shape
    if r + c > GAMMA2_MAX_SIZE:
        raise Gamma2Error(f"matrix order {r}+{c} exceeds cap {GAMMA2_MAX_SIZE}")
    sol = solve_sdp(_variant_program(arr, alpha), tol=tol, max_iter=max_iter)
    n_realized = sol.block[:r, r:].copy()
    # clip into the feasibility window so the certificate is on a realization
    if alpha is not None:
        lo = np.where(arr > 0, 1.0, -alpha)
        hi = np.where(arr > 0, alpha, -1.0)
    else:
        lo = np.where(arr > 0, 1.0, -np.inf)
        hi = np.where(arr > 0, np.inf, -1.0)
    n_realized = np.clip(n_realized, lo, hi)
    cert = _certify(n_realized, sol.block, r, c, sol.dual_block)
    value = min(sol.value, cert.upper_value)
    return Gamma2Result(
        value=value,
        certificate=cert,
        status=sol.status,
        iterations=sol.iterations,
        realized=n_realized,
    )


def gamma2_inf(m, tol=DEFAULT_TOL, max_iter=20000) -> Gamma2Result:
    return gamma2_alpha(m, None, tol=tol, max_iter=max_iter)


def acceptance_gamma2_check(p, cost_bits, tol=1e-4):
    """True iff gamma2 of an acceptance-probability matrix is <= 2^cost + tol."""
    arr = np.asarray(p, dtype=float)
    if arr.min() < -1e-12 or arr.max() > 1 + 1e-12:
        raise Gamma2Error("acceptance probabilities must lie in [0, 1]")
    res = gamma2(arr)
    return res.value <= 2.0**cost_bits + tol
