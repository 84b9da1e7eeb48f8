"""Operator-splitting solver for one-PSD-block cone programs.

The programs handled here minimize a scalar t over symmetric matrices X with

  * pinned entries        X[i, j] = value,
  * boxed entries         lo <= X[i, j] <= hi  (half-open allowed),
  * coupled diagonal      X[i, i] <= t  for every i in `tdiag`.

ADMM alternates the closed-form projection onto the affine/box set (with the
t-term absorbed into a one-dimensional piecewise-quadratic subproblem) and a
PSD-cone projection via dense symmetric eigendecomposition.  The iteration is
deterministic: no randomness, fixed parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_ORDER = 160

CONVERGED = "converged"
NON_CONVERGED = "non_converged"


@dataclass
class ConeProgram:
    order: int
    pins: dict = field(default_factory=dict)  # (i, j) -> value, symmetric
    boxes: dict = field(default_factory=dict)  # (i, j) -> (lo, hi); None = inf
    tdiag: tuple = ()  # diagonal indices bounded above by t

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise ValueError(f"block order must be in [1, {MAX_ORDER}]")
        self.tdiag = tuple(self.tdiag)

    def pin(self, i, j, value):
        self.pins[(i, j)] = float(value)

    def box(self, i, j, lo, hi):
        self.boxes[(i, j)] = (lo, hi)


@dataclass
class SdpSolution:
    status: str
    value: float
    block: np.ndarray
    dual_block: np.ndarray
    primal_residual: float
    dual_residual: float
    iterations: int


def _project_psd(a):
    w, v = np.linalg.eigh(a)
    w = np.maximum(w, 0.0)
    return (v * w) @ v.T


def _t_subproblem(vdiag, rho):
    """argmin_t t + (rho/2) * sum_i max(vdiag_i - t, 0)^2."""
    d = np.sort(vdiag)[::-1]
    target = 1.0 / rho
    csum = 0.0
    for k in range(len(d)):
        csum += d[k]
        # with the top k+1 entries active: sum (d_i - t) = 1/rho
        t = (csum - target) / (k + 1)
        lo = d[k + 1] if k + 1 < len(d) else -np.inf
        if lo <= t <= d[k]:
            return t
    return (csum - target) / len(d)


def solve_sdp(cp: ConeProgram, tol=1e-5, max_iter=20000, rho=1.0) -> SdpSolution:
    n = cp.order
    pin_idx = []
    pin_val = []
    for (i, j), v in cp.pins.items():
        pin_idx.append((i, j))
        pin_val.append(v)
    box_idx = list(cp.boxes.keys())
    box_lo = np.array(
        [cp.boxes[k][0] if cp.boxes[k][0] is not None else -np.inf for k in box_idx]
    )
    box_hi = np.array(
        [cp.boxes[k][1] if cp.boxes[k][1] is not None else np.inf for k in box_idx]
    )
    tdiag = np.array(cp.tdiag, dtype=int)

    def project_affine(v):
        """Projection onto pins/boxes plus the t-coupled diagonal prox."""
        x = v.copy()
        for (i, j), val in zip(pin_idx, pin_val):
            x[i, j] = val
            x[j, i] = val
        for k, (i, j) in enumerate(box_idx):
            c = min(max(x[i, j], box_lo[k]), box_hi[k])
            x[i, j] = c
            x[j, i] = c
        if len(tdiag):
            t = _t_subproblem(np.diag(v)[tdiag], rho)
            d = np.diag(x).copy()
            d[tdiag] = np.minimum(np.diag(v)[tdiag], t)
            np.fill_diagonal(x, d)
        else:
            t = 0.0
        return x, t

    alpha = 1.6  # over-relaxation
    Z = np.zeros((n, n))
    U = np.zeros((n, n))
    t = 0.0
    primal_res = dual_res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        X, t = project_affine(Z - U)
        Xh = alpha * X + (1.0 - alpha) * Z
        Z_prev = Z
        Z = _project_psd(Xh + U)
        U = U + Xh - Z
        if it % 10 == 0 or it == max_iter:
            primal_res = float(np.linalg.norm(X - Z))
            dual_res = float(rho * np.linalg.norm(Z - Z_prev))
            scale = max(1.0, float(np.linalg.norm(X)))
            if primal_res <= tol * scale and dual_res <= tol * scale:
                break
    status = CONVERGED if (
        primal_res <= tol * max(1.0, float(np.linalg.norm(Z))) and
        dual_res <= tol * max(1.0, float(np.linalg.norm(Z)))
    ) else NON_CONVERGED
    # report t from the PSD iterate's coupled diagonal, which is what the
    # certificates are extracted from
    value = float(np.max(np.diag(Z)[tdiag])) if len(tdiag) else t
    return SdpSolution(
        status=status,
        value=value,
        block=Z,
        dual_block=rho * U,
        primal_residual=primal_res,
        dual_residual=dual_res,
        iterations=it,
    )
