"""Most-violated-rectangle search over weighted cell matrices.

Every rectangle-indexed LP in the bounds layer generates its constraints
lazily through this oracle.  Exact mode maximizes the signed cell-weight sum
over all 2^rows * 2^cols rectangles by enumerating subsets of the smaller
side (the larger side's optimal subset is the positive-column-sum set, so the
enumeration is equivalent to the full rectangle family).  Above the exact cap
an alternating row/column ascent with seeded restarts takes over, flagged
non-exact.
"""

from __future__ import annotations

import numpy as np

EXACT_SIDE_LIMIT = 16  # enumerate 2^k subsets for min side k <= this
EXACT_CELL_LIMIT = 1 << 22  # and only if 2^k * other_side stays below this


class RectangleOracle:
    def __init__(self, rows, cols, exact=None, seed=7, restarts=32):
        self.rows = rows
        self.cols = cols
        k = min(rows, cols)
        feasible = k <= EXACT_SIDE_LIMIT and (1 << k) * max(rows, cols) <= EXACT_CELL_LIMIT
        if exact is None:
            exact = feasible
        if exact and not feasible:
            raise ValueError(f"exact oracle infeasible for shape {rows}x{cols}")
        self.exact = exact
        self.seed = seed
        self.restarts = restarts

    # -- exact search ------------------------------------------------------

    def _best_exact(self, w):
        """Max over all rectangles of the cell-weight sum; returns masks."""
        transpose = w.shape[0] > w.shape[1]
        a = w.T if transpose else w
        k, other = a.shape
        # subset sums over the enumerated side, built by doubling
        sums = np.zeros((1 << k, other))
        for bit in range(k):
            size = 1 << bit
            sums[size : 2 * size] = sums[:size] + a[bit]
        vals = np.maximum(sums, 0.0).sum(axis=1)
        best = int(np.argmax(vals))
        value = float(vals[best])
        if best == 0:
            return 0.0, 0, 0
        colmask = 0
        for j in np.nonzero(sums[best] > 0)[0]:
            colmask |= 1 << int(j)
        if transpose:
            return value, colmask, best
        return value, best, colmask

    # -- heuristic search --------------------------------------------------

    def _best_heuristic(self, w):
        rng = np.random.default_rng(self.seed)
        r, c = w.shape
        best_val, best_rm, best_cm = 0.0, 0, 0
        starts = [np.ones(r, dtype=bool)]
        for _ in range(self.restarts - 1):
            starts.append(rng.random(r) < 0.5)
        for rows_sel in starts:
            rows_sel = rows_sel.copy()
            for _ in range(r + c):
                colsum = w[rows_sel].sum(axis=0) if rows_sel.any() else np.zeros(c)
                cols_sel = colsum > 0
                rowsum = w[:, cols_sel].sum(axis=1) if cols_sel.any() else np.zeros(r)
                new_rows = rowsum > 0
                if (new_rows == rows_sel).all():
                    break
                rows_sel = new_rows
            if rows_sel.any():
                colsum = w[rows_sel].sum(axis=0)
                cols_sel = colsum > 0
                val = float(colsum[cols_sel].sum())
                if val > best_val:
                    best_val = val
                    best_rm = _bool_to_mask(rows_sel)
                    best_cm = _bool_to_mask(cols_sel)
        return best_val, best_rm, best_cm

    # -- public ------------------------------------------------------------

    def max_rectangle(self, weights):
        """Return (value, rowmask, colmask) maximizing the rectangle sum.

        The empty rectangle (value 0) is always admissible, so the result is
        never negative.
        """
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.rows, self.cols):
            raise ValueError("weight shape mismatch")
        if self.exact:
            return self._best_exact(w)
        return self._best_heuristic(w)

    def max_abs_rectangle(self, weights):
        """Max over rectangles of |sum|; returns (value, rowmask, colmask, sign)."""
        vp, rmp, cmp_ = self.max_rectangle(weights)
        vn, rmn, cmn = self.max_rectangle(-np.asarray(weights, dtype=float))
        if vp >= vn:
            return vp, rmp, cmp_, 1
        return vn, rmn, cmn, -1

    def top_rectangles(self, weights, threshold, k=12):
        """Up to k distinct rectangles with sum above threshold, best first."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.rows, self.cols):
            raise ValueError("weight shape mismatch")
        out = []
        if self.exact:
            transpose = w.shape[0] > w.shape[1]
            a = w.T if transpose else w
            kk, other = a.shape
            sums = np.zeros((1 << kk, other))
            for bit in range(kk):
                size = 1 << bit
                sums[size : 2 * size] = sums[:size] + a[bit]
            vals = np.maximum(sums, 0.0).sum(axis=1)
            order = np.argsort(vals)[::-1][: 4 * k]
            for best in order:
                if vals[best] <= threshold or len(out) >= k:
                    break
                best = int(best)
                if best == 0:
                    continue
                colmask = 0
                for j in np.nonzero(sums[best] > 0)[0]:
                    colmask |= 1 << int(j)
                rm, cm = (colmask, best) if transpose else (best, colmask)
                out.append((float(vals[best]), rm, cm))
            return out
        rng = np.random.default_rng(self.seed)
        r, c = w.shape
        seen = set()
        starts = [np.ones(r, dtype=bool)]
        for _ in range(self.restarts - 1):
            starts.append(rng.random(r) < 0.5)
        for rows_sel in starts:
            rows_sel = rows_sel.copy()
            for _ in range(r + c):
                colsum = w[rows_sel].sum(axis=0) if rows_sel.any() else np.zeros(c)
                cols_sel = colsum > 0
                rowsum = w[:, cols_sel].sum(axis=1) if cols_sel.any() else np.zeros(r)
                new_rows = rowsum > 0
                if (new_rows == rows_sel).all():
                    break
                rows_sel = new_rows
            if not rows_sel.any():
                continue
            colsum = w[rows_sel].sum(axis=0)
            cols_sel = colsum > 0
            val = float(colsum[cols_sel].sum())
            if val <= threshold:
                continue
            rm = _bool_to_mask(rows_sel)
            cm = _bool_to_mask(cols_sel)
            if (rm, cm) in seen:
                continue
            seen.add((rm, cm))
            out.append((val, rm, cm))
        out.sort(key=lambda t: -t[0])
        return out[:k]


def _bool_to_mask(sel):
    mask = 0
    for i in np.nonzero(sel)[0]:
        mask |= 1 << int(i)
    return mask


def mask_to_bool(mask, size):
    out = np.zeros(size, dtype=bool)
    i = 0
    while mask:
        if mask & 1:
            out[i] = True
        mask >>= 1
        i += 1
    return out
