"""Core matrix types, generator families, and text-file IO.

Everything here is immutable after construction; generators are pure, so
matrices can be shared freely across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

BOOL = "bool"
SIGN = "sign"

# Hard size caps for the generator families (desk scale).
EQ_MAX_N = 16
HD_MAX_N = 12
GT_MAX_M = 64
SIP3D_MAX_C = 4
PG_ORDERS = (2, 3, 5)


class SizeLimitError(ValueError):
    """Requested instance exceeds the supported desk-scale caps."""


class MatrixParseError(ValueError):
    """Matrix file is malformed; carries 1-based line and column."""

    def __init__(self, message, line, col=None):
        self.line = line
        self.col = col
        loc = f"line {line}" + (f", col {col}" if col is not None else "")
        super().__init__(f"{message} ({loc})")


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=np.int8)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CommMatrix:
    """A Boolean (0/1) or sign (-1/+1) matrix with an explicit entry convention."""

    data: np.ndarray
    convention: str = BOOL
    label: str = ""

    def __post_init__(self):
        a = self.data
        if a.ndim != 2 or a.size == 0:
            raise ValueError("matrix must be 2-dimensional and nonempty")
        if self.convention == BOOL:
            ok = np.isin(a, (0, 1)).all()
        elif self.convention == SIGN:
            ok = np.isin(a, (-1, 1)).all()
        else:
            raise ValueError(f"unknown convention {self.convention!r}")
        if not ok:
            raise ValueError(f"entries violate convention {self.convention!r}")
        object.__setattr__(self, "data", _freeze(a))

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    def entry(self, x, y):
        return int(self.data[x, y])

    def to_sign(self):
        """Boolean -> sign under the fixed mapping 0 <-> -1, 1 <-> +1."""
        if self.convention == SIGN:
            return self
        return CommMatrix(2 * self.data.astype(np.int8) - 1, SIGN, self.label)

    def to_bool(self):
        if self.convention == BOOL:
            return self
        return CommMatrix((self.data + 1) // 2, BOOL, self.label)

    def relabel(self, label):
        return CommMatrix(self.data.copy(), self.convention, label)

    def __eq__(self, other):
        return (
            isinstance(other, CommMatrix)
            and self.convention == other.convention
            and self.data.shape == other.data.shape
            and bool((self.data == other.data).all())
        )

    def __hash__(self):
        return hash((self.convention, self.data.shape, self.data.tobytes()))


@dataclass(frozen=True)
class Rectangle:
    """A combinatorial rectangle as row/column bitmasks over [rows] x [cols]."""

    rowmask: int
    colmask: int

    @classmethod
    def from_indices(cls, rows, cols):
        rm = 0
        for r in rows:
            rm |= 1 << r
        cm = 0
        for c in cols:
            cm |= 1 << c
        return cls(rm, cm)

    def row_indices(self):
        return _mask_bits(self.rowmask)

    def col_indices(self):
        return _mask_bits(self.colmask)

    def contains(self, x, y):
        return bool((self.rowmask >> x) & 1 and (self.colmask >> y) & 1)

    def is_empty(self):
        return self.rowmask == 0 or self.colmask == 0

    def cell_count(self):
        return bin(self.rowmask).count("1") * bin(self.colmask).count("1")


def _mask_bits(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


GENERAL = "general"
PRODUCT = "product"

_DIST_TOL = 1e-12


@dataclass(frozen=True)
class Distribution:
    """Nonnegative matrix-shaped weights summing to 1."""

    weights: np.ndarray
    kind: str = GENERAL
    row_marginal: np.ndarray | None = None
    col_marginal: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2:
            raise ValueError("weights must be a matrix")
        if (w < 0).any():
            raise ValueError("negative weight")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("total weight must be 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if self.kind == PRODUCT:
            if self.row_marginal is None or self.col_marginal is None:
                raise ValueError("product distribution needs both marginals")
            outer = np.outer(self.row_marginal, self.col_marginal)
            if np.abs(outer - w).max() > 1e-9:
                raise ValueError("weights are not the product of the marginals")
        elif self.kind != GENERAL:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def uniform(cls, rows, cols):
        w = np.full((rows, cols), 1.0 / (rows * cols))
        return cls(w, PRODUCT, np.full(rows, 1.0 / rows), np.full(cols, 1.0 / cols))

    @classmethod
    def product(cls, row_marginal, col_marginal):
        p = np.asarray(row_marginal, float)
        q = np.asarray(col_marginal, float)
        p = p / p.sum()
        q = q / q.sum()
        return cls(np.outer(p, q), PRODUCT, p, q)

    @classmethod
    def from_weights(cls, weights):
        w = np.asarray(weights, float)
        return cls(w / w.sum())


@dataclass(frozen=True)
class BitString:
    """Fixed-length binary word."""

    bits: tuple
    n: int = field(init=False, default=0)

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0/1")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "n", len(bits))

    @classmethod
    def from_int(cls, value, n):
        return cls(tuple((value >> i) & 1 for i in range(n)))

    def to_array(self):
        return np.array(self.bits, dtype=np.uint8)

    def hamming(self, other):
        if self.n != other.n:
            raise ValueError("length mismatch")
        return sum(a != b for a, b in zip(self.bits, other.bits))


# ---------------------------------------------------------------------------
# Generator families
# ---------------------------------------------------------------------------


def gen_equality(n):
    """2^n x 2^n Boolean matrix with 1 exactly on the diagonal."""
    if not 1 <= n <= EQ_MAX_N:
        raise SizeLimitError(f"equality: need 1 <= n <= {EQ_MAX_N}, got {n}")
    return CommMatrix(np.eye(2**n, dtype=np.int8), BOOL, f"eq:{n}")


def gen_hamming_distance(n, k):
    """2^n x 2^n Boolean matrix with 1 exactly where popcount(x^y) = k."""
    if not 1 <= n <= HD_MAX_N:
        raise SizeLimitError(f"hamming: need 1 <= n <= {HD_MAX_N}, got {n}")
    if not 0 <= k <= n:
        raise SizeLimitError(f"hamming: need 0 <= k <= n, got k={k}")
    idx = np.arange(2**n, dtype=np.uint32)
    xor = idx[:, None] ^ idx[None, :]
    pop = np.zeros_like(xor)
    for b in range(n):
        pop += (xor >> b) & 1
    return CommMatrix((pop == k).astype(np.int8), BOOL, f"hd:{n},{k}")


def gen_greater_than(m):
    """m x m Boolean matrix with 1 exactly where row index > column index."""
    if not 2 <= m <= GT_MAX_M:
        raise SizeLimitError(f"greater-than: need 2 <= m <= {GT_MAX_M}, got {m}")
    a = (np.arange(m)[:, None] > np.arange(m)[None, :]).astype(np.int8)
    return CommMatrix(a, BOOL, f"gt:{m}")


def sip3d_points(c):
    """All integer vectors of [-c, c]^3 in lexicographic order."""
    rng = range(-c, c + 1)
    return [(a, b, d) for a in rng for b in rng for d in rng]


def gen_sign_inner_product_3d(c):
    """Sign matrix of <x, y> over the integer grid [-c, c]^3.

    Zero inner products are mapped to +1; the companion witness solver in
    exactcomb records those cells as the perturbed ones.
    """
    if not 1 <= c <= SIP3D_MAX_C:
        raise SizeLimitError(f"sip3d: need 1 <= C <= {SIP3D_MAX_C}, got {c}")
    pts = np.array(sip3d_points(c), dtype=np.int64)
    gram = pts @ pts.T
    sign = np.where(gram >= 0, 1, -1).astype(np.int8)
    return CommMatrix(sign, SIGN, f"sip3d:{c}")


def _pg_points(q):
    """Canonical representatives of the points of PG(2, q), lexicographic.

    Representative of a 1-dim subspace: first nonzero coordinate equals 1.
    """
    pts = []
    for a in range(q):
        for b in range(q):
            pts.append((1, a, b))
    for b in range(q):
        pts.append((0, 1, b))
    pts.append((0, 0, 1))
    return sorted(pts)


def _pg_lines(q, points):
    """Lines of PG(2, q) as sorted tuples of point indices."""
    index = {p: i for i, p in enumerate(points)}
    lines = set()
    for i, p in enumerate(points):
        for j in range(i + 1, len(points)):
            r = points[j]
            line = set()
            for s in range(q):
                for t in range(q):
                    if s == 0 and t == 0:
                        continue
                    v = tuple((s * p[k] + t * r[k]) % q for k in range(3))
                    # normalize to canonical representative
                    lead = next(x for x in v if x != 0)
                    inv = pow(lead, q - 2, q) if lead != 1 else 1
                    v = tuple((inv * x) % q for x in v)
                    line.add(index[v])
            lines.add(tuple(sorted(line)))
    return sorted(lines)


def gen_projective_intervals(q):
    """Interval class of PG(2, q): rows are the empty set, all singletons and
    every contiguous run within each line's fixed lexicographic order.

    Columns are the N = q^2+q+1 points; row count is 1 + N + N(N-1)/2.
    """
    if q not in PG_ORDERS:
        raise SizeLimitError(f"pgint: q must be one of {PG_ORDERS}, got {q}")
    points = _pg_points(q)
    n_pts = len(points)
    lines = _pg_lines(q, points)
    rows = [np.zeros(n_pts, dtype=np.int8)]  # empty interval
    for i in range(n_pts):
        r = np.zeros(n_pts, dtype=np.int8)
        r[i] = 1
        rows.append(r)
    for line in lines:
        # line is already lexicographically ordered by point representative
        L = len(line)
        for i in range(L):
            for j in range(i + 1, L):
                r = np.zeros(n_pts, dtype=np.int8)
                r[list(line[i : j + 1])] = 1
                rows.append(r)
    return CommMatrix(np.array(rows, dtype=np.int8), BOOL, f"pgint:{q}")


def pg_lines(q):
    """Expose the line structure (tuples of point indices) for property checks."""
    points = _pg_points(q)
    return _pg_lines(q, points)


# ---------------------------------------------------------------------------
# Simple row statistics
# ---------------------------------------------------------------------------


def distinct_row_count(m: CommMatrix):
    return len({m.data[i].tobytes() for i in range(m.rows)})


def one_way_cc(m: CommMatrix):
    """One-way deterministic cost: ceil(log2 of the number of distinct rows)."""
    return math.ceil(math.log2(distinct_row_count(m)))


def hypercube_trace_lower(n):
    """Exact trace-norm certificate (1/2^n) * sum_k C(n,k) |n-2k|.

    This is the nuclear norm of (1/2^n) J o M_n computed from the hypercube
    adjacency spectrum (eigenvalue n-2k with multiplicity C(n,k)); it lower
    bounds gamma2 of the distance-1 matrix.
    """
    if not 1 <= n <= 20:
        raise SizeLimitError(f"hypercube_trace_lower: need 1 <= n <= 20, got {n}")
    total = sum(math.comb(n, k) * abs(n - 2 * k) for k in range(n + 1))
    return Fraction(total, 2**n)


# ---------------------------------------------------------------------------
# Text IO
# ---------------------------------------------------------------------------

_BOOL_CHARS = {"0": 0, "1": 1}
_SIGN_CHARS = {"-": -1, "+": 1}


def save_matrix(m: CommMatrix, path):
    lines = [f"{m.rows} {m.cols} {m.convention}"]
    if m.convention == BOOL:
        rev = {0: "0", 1: "1"}
    else:
        rev = {-1: "-", 1: "+"}
    for i in range(m.rows):
        lines.append("".join(rev[int(v)] for v in m.data[i]))
    if m.label:
        lines.append(f"# {m.label}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix(path):
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise MatrixParseError("empty file", 1)
    head = raw[0].split()
    if len(head) != 3:
        raise MatrixParseError("header must be '<rows> <cols> <bool|sign>'", 1)
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError:
        raise MatrixParseError("non-integer dimensions", 1) from None
    conv = head[2]
    if conv not in (BOOL, SIGN):
        raise MatrixParseError(f"unknown convention {conv!r}", 1)
    if rows <= 0 or cols <= 0:
        raise MatrixParseError("dimensions must be positive", 1)
    if len(raw) < 1 + rows:
        raise MatrixParseError(f"expected {rows} data lines", len(raw))
    table = _BOOL_CHARS if conv == BOOL else _SIGN_CHARS
    data = np.zeros((rows, cols), dtype=np.int8)
    for i in range(rows):
        line = raw[1 + i]
        if len(line) != cols:
            raise MatrixParseError(f"expected {cols} characters", 2 + i, len(line) + 1)
        for j, ch in enumerate(line):
            if ch not in table:
                raise MatrixParseError(f"bad character {ch!r}", 2 + i, j + 1)
            data[i, j] = table[ch]
    label = ""
    for extra_i, extra in enumerate(raw[1 + rows :]):
        s = extra.strip()
        if not s:
            continue
        if s.startswith("#"):
            label = s[1:].strip()
        else:
            raise MatrixParseError("unexpected trailing content", 2 + rows + extra_i)
    return CommMatrix(data, conv, label)
