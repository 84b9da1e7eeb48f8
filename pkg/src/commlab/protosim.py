"""Seeded Monte Carlo simulation of the public-coin protocols.

The equality test is realized as amplified shared-random inner-product-mod-2
subtests; the distance-1 protocol composes an equality screen with repeated
half-deletion rounds; the oblivious inner-product protocol estimates angles
by random-hyperplane sign agreement.  Everything is reproducible bit-exactly
from (seed, config); trials may be sharded with per-shard derived seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matrices import BitString


@dataclass
class TrialConfig:
    trials: int = 100_000
    seed: int = 1
    epsilon: float = 1e-3
    rounds: int = 100
    threshold: int = 37

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 <= self.epsilon < 0.5:
            raise ValueError("epsilon must lie in [0, 1/2)")


@dataclass
class TrialStats:
    accept_count: int
    trials: int

    @property
    def empirical_prob(self):
        return self.accept_count / self.trials

    @property
    def wilson_interval_95(self):
        z = 1.959963984540054
        n = self.trials
        p = self.empirical_prob
        denom = 1.0 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
        return (max(0.0, center - half), min(1.0, center + half))

    def to_record(self):
        lo, hi = self.wilson_interval_95
        return {
            "accepts": self.accept_count,
            "trials": self.trials,
            "prob": self.empirical_prob,
            "wilson95": [lo, hi],
        }


def subtest_count(epsilon):
    """Number of inner-product subtests: ceil(log2(1/eps)) + 2."""
    return math.ceil(math.log2(1.0 / epsilon)) + 2 if epsilon > 0 else 42


def eqtest_cost_bits(epsilon):
    """Communication accounting: 2 bits per subtest."""
    return 2 * subtest_count(epsilon)


def _as_bits(x):
    if isinstance(x, BitString):
        return x.to_array()
    return np.asarray(x, dtype=np.uint8)


def eqtest(x, y, epsilon, rng):
    """One-sided amplified equality test.

    k shared random subsets; each side announces the parity of its string on
    the subset.  Output 1 iff every parity agrees: equal strings always pass,
    distinct strings pass a single subtest with probability 1/2.
    """
    xb, yb = _as_bits(x), _as_bits(y)
    if xb.shape != yb.shape:
        raise ValueError("length mismatch")
    k = subtest_count(epsilon)
    masks = rng.integers(0, 2, size=(k, len(xb)), dtype=np.uint8)
    pa = (masks @ xb) & 1
    pb = (masks @ yb) & 1
    return int((pa == pb).all())


def eqtest_batch(diff, epsilon, trials, rng):
    """Vectorized eqtest outcomes for a fixed difference vector.

    Only x ^ y matters: the test passes iff every random subset has even
    overlap with the difference.  Returns a boolean array of length trials.
    """
    k = subtest_count(epsilon)
    n = len(diff)
    if not diff.any():
        return np.ones(trials, dtype=bool)
    masks = rng.integers(0, 2, size=(trials, k, n), dtype=np.uint8)
    parities = (masks @ diff) & 1
    return ~(parities.any(axis=1))


def _pair_at_distance(n, d, rng=None):
    x = np.zeros(n, dtype=np.uint8)
    y = x.copy()
    y[:d] ^= 1
    return x, y


def hd1_round_event(x, y, epsilon, trials, seed):
    """Probability of the round-level "looks like distance 1" event.

    One protocol round: the equality screen passes (the full strings test
    unequal), a fresh public random half of the coordinates is deleted, and
    the equality test on the shortened strings reports equal.
    """
    xb, yb = _as_bits(x), _as_bits(y)
    n = len(xb)
    if n % 2:
        raise ValueError("even-length inputs required")
    rng = np.random.default_rng(seed)
    diff = (xb ^ yb).astype(np.uint8)
    screen_pass = ~eqtest_batch(diff, epsilon, trials, rng)  # unequal detected
    # half-deletion: keep a random subset of exactly n/2 coordinates
    keep = np.argsort(rng.random((trials, n)), axis=1)[:, : n // 2]
    kept_diff = diff[keep]  # trials x n/2
    k = subtest_count(epsilon)
    masks = rng.integers(0, 2, size=(trials, k, n // 2), dtype=np.uint8)
    parities = np.einsum("tkn,tn->tk", masks, kept_diff) & 1
    short_equal = ~(parities.any(axis=1))
    hits = int((screen_pass & short_equal).sum())
    return TrialStats(accept_count=hits, trials=trials)


def hd1_protocol(x, y, config: TrialConfig):
    """Full distance-1 protocol: screen, repeated rounds, threshold rule.

    Decides 1 (distance exactly one) iff the screen reports unequal and at
    least `threshold` of the rounds report the shortened strings equal; the
    default threshold 37/100 separates round probability 1/2 (distance 1)
    from <= 1/4 (distance >= 2) by binomial tails.  A fresh public random
    set of ceil(n/2) coordinates is deleted each round.  Communication is
    eqtest_cost_bits per equality test, independent of the input length.
    """
    xb, yb = _as_bits(x), _as_bits(y)
    n = len(xb)
    rng = np.random.default_rng(config.seed)
    diff = (xb ^ yb).astype(np.uint8)
    bits = eqtest_cost_bits(config.epsilon) * (1 + config.rounds)
    if eqtest(xb, yb, config.epsilon, rng):
        return {"decision": 0, "bits": bits}
    k = subtest_count(config.epsilon)
    keep_len = n - math.ceil(n / 2)
    keeps = np.argsort(rng.random((config.rounds, n)), axis=1)[:, :keep_len]
    kept = diff[keeps]  # rounds x keep_len
    masks = rng.integers(0, 2, size=(config.rounds, k, keep_len), dtype=np.uint8)
    parities = np.einsum("rkn,rn->rk", masks, kept) & 1
    count = int((~parities.any(axis=1)).sum())
    return {"decision": 1 if count >= config.threshold else 0, "bits": bits}


def hd1_decision_rate(n, d, runs, config: TrialConfig):
    """Fraction of protocol runs deciding 1, over `runs` derived seeds."""
    x, y = _pair_at_distance(n, d)
    ones = 0
    bits = None
    for shard in range(runs):
        cfg = TrialConfig(
            trials=1,
            seed=config.seed ^ shard,
            epsilon=config.epsilon,
            rounds=config.rounds,
            threshold=config.threshold,
        )
        out = hd1_protocol(x, y, cfg)
        ones += out["decision"]
        bits = out["bits"]
    return TrialStats(accept_count=ones, trials=runs), bits


# ---------------------------------------------------------------------------
# Oblivious inner-product protocol (random hyperplanes)
# ---------------------------------------------------------------------------


def hyperplane_exchanges(gamma):
    """One-bit exchanges for additive error 1/(10 gamma^2)."""
    return math.ceil(200.0 * math.pi**2 * gamma**4)


def oblivious_ip_protocol(u, v, gamma, trials, seed, levels=(-1.0, 1.0)):
    """Estimate which of two known levels <u, v> equals, obliviously.

    Shared random hyperplanes give sign agreements whose frequency encodes
    the angle; the estimated unnormalized inner product is thresholded at the
    midpoint of `levels`.  Per-trial error probability depends only on the
    normalized inner product, which is what makes the error oblivious.
    Returns the majority estimate, bits used, and the empirical error rate
    against the true nearest level.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu > gamma + 1e-9 or nv > gamma + 1e-9:
        raise ValueError("vector norms exceed the declared gamma")
    if nu == 0 or nv == 0:
        raise ValueError("zero vectors are not sign-decodable")
    t = hyperplane_exchanges(gamma)
    true_ip = float(u @ v)
    lo, hi = sorted(levels)
    mid = 0.5 * (lo + hi)
    truth = hi if abs(true_ip - hi) <= abs(true_ip - lo) else lo
    rng = np.random.default_rng(seed)
    d = len(u)
    uhat, vhat = u / nu, v / nv
    errors = 0
    decisions = []
    chunk = max(1, min(trials, 2_000_000 // max(t, 1)))
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        g = rng.standard_normal((b, t, d))
        su = (g @ uhat) > 0
        sv = (g @ vhat) > 0
        frac = (su != sv).mean(axis=1)
        est = np.cos(np.pi * frac) * nu * nv
        dec = np.where(est > mid, hi, lo)
        errors += int((dec != truth).sum())
        decisions.append(dec)
        done += b
    dec_all = np.concatenate(decisions)
    vals, counts = np.unique(dec_all, return_counts=True)
    estimate = float(vals[np.argmax(counts)])
    return {
        "estimate": estimate,
        "bits": t,
        "empirical_error": errors / trials,
        "truth": truth,
    }


# ---------------------------------------------------------------------------
# Acceptance-probability matrices
# ---------------------------------------------------------------------------

PROTOCOL_IDS = ("eq1bit", "eqdet", "hd1")


def acceptance_matrix(protocol_id, n, config: TrialConfig):
    """Empirical acceptance probability per input pair over {0,1}^n."""
    size = 1 << n
    if size > 64:
        raise ValueError("protocol domain caps at 64 inputs per side")
    p = np.zeros((size, size))
    if protocol_id == "eqdet":
        # full-exchange deterministic protocol: exact 0/1 acceptances
        return np.eye(size)
    if protocol_id == "eq1bit":
        rng = np.random.default_rng(config.seed)
        xs = np.array([[int(b) for b in format(i, f"0{n}b")] for i in range(size)], dtype=np.uint8)
        masks = rng.integers(0, 2, size=(config.trials, n), dtype=np.uint8)
        parities = (masks @ xs.T) & 1  # trials x size
        for xi in range(size):
            agree = parities == parities[:, [xi]]
            p[xi] = agree.mean(axis=0)
        return p
    if protocol_id == "hd1":
        for xi in range(size):
            xb = np.array([int(b) for b in format(xi, f"0{n}b")], dtype=np.uint8)
            for yi in range(size):
                yb = np.array([int(b) for b in format(yi, f"0{n}b")], dtype=np.uint8)
                cfg = TrialConfig(
                    trials=1,
                    seed=config.seed ^ (xi * size + yi),
                    epsilon=config.epsilon,
                    rounds=config.rounds,
                    threshold=config.threshold,
                )
                acc = 0
                runs = max(1, config.trials)
                for shard in range(runs):
                    c2 = TrialConfig(
                        trials=1,
                        seed=cfg.seed ^ (shard * 0x9E3779B9),
                        epsilon=cfg.epsilon,
                        rounds=cfg.rounds,
                        threshold=cfg.threshold,
                    )
                    acc += hd1_protocol(xb, yb, c2)["decision"]
                p[xi, yi] = acc / runs
        return p
    raise ValueError(f"unknown protocol id {protocol_id!r}")


def eq1bit_cost_bits():
    """Alice's parity bit plus Bob's answer bit."""
    return 2
