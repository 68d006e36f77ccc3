"""Stochastic block model parameter sets and edge-stream sampling."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .graph import Partition, UpdateStream
from .seeding import rng_for

# below this many candidate pairs a block is sampled with one Bernoulli draw per pair
DENSE_PAIR_LIMIT = 1 << 16


@dataclass
class SbmSpec:
    c: int
    sizes: np.ndarray
    prob: np.ndarray
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.sizes = np.asarray(self.sizes, dtype=np.int64).ravel()
        self.prob = np.asarray(self.prob, dtype=np.float64)
        if self.c < 1:
            raise ParameterError(f"community count must be >= 1, got {self.c}")
        if len(self.sizes) != self.c:
            raise ParameterError(f"sizes has length {len(self.sizes)}, expected {self.c}")
        if np.any(self.sizes < 1):
            raise ParameterError("community sizes must be positive")
        if self.prob.shape != (self.c, self.c):
            raise ParameterError(f"prob must be {self.c}x{self.c}, got {self.prob.shape}")
        if not np.array_equal(self.prob, self.prob.T):
            raise ParameterError("prob must be symmetric")
        if np.any(self.prob < 0) or np.any(self.prob > 1) or not np.all(np.isfinite(self.prob)):
            raise ParameterError("prob entries must lie in [0, 1]")

    @property
    def n(self):
        return int(self.sizes.sum())

    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.sizes)])

    def with_seed(self, seed):
        return SbmSpec(self.c, self.sizes.copy(), self.prob.copy(), seed, dict(self.meta))

    def pair_counts(self):
        """Number of candidate vertex pairs for every block pair (i, j)."""
        s = self.sizes.astype(np.float64)
        counts = np.outer(s, s)
        np.fill_diagonal(counts, s * (s - 1) / 2)
        return counts

    def expected_edges(self):
        counts = self.pair_counts()
        return float(np.triu(counts * self.prob).sum())

    def edge_variance(self):
        counts = self.pair_counts()
        return float(np.triu(counts * self.prob * (1 - self.prob)).sum())


def flat_prob_matrix(c, ratio, row_sum=0.5):
    """Constant-diagonal probability matrix with a fixed in/out ratio and row sum."""
    if c < 1:
        raise ParameterError(f"community count must be >= 1, got {c}")
    if ratio <= 0:
        raise ParameterError(f"ratio must be positive, got {ratio}")
    if not 0 < row_sum <= 1:
        raise ParameterError(f"row_sum must lie in (0, 1], got {row_sum}")
    rho_out = row_sum / (ratio + c - 1)
    rho_in = ratio * rho_out
    if c == 1:
        rho_in = row_sum
    if rho_in > 1 or rho_out > 1:
        raise ParameterError(f"probabilities out of range: rho_in={rho_in}, rho_out={rho_out}")
    prob = np.full((c, c), rho_out)
    np.fill_diagonal(prob, rho_in)
    return prob


def equal_sizes(n, c):
    if c < 1 or n < c:
        raise ParameterError(f"cannot split {n} vertices into {c} non-empty blocks")
    sizes = np.full(c, n // c, dtype=np.int64)
    sizes[: n % c] += 1
    return sizes


def flat_spec(n, c, ratio, row_sum=0.5, seed=0):
    """Equal-size blocks with a flat probability matrix."""
    return SbmSpec(c, equal_sizes(n, c), flat_prob_matrix(c, ratio, row_sum), seed,
                   {"kind": "flat", "ratio": ratio, "row_sum": row_sum})


def two_level_spec(sizes, rho_in, rho_out, seed=0):
    c = len(sizes)
    prob = np.full((c, c), float(rho_out))
    np.fill_diagonal(prob, float(rho_in))
    return SbmSpec(c, sizes, prob, seed, {"kind": "two_level"})


def graphchallenge_spec(n, seed=0):
    """Parameter set following the GraphChallenge-style regression fit.

    Community count grows as ``0.95 n^0.36``; sizes are drawn from a normal with
    mean ``0.95 n^0.64`` and variance ``0.32 n^0.64`` and then rescaled to sum to
    ``n``; ``rho_in = 16.75 n^-0.59`` and ``rho_out = 1.02 n^-0.59``, both clamped
    to at most 1.
    """
    if n < 16:
        raise ParameterError(f"n must be >= 16, got {n}")
    c = max(1, int(round(0.95 * n ** 0.36)))
    c = min(c, n)
    rho_in = min(16.75 * n ** -0.59, 1.0)
    # the fit's coefficient is taken in magnitude; a negative probability is meaningless
    rho_out = min(1.02 * n ** -0.59, 1.0)
    if not (0 < rho_out <= rho_in <= 1):
        raise ParameterError(f"invalid probabilities for n={n}")

    rng = rng_for(seed, "graphchallenge", "sizes")
    mean = 0.95 * n ** 0.64
    std = np.sqrt(0.32 * n ** 0.64)
    raw = np.maximum(np.rint(rng.normal(mean, std, size=c)), 1.0)
    sizes = _rescale_sizes(raw, n, rng)

    prob = np.full((c, c), rho_out)
    np.fill_diagonal(prob, rho_in)
    return SbmSpec(c, sizes, prob, seed,
                   {"kind": "graphchallenge", "rho_in": rho_in, "rho_out": rho_out})


def _rescale_sizes(raw, n, rng):
    # proportional rescale, floor at 1, then +-1 steps in a seeded order
    sizes = np.maximum(np.floor(raw * n / raw.sum()), 1).astype(np.int64)
    diff = n - int(sizes.sum())
    order = rng.permutation(len(sizes))
    while diff != 0:
        step = 1 if diff > 0 else -1
        for i in order:
            if diff == 0:
                break
            if step < 0 and sizes[i] <= 1:
                continue
            sizes[i] += step
            diff -= step
    return sizes


def _sample_indices(rng, n_pairs, p, method):
    """Indices in ``[0, n_pairs)`` each kept independently with probability ``p``."""
    if n_pairs <= 0 or p <= 0:
        return np.empty(0, np.int64)
    if p >= 1:
        return np.arange(n_pairs, dtype=np.int64)
    if method == "auto":
        method = "bernoulli" if n_pairs <= DENSE_PAIR_LIMIT else "skip"
    if method == "bernoulli":
        return np.flatnonzero(rng.random(n_pairs) < p).astype(np.int64)
    if method != "skip":
        raise ParameterError(f"unknown sampling method {method!r}")
    # geometric skipping: gaps between successes are Geometric(p) on {1, 2, ...}
    chunks = []
    pos = -1
    while True:
        remaining = n_pairs - 1 - pos
        batch = int(remaining * p + 4 * np.sqrt(remaining * p + 1)) + 16
        idx = pos + np.cumsum(rng.geometric(p, size=batch))
        inside = idx[idx < n_pairs]
        chunks.append(inside)
        if len(inside) < len(idx):
            break
        pos = int(idx[-1])
    return np.concatenate(chunks).astype(np.int64)


def _triangle_pairs(t, b):
    """Map linear indices over pairs (r, c), r < c < b, row-major, back to (r, c)."""
    r_all = np.arange(b, dtype=np.int64)
    starts = r_all * b - r_all * (r_all + 1) // 2
    r = np.searchsorted(starts, t, side="right") - 1
    c = r + 1 + (t - starts[r])
    return r, c


def sample_sbm(spec, method="auto"):
    """Sample an insert-only edge stream and the ground-truth partition.

    Each block pair is sampled from its own derived generator, so the output
    does not depend on the order blocks are processed in.
    """
    offsets = spec.offsets()
    us, vs = [], []
    for i in range(spec.c):
        bi = int(spec.sizes[i])
        for j in range(i, spec.c):
            p = float(spec.prob[i, j])
            rng = rng_for(spec.seed, "block", i, j)
            if i == j:
                t = _sample_indices(rng, bi * (bi - 1) // 2, p, method)
                r, c = _triangle_pairs(t, bi)
                us.append(offsets[i] + r)
                vs.append(offsets[i] + c)
            else:
                bj = int(spec.sizes[j])
                t = _sample_indices(rng, bi * bj, p, method)
                us.append(offsets[i] + t // bj)
                vs.append(offsets[j] + t % bj)
    u = np.concatenate(us) if us else np.empty(0, np.int64)
    v = np.concatenate(vs) if vs else np.empty(0, np.int64)
    perm = rng_for(spec.seed, "order").permutation(len(u))
    stream = UpdateStream(u[perm], v[perm])
    truth = Partition(np.repeat(np.arange(spec.c), spec.sizes), relabel=False)
    return stream, truth
