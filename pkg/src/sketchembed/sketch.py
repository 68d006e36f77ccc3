"""Seeded linear sketch operators with exact integer turnstile updates.

Two operators are provided:

* ``CstOperator``: CountSketch transform. Input coordinate ``j`` lands in one
  bucket with one random sign, so a single update touches one accumulator.
* ``FwhtOperator``: subsampled randomized Hadamard transform ``X D H S``.
  An update to coordinate ``j`` touches all ``s`` accumulators, each receiving
  ``delta * d(j) * H[j, k_t]`` with ``H[j, k] = (-1)^popcount(j & k)``.

All per-update contributions are ``+-delta`` so accumulators are int64 and
exact; scaling happens only in :meth:`export`.

Hashing: bucket and sign (and the FWHT diagonal) come from independent
instances of mixed tabulation hashing on 32-bit keys, with tables drawn from a
generator keyed by ``(seed, role)``. Buckets use ``(h * s) >> 32``; signs use
the top bit of the 32-bit value ``h``. Keys must be below 2^32.

Mixed tabulation is 3-wise independent, hence 2-universal. Multiply-shift
hashing was tried first and rejected: on runs of consecutive keys (SBM blocks
are contiguous id ranges) its outputs follow a rotation sequence, and the
CountSketch embeddings of block rows became visibly harder to cluster.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .seeding import rng_for

KINDS = ("cst", "fwht")
MAX_KEY = 1 << 32
# bounds the (batch x s) temporary in FWHT batch updates
FWHT_CHUNK_ELEMS = 1 << 22
# largest p_pad * s for which the FWHT keeps its D H S rows as a lookup table
FWHT_TABLE_LIMIT = 1 << 24


def dimension_for(epsilon, n, c_const=1.0):
    """Sketch dimension ``ceil(c_const * epsilon^-2 * ln n)``, at least 1."""
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if c_const <= 0:
        raise ParameterError(f"c_const must be positive, got {c_const}")
    raw = c_const * math.log(n) / epsilon ** 2
    # absorb float noise when raw is an integer up to rounding
    return max(1, math.ceil(raw - 1e-9))


def next_pow2(p):
    return 1 << max(0, int(p - 1).bit_length())


class TabulationHash:
    """Mixed tabulation: 32-bit keys to 32-bit values.

    The key's four bytes index ``t1``; the low half of the XOR is the output
    and its high half supplies four derived bytes that index ``t2``.
    """

    CHARS = 4

    def __init__(self, seed, role):
        rng = rng_for(seed, "hash", role)
        self.t1 = rng.integers(0, 2 ** 64, size=(self.CHARS, 256), dtype=np.uint64)
        self.t2 = rng.integers(0, 2 ** 32, size=(self.CHARS, 256), dtype=np.uint64)

    def __call__(self, keys):
        keys = np.asarray(keys, dtype=np.uint64)
        if keys.size and int(keys.max()) >= MAX_KEY:
            raise ValueError("tabulation keys must be below 2^32")
        byte = np.uint64(255)
        h = np.zeros(keys.shape, dtype=np.uint64)
        for i in range(self.CHARS):
            h ^= self.t1[i][(keys >> np.uint64(8 * i)) & byte]
        out = h & np.uint64(0xFFFFFFFF)
        for i in range(self.CHARS):
            out ^= self.t2[i][(h >> np.uint64(32 + 8 * i)) & byte]
        return out

    def bucket(self, keys, s):
        return ((self(keys) * np.uint64(s)) >> np.uint64(32)).astype(np.int64)

    def sign(self, keys):
        top = (self(keys) >> np.uint64(31)) & np.uint64(1)
        return 1 - 2 * top.astype(np.int64)


def hadamard_signs(rows, cols):
    """Sylvester Hadamard entries ``(-1)^popcount(rows & cols)`` by broadcasting."""
    parity = np.bitwise_count(np.bitwise_and(rows, cols)) & 1
    return 1 - 2 * parity.astype(np.int64)


def fwht(x):
    """Unnormalized fast Walsh-Hadamard transform along the last axis (Sylvester order)."""
    x = np.array(x)
    x = x.astype(np.int64 if np.issubdtype(x.dtype, np.integer) else np.float64)
    p = x.shape[-1]
    if p & (p - 1):
        raise ParameterError(f"length {p} is not a power of two")
    lead = x.shape[:-1]
    y = x.reshape(-1, p)
    h = 1
    while h < p:
        blocks = y.reshape(len(y), p // (2 * h), 2, h)
        a = blocks[:, :, 0, :].copy()
        blocks[:, :, 0, :] += blocks[:, :, 1, :]
        blocks[:, :, 1, :] = a - blocks[:, :, 1, :]
        h *= 2
    return y.reshape(*lead, p)


@dataclass
class SketchRow:
    accum: np.ndarray
    owner: int = -1

    @classmethod
    def zeros(cls, s, owner=-1):
        return cls(np.zeros(s, dtype=np.int64), owner)

    def copy(self):
        return SketchRow(self.accum.copy(), self.owner)


class _Operator:
    kind = None

    def _check_index(self, cols, limit):
        cols = np.asarray(cols)
        if cols.size and (cols.min() < 0 or cols.max() >= limit):
            bad = cols[(cols < 0) | (cols >= limit)][0]
            raise IndexError(f"coordinate {int(bad)} out of range [0, {limit})")

    def new_row(self, owner=-1):
        return SketchRow.zeros(self.s, owner)

    def zeros(self, rows):
        return np.zeros((rows, self.s), dtype=np.int64)

    def header(self):
        return {"kind": self.kind, "seed": self.seed, "p": self.p, "s": self.s}


class CstOperator(_Operator):
    """CountSketch transform from ``p`` coordinates to ``s`` buckets."""

    kind = "cst"

    def __init__(self, p, s, seed=0):
        if p < 1 or p >= MAX_KEY:
            raise ParameterError(f"input dimension must lie in [1, 2^32), got {p}")
        if s < 1:
            raise ParameterError(f"sketch dimension must be >= 1, got {s}")
        self.p, self.s, self.seed = int(p), int(s), int(seed)
        self._bucket_hash = TabulationHash(seed, "cst-bucket")
        self._sign_hash = TabulationHash(seed, "cst-sign")
        keys = np.arange(self.p, dtype=np.uint64)
        self.bucket = self._bucket_hash.bucket(keys, self.s)
        self.sign = self._sign_hash.sign(keys)

    def update(self, row, j, delta):
        if not 0 <= j < self.p:
            raise IndexError(f"coordinate {j} out of range [0, {self.p})")
        row.accum[self.bucket[j]] += delta * self.sign[j]
        return row

    def update_batch(self, accum, rows, cols, deltas):
        """``accum[rows[i], bucket[cols[i]]] += deltas[i] * sign[cols[i]]`` for all i."""
        cols = np.asarray(cols, dtype=np.int64)
        self._check_index(cols, self.p)
        flat = np.asarray(rows, dtype=np.int64) * self.s + self.bucket[cols]
        np.add.at(accum.reshape(-1), flat, np.asarray(deltas, dtype=np.int64) * self.sign[cols])
        return accum

    def matrix(self):
        """Materialized ``p x s`` sketch matrix (one +-1 per row)."""
        R = np.zeros((self.p, self.s), dtype=np.int64)
        R[np.arange(self.p), self.bucket] = self.sign
        return R

    def export(self, accum):
        return np.asarray(accum, dtype=np.float64)

    def apply_dense(self, X):
        """Real-valued ``X @ R`` in O(nnz) column scatter."""
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros(X.shape[:-1] + (self.s,))
        np.add.at(out.T, self.bucket, (X * self.sign).T)
        return out


class FwhtOperator(_Operator):
    """Subsampled randomized Hadamard transform from ``p`` coordinates to ``s``."""

    kind = "fwht"

    def __init__(self, p, s, seed=0):
        if p < 1 or p >= MAX_KEY:
            raise ParameterError(f"input dimension must lie in [1, 2^32), got {p}")
        if s < 1:
            raise ParameterError(f"sketch dimension must be >= 1, got {s}")
        self.p, self.s, self.seed = int(p), int(s), int(seed)
        self.p_pad = next_pow2(self.p)
        self.log2p = self.p_pad.bit_length() - 1
        self.scale = math.sqrt(self.p_pad / self.s)
        self._d_hash = TabulationHash(seed, "fwht-diag")
        self.d_sign = self._d_hash.sign(np.arange(self.p_pad, dtype=np.uint64))
        # uniform with replacement
        self.cols = rng_for(seed, "fwht-cols").integers(0, self.p_pad, size=self.s, dtype=np.int64)
        self._table = None

    def entries(self, j):
        """Row ``j`` of ``D H S``: ``d(j) * H[j, k_t]`` for t in 0..s-1."""
        return self.d_sign[j] * hadamard_signs(np.int64(j), self.cols)

    def update(self, row, j, delta):
        if not 0 <= j < self.p_pad:
            raise IndexError(f"coordinate {j} out of range [0, {self.p_pad})")
        row.accum += delta * self.entries(j)
        return row

    def update_batch(self, accum, rows, cols, deltas):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        deltas = np.asarray(deltas, dtype=np.int64)
        self._check_index(cols, self.p_pad)
        if self.p_pad * self.s <= FWHT_TABLE_LIMIT:
            if self._table is None:
                self._table = self.matrix()
            # exact int64 sparse-times-table product; duplicates are summed
            batch = sp.csr_matrix((deltas, (rows, cols)), shape=(len(accum), self.p_pad))
            accum += batch @ self._table
            return accum
        step = max(1, FWHT_CHUNK_ELEMS // self.s)
        for lo in range(0, len(cols), step):
            c = cols[lo:lo + step]
            contrib = hadamard_signs(c[:, None], self.cols[None, :])
            contrib *= (deltas[lo:lo + step] * self.d_sign[c])[:, None]
            np.add.at(accum, rows[lo:lo + step], contrib)
        return accum

    def matrix(self):
        """Materialized ``p_pad x s`` matrix ``D H S``."""
        j = np.arange(self.p_pad, dtype=np.int64)
        return self.d_sign[:, None] * hadamard_signs(j[:, None], self.cols[None, :])

    def export(self, accum):
        return np.asarray(accum, dtype=np.float64) / math.sqrt(self.s)

    def apply_dense(self, X):
        """Real-valued ``X D H S / sqrt(s)`` through the fast transform."""
        X = np.asarray(X, dtype=np.float64)
        pad = np.zeros(X.shape[:-1] + (self.p_pad,))
        pad[..., : X.shape[-1]] = X
        return fwht(pad * self.d_sign)[..., self.cols] / math.sqrt(self.s)

    def header(self):
        return {**super().header(), "p_pad": self.p_pad}


def make_operator(kind, p, s, seed=0):
    if kind == "cst":
        return CstOperator(p, s, seed)
    if kind == "fwht":
        return FwhtOperator(p, s, seed)
    raise ParameterError(f"unknown operator kind {kind!r}; expected one of {KINDS}")


def cst_update(op, row, j, delta):
    return op.update(row, j, delta)


def fwht_update(op, row, j, delta):
    return op.update(row, j, delta)


def export_row(op, row):
    return op.export(row.accum)
