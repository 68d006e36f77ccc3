"""Core graph data types: edge updates, turnstile streams and partitions."""
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .seeding import rng_for


@dataclass(frozen=True)
class EdgeUpdate:
    u: int
    v: int
    delta: int = 1

    def __post_init__(self):
        if self.u == self.v:
            raise ParameterError(f"self-loop ({self.u}, {self.v}) not allowed")


class UpdateStream:
    """A sequence of turnstile updates ``(u, v, delta)`` held as int64 columns."""

    def __init__(self, u, v, delta=None):
        self.u = np.ascontiguousarray(u, dtype=np.int64).ravel()
        self.v = np.ascontiguousarray(v, dtype=np.int64).ravel()
        if delta is None:
            delta = np.ones(len(self.u), dtype=np.int64)
        self.delta = np.ascontiguousarray(delta, dtype=np.int64).ravel()
        if not (len(self.u) == len(self.v) == len(self.delta)):
            raise ParameterError("u, v and delta must have equal lengths")
        if np.any(self.u == self.v):
            i = int(np.flatnonzero(self.u == self.v)[0])
            raise ParameterError(f"self-loop at update {i}: ({self.u[i]}, {self.v[i]})")

    @classmethod
    def from_updates(cls, updates):
        updates = list(updates)
        return cls([e.u for e in updates], [e.v for e in updates],
                   [e.delta for e in updates])

    @classmethod
    def empty(cls):
        return cls(np.empty(0, np.int64), np.empty(0, np.int64))

    def __len__(self):
        return len(self.u)

    def __iter__(self):
        for u, v, d in zip(self.u.tolist(), self.v.tolist(), self.delta.tolist()):
            yield EdgeUpdate(u, v, d)

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return EdgeUpdate(int(self.u[idx]), int(self.v[idx]), int(self.delta[idx]))
        return UpdateStream(self.u[idx], self.v[idx], self.delta[idx])

    def __eq__(self, other):
        if not isinstance(other, UpdateStream):
            return NotImplemented
        return (np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v)
                and np.array_equal(self.delta, other.delta))

    def __repr__(self):
        return f"UpdateStream(len={len(self)})"

    def concat(self, other):
        return UpdateStream(np.concatenate([self.u, other.u]),
                            np.concatenate([self.v, other.v]),
                            np.concatenate([self.delta, other.delta]))

    def negated(self):
        return UpdateStream(self.u, self.v, -self.delta)

    def shuffled(self, seed):
        perm = rng_for(seed, "shuffle").permutation(len(self))
        return self[perm]

    def max_vertex(self):
        if len(self) == 0:
            return -1
        return int(max(self.u.max(), self.v.max()))

    def net_edges(self):
        """Collapse the stream to its resident edge multiset.

        Returns an insert-only stream with one entry per unordered pair whose
        net weight is nonzero (the weight is kept in ``delta``).
        """
        if len(self) == 0:
            return UpdateStream.empty()
        lo = np.minimum(self.u, self.v)
        hi = np.maximum(self.u, self.v)
        keys = np.stack([lo, hi], axis=1)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        w = np.bincount(inv.ravel(), weights=self.delta, minlength=len(uniq))
        w = np.rint(w).astype(np.int64)
        keep = w != 0
        return UpdateStream(uniq[keep, 0], uniq[keep, 1], w[keep])


class Partition:
    """Vertex -> cluster label map with dense labels in ``[0, n_clusters)``."""

    def __init__(self, labels, relabel=True):
        labels = np.asarray(labels, dtype=np.int64).ravel()
        if relabel and len(labels):
            # dense ids in order of first appearance
            _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
            order = np.argsort(np.argsort(first))
            labels = order[inv.ravel()]
        elif len(labels):
            if labels.min() < 0 or len(np.unique(labels)) != labels.max() + 1:
                raise ParameterError("labels are not dense in [0, n_clusters)")
        self.labels = labels

    @property
    def n(self):
        return len(self.labels)

    @property
    def n_clusters(self):
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def sizes(self):
        return np.bincount(self.labels, minlength=self.n_clusters)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return f"Partition(n={self.n}, clusters={self.n_clusters})"
