"""Turnstile ingestion across logical workers.

Vertices are partitioned over ``W`` workers. Each edge update ``(u, v, delta)``
is routed as two directed messages, ``(u, v, delta)`` to the owner of ``u`` and
``(v, u, delta)`` to the owner of ``v``; each worker then applies its messages
to the sketch rows it owns. Because every contribution is an exact integer,
the gathered sketch is bit-identical for any worker count, stream order or
delivery interleaving.
"""
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ProtocolError, RoutingError
from .graph import UpdateStream
from .seeding import rng_for
from .sketch import SketchRow


class RoundRobin:
    """Vertex ``v`` lives on worker ``v mod W``."""

    def __init__(self, n, workers):
        if workers < 1:
            raise ValueError(f"worker count must be >= 1, got {workers}")
        self.n, self.workers = int(n), int(workers)

    def owner(self, v):
        return np.asarray(v, dtype=np.int64) % self.workers

    def owned(self, w):
        return np.arange(w, self.n, self.workers, dtype=np.int64)

    def local_index(self, v):
        return np.asarray(v, dtype=np.int64) // self.workers


class BlockPartition:
    """Contiguous vertex ranges, loads differing by at most one."""

    def __init__(self, n, workers):
        if workers < 1:
            raise ValueError(f"worker count must be >= 1, got {workers}")
        self.n, self.workers = int(n), int(workers)
        sizes = np.full(workers, n // workers, dtype=np.int64)
        sizes[: n % workers] += 1
        self.starts = np.concatenate([[0], np.cumsum(sizes)])

    def owner(self, v):
        return np.searchsorted(self.starts, np.asarray(v, dtype=np.int64), side="right") - 1

    def owned(self, w):
        return np.arange(self.starts[w], self.starts[w + 1], dtype=np.int64)

    def local_index(self, v):
        v = np.asarray(v, dtype=np.int64)
        return v - self.starts[self.owner(v)]


PARTITIONS = {"round_robin": RoundRobin, "block": BlockPartition}


def route(update, partition):
    """Directed messages for one edge update as ``[(worker, (x, y, delta)), ...]``."""
    u, v, delta = update.u, update.v, update.delta
    if u == v:
        raise RoutingError(f"self-loop ({u}, {v})")
    for x in (u, v):
        if not 0 <= x < partition.n:
            raise RoutingError(f"vertex {x} outside [0, {partition.n})")
    return [(int(partition.owner(u)), (u, v, delta)),
            (int(partition.owner(v)), (v, u, delta))]


class Worker:
    """Owns the sketch rows of ``partition.owned(wid)`` and nothing else."""

    def __init__(self, wid, op, partition):
        self.wid = wid
        self.op = op
        self.partition = partition
        self.vertices = partition.owned(wid)
        self.accum = op.zeros(len(self.vertices))
        self.inbox = []
        self.applied = 0

    def _check_owner(self, xs):
        owners = self.partition.owner(xs)
        if np.any(owners != self.wid):
            bad = int(np.asarray(xs).ravel()[np.flatnonzero(np.ravel(owners != self.wid))[0]])
            raise ProtocolError(f"worker {self.wid} asked to update row {bad} "
                                f"owned by worker {int(self.partition.owner(bad))}")

    def apply(self, x, y, delta):
        self._check_owner(x)
        local = int(self.partition.local_index(x))
        self.op.update(SketchRow(self.accum[local], x), y, delta)
        self.applied += 1

    def apply_batch(self, xs, ys, deltas):
        if len(xs) == 0:
            return
        self._check_owner(xs)
        self.op.update_batch(self.accum, self.partition.local_index(xs), ys, deltas)
        self.applied += len(xs)

    def deliver(self, xs, ys, deltas):
        self.inbox.append((xs, ys, deltas))

    def drain(self, interleave_seed=None):
        """Apply every pending message; optionally in a seeded shuffled order."""
        if not self.inbox:
            return
        xs = np.concatenate([m[0] for m in self.inbox])
        ys = np.concatenate([m[1] for m in self.inbox])
        ds = np.concatenate([m[2] for m in self.inbox])
        self.inbox = []
        if interleave_seed is None:
            self.apply_batch(xs, ys, ds)
            return
        rng = rng_for(interleave_seed, "interleave", self.wid)
        perm = rng.permutation(len(xs))
        # uneven delivery batches
        cuts = np.sort(rng.choice(len(xs) + 1, size=min(8, len(xs) + 1), replace=False))
        for lo, hi in zip(np.r_[0, cuts], np.r_[cuts, len(xs)]):
            idx = perm[lo:hi]
            self.apply_batch(xs[idx], ys[idx], ds[idx])

    def row(self, x):
        self._check_owner(x)
        return self.accum[int(self.partition.local_index(x))]


class StreamEngine:
    """In-process analogue of the distributed sketch-embedding protocol."""

    def __init__(self, op, n=None, workers=1, partition="round_robin",
                 threads=False, interleave_seed=None):
        self.op = op
        self.n = int(op.p if n is None else n)
        if self.n > op.p:
            raise ValueError(f"operator input dimension {op.p} smaller than n={self.n}")
        if isinstance(partition, str):
            partition = PARTITIONS[partition](self.n, workers)
        self.partition = partition
        self.workers = [Worker(w, op, partition) for w in range(partition.workers)]
        self.threads = threads
        self.interleave_seed = interleave_seed
        self.routed = 0

    def ingest(self, stream):
        """Route a batch of edge updates into worker inboxes."""
        if len(stream) == 0:
            return
        u, v, d = stream.u, stream.v, stream.delta
        lo = min(u.min(), v.min())
        hi = max(u.max(), v.max())
        if lo < 0 or hi >= self.n:
            bad = lo if lo < 0 else hi
            raise RoutingError(f"vertex {int(bad)} outside [0, {self.n})")
        xs = np.concatenate([u, v])
        ys = np.concatenate([v, u])
        ds = np.concatenate([d, d])
        owners = self.partition.owner(xs)
        if len(self.workers) == 1:
            self.workers[0].deliver(xs, ys, ds)
        else:
            order = np.argsort(owners, kind="stable")
            bounds = np.searchsorted(owners[order], np.arange(len(self.workers) + 1))
            for w, worker in enumerate(self.workers):
                idx = order[bounds[w]:bounds[w + 1]]
                if len(idx):
                    worker.deliver(xs[idx], ys[idx], ds[idx])
        self.routed += len(stream)

    def flush(self):
        if self.threads and len(self.workers) > 1:
            with ThreadPoolExecutor(max_workers=len(self.workers)) as pool:
                list(pool.map(lambda w: w.drain(self.interleave_seed), self.workers))
        else:
            for w in self.workers:
                w.drain(self.interleave_seed)

    @property
    def updates_applied(self):
        return sum(w.applied for w in self.workers)

    def accumulators(self):
        """Gathered ``n x s`` integer sketch."""
        out = self.op.zeros(self.n)
        for w in self.workers:
            out[w.vertices] = w.accum
        return out

    def embedding(self):
        return self.op.export(self.accumulators())


def run_stream(stream, op, workers=1, n=None, exact=False, **engine_kwargs):
    """Sketch a whole update stream; returns the exported ``n x s`` embedding.

    ``stream`` may be an :class:`UpdateStream` or an iterable of them (chunks).
    With ``exact=True`` the integer accumulators are returned instead.
    """
    engine = StreamEngine(op, n=n, workers=workers, **engine_kwargs)
    chunks = [stream] if isinstance(stream, UpdateStream) else stream
    for chunk in chunks:
        engine.ingest(chunk)
    engine.flush()
    return engine.accumulators() if exact else engine.embedding()


def throughput_bench(stream, op, workers=1, repeats=3):
    """Best-of-``repeats`` wall time for ingesting ``stream`` into a fresh engine."""
    best = float("inf")
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        engine = StreamEngine(op, workers=workers)
        engine.ingest(stream)
        engine.flush()
        best = min(best, time.perf_counter() - t0)
    updates = 2 * len(stream)
    return {
        "kind": op.kind,
        "s": op.s,
        "workers": workers,
        "edges": len(stream),
        "updates": updates,
        "seconds": best,
        "updates_per_sec": updates / best if best > 0 else float("inf"),
        "ns_per_update": 1e9 * best / updates if updates else 0.0,
    }
