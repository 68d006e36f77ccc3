"""Text formats: edge lists, turnstile streams, label files and embeddings.

* edge list: ``u v`` per line, 0-indexed
* stream: ``+ u v`` (insert), ``- u v`` (delete) or ``u v`` (insert)
* labels: ``vertex label`` per line
* embedding: a ``# key=value ...`` header line, then one comma-separated row
  per vertex written with 17 significant digits (exact float round trip)

Lines that are blank or start with ``#`` are skipped by every reader.
"""
import contextlib
import io
import sys

import numpy as np

from .errors import InputFormatError
from .graph import Partition, UpdateStream

STREAM_CHUNK = 1 << 18


@contextlib.contextmanager
def _open(path, mode="r"):
    if path in (None, "-"):
        yield sys.stdout if "w" in mode else sys.stdin
    elif isinstance(path, io.IOBase) or hasattr(path, "read") or hasattr(path, "write"):
        yield path
    else:
        with open(path, mode) as fh:
            yield fh


def write_edge_list(path, stream):
    with _open(path, "w") as fh:
        for u, v in zip(stream.u.tolist(), stream.v.tolist()):
            fh.write(f"{u} {v}\n")


def write_stream(path, stream):
    with _open(path, "w") as fh:
        for u, v, d in zip(stream.u.tolist(), stream.v.tolist(), stream.delta.tolist()):
            sign = "+" if d > 0 else "-"
            for _ in range(abs(d)):
                fh.write(f"{sign} {u} {v}\n")


def _parse_stream_line(line, lineno):
    parts = line.split()
    if len(parts) == 3:
        op, a, b = parts
        if op == "+":
            delta = 1
        elif op == "-":
            delta = -1
        else:
            raise InputFormatError(f"expected '+' or '-', got {op!r}", lineno)
    elif len(parts) == 2:
        a, b = parts
        delta = 1
    else:
        raise InputFormatError(f"expected 'u v' or '+/- u v', got {line.strip()!r}", lineno)
    try:
        u, v = int(a), int(b)
    except ValueError:
        raise InputFormatError(f"non-integer vertex id in {line.strip()!r}", lineno) from None
    if u < 0 or v < 0:
        raise InputFormatError(f"negative vertex id in {line.strip()!r}", lineno)
    if u == v:
        raise InputFormatError(f"self-loop {u} {v}", lineno)
    return u, v, delta


def read_stream(path, chunk_size=STREAM_CHUNK):
    """Yield :class:`UpdateStream` chunks parsed from a stream or edge-list file."""
    with _open(path) as fh:
        us, vs, ds = [], [], []
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            u, v, d = _parse_stream_line(s, lineno)
            us.append(u)
            vs.append(v)
            ds.append(d)
            if len(us) >= chunk_size:
                yield UpdateStream(us, vs, ds)
                us, vs, ds = [], [], []
        if us:
            yield UpdateStream(us, vs, ds)


def read_stream_all(path):
    chunks = list(read_stream(path))
    out = UpdateStream.empty()
    for c in chunks:
        out = out.concat(c)
    return out


def write_labels(path, partition):
    labels = partition.labels if isinstance(partition, Partition) else np.asarray(partition)
    with _open(path, "w") as fh:
        for i, lab in enumerate(labels.tolist()):
            fh.write(f"{i} {lab}\n")


def read_labels(path):
    """Read a ``vertex label`` file; every vertex 0..n-1 must appear exactly once."""
    pairs = {}
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise InputFormatError(f"expected 'vertex label', got {s!r}", lineno)
            try:
                v, lab = int(parts[0]), int(parts[1])
            except ValueError:
                raise InputFormatError(f"non-integer field in {s!r}", lineno) from None
            if v in pairs:
                raise InputFormatError(f"vertex {v} listed twice", lineno)
            pairs[v] = lab
    n = len(pairs)
    if n and (min(pairs) != 0 or max(pairs) != n - 1):
        raise InputFormatError(f"vertex ids must cover 0..{n - 1}")
    return Partition([pairs[i] for i in range(n)])


def _fmt_header(header):
    return " ".join(f"{k}={v}" for k, v in header.items())


def _parse_header(line):
    out = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = _coerce(v)
    return out


def _coerce(v):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def write_embedding(path, values, header):
    values = np.asarray(values, dtype=np.float64)
    with _open(path, "w") as fh:
        fh.write(f"# {_fmt_header(header)}\n")
        for row in values:
            fh.write(",".join(format(x, ".17g") for x in row.tolist()))
            fh.write("\n")


def read_embedding(path):
    """Return ``(values, header)`` from an embedding file."""
    header = {}
    rows = []
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                if not header:
                    header = _parse_header(s)
                continue
            try:
                rows.append([float(x) for x in s.split(",")])
            except ValueError:
                raise InputFormatError(f"non-numeric embedding entry in {s[:40]!r}", lineno) from None
            if len(rows[-1]) != len(rows[0]):
                raise InputFormatError("ragged embedding rows", lineno)
    width = header.get("s", 0) if not rows else len(rows[0])
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), width), header
