"""k-means on vertex embeddings and a dense spectral-embedding baseline."""
import numpy as np

from .errors import ParameterError
from .graph import Partition
from .seeding import rng_for

SPECTRAL_MAX_N = 4096


def _sq_dists(X, centers):
    d = (X * X).sum(1)[:, None] - 2.0 * X @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _plusplus(X, k, rng, local_trials=None):
    """Greedy k-means++: each step keeps the best of several D^2-sampled candidates."""
    n = len(X)
    if local_trials is None:
        local_trials = 2 + int(np.log(k))
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = _sq_dists(X, centers[:1])[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total > 0:
            cand = rng.choice(n, size=local_trials, p=closest / total)
        else:
            cand = rng.integers(n, size=local_trials)
        # potential of each candidate: total cost if it were added
        trial = np.minimum(closest[:, None], _sq_dists(X, X[cand]))
        best = int(trial.sum(0).argmin())
        centers[i] = X[cand[best]]
        closest = trial[:, best]
    return centers


def _one_hot(labels, k):
    out = np.zeros((len(labels), k))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def _objective(X, centers, labels):
    return float(((X - centers[labels]) ** 2).sum())


def _lloyd(X, k, rng, max_iters, history):
    centers = _plusplus(X, k, rng)
    labels = None
    prev = np.inf
    for _ in range(max_iters):
        # argmin breaks ties toward the lowest centroid index
        new_labels = _sq_dists(X, centers).argmin(1)
        obj = _objective(X, centers, new_labels)
        assert obj <= prev * (1 + 1e-9) + 1e-9, "k-means objective increased"
        history.append(obj)
        prev = obj
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        sums = _one_hot(labels, k).T @ X
        nonempty = counts > 0
        centers[nonempty] = sums[nonempty] / counts[nonempty, None]
        for e in np.flatnonzero(~nonempty):
            # reseed at the point farthest from its own centroid
            far = ((X - centers[labels]) ** 2).sum(1)
            idx = int(far.argmax())
            if far[idx] == 0:
                break
            centers[e] = X[idx]
            labels[idx] = e
        obj = _objective(X, centers, labels)
        assert obj <= prev * (1 + 1e-9) + 1e-9, "k-means objective increased"
        history.append(obj)
        prev = obj
    labels = _sq_dists(X, centers).argmin(1)
    return labels, centers, _objective(X, centers, labels)


def kmeans(emb, k, seed=0, max_iters=100, n_init=10, return_history=False):
    """Lloyd's k-means from k-means++ seeding; best of ``n_init`` restarts.

    Deterministic given ``seed``; labels are returned as a dense Partition.
    """
    X = np.asarray(emb, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k > n:
        raise ParameterError(f"k={k} exceeds the number of points {n}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("embedding has non-finite entries")
    best = None
    histories = []
    for run in range(max(1, n_init)):
        history = []
        labels, _, obj = _lloyd(X, k, rng_for(seed, "kmeans", run), max_iters, history)
        histories.append(history)
        if best is None or obj < best[1]:
            best = (labels, obj)
    part = Partition(best[0])
    if return_history:
        return part, histories
    return part


def adjacency_matrix(edges, n):
    """Dense symmetric adjacency built from a resident edge stream (weights summed)."""
    A = np.zeros((n, n))
    if len(edges):
        np.add.at(A, (edges.u, edges.v), edges.delta)
        np.add.at(A, (edges.v, edges.u), edges.delta)
    return A


def spectral_embed(edges, k, n=None, return_values=False):
    """Rows of the top-``k`` eigenvectors of the adjacency matrix.

    Uses a dense symmetric eigensolver, so ``n`` is capped at 4096. Each
    eigenpair is checked against ``||A v - lam v|| <= 1e-8 ||A||``.
    """
    if n is None:
        n = edges.max_vertex() + 1
    if n > SPECTRAL_MAX_N:
        raise ParameterError(f"n={n} exceeds dense eigensolver cap {SPECTRAL_MAX_N}")
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in [1, {n}], got {k}")
    A = adjacency_matrix(edges, n)
    vals, vecs = np.linalg.eigh(A)
    norm = float(np.abs(vals).max())  # spectral norm of a symmetric matrix
    order = np.argsort(vals)[::-1][:k]
    vals, V = vals[order], vecs[:, order]
    resid = np.linalg.norm(A @ V - V * vals, axis=0)
    if np.any(resid > 1e-8 * norm):
        raise ArithmeticError(f"eigenpair residual {resid.max():.3e} too large")
    if return_values:
        return V, vals
    return V
