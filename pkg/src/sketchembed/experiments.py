"""End-to-end sketch-cluster-evaluate pipeline and maximum-viable-epsilon sweeps."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .clustering import kmeans, spectral_embed
from .engine import run_stream
from .errors import ParameterError
from .metrics import MetricsReport, accuracy, pairwise_pr
from .sbm import flat_spec, sample_sbm
from .seeding import derive_seed
from .sketch import dimension_for, make_operator

DEFAULT_THRESHOLDS = (0.90, 0.95, 0.99)


def default_grid(hi=0.5, lo=0.01, points=12):
    """Descending geometric grid of epsilon values."""
    return [float(x) for x in np.geomspace(hi, lo, points)]


def trend_grid():
    """Grid for the trend sweeps: reaches higher than the default so easy graphs
    do not all tie at the top, and stops at 0.05 where ``s`` already exceeds ``n``."""
    return default_grid(0.95, 0.05, 17)


def sketch_embedding(stream, n, kind, epsilon, seed, c_const=1.0, workers=1):
    """Embed the vertices of ``stream`` with an operator sized for ``epsilon``."""
    s = dimension_for(epsilon, n, c_const)
    op = make_operator(kind, n, s, derive_seed(seed, "operator"))
    return run_stream(stream, op, workers=workers, n=n), op


def sample_trial_graph(spec, seed):
    return sample_sbm(spec.with_seed(derive_seed(seed, "sbm")))


def run_trial(spec, kind, epsilon, seed, c_const=1.0, k=None, sample=None, workers=1):
    """One pipeline run: sample SBM, sketch, k-means at ``k`` (default ``spec.c``)."""
    stream, truth = sample if sample is not None else sample_trial_graph(spec, seed)
    emb, _ = sketch_embedding(stream, spec.n, kind, epsilon, seed, c_const, workers)
    pred = kmeans(emb, k or spec.c, seed=derive_seed(seed, "kmeans"))
    pp, pr = pairwise_pr(pred, truth)
    return pp, pr, accuracy(pred, truth), pred


def spectral_trial(spec, seed, k=None, sample=None):
    """Same graph as :func:`run_trial`, clustered from the spectral embedding."""
    stream, truth = sample if sample is not None else sample_trial_graph(spec, seed)
    k = k or spec.c
    V = spectral_embed(stream.net_edges(), k, n=spec.n)
    return kmeans(V, k, seed=derive_seed(seed, "kmeans")), truth


def trial_seed(master, t):
    return derive_seed(master, "trial", t)


def evaluate_epsilon(spec, kind, epsilon, trials=10, seed=0, c_const=1.0, samples=None):
    """Mean metrics over ``trials`` independent pipelines at one epsilon."""
    values = []
    for t in range(trials):
        ts = trial_seed(seed, t)
        sample = samples.get(t) if samples is not None else None
        if samples is not None and sample is None:
            sample = samples[t] = sample_trial_graph(spec, ts)
        pp, pr, acc, _ = run_trial(spec, kind, epsilon, ts, c_const, sample=sample)
        values.append((pp, pr, acc))
    return MetricsReport.from_trials(values)


@dataclass
class SweepResult:
    eps_grid: list
    threshold: float
    max_viable_eps: float = None
    reports: dict = field(default_factory=dict)

    def passed(self, eps):
        r = self.reports.get(eps)
        return r is not None and min(r.pp, r.pr) >= self.threshold


def sweep(spec, kind, eps_grid, thresholds=DEFAULT_THRESHOLDS, trials=10, seed=0,
          c_const=1.0):
    """Maximum viable epsilon for several thresholds sharing the same evaluations.

    The grid is scanned from its largest value down; a threshold is resolved at
    the first epsilon whose mean precision and mean recall both reach it.
    """
    grid = list(eps_grid)
    if any(a <= b for a, b in zip(grid, grid[1:])):
        raise ParameterError("eps_grid must be strictly descending")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    results = {thr: SweepResult(grid, thr) for thr in thresholds}
    samples = {}
    reports = {}
    for eps in grid:
        open_ = [r for r in results.values() if r.max_viable_eps is None]
        if not open_:
            break
        rep = evaluate_epsilon(spec, kind, eps, trials, seed, c_const, samples)
        reports[eps] = rep
        for r in open_:
            r.reports = reports
            if min(rep.pp, rep.pr) >= r.threshold:
                r.max_viable_eps = eps
    for r in results.values():
        r.reports = reports
    return results


def max_viable_epsilon(spec, kind, eps_grid, threshold=0.9, trials=10, seed=0, c_const=1.0):
    return sweep(spec, kind, eps_grid, (threshold,), trials, seed, c_const)[threshold]


@dataclass
class TrendConfig:
    n: int = 1024
    c: int = 8
    ratio: float = 50.0
    row_sum: float = 0.5
    ratios: tuple = (10, 50, 250, 1000)
    communities: tuple = (2, 4, 8, 16)
    vertices: tuple = (512, 1024, 2048, 4096)
    kinds: tuple = ("cst", "fwht")
    thresholds: tuple = DEFAULT_THRESHOLDS
    eps_grid: tuple = tuple(trend_grid())
    trials: int = 10
    seed: int = 0
    c_const: float = 1.0

    @classmethod
    def full_scale(cls, **kw):
        """Larger sizes: base n=4096, c=16; c up to 32; n up to 8096."""
        base = dict(n=4096, c=16, communities=(2, 4, 8, 16, 32),
                    vertices=(512, 1024, 2048, 4096, 8096))
        base.update(kw)
        return cls(**base)


TREND_FIELDS = ["experiment", "param", "value", "kind", "threshold", "max_viable_eps"]


def _trend_rows(name, param, values, make_spec, cfg, progress):
    rows = []
    for value in values:
        spec = make_spec(value)
        for kind in cfg.kinds:
            seed = derive_seed(cfg.seed, name, value)
            res = sweep(spec, kind, cfg.eps_grid, cfg.thresholds, cfg.trials, seed, cfg.c_const)
            for thr in cfg.thresholds:
                row = dict(experiment=name, param=param, value=value, kind=kind,
                           threshold=thr, max_viable_eps=res[thr].max_viable_eps)
                rows.append(row)
                if progress:
                    progress(row)
    return rows


def trend_experiments(cfg=None, which=("ratio", "communities", "vertices"), progress=None):
    """Maximum viable epsilon as the ratio, community count and vertex count vary.

    Returns ``{experiment: [row, ...]}`` with rows keyed by :data:`TREND_FIELDS`.
    """
    cfg = cfg or TrendConfig()
    out = {}
    if "ratio" in which:
        out["ratio"] = _trend_rows(
            "ratio", "rho_in/rho_out", cfg.ratios,
            lambda r: flat_spec(cfg.n, cfg.c, r, cfg.row_sum), cfg, progress)
    if "communities" in which:
        out["communities"] = _trend_rows(
            "communities", "c", cfg.communities,
            lambda c: flat_spec(cfg.n, c, cfg.ratio, cfg.row_sum), cfg, progress)
    if "vertices" in which:
        out["vertices"] = _trend_rows(
            "vertices", "n", cfg.vertices,
            lambda n: flat_spec(n, cfg.c, cfg.ratio, cfg.row_sum), cfg, progress)
    return out


def series(rows, kind, threshold):
    """``(values, max_viable_eps)`` for one operator/threshold; failures count as 0."""
    sel = [r for r in rows if r["kind"] == kind and r["threshold"] == threshold]
    xs = [r["value"] for r in sel]
    ys = [0.0 if r["max_viable_eps"] is None else r["max_viable_eps"] for r in sel]
    return xs, ys


def trend_sign(xs, ys):
    """Spearman correlation of a series; 0 for a constant series."""
    if len(set(ys)) < 2:
        return 0.0
    rho = spearmanr(xs, ys).statistic
    return 0.0 if math.isnan(rho) else float(rho)


def grid_step_agreement(rows, grid):
    """Fraction of (value, threshold) points where CST and FWHT differ by <= 1 grid step."""
    pos = {float(e): i for i, e in enumerate(grid)}
    pos[None] = len(grid)
    by_key = {}
    for r in rows:
        eps = None if r["max_viable_eps"] is None else float(r["max_viable_eps"])
        by_key.setdefault((r["value"], r["threshold"]), {})[r["kind"]] = pos[eps]
    pairs = [v for v in by_key.values() if "cst" in v and "fwht" in v]
    if not pairs:
        return float("nan")
    return sum(abs(v["cst"] - v["fwht"]) <= 1 for v in pairs) / len(pairs)
