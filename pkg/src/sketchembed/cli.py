"""Command-line front end: ``sketchembed {gen,embed,cluster,eval,sweep,bench}``.

All randomness flows from ``--seed``; each stage derives its own sub-seed by
role (``sbm``, ``operator``, ``kmeans``), so ``gen | embed | cluster | eval``
reproduces :func:`sketchembed.experiments.run_trial` exactly.

Exit codes: 0 success, 2 parameter error, 3 input-format error,
4 internal invariant violation.
"""
import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields

from . import io as sio
from .clustering import kmeans
from .engine import StreamEngine, throughput_bench
from .errors import InputFormatError, ParameterError, ProtocolError, RoutingError
from .experiments import (TREND_FIELDS, TrendConfig, default_grid, sweep,
                          trend_experiments)
from .graph import UpdateStream
from .metrics import evaluate
from .sbm import equal_sizes, flat_spec, graphchallenge_spec, sample_sbm, two_level_spec
from .seeding import derive_seed, rng_for
from .sketch import KINDS, dimension_for, make_operator

log = logging.getLogger("sketchembed")

EXIT_OK, EXIT_PARAM, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    operator: str = None
    epsilon: float = 0.1
    c_const: float = 1.0
    seed: int = 0
    workers: int = 1
    n: int = None
    c: int = None
    ratio: float = 50.0
    row_sum: float = 0.5
    rho_in: float = None
    rho_out: float = None
    graphchallenge: bool = False
    k: int = None
    threshold: str = "0.9,0.95,0.99"
    trials: int = 10
    grid: str = None
    experiment: str = "single"
    full_scale: bool = False
    edges: str = "1000000,2000000,4000000"
    s: int = 128
    repeats: int = 3
    out: str = None

    def to_text(self):
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self)
                       if getattr(self, f.name) is not None)

    @classmethod
    def coerce(cls, key, raw):
        types = {f.name: f.type for f in fields(cls)}
        if key not in types:
            raise ParameterError(f"unknown config key {key!r}")
        if raw is None or not isinstance(raw, str):
            return raw
        t = types[key]
        if t is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if t is int:
            return int(raw)
        if t is float:
            return float(raw)
        return raw.strip()


def load_config_file(path):
    """Parse ``key = value`` lines ('#' comments allowed)."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise InputFormatError(f"expected 'key = value', got {s!r}", lineno)
            k, v = (x.strip() for x in s.split("=", 1))
            k = k.replace("-", "_")
            try:
                out[k] = ExperimentConfig.coerce(k, v)
            except ParameterError as exc:
                raise InputFormatError(str(exc), lineno) from None
            except ValueError:
                raise InputFormatError(f"bad value for {k}: {v!r}", lineno) from None
    return out


def resolve_config(args):
    """Defaults, then config file, then explicit flags."""
    values = asdict(ExperimentConfig())
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return ExperimentConfig(**values)


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def build_spec(cfg, seed_tag="sbm"):
    """SBM parameters from a config; the sample seed is derived from ``--seed``."""
    seed = derive_seed(cfg.seed, seed_tag)
    if cfg.n is None:
        raise ParameterError("--n is required")
    if cfg.graphchallenge:
        spec = graphchallenge_spec(cfg.n, seed=derive_seed(cfg.seed, "graphchallenge"))
        return spec.with_seed(seed)
    if cfg.c is None:
        raise ParameterError("--c is required")
    if cfg.rho_in is not None or cfg.rho_out is not None:
        if cfg.rho_in is None or cfg.rho_out is None:
            raise ParameterError("--rho-in and --rho-out must be given together")
        return two_level_spec(equal_sizes(cfg.n, cfg.c), cfg.rho_in, cfg.rho_out, seed)
    return flat_spec(cfg.n, cfg.c, cfg.ratio, cfg.row_sum, seed)


def cmd_gen(cfg, truth_path=None):
    spec = build_spec(cfg)
    stream, truth = sample_sbm(spec)
    out = cfg.out or "graph.edges"
    truth_path = truth_path or os.path.splitext(out)[0] + ".truth"
    sio.write_edge_list(out, stream)
    sio.write_labels(truth_path, truth)
    log.info("wrote %d edges to %s, labels to %s", len(stream), out, truth_path)
    return spec, stream, truth


def cmd_embed(cfg, source):
    if cfg.operator not in KINDS:
        raise ParameterError(f"--operator must be one of {KINDS}")
    chunks = sio.read_stream(source)
    n = cfg.n
    if n is None:
        # need the vertex count before sizing the operator
        stream = sio.read_stream_all(source)
        n = stream.max_vertex() + 1
        chunks = [stream]
    if n < 2:
        raise ParameterError("need at least 2 vertices; pass --n")
    s = dimension_for(cfg.epsilon, n, cfg.c_const)
    op_seed = derive_seed(cfg.seed, "operator")
    op = make_operator(cfg.operator, n, s, op_seed)
    engine = StreamEngine(op, n=n, workers=cfg.workers)
    routed = 0
    for chunk in chunks:
        engine.ingest(chunk)
        routed += len(chunk)
        engine.flush()
    if engine.updates_applied != 2 * routed:
        raise ProtocolError(f"applied {engine.updates_applied} row updates for {routed} edges")
    emb = engine.embedding()
    header = {"kind": cfg.operator, "seed": cfg.seed, "operator_seed": op_seed,
              "epsilon": cfg.epsilon, "c_const": cfg.c_const, "s": s, "n": n}
    if hasattr(op, "p_pad"):
        header["p_pad"] = op.p_pad
    sio.write_embedding(cfg.out or "-", emb, header)
    return emb, header


def cmd_cluster(cfg, embedding_path):
    values, header = sio.read_embedding(embedding_path)
    k = cfg.k or cfg.c
    if k is None:
        raise ParameterError("--k is required")
    pred = kmeans(values, k, seed=derive_seed(cfg.seed, "kmeans"))
    sio.write_labels(cfg.out or "-", pred)
    return pred


def cmd_eval(cfg, pred_path, truth_path):
    pred = sio.read_labels(pred_path)
    truth = sio.read_labels(truth_path)
    if pred.n != truth.n:
        raise InputFormatError(f"length mismatch: {pred.n} predicted vs {truth.n} truth labels")
    report = evaluate(pred, truth)
    text = json.dumps(report.to_dict(), indent=2)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return report


def _write_csv(path, fieldnames, rows):
    with sio._open(path, "w") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in fieldnames})


SWEEP_FIELDS = ["kind", "threshold", "max_viable_eps"]
EVAL_FIELDS = ["kind", "epsilon", "pp", "pr", "acc", "trials"]


def cmd_sweep(cfg):
    grid = _floats(cfg.grid) if cfg.grid else default_grid()
    thresholds = _floats(cfg.threshold)
    kinds = list(KINDS) if cfg.operator == "both" else [cfg.operator]
    out = cfg.out
    if cfg.experiment != "single":
        which = ("ratio", "communities", "vertices") if cfg.experiment == "all" else (cfg.experiment,)
        tc_kw = dict(kinds=tuple(kinds), thresholds=tuple(thresholds), eps_grid=tuple(grid),
                     trials=cfg.trials, seed=cfg.seed, c_const=cfg.c_const)
        # base graph for the sweeps that hold n or c fixed
        tc_kw.update({k: getattr(cfg, k) for k in ("n", "c") if getattr(cfg, k) is not None})
        tc_kw.update(ratio=cfg.ratio, row_sum=cfg.row_sum)
        tc = TrendConfig.full_scale(**tc_kw) if cfg.full_scale else TrendConfig(**tc_kw)
        tables = trend_experiments(tc, which)
        outdir = out or "."
        os.makedirs(outdir, exist_ok=True)
        for name, rows in tables.items():
            _write_csv(os.path.join(outdir, f"trend_{name}.csv"), TREND_FIELDS, rows)
        return tables
    spec = build_spec(cfg)
    rows, evals = [], []
    for kind in kinds:
        res = sweep(spec, kind, grid, thresholds, cfg.trials, cfg.seed, cfg.c_const)
        for thr in thresholds:
            rows.append(dict(kind=kind, threshold=thr, max_viable_eps=res[thr].max_viable_eps))
        for eps, rep in res[thresholds[0]].reports.items():
            evals.append(dict(kind=kind, epsilon=eps, pp=rep.pp, pr=rep.pr, acc=rep.acc,
                              trials=rep.trials))
    _write_csv(out or "-", SWEEP_FIELDS, rows)
    if out:
        _write_csv(os.path.splitext(out)[0] + "_evals.csv", EVAL_FIELDS, evals)
    return rows


BENCH_FIELDS = ["kind", "s", "workers", "edges", "updates", "seconds", "updates_per_sec",
                "ns_per_update"]


def random_stream(n, m, seed):
    """``m`` uniformly random non-loop edges on ``n`` vertices."""
    rng = rng_for(seed, "bench-stream")
    u = rng.integers(0, n, size=m)
    v = (u + rng.integers(1, n, size=m)) % n
    return UpdateStream(u, v)


def cmd_bench(cfg):
    n = cfg.n or (1 << 16)
    kinds = list(KINDS) if cfg.operator == "both" else [cfg.operator]
    rows = []
    for kind in kinds:
        op = make_operator(kind, n, cfg.s, derive_seed(cfg.seed, "operator"))
        for m in (int(x) for x in _floats(cfg.edges)):
            stream = random_stream(n, m, derive_seed(cfg.seed, "bench", m))
            rows.append(throughput_bench(stream, op, cfg.workers, cfg.repeats))
    _write_csv(cfg.out or "-", BENCH_FIELDS, rows)
    return rows


def _add_common(p, *names):
    opts = {
        "operator": dict(choices=list(KINDS) + ["both"], help="sketch operator"),
        "epsilon": dict(type=float, help="target distortion in (0, 1)"),
        "c_const": dict(type=float, help="constant in s = c * eps^-2 * ln n"),
        "workers": dict(type=int, help="logical worker count"),
        "seed": dict(type=int, help="master seed"),
        "threshold": dict(help="metric threshold(s), comma separated"),
        "trials": dict(type=int, help="independent trials per epsilon"),
        "grid": dict(help="descending epsilon grid, comma separated"),
        "out": dict(help="output path ('-' for stdout)"),
        "n": dict(type=int, help="vertex count"),
        "c": dict(type=int, help="community count"),
        "k": dict(type=int, help="cluster count"),
        "ratio": dict(type=float, help="rho_in / rho_out"),
        "row_sum": dict(type=float, help="row sum of the probability matrix"),
        "rho_in": dict(type=float, help="within-block probability"),
        "rho_out": dict(type=float, help="between-block probability"),
        "s": dict(type=int, help="sketch dimension"),
        "edges": dict(help="edge counts, comma separated"),
        "repeats": dict(type=int, help="timing repeats (best is kept)"),
        "experiment": dict(choices=["single", "ratio", "communities", "vertices", "all"]),
    }
    for name in names:
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, **opts[name])
    p.add_argument("--config", help="key = value config file; flags override it")


def build_parser():
    parser = argparse.ArgumentParser(prog="sketchembed", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample an SBM edge list and truth labels")
    _add_common(p, "n", "c", "ratio", "row_sum", "rho_in", "rho_out", "seed", "out")
    p.add_argument("--graphchallenge", action="store_const", const=True, default=None)
    p.add_argument("--truth", help="truth label path (default: <out>.truth)")

    p = sub.add_parser("embed", help="sketch an update stream")
    p.add_argument("input", nargs="?", default="-", help="stream file, '-' for stdin")
    _add_common(p, "operator", "epsilon", "c_const", "workers", "seed", "n", "out")

    p = sub.add_parser("cluster", help="k-means on an embedding file")
    p.add_argument("embedding")
    _add_common(p, "k", "seed", "out")

    p = sub.add_parser("eval", help="pairwise precision/recall and accuracy as JSON")
    p.add_argument("pred")
    p.add_argument("truth")
    _add_common(p, "out")

    p = sub.add_parser("sweep", help="maximum viable epsilon sweeps")
    _add_common(p, "operator", "c_const", "seed", "threshold", "trials", "grid", "out",
                "n", "c", "ratio", "row_sum", "rho_in", "rho_out", "experiment")
    p.add_argument("--graphchallenge", action="store_const", const=True, default=None)
    p.add_argument("--full-scale", dest="full_scale", action="store_const", const=True,
                   default=None)

    p = sub.add_parser("bench", help="ingestion throughput")
    _add_common(p, "operator", "s", "n", "edges", "workers", "repeats", "seed", "out")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "gen":
            cmd_gen(cfg, args.truth)
        elif args.command == "embed":
            cfg.operator = cfg.operator or "cst"
            cmd_embed(cfg, args.input)
        elif args.command == "cluster":
            cmd_cluster(cfg, args.embedding)
        elif args.command == "eval":
            cmd_eval(cfg, args.pred, args.truth)
        elif args.command == "sweep":
            cfg.operator = cfg.operator or "both"
            cmd_sweep(cfg)
        elif args.command == "bench":
            cfg.operator = cfg.operator or "both"
            cmd_bench(cfg)
    except (InputFormatError, RoutingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (ProtocolError, AssertionError, ArithmeticError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except IndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
