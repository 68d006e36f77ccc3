import numpy as np
import pytest

from sketchembed.engine import (BlockPartition, RoundRobin, StreamEngine, Worker, route,
                                run_stream, throughput_bench)
from sketchembed.errors import ParameterError, ProtocolError, RoutingError
from sketchembed.graph import EdgeUpdate, UpdateStream
from sketchembed.sketch import make_operator


def random_stream(n, m, seed):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, n, m)
    v = (u + rng.integers(1, n, m)) % n
    return UpdateStream(u, v)


def test_route_single_worker():
    msgs = route(EdgeUpdate(3, 9), RoundRobin(16, 1))
    assert [w for w, _ in msgs] == [0, 0]


def test_route_four_workers():
    msgs = route(EdgeUpdate(5, 10, -1), RoundRobin(16, 4))
    assert msgs == [(1, (5, 10, -1)), (2, (10, 5, -1))]


def test_route_rejects_bad_updates():
    with pytest.raises(ParameterError):
        EdgeUpdate(2, 2)
    with pytest.raises(RoutingError):
        route(EdgeUpdate(2, 20), RoundRobin(16, 2))


@pytest.mark.parametrize("cls", [RoundRobin, BlockPartition])
@pytest.mark.parametrize("n, w", [(10, 3), (7, 7), (100, 8), (5, 1)])
def test_partition_balance(cls, n, w):
    pm = cls(n, w)
    owned = [pm.owned(i) for i in range(w)]
    allv = np.concatenate(owned)
    assert sorted(allv.tolist()) == list(range(n))
    loads = [len(o) for o in owned]
    assert max(loads) - min(loads) <= 1
    for i, o in enumerate(owned):
        assert np.all(pm.owner(o) == i)
        assert pm.local_index(o).tolist() == list(range(len(o)))


def test_worker_rejects_foreign_rows():
    op = make_operator("cst", 8, 4)
    w = Worker(1, op, RoundRobin(8, 2))
    w.apply(3, 0, 1)
    with pytest.raises(ProtocolError):
        w.apply(2, 0, 1)
    with pytest.raises(ProtocolError):
        w.apply_batch(np.array([1, 4]), np.array([0, 0]), np.array([1, 1]))


def test_insert_then_delete_restores_rows():
    op = make_operator("fwht", 8, 4, seed=1)
    eng = StreamEngine(op, workers=2)
    eng.ingest(UpdateStream([0, 1], [1, 2]))
    eng.flush()
    before = eng.accumulators()
    eng.ingest(UpdateStream([5], [6], [1]))
    eng.ingest(UpdateStream([5], [6], [-1]))
    eng.flush()
    np.testing.assert_array_equal(eng.accumulators(), before)


def test_empty_stream_gives_zero_rows():
    op = make_operator("cst", 10, 3)
    assert not run_stream(UpdateStream.empty(), op).any()


@pytest.mark.parametrize("kind", ["cst", "fwht"])
def test_twenty_edges_multi_worker_matches_sequential(kind):
    stream = random_stream(8, 20, 0)
    op = make_operator(kind, 8, 4, seed=7)
    # oracle: one row per vertex, updated one message at a time
    rows = [op.new_row(x) for x in range(8)]
    for e in stream:
        op.update(rows[e.u], e.v, e.delta)
        op.update(rows[e.v], e.u, e.delta)
    expected = np.stack([r.accum for r in rows])
    for w in (1, 2, 3, 4, 8):
        np.testing.assert_array_equal(run_stream(stream, op, workers=w, exact=True), expected)


@pytest.mark.parametrize("kind", ["cst", "fwht"])
def test_worker_count_and_order_invariance(kind):
    stream = random_stream(60, 800, 1)
    op = make_operator(kind, 60, 16, seed=3)
    ref = run_stream(stream, op, exact=True)
    for w in (2, 4, 8):
        np.testing.assert_array_equal(run_stream(stream, op, workers=w, exact=True), ref)
        np.testing.assert_array_equal(
            run_stream(stream, op, workers=w, exact=True, partition="block"), ref)
    for seed in range(3):
        np.testing.assert_array_equal(run_stream(stream.shuffled(seed), op, exact=True), ref)
        np.testing.assert_array_equal(
            run_stream(stream, op, workers=4, exact=True, interleave_seed=seed), ref)
    np.testing.assert_array_equal(
        run_stream(stream, op, workers=4, exact=True, threads=True), ref)


def test_chunked_ingest_matches_whole():
    stream = random_stream(30, 500, 2)
    op = make_operator("cst", 30, 8, seed=1)
    chunks = [stream[i:i + 37] for i in range(0, len(stream), 37)]
    np.testing.assert_array_equal(run_stream(chunks, op, workers=3, exact=True),
                                  run_stream(stream, op, exact=True))


@pytest.mark.parametrize("kind", ["cst", "fwht"])
def test_fully_dynamic_equals_survivors(kind):
    n = 200
    ins = random_stream(n, 1000, 5)
    rng = np.random.default_rng(6)
    dead = rng.choice(1000, 500, replace=False)
    alive = np.setdiff1d(np.arange(1000), dead)
    dynamic = ins.concat(ins[dead].negated()).shuffled(9)
    op = make_operator(kind, n, 12, seed=2)
    got = run_stream(dynamic, op, workers=4, exact=True)
    # oracle: recompute the surviving edge set from scratch
    np.testing.assert_array_equal(got, run_stream(ins[alive], op, exact=True))
    np.testing.assert_array_equal(got, run_stream(dynamic.net_edges(), op, exact=True))


def test_work_bound():
    stream = random_stream(40, 321, 3)
    eng = StreamEngine(make_operator("cst", 40, 4), workers=3)
    eng.ingest(stream)
    eng.flush()
    assert eng.updates_applied == 2 * len(stream)


def test_out_of_range_vertex():
    eng = StreamEngine(make_operator("cst", 10, 4), workers=2)
    with pytest.raises(RoutingError):
        eng.ingest(UpdateStream([1], [10]))


def test_throughput_report():
    op = make_operator("cst", 100, 8)
    rep = throughput_bench(UpdateStream.empty(), op)
    assert rep["edges"] == 0 and rep["updates"] == 0 and rep["seconds"] >= 0
    rep = throughput_bench(random_stream(100, 1000, 0), op, workers=2, repeats=1)
    assert rep["updates"] == 2000 and rep["updates_per_sec"] > 0
