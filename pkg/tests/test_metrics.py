import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_accuracy, brute_pairwise_pr, set_partitions
from sketchembed.errors import InputFormatError, ParameterError
from sketchembed.graph import Partition
from sketchembed.metrics import (MetricsReport, accuracy, contingency, evaluate, pair_counts,
                                 pairwise_pr)


def test_identity():
    labels = [0, 0, 1, 1, 2]
    assert pairwise_pr(labels, labels) == (1.0, 1.0)
    assert accuracy(labels, labels) == 1.0


def test_three_vertex_example():
    pp, pr = pairwise_pr([0, 0, 0], [0, 0, 1])
    assert pp == pytest.approx(1 / 3)
    assert pr == 1.0


def test_all_singletons():
    assert pairwise_pr([0, 1, 2, 3], [0, 0, 1, 1]) == (1.0, 0.0)


def test_accuracy_examples():
    assert accuracy([0, 1, 0, 1], [0, 0, 1, 1]) == 0.5
    assert accuracy([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5
    assert accuracy([5, 5, 2, 2], [0, 0, 1, 1]) == 1.0


def test_length_mismatch():
    with pytest.raises(InputFormatError):
        pairwise_pr([0, 1, 1], [0, 1])
    with pytest.raises(InputFormatError):
        accuracy([0, 1, 1], [0, 1])


def test_too_few_vertices():
    with pytest.raises(ParameterError):
        pairwise_pr([0], [0])


def test_contingency_table():
    np.testing.assert_array_equal(contingency([0, 0, 1, 1, 1], [1, 0, 0, 0, 1]),
                                  [[1, 1], [2, 1]])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=2, max_size=12))
def test_contingency_matches_brute_force(pairs):
    pred = [a for a, _ in pairs]
    truth = [b for _, b in pairs]
    assert pairwise_pr(pred, truth) == pytest.approx(brute_pairwise_pr(pred, truth), abs=0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=2, max_size=30),
       st.permutations(range(6)), st.permutations(range(6)))
def test_relabel_invariance_and_symmetry(pairs, p1, p2):
    pred = np.array([a for a, _ in pairs])
    truth = np.array([b for _, b in pairs])
    pp, pr = pairwise_pr(pred, truth)
    assert pairwise_pr(np.take(p1, pred), np.take(p2, truth)) == (pp, pr)
    assert pairwise_pr(truth, pred) == (pr, pp)
    assert accuracy(np.take(p1, pred), np.take(p2, truth)) == accuracy(pred, truth)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=9), st.integers(1, 4))
def test_accuracy_matches_enumeration(truth, k):
    rng = np.random.default_rng(len(truth) * 7 + k)
    pred = rng.integers(0, k, len(truth))
    assert accuracy(pred, truth) == pytest.approx(brute_accuracy(pred, truth))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=40))
def test_single_cluster_accuracy_bound(truth):
    truth = np.array(truth)
    acc = accuracy(np.zeros(len(truth), dtype=int), truth)
    assert acc >= np.bincount(truth).max() / len(truth) - 1e-12


def test_batched_pair_counts_match_single():
    parts = set_partitions(5)
    tp, pp, tt = pair_counts(parts[:, None, :], parts[None, :, :])
    for i in (0, 7, 51):
        for j in (3, 20, 51):
            assert (tp[i, j], pp[i, j], tt[i, j]) == pair_counts(parts[i], parts[j])


def test_metrics_report_mean():
    rep = MetricsReport.from_trials([(1.0, 0.5, 0.8), (0.5, 0.5, 0.6)])
    assert (rep.pp, rep.pr, rep.acc, rep.trials) == (0.75, 0.5, pytest.approx(0.7), 2)
    assert evaluate(Partition([0, 0, 1]), Partition([0, 0, 1])).to_dict()["pp"] == 1.0
