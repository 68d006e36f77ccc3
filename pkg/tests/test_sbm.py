import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchembed.errors import ParameterError
from sketchembed.sbm import (SbmSpec, flat_prob_matrix, flat_spec, graphchallenge_spec,
                             sample_sbm, two_level_spec)


def test_flat_prob_single_block():
    assert flat_prob_matrix(1, 7.0, 0.5).tolist() == [[0.5]]


def test_flat_prob_c16_ratio50():
    # rho_in = 50 rho_out and rho_in + 15 rho_out = 0.5  =>  rho_out = 0.5 / 65
    P = flat_prob_matrix(16, 50, 0.5)
    assert P[0, 1] == pytest.approx(0.5 / 65, rel=1e-12)
    assert P[0, 1] == pytest.approx(0.0076923, abs=1e-7)
    assert P[3, 3] == pytest.approx(0.3846154, abs=1e-7)
    np.testing.assert_allclose(P.sum(1), 0.5)


def test_flat_prob_ratio_one_is_constant():
    np.testing.assert_array_equal(flat_prob_matrix(2, 1, 0.5), np.full((2, 2), 0.25))


@pytest.mark.parametrize("c, ratio, row_sum", [(0, 2, 0.5), (2, -1, 0.5), (2, 0, 0.5)])
def test_flat_prob_rejects(c, ratio, row_sum):
    with pytest.raises(ParameterError):
        flat_prob_matrix(c, ratio, row_sum)


def test_spec_validation():
    with pytest.raises(ParameterError):
        SbmSpec(2, [3, 3], [[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(ParameterError):
        SbmSpec(2, [3], [[0.5, 0.1], [0.1, 0.5]])
    with pytest.raises(ParameterError):
        SbmSpec(1, [3], [[1.5]])


def test_degenerate_two_triangles():
    spec = two_level_spec([3, 3], 1.0, 0.0, seed=4)
    stream, truth = sample_sbm(spec)
    assert len(stream) == 6
    edges = {tuple(sorted(e)) for e in zip(stream.u.tolist(), stream.v.tolist())}
    assert edges == {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}
    assert truth.labels.tolist() == [0, 0, 0, 1, 1, 1]


def test_expected_edge_count_formula():
    spec = two_level_spec([100, 100], 0.4, 0.01)
    assert spec.expected_edges() == pytest.approx(2 * math.comb(100, 2) * 0.4 + 100 * 100 * 0.01)
    assert spec.expected_edges() == pytest.approx(4060)


@pytest.mark.parametrize("seed", range(5))
def test_edge_count_within_five_sigma(seed):
    spec = two_level_spec([100, 100], 0.4, 0.01, seed=seed)
    stream, _ = sample_sbm(spec)
    assert abs(len(stream) - 4060) <= 5 * math.sqrt(spec.edge_variance())


def test_determinism():
    spec = flat_spec(300, 3, 20, seed=11)
    a, ta = sample_sbm(spec)
    b, tb = sample_sbm(spec)
    assert a == b and ta == tb
    c, _ = sample_sbm(spec.with_seed(12))
    assert not (a == c)


def _edge_set(stream):
    lo = np.minimum(stream.u, stream.v)
    hi = np.maximum(stream.u, stream.v)
    return set(zip(lo.tolist(), hi.tolist()))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=4),
       st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
def test_sample_invariants(sizes, p_in, p_out, seed):
    spec = two_level_spec(sizes, p_in, p_out, seed)
    stream, truth = sample_sbm(spec)
    assert np.all(stream.u != stream.v)
    assert len(_edge_set(stream)) == len(stream)
    assert truth.sizes().tolist() == list(sizes)
    assert stream.max_vertex() < spec.n


def test_bernoulli_and_skip_sampling_agree_in_distribution():
    # same per-pair inclusion frequencies from both samplers
    spec = two_level_spec([12, 9], 0.3, 0.05)
    counts = {}
    reps = 400
    for method in ("bernoulli", "skip"):
        freq = np.zeros((spec.n, spec.n))
        for r in range(reps):
            stream, _ = sample_sbm(spec.with_seed(r), method=method)
            freq[stream.u, stream.v] += 1
            freq[stream.v, stream.u] += 1
        counts[method] = freq / reps
    same = np.repeat(np.arange(2), [12, 9])
    mask_in = (same[:, None] == same[None, :]) & ~np.eye(spec.n, dtype=bool)
    mask_out = same[:, None] != same[None, :]
    for method, f in counts.items():
        assert f[mask_in].mean() == pytest.approx(0.3, abs=0.01), method
        assert f[mask_out].mean() == pytest.approx(0.05, abs=0.005), method
    # per-pair frequencies agree within binomial noise (sd ~ sqrt(.3*.7/400) = .023)
    diff = np.abs(counts["bernoulli"] - counts["skip"])
    assert diff[mask_in].max() < 6 * math.sqrt(2 * 0.21 / reps)


def test_skip_sampler_count_statistics():
    spec = two_level_spec([400, 400], 0.02, 0.001)
    m = [len(sample_sbm(spec.with_seed(s), method="skip")[0]) for s in range(30)]
    sd = math.sqrt(spec.edge_variance())
    assert abs(np.mean(m) - spec.expected_edges()) < 5 * sd / math.sqrt(30)


def test_graphchallenge_probabilities():
    spec = graphchallenge_spec(4096, seed=0)
    assert spec.meta["rho_in"] == pytest.approx(16.75 * 4096 ** -0.59)
    assert spec.meta["rho_out"] == pytest.approx(1.02 * 4096 ** -0.59)
    assert spec.prob[0, 0] == spec.meta["rho_in"]


def test_graphchallenge_small_and_large():
    small = graphchallenge_spec(16, seed=0)
    assert small.c >= 1
    assert small.prob.max() <= 1.0
    big = graphchallenge_spec(10 ** 6, seed=3)
    assert big.n == 10 ** 6
    assert big.c == round(0.95 * (10 ** 6) ** 0.36)
    assert np.all(big.sizes >= 1)
    with pytest.raises(ParameterError):
        graphchallenge_spec(8)


def test_graphchallenge_rho_formula_2_20():
    # 16.75 * 2^-11.8 evaluated by hand: 16.75 / (2048 * 1.741101) = 4.6974e-3
    spec = graphchallenge_spec(2 ** 20, seed=0)
    assert spec.meta["rho_in"] == pytest.approx(4.6974e-3, rel=1e-4)
    assert spec.n == 2 ** 20
