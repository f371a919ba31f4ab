import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import count_paths, dtw_brute_force, linkage_naive
from tsdist import baselines
from tsdist.baselines import (
    dtw_distance,
    dtw_mean_distance,
    euclidean_mean_distance,
    linkage_distance,
    linkage_distances,
)
from tsdist.errors import DimensionMismatch, EmptyInput, EmptyMatrix
from tsdist.gaussian import MvnParams, fit_mvn, wasserstein_distance

seqs = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=7)


def params(mean, cov=None, name="p"):
    mean = np.asarray(mean, dtype=float)
    return MvnParams(name, mean, np.eye(mean.size) * 0.01 if cov is None else cov, 10)


class TestEuclideanMean:
    def test_identical(self):
        assert euclidean_mean_distance(params([0.2, 0.4]), params([0.2, 0.4])) == 0.0

    def test_three_four_five(self):
        a = params([0.0, 0.0])
        b = MvnParams("b", [0.3, 0.4], np.eye(2) * 0.01, 10)
        assert euclidean_mean_distance(a, b) == pytest.approx(0.5, abs=1e-15)

    def test_equals_wasserstein_for_shared_covariance(self, rng):
        cov = np.cov(rng.random((30, 4)).T, bias=True)
        cov = 0.5 * (cov + cov.T)
        a, b = params(rng.random(4), cov), params(rng.random(4), cov)
        assert euclidean_mean_distance(a, b) == pytest.approx(wasserstein_distance(a, b), abs=1e-7)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            euclidean_mean_distance(params([0.1]), params([0.1, 0.2]))


class TestDtw:
    def test_identical(self):
        assert dtw_distance([0.3, 1.2, -4.0], [0.3, 1.2, -4.0]) == 0.0

    def test_examples(self):
        assert dtw_distance([0, 0], [1, 1]) == 2.0
        assert dtw_distance([1, 2, 3], [2, 3]) == 1.0

    def test_brute_force_oracle_self_check(self):
        assert count_paths(3, 3) == 13  # Delannoy number D(2, 2)
        assert dtw_brute_force([1, 2, 3], [2, 3]) == 1.0

    def test_unequal_lengths(self):
        x, y = [0.0, 1.0, 1.0, 0.0], [0.0, 1.0, 0.0]
        assert dtw_distance(x, y) == dtw_brute_force(x, y) == 0.0

    def test_empty(self):
        with pytest.raises(EmptyInput):
            dtw_distance([], [1.0])

    @settings(max_examples=150, deadline=None)
    @given(seqs, seqs)
    def test_matches_enumeration(self, x, y):
        assert dtw_distance(x, y) == pytest.approx(dtw_brute_force(x, y), abs=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(seqs, seqs)
    def test_symmetric(self, x, y):
        assert dtw_distance(x, y) == dtw_distance(y, x)

    @settings(max_examples=100, deadline=None)
    @given(seqs)
    def test_zero_on_self(self, x):
        assert dtw_distance(x, x) == 0.0

    def test_bounded_by_l1(self, rng):
        for _ in range(50):
            x, y = rng.random(12), rng.random(12)
            assert dtw_distance(x, y) <= np.sum(np.abs(x - y)) + 1e-12

    def test_mean_distance(self):
        a, b = params([0.0, 0.0]), params([1.0, 1.0])
        assert dtw_mean_distance(a, a) == 0.0
        assert dtw_mean_distance(a, b) == 2.0


class TestLinkage:
    def test_hand_example(self):
        out = linkage_distances(np.array([[0.0, 0.0]]), np.array([[3.0, 4.0], [6.0, 8.0]]))
        assert out == {"min": 5.0, "avg": 7.5, "max": 10.0}

    def test_self_min_is_zero(self, rng, make_samples):
        sm = make_samples(rng, 40, 5)
        assert linkage_distance(sm, sm, "min") == 0.0

    def test_singletons(self):
        out = linkage_distances(np.array([[0.1, 0.9]]), np.array([[0.5, 0.2]]))
        assert out["min"] == out["avg"] == out["max"]

    @pytest.mark.parametrize("na,nb", [(1, 7), (127, 3), (128, 128), (129, 40), (200, 180)])
    def test_matches_naive(self, rng, na, nb):
        a, b = rng.random((na, 6)), rng.random((nb, 6))
        lo, avg, hi = linkage_naive(a.tolist(), b.tolist())
        out = linkage_distances(a, b)
        assert out["min"] == lo
        assert out["max"] == hi
        assert out["avg"] == pytest.approx(avg, rel=1e-9)
        assert out["min"] <= out["avg"] <= out["max"]

    def test_thread_count_does_not_change_result(self, rng):
        a, b = rng.random((700, 8)), rng.random((300, 8))
        ref = linkage_distances(a, b)
        for n in (1, 2, 4):
            baselines.set_threads(n)
            assert linkage_distances(a, b) == ref

    def test_subsample(self, rng):
        a, b = rng.random((500, 4)), rng.random((400, 4))
        exact = linkage_distances(a, b)
        approx = linkage_distances(a, b, subsample=100, rng=np.random.default_rng(1))
        assert approx["min"] >= exact["min"] and approx["max"] <= exact["max"]
        assert approx["avg"] == pytest.approx(exact["avg"], rel=0.05)

    def test_errors(self):
        with pytest.raises(DimensionMismatch):
            linkage_distances(np.ones((2, 3)), np.ones((2, 4)))
        with pytest.raises(EmptyMatrix):
            linkage_distances(np.ones((0, 3)), np.ones((2, 3)))
        with pytest.raises(ValueError):
            linkage_distance(np.ones((1, 3)), np.ones((1, 3)), "median")
