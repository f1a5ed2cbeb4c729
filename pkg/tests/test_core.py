import math

import numpy as np
import pytest

from hdrkit.core import Orientation, Sample2D, ScoreVector, ecdf1, knn_indices, rect_count, threshold_index


class TestSample2D:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Sample2D([(0.0, np.nan)])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Sample2D(np.empty((0, 2)))

    def test_immutable(self):
        s = Sample2D([(1.0, 2.0)])
        with pytest.raises(ValueError):
            s.points[0, 0] = 9.0


class TestEcdf1:
    def test_half(self):
        assert ecdf1([1, 2, 3, 4], 2.5) == 0.5

    def test_below_min(self):
        assert ecdf1([1, 2, 3, 4], 0) == 0.0

    def test_inclusive_at_point(self):
        assert ecdf1([5], 5) == 1.0

    def test_empty_errors(self):
        with pytest.raises(ValueError, match="empty"):
            ecdf1([], 1.0)

    def test_monotone_and_one_at_max(self):
        rng = np.random.default_rng(0)
        col = rng.normal(size=200)
        ts = np.sort(rng.normal(size=100))
        vals = ecdf1(col, ts)
        assert np.all(np.diff(vals) >= 0)
        assert ecdf1(col, col.max()) == 1.0


class TestRectCount:
    def test_single_point_in_box(self):
        s = Sample2D([(0, 0), (1, 1), (2, 2)])
        assert rect_count(s, (0.5, 0.5), (1.5, 1.5)) == 1

    def test_zero_volume_inclusive(self):
        s = Sample2D([(0, 0), (1, 1), (2, 2)])
        assert rect_count(s, (1, 1), (1, 1)) == 1

    def test_full_cover(self):
        rng = np.random.default_rng(1)
        s = Sample2D(rng.random((1000, 2)))
        assert rect_count(s, (0, 0), (1, 1)) == 1000

    def test_inverted_errors(self):
        s = Sample2D([(0, 0)])
        with pytest.raises(ValueError, match="degenerate"):
            rect_count(s, (1, 0), (0, 1))

    def test_monotone_in_rectangle(self):
        rng = np.random.default_rng(2)
        s = Sample2D(rng.normal(size=(300, 2)))
        for _ in range(50):
            c = rng.normal(size=2)
            r1, r2 = sorted(rng.uniform(0.1, 3.0, size=2))
            small = rect_count(s, c - r1, c + r1)
            large = rect_count(s, c - r2, c + r2)
            assert large >= small


class TestKnnIndices:
    def test_basic_order(self):
        s = Sample2D([(0, 0), (3, 0), (1, 0)])
        assert list(knn_indices(s, (0, 0), 2)) == [0, 2]

    def test_self_at_zero_distance(self):
        s = Sample2D([(2, 3), (0, 0), (5, 5)])
        idx = knn_indices(s, (0, 0), 1)
        assert list(idx) == [1]

    def test_tie_break_lower_index(self):
        s = Sample2D([(1, 0), (-1, 0)])
        assert list(knn_indices(s, (0, 0), 1)) == [0]

    def test_k_out_of_range(self):
        s = Sample2D([(0, 0)])
        with pytest.raises(ValueError):
            knn_indices(s, (0, 0), 2)

    def test_permutation_prefix_property(self):
        rng = np.random.default_rng(3)
        s = Sample2D(rng.normal(size=(80, 2)))
        for _ in range(20):
            q = rng.normal(size=2)
            k = int(rng.integers(1, 81))
            idx = knn_indices(s, q, k)
            assert len(set(idx.tolist())) == k
            d = np.linalg.norm(s.points[idx] - q, axis=1)
            assert np.all(np.diff(d) >= 0)


class TestThresholdIndex:
    def test_concentration_rank(self):
        assert threshold_index(100, 0.05, Orientation.CONCENTRATION) == 5

    def test_sparsity_rank(self):
        assert threshold_index(100, 0.05, Orientation.SPARSITY) == 95

    def test_small_n_clamped(self):
        assert threshold_index(10, 0.05, Orientation.CONCENTRATION) == 1

    def test_float_representation_guard(self):
        # 0.29 * 100 rounds below 29 in float arithmetic
        assert threshold_index(100, 0.29, Orientation.CONCENTRATION) == 29

    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            threshold_index(10, 0.0, Orientation.CONCENTRATION)

    @pytest.mark.parametrize("n", [20, 50, 100, 500, 1000])
    def test_kept_count_distinct_scores(self, n):
        rng = np.random.default_rng(n)
        scores = rng.permutation(n).astype(float)
        for orient in Orientation:
            rank = threshold_index(n, 0.05, orient)
            thr = np.sort(scores)[rank - 1]
            if orient is Orientation.CONCENTRATION:
                kept = int(np.count_nonzero(scores >= thr))
                assert kept == n - rank + 1
            else:
                kept = int(np.count_nonzero(scores <= thr))
                assert kept == rank
            assert kept >= math.ceil(0.95 * n) - 1


def test_score_vector_validation():
    with pytest.raises(ValueError):
        ScoreVector([1.0, np.inf], Orientation.SPARSITY)
    sv = ScoreVector([1.0, 2.0], Orientation.CONCENTRATION)
    assert sv.n == 2
