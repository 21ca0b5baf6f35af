import math

import numpy as np
import pytest

from expcurate.analytics import agglomerative, kmeans
from expcurate.errors import BadK


def adjusted_rand_index(labels_a, labels_b):
    """Independent oracle: ARI from the contingency table, pure python."""
    def comb2(n):
        return n * (n - 1) / 2

    pairs = {}
    count_a = {}
    count_b = {}
    for a, b in zip(labels_a, labels_b):
        pairs[(a, b)] = pairs.get((a, b), 0) + 1
        count_a[a] = count_a.get(a, 0) + 1
        count_b[b] = count_b.get(b, 0) + 1
    n = len(labels_a)
    sum_pairs = sum(comb2(v) for v in pairs.values())
    sum_a = sum(comb2(v) for v in count_a.values())
    sum_b = sum(comb2(v) for v in count_b.values())
    expected = sum_a * sum_b / comb2(n)
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        return 1.0
    return (sum_pairs - expected) / (maximum - expected)


def two_blobs(n_per=100, seed=4242, spread=0.6, centers=((0.0, 0.0), (8.0, 8.0))):
    rng = np.random.default_rng(seed)
    points = np.vstack(
        [rng.normal(c, spread, size=(n_per, 2)) for c in centers]
    )
    truth = [0] * n_per + [1] * n_per
    return points, truth


class TestKMeans:
    def test_separated_blobs_recovered(self):
        points, truth = two_blobs()
        result = kmeans(points, 2, seed=7)
        assert adjusted_rand_index(result.assignments, truth) == 1.0

    def test_k1_centroid_is_column_means_inertia_total_variance(self):
        points, _ = two_blobs(n_per=20)
        result = kmeans(points, 1, seed=0)
        means = points.mean(axis=0)
        assert np.allclose(result.centroids[0], means)
        expected_inertia = float(((points - means) ** 2).sum())
        assert result.inertia == pytest.approx(expected_inertia, rel=1e-12)

    def test_k_equals_n_zero_inertia(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, 3.0]])
        result = kmeans(points, 4, seed=3)
        assert result.inertia == 0.0
        assert sorted(result.assignments) == [0, 1, 2, 3]

    def test_bad_k(self):
        points = np.zeros((3, 2))
        with pytest.raises(BadK):
            kmeans(points, 0, seed=1)
        with pytest.raises(BadK):
            kmeans(points, 4, seed=1)

    def test_deterministic_given_seed(self):
        points, _ = two_blobs(seed=99)
        a = kmeans(points, 2, seed=123)
        b = kmeans(points, 2, seed=123)
        assert a.assignments == b.assignments
        assert a.centroids == b.centroids
        assert a.inertia == b.inertia

    def test_inertia_non_increasing_every_seed(self):
        points, _ = two_blobs(n_per=50, spread=2.5)  # overlapping: more iterations
        for seed in range(10):
            result = kmeans(points, 3, seed=seed)
            history = result.inertia_history
            assert all(
                later <= earlier for earlier, later in zip(history, history[1:])
            ), f"seed={seed}: {history}"

    def test_assignment_is_fixed_point(self):
        points, _ = two_blobs(n_per=30)
        result = kmeans(points, 2, seed=5)
        centroids = np.array(result.centroids)
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assert tuple(int(i) for i in np.argmin(d2, axis=1)) == result.assignments


class TestAgglomerative:
    def test_separated_blobs_recovered(self):
        points, truth = two_blobs()
        labels = agglomerative(points, 2)
        assert adjusted_rand_index(labels, truth) == 1.0

    def test_matches_kmeans_on_separated_data(self):
        points, truth = two_blobs(seed=2024)
        km = kmeans(points, 2, seed=11)
        ag = agglomerative(points, 2)
        assert adjusted_rand_index(km.assignments, ag) == 1.0

    def test_k_equals_n_all_singletons(self):
        points = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        assert sorted(agglomerative(points, 3)) == [0, 1, 2]

    def test_duplicate_points_merge_first(self):
        points = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 0.0], [9.0, 9.0]])
        labels = agglomerative(points, 3)
        assert labels[0] == labels[2]
        assert len({labels[0], labels[1], labels[3]}) == 3

    def test_bad_k(self):
        points = np.zeros((3, 2))
        with pytest.raises(BadK):
            agglomerative(points, 0)
        with pytest.raises(BadK):
            agglomerative(points, 5)

    def test_average_linkage_chain_vs_pair(self):
        # hand-checkable: {0,1} at distance 1, point 2 at 10; cut at 2 keeps
        # the pair together
        points = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]])
        labels = agglomerative(points, 2)
        assert labels[0] == labels[1] != labels[2]
