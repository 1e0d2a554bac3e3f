"""PCA reduction, k-means, histograms, and the joint quantizer."""

import collections

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mauvelib import (
    Assignment,
    DimensionError,
    EmbeddingSet,
    ParameterError,
    histogram,
    kmeans,
    pca_reduce,
    quantize_pair,
)


def blobs(rng, centers, n_per, radius=1.0):
    """Stacked isotropic Gaussian blobs and their ground-truth labels."""
    points, labels = [], []
    for label, center in enumerate(centers):
        points.append(rng.normal(size=(n_per, len(center))) * radius + np.asarray(center))
        labels += [label] * n_per
    return np.concatenate(points), np.asarray(labels)


class TestEmbeddingSet:
    def test_basic_shape_and_ids(self):
        es = EmbeddingSet(np.zeros((3, 2)))
        assert es.n == 3 and es.dim == 2
        assert es.ids == (0, 1, 2)

    def test_rejects_non_finite(self):
        with pytest.raises(ParameterError):
            EmbeddingSet(np.array([[1.0, np.nan]]))

    def test_rejects_empty(self):
        with pytest.raises(ParameterError):
            EmbeddingSet(np.zeros((0, 3)))

    def test_id_count_must_match(self):
        with pytest.raises(DimensionError):
            EmbeddingSet(np.zeros((3, 2)), ids=("a",))

    def test_data_is_read_only(self):
        es = EmbeddingSet(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            es.data[0, 0] = 1.0


class TestPcaReduce:
    def test_single_axis_variance_gives_one_dim(self):
        rng = np.random.default_rng(0)
        data = np.zeros((40, 5))
        data[:, 1] = rng.normal(size=40)
        reduced, model = pca_reduce(data, 0.9)
        assert reduced.dim == 1
        assert model.pca_basis.shape == (5, 1)

    def test_threshold_one_keeps_full_rank(self):
        rng = np.random.default_rng(1)
        # 30 points living in a 3-dimensional subspace of 6 dims
        coords = rng.normal(size=(30, 3))
        basis = rng.normal(size=(3, 6))
        reduced, _ = pca_reduce(coords @ basis, 1.0)
        assert reduced.dim == 3

    def test_anisotropic_two_component_sample(self):
        # variances 9 and 1: the first axis carries >= 90% of the variance
        # (seed chosen so the sample ratio clears the threshold)
        rng = np.random.default_rng(8)
        data = np.column_stack([3.0 * rng.normal(size=5000), rng.normal(size=5000)])
        reduced, _ = pca_reduce(data, 0.9)
        assert reduced.dim == 1

    def test_rows_are_unit_norm(self):
        rng = np.random.default_rng(3)
        reduced, _ = pca_reduce(rng.normal(size=(50, 8)), 0.9)
        norms = np.linalg.norm(reduced.data, axis=1)
        assert_allclose(norms, 1.0, atol=1e-12)

    def test_zero_rows_pass_through(self):
        # the mean point projects to the origin and must stay there
        data = np.array([[0.0, 0.0], [1.0, 1.0], [-1.0, -1.0]])
        reduced, _ = pca_reduce(data, 0.9)
        assert np.linalg.norm(reduced.data[0]) == 0.0

    def test_identical_rows_degenerate(self):
        data = np.ones((5, 4))
        with pytest.warns(UserWarning):
            reduced, model = pca_reduce(data, 0.9)
        assert model.degenerate
        assert reduced.dim == 1
        assert_array_equal(reduced.data, np.zeros((5, 1)))

    def test_needs_two_rows(self):
        with pytest.raises(ParameterError):
            pca_reduce(np.ones((1, 3)), 0.9)

    def test_threshold_range(self):
        with pytest.raises(ParameterError):
            pca_reduce(np.zeros((4, 2)), 0.0)
        with pytest.raises(ParameterError):
            pca_reduce(np.zeros((4, 2)), 1.1)


class TestKmeans:
    def test_separated_blobs_partition_exactly(self):
        rng = np.random.default_rng(4)
        points, truth = blobs(rng, [(0.0, 0.0), (100.0, 100.0)], 50)
        model, assignment = kmeans(points, 2, seed=0)
        # purity: each found cluster maps to exactly one true blob
        first = assignment.labels[truth == 0]
        second = assignment.labels[truth == 1]
        assert len(set(first.tolist())) == 1
        assert len(set(second.tolist())) == 1
        assert first[0] != second[0]
        within = sum(
            np.sum((points[truth == b] - points[truth == b].mean(axis=0)) ** 2)
            for b in (0, 1)
        )
        assert model.inertia <= within + 1e-6

    def test_k_equals_n_gives_zero_inertia(self):
        rng = np.random.default_rng(5)
        points = rng.normal(size=(12, 3))
        model, _ = kmeans(points, 12, seed=1)
        assert_allclose(model.inertia, 0.0, atol=1e-20)

    def test_identical_points_k1(self):
        points = np.tile([2.0, -1.0], (6, 1))
        model, assignment = kmeans(points, 1, seed=0)
        assert_allclose(model.centroids[0], [2.0, -1.0])
        assert model.inertia == 0.0
        assert_array_equal(assignment.labels, np.zeros(6, dtype=np.int64))

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(ParameterError):
            kmeans(np.zeros((3, 2)), 4)

    def test_k_zero_rejected(self):
        with pytest.raises(ParameterError):
            kmeans(np.zeros((3, 2)), 0)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(6)
        points = rng.normal(size=(60, 4))
        model_a, assign_a = kmeans(points, 5, seed=42)
        model_b, assign_b = kmeans(points, 5, seed=42)
        assert_array_equal(model_a.centroids, model_b.centroids)
        assert_array_equal(assign_a.labels, assign_b.labels)
        assert model_a.inertia == model_b.inertia

    def test_all_points_assigned_to_nearest_centroid(self):
        rng = np.random.default_rng(7)
        points = rng.normal(size=(40, 2))
        model, assignment = kmeans(points, 4, seed=3)
        dists = ((points[:, None, :] - model.centroids[None, :, :]) ** 2).sum(axis=2)
        assert_array_equal(assignment.labels, dists.argmin(axis=1))

    def test_more_restarts_never_worse(self):
        rng = np.random.default_rng(8)
        points = rng.normal(size=(100, 2))
        single, _ = kmeans(points, 6, restarts=1, seed=9)
        many, _ = kmeans(points, 6, restarts=5, seed=9)
        assert many.inertia <= single.inertia + 1e-9


class TestHistogram:
    def test_direct_counting(self):
        assert_allclose(
            histogram(np.array([0, 1, 1, 2, 2, 2, 2, 2]), 3), [0.125, 0.25, 0.625]
        )

    def test_all_in_first_bucket(self):
        assert_allclose(histogram(np.zeros(5, dtype=np.int64), 3), [1.0, 0.0, 0.0])

    def test_counter_oracle(self):
        rng = np.random.default_rng(9)
        labels = rng.integers(0, 10, size=500)
        counter = collections.Counter(labels.tolist())
        expected = np.array([counter.get(j, 0) / 500 for j in range(10)])
        assert_allclose(histogram(labels, 10), expected)

    def test_entries_scale_back_to_integers(self):
        rng = np.random.default_rng(10)
        labels = rng.integers(0, 7, size=321)
        probs = histogram(labels, 7)
        counts = probs * 321
        assert_allclose(counts, np.round(counts), atol=1e-9)

    def test_accepts_assignment_object(self):
        assignment = Assignment(labels=np.array([0, 0, 1]), k=2)
        assert_allclose(histogram(assignment, 2), [2 / 3, 1 / 3])

    def test_empty_slice_rejected(self):
        with pytest.raises(ParameterError):
            histogram(np.array([], dtype=np.int64), 3)

    def test_out_of_range_labels_rejected(self):
        with pytest.raises(ParameterError):
            histogram(np.array([0, 3]), 3)


class TestQuantizePair:
    def test_identical_sets_identical_histograms(self):
        rng = np.random.default_rng(11)
        emb = rng.normal(size=(40, 6))
        p_hist, q_hist, _ = quantize_pair(emb, emb, 8, seed=0)
        assert_array_equal(p_hist, q_hist)

    def test_disjoint_blobs_up_to_permutation(self):
        rng = np.random.default_rng(12)
        p = rng.normal(size=(30, 3)) + np.array([0.0, 0.0, 0.0])
        q = rng.normal(size=(30, 3)) + np.array([60.0, 60.0, 60.0])
        p_hist, q_hist, _ = quantize_pair(p, q, 2, seed=0)
        assert sorted(p_hist.tolist()) == [0.0, 1.0]
        assert sorted(q_hist.tolist()) == [0.0, 1.0]
        assert p_hist.argmax() != q_hist.argmax()

    def test_half_overlap_total_variation(self):
        # p entirely in blob A; q half in blob A, half in blob B
        rng = np.random.default_rng(13)
        blob_a = rng.normal(size=(200, 4))
        blob_b = rng.normal(size=(100, 4)) + 50.0
        p = blob_a[:100]
        q = np.concatenate([blob_a[100:150], blob_b[:50]])
        p_hist, q_hist, model = quantize_pair(p, q, 2, seed=0)
        tv = 0.5 * np.abs(p_hist - q_hist).sum()
        assert abs(tv - 0.5) <= 0.1
        # brute-force check: cluster labels must follow blob membership
        joint = np.concatenate([p, q])
        truth = (np.linalg.norm(joint - 50.0, axis=1) < np.linalg.norm(joint, axis=1))
        reduced = (joint - model.pca_mean) @ model.pca_basis
        norms = np.linalg.norm(reduced, axis=1, keepdims=True)
        reduced = np.divide(reduced, norms, out=reduced, where=norms > 0)
        dists = ((reduced[:, None, :] - model.centroids[None, :, :]) ** 2).sum(axis=2)
        labels = dists.argmin(axis=1)
        assert len(set(labels[truth].tolist())) == 1
        assert len(set(labels[~truth].tolist())) == 1

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(14)
        p = rng.normal(size=(25, 5))
        q = rng.normal(size=(30, 5))
        p_hist, q_hist, _ = quantize_pair(p, q, 6, seed=7)
        shuffled = p[rng.permutation(25)]
        p_hist2, q_hist2, _ = quantize_pair(shuffled, q, 6, seed=7)
        assert_array_equal(p_hist, p_hist2)
        assert_array_equal(q_hist, q_hist2)

    def test_deterministic(self):
        rng = np.random.default_rng(15)
        p = rng.normal(size=(20, 4))
        q = rng.normal(size=(20, 4))
        first = quantize_pair(p, q, 5, seed=3)
        second = quantize_pair(p, q, 5, seed=3)
        assert_array_equal(first[0], second[0])
        assert_array_equal(first[1], second[1])
        assert_array_equal(first[2].centroids, second[2].centroids)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            quantize_pair(np.zeros((4, 2)), np.zeros((4, 3)), 2)

    def test_k_exceeding_total_rejected(self):
        with pytest.raises(ParameterError):
            quantize_pair(np.zeros((2, 2)), np.zeros((2, 2)), 5)

    def test_histograms_are_valid_distributions(self):
        from mauvelib import as_distribution

        rng = np.random.default_rng(16)
        p_hist, q_hist, _ = quantize_pair(
            rng.normal(size=(30, 3)), rng.normal(size=(35, 3)), 10, seed=1
        )
        as_distribution(p_hist)
        as_distribution(q_hist)
