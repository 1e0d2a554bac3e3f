"""Joint quantization of two embedding sets into aligned histograms.

Pipeline: concatenate both sets, center and project with PCA keeping a
target fraction of explained variance, L2-normalize each row, cluster
with restarted Lloyd's k-means, then split the labels back by origin
and count.  The result is a pair of discrete distributions over the
same ``k`` buckets, ready for divergence computations.

Everything is deterministic given the seed.  To make the result
invariant to the row order of either input, the joint matrix is
clustered in a canonical (lexicographically sorted) row order and the
labels are unsorted afterwards.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np
import numpy.typing as npt

from .divergence import DiscreteDistribution
from .errors import ConsistencyError, DimensionError, ParameterError

#: Relative slack allowed when checking that Lloyd's objective never rises.
_INERTIA_TOL = 1e-8


def _as_matrix(data: npt.ArrayLike) -> npt.NDArray[np.float64]:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError("embedding data must be a non-empty N x d matrix")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("embedding data must not contain non-finite entries")
    return arr


@dataclasses.dataclass(frozen=True)
class EmbeddingSet:
    """An immutable N x d matrix of sample embeddings with row identifiers."""

    data: npt.NDArray[np.float64]
    ids: tuple = ()

    def __post_init__(self) -> None:
        arr = _as_matrix(self.data)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        ids = tuple(self.ids) if self.ids else tuple(range(arr.shape[0]))
        if len(ids) != arr.shape[0]:
            raise DimensionError(
                f"{len(ids)} ids for {arr.shape[0]} embedding rows"
            )
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def _coerce_embeddings(value: EmbeddingSet | npt.ArrayLike) -> EmbeddingSet:
    if isinstance(value, EmbeddingSet):
        return value
    return EmbeddingSet(np.asarray(value, dtype=np.float64))


@dataclasses.dataclass(frozen=True)
class ClusterModel:
    """A fitted quantizer: PCA projection plus k-means centroids.

    ``pca_reduce`` returns a partial model (no centroids yet, ``k=0``);
    ``kmeans`` and ``quantize_pair`` return complete ones.  ``degenerate``
    is set when the input had no variance and the projection collapsed
    to a single dimension.
    """

    centroids: npt.NDArray[np.float64] | None = None
    pca_basis: npt.NDArray[np.float64] | None = None
    pca_mean: npt.NDArray[np.float64] | None = None
    k: int = 0
    inertia: float = math.nan
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.centroids is not None:
            cents = np.asarray(self.centroids, dtype=np.float64)
            if cents.ndim != 2 or not np.all(np.isfinite(cents)):
                raise ParameterError("centroids must be a finite k x d' matrix")
            if self.k != cents.shape[0] or self.k < 1:
                raise ParameterError(
                    f"k={self.k} does not match {cents.shape[0]} centroids"
                )
            cents.setflags(write=False)
            object.__setattr__(self, "centroids", cents)
        if self.pca_basis is not None:
            basis = np.asarray(self.pca_basis, dtype=np.float64)
            basis.setflags(write=False)
            object.__setattr__(self, "pca_basis", basis)
            if self.pca_mean is None or len(self.pca_mean) != basis.shape[0]:
                raise DimensionError("pca_mean must be a d-vector matching pca_basis")
            mean = np.asarray(self.pca_mean, dtype=np.float64)
            mean.setflags(write=False)
            object.__setattr__(self, "pca_mean", mean)
            if basis.shape[1] > basis.shape[0]:
                raise DimensionError("projection cannot increase dimensionality")


@dataclasses.dataclass(frozen=True)
class Assignment:
    """Cluster labels for N points, each in ``[0, k)``."""

    labels: npt.NDArray[np.int64]
    k: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ParameterError("labels must be a non-empty 1-D integer array")
        if labels.min() < 0 or labels.max() >= self.k:
            raise ParameterError(f"labels must lie in [0, {self.k})")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


def pca_reduce(
    joint: EmbeddingSet | npt.ArrayLike, explained_variance: float = 0.9
) -> tuple[EmbeddingSet, ClusterModel]:
    """Center, project to the top principal components, and L2-normalize.

    Keeps the smallest number of components whose cumulative explained
    variance reaches ``explained_variance`` (a fraction in ``(0, 1]``,
    computed from eigenvalue ratios).  Each projected row is then scaled
    to unit norm; all-zero rows are passed through unchanged.

    Degenerate input with no variance at all (all rows identical) yields
    a 1-dimensional all-zero projection, a ``UserWarning``, and a model
    with ``degenerate=True``.
    """
    joint = _coerce_embeddings(joint)
    if not 0.0 < explained_variance <= 1.0:
        raise ParameterError(
            f"explained_variance must be in (0, 1], got {explained_variance!r}"
        )
    if joint.n < 2:
        raise ParameterError("PCA needs at least 2 rows")

    mean = joint.data.mean(axis=0)
    centered = joint.data - mean
    _, sing, vt = np.linalg.svd(centered, full_matrices=False)

    scale = float(sing[0]) if sing.size else 0.0
    tol = scale * max(centered.shape) * np.finfo(np.float64).eps
    rank = int(np.sum(sing > tol))

    if rank == 0:
        warnings.warn(
            "all embedding rows are identical; projecting to a single zero dimension",
            UserWarning,
            stacklevel=2,
        )
        basis = vt[:1].T
        reduced = np.zeros((joint.n, 1))
        model = ClusterModel(pca_basis=basis, pca_mean=mean, degenerate=True)
        return EmbeddingSet(reduced, joint.ids), model

    variances = sing[:rank] ** 2
    ratios = variances / variances.sum()
    cumulative = np.cumsum(ratios)
    # Tiny slack so that a threshold of exactly 1.0 keeps rank(data)
    # components instead of tripping on cumsum rounding.
    n_keep = int(np.searchsorted(cumulative, explained_variance - 1e-12) + 1)
    n_keep = min(n_keep, rank)

    basis = vt[:n_keep].T
    reduced = centered @ basis
    norms = np.linalg.norm(reduced, axis=1, keepdims=True)
    nonzero = norms[:, 0] > 0.0
    reduced[nonzero] /= norms[nonzero]

    model = ClusterModel(pca_basis=basis, pca_mean=mean)
    return EmbeddingSet(reduced, joint.ids), model


def _squared_distances(
    points: npt.NDArray[np.float64], centroids: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """All pairwise squared Euclidean distances, clamped at zero."""
    sq = (
        np.sum(points**2, axis=1)[:, None]
        + np.sum(centroids**2, axis=1)[None, :]
        - 2.0 * points @ centroids.T
    )
    return np.maximum(sq, 0.0)


def _kmeans_pp_init(
    points: npt.NDArray[np.float64], k: int, rng: np.random.Generator
) -> npt.NDArray[np.float64]:
    """Sample k starting centroids with D^2 weighting (k-means++)."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    closest = np.sum((points - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(rng.integers(n))
        centroids[i] = points[idx]
        np.minimum(closest, np.sum((points - centroids[i]) ** 2, axis=1), out=closest)
    return centroids


def _repair_empty_clusters(
    points: npt.NDArray[np.float64],
    centroids: npt.NDArray[np.float64],
    sq_dists: npt.NDArray[np.float64],
    labels: npt.NDArray[np.int64],
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int64], npt.NDArray[np.float64]]:
    """Reseed each empty cluster to the point farthest from its centroid.

    Every pass strictly lowers the objective, so this terminates; if the
    farthest point already sits on its centroid (fewer distinct points
    than clusters) no repair can help and the empties are left as-is.
    """
    k = centroids.shape[0]
    counts = np.bincount(labels, minlength=k)
    for _ in range(k):
        if not np.any(counts == 0):
            break
        assigned = sq_dists[np.arange(points.shape[0]), labels]
        farthest = int(np.argmax(assigned))
        if assigned[farthest] == 0.0:
            break
        empty = int(np.argmin(counts))
        centroids = centroids.copy()
        centroids[empty] = points[farthest]
        sq_dists = _squared_distances(points, centroids)
        labels = np.argmin(sq_dists, axis=1).astype(np.int64)
        counts = np.bincount(labels, minlength=k)
    return centroids, labels, sq_dists


def _lloyd_single(
    points: npt.NDArray[np.float64],
    k: int,
    max_iters: int,
    rng: np.random.Generator,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int64], float]:
    centroids = _kmeans_pp_init(points, k, rng)
    previous_labels: npt.NDArray[np.int64] | None = None
    previous_inertia = math.inf
    labels = np.zeros(points.shape[0], dtype=np.int64)
    inertia = 0.0
    for iteration in range(max_iters):
        sq_dists = _squared_distances(points, centroids)
        labels = np.argmin(sq_dists, axis=1).astype(np.int64)
        centroids, labels, sq_dists = _repair_empty_clusters(
            points, centroids, sq_dists, labels
        )
        # Exact differences, not the expanded-form matrix: a point sitting
        # on its centroid must contribute exactly zero.
        inertia = float(np.sum((points - centroids[labels]) ** 2))
        if inertia > previous_inertia * (1.0 + _INERTIA_TOL) + _INERTIA_TOL:
            raise ConsistencyError(
                f"k-means objective rose from {previous_inertia} to {inertia}"
            )
        if previous_labels is not None and np.array_equal(labels, previous_labels):
            break
        previous_labels = labels
        previous_inertia = inertia
        if iteration == max_iters - 1:
            break
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts):
            centroids[j] = points[labels == j].mean(axis=0)
    return centroids, labels, inertia


def kmeans(
    points: EmbeddingSet | npt.ArrayLike,
    k: int,
    max_iters: int = 500,
    restarts: int = 5,
    seed: int = 0,
) -> tuple[ClusterModel, Assignment]:
    """Restarted Lloyd's k-means with k-means++ initialization.

    Runs ``restarts`` independent fits (each capped at ``max_iters``
    Lloyd iterations, stopping early once labels stabilize) and keeps
    the one with minimal inertia.  Empty clusters are reseeded to the
    point farthest from its current centroid, so all ``k`` buckets stay
    live.  Deterministic given ``seed``.
    """
    points = _coerce_embeddings(points)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    if k > points.n:
        raise ParameterError(f"k={k} exceeds the number of points {points.n}")
    if max_iters < 1 or restarts < 1:
        raise ParameterError("max_iters and restarts must be at least 1")

    best: tuple[npt.NDArray[np.float64], npt.NDArray[np.int64], float] | None = None
    for child_seed in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child_seed)
        candidate = _lloyd_single(points.data, int(k), int(max_iters), rng)
        if best is None or candidate[2] < best[2]:
            best = candidate
    assert best is not None
    centroids, labels, inertia = best
    model = ClusterModel(centroids=centroids, k=int(k), inertia=inertia)
    return model, Assignment(labels=labels, k=int(k))


def histogram(assignment: Assignment | npt.ArrayLike, k: int) -> DiscreteDistribution:
    """Relative frequency of each cluster label over ``k`` buckets."""
    labels = assignment.labels if isinstance(assignment, Assignment) else None
    if labels is None:
        labels = np.asarray(assignment, dtype=np.int64)
    if labels.ndim != 1 or labels.size == 0:
        raise ParameterError("cannot build a histogram from an empty label slice")
    if k < 1:
        raise ParameterError(f"k must be positive, got {k!r}")
    if labels.min() < 0 or labels.max() >= k:
        raise ParameterError(f"labels must lie in [0, {k})")
    counts = np.bincount(labels, minlength=int(k)).astype(np.float64)
    return counts / labels.size


def quantize_pair(
    p_embeds: EmbeddingSet | npt.ArrayLike,
    q_embeds: EmbeddingSet | npt.ArrayLike,
    k: int,
    seed: int = 0,
    *,
    pca_variance: float = 0.9,
    kmeans_max_iters: int = 500,
    kmeans_restarts: int = 5,
) -> tuple[DiscreteDistribution, DiscreteDistribution, ClusterModel]:
    """Cluster two embedding sets jointly and return their bucket histograms.

    The joint rows are put into a canonical sorted order before PCA and
    clustering, then the labels are mapped back, so the histograms do
    not depend on how either input happens to be ordered.
    """
    p_embeds = _coerce_embeddings(p_embeds)
    q_embeds = _coerce_embeddings(q_embeds)
    if p_embeds.dim != q_embeds.dim:
        raise DimensionError(
            f"embedding dimensions differ: {p_embeds.dim} vs {q_embeds.dim}"
        )
    n_total = p_embeds.n + q_embeds.n
    if k > n_total:
        raise ParameterError(f"k={k} exceeds the {n_total} joint points")

    joint = np.concatenate([p_embeds.data, q_embeds.data], axis=0)
    order = np.lexsort(joint.T[::-1])
    reduced, partial = pca_reduce(joint[order], pca_variance)
    model, assignment = kmeans(
        reduced, k, max_iters=kmeans_max_iters, restarts=kmeans_restarts, seed=seed
    )

    labels = np.empty(n_total, dtype=np.int64)
    labels[order] = assignment.labels
    p_hist = histogram(labels[: p_embeds.n], k)
    q_hist = histogram(labels[p_embeds.n :], k)
    full_model = ClusterModel(
        centroids=model.centroids,
        pca_basis=partial.pca_basis,
        pca_mean=partial.pca_mean,
        k=model.k,
        inertia=model.inertia,
        degenerate=partial.degenerate,
    )
    return p_hist, q_hist, full_model
