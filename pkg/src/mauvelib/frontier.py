"""Divergence curves between discrete distributions and scores on top.

For two distributions P and Q and a scaling constant ``c``, the curve
traces ``(exp(-c*KL(Q|R)), exp(-c*KL(P|R)))`` over mixtures
``R = lam*P + (1-lam)*Q`` on a uniform interior grid of ``lam`` values.
The headline score is the trapezoidal area under that curve: 1 exactly
when the two distributions coincide, approaching 0 as they separate.

Also provides the Gaussian Fréchet distance between two embedding sets
as a conventional baseline, and a sweep utility asserting that the
score's ranking of candidates does not depend on ``c``.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from . import divergence, quantize
from .divergence import DiscreteDistribution
from .errors import ConsistencyError, DimensionError, ParameterError
from .quantize import ClusterModel, EmbeddingSet


@dataclasses.dataclass(frozen=True)
class DivergenceCurve:
    """Curve points in the unit square, ordered by ascending x.

    ``grid`` holds the mixture weight that produced each point; the
    anchor points carry weights 0 and 1.
    """

    xs: npt.NDArray[np.float64]
    ys: npt.NDArray[np.float64]
    grid: npt.NDArray[np.float64]
    c: float

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        grid = np.asarray(self.grid, dtype=np.float64)
        if not (xs.shape == ys.shape == grid.shape) or xs.ndim != 1:
            raise DimensionError("xs, ys and grid must be 1-D arrays of equal length")
        for name, arr in (("x", xs), ("y", ys)):
            if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                raise ParameterError(f"curve {name} coordinates must lie in [0, 1]")
        if self.c <= 0.0:
            raise ParameterError(f"scaling constant must be positive, got {self.c!r}")
        for arr in (xs, ys, grid):
            arr.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "grid", grid)

    @property
    def points(self) -> npt.NDArray[np.float64]:
        """The (m, 2) array of (x, y) points."""
        return np.column_stack([self.xs, self.ys])

    def __len__(self) -> int:
        return self.xs.size


@dataclasses.dataclass(frozen=True)
class MauveReport:
    """Score plus the quantized-divergence context it was computed from."""

    mauve: float
    curve: DivergenceCurve
    kl_p_q: float
    kl_q_p: float
    js: float
    k: int
    seed: int
    n_p: int
    n_q: int
    model: ClusterModel | None = None


def divergence_curve(
    p: npt.ArrayLike,
    q: npt.ArrayLike,
    c: float = 5.0,
    n_grid: int = 25,
    *,
    anchors: bool = True,
) -> DivergenceCurve:
    """Evaluate the exponentiated-KL curve on a uniform interior grid.

    The grid is ``lam = i / (n_grid + 1)`` for ``i = 1..n_grid``. With
    ``anchors`` (the default), the extreme points ``(0, 1)`` at
    ``lam = 1`` and ``(1, 0)`` at ``lam = 0`` are included, following
    the convention ``exp(-c * inf) = 0``; this pins the curve to the
    axes so its area is taken over the full unit interval.
    """
    p = divergence.as_distribution(p)
    q = divergence.as_distribution(q)
    if p.shape != q.shape:
        raise DimensionError(
            f"distributions have mismatched support sizes {p.size} and {q.size}"
        )
    c = float(c)
    if not c > 0.0:
        raise ParameterError(f"scaling constant must be positive, got {c!r}")
    if n_grid < 2:
        raise ParameterError(f"n_grid must be at least 2, got {n_grid!r}")

    # Descending lam gives ascending x, since KL(Q | R_lam) grows with lam.
    lams = np.arange(n_grid, 0, -1, dtype=np.float64) / (n_grid + 1)
    mixtures = lams[:, None] * p[None, :] + (1.0 - lams)[:, None] * q[None, :]

    def _kl_rows(dist: DiscreteDistribution) -> npt.NDArray[np.float64]:
        support = dist > 0.0
        d = dist[support]
        rows = mixtures[:, support]
        # Interior mixtures cover the union support, so every term is finite.
        terms = d[None, :] * (np.log(d)[None, :] - np.log(rows))
        return np.maximum(terms.sum(axis=1), 0.0)

    xs = np.exp(-c * _kl_rows(q))
    ys = np.exp(-c * _kl_rows(p))

    if anchors:
        xs = np.concatenate([[0.0], xs, [1.0]])
        ys = np.concatenate([[1.0], ys, [0.0]])
        lams = np.concatenate([[1.0], lams, [0.0]])
    return DivergenceCurve(xs=xs, ys=ys, grid=lams, c=c)


def mauve_from_curve(curve: DivergenceCurve) -> float:
    """Trapezoidal area under the curve, sorted by ascending x.

    Repeated x values are collapsed to their maximum y (the upper
    envelope), which keeps the area of a degenerate vertical segment at
    zero instead of ill-defined.
    """
    if len(curve) < 2:
        raise ParameterError("a curve needs at least 2 points to integrate")
    order = np.argsort(curve.xs, kind="stable")
    xs = curve.xs[order]
    ys = curve.ys[order]
    unique_xs, inverse = np.unique(xs, return_inverse=True)
    best_ys = np.full(unique_xs.shape, -np.inf)
    np.maximum.at(best_ys, inverse, ys)
    if unique_xs.size < 2:
        return 0.0
    return float(np.trapezoid(best_ys, unique_xs))


def mauve(
    p_embeds: EmbeddingSet | npt.ArrayLike,
    q_embeds: EmbeddingSet | npt.ArrayLike,
    k: int = 500,
    c: float = 5.0,
    n_grid: int = 25,
    seed: int = 0,
    *,
    anchors: bool = True,
    pca_variance: float = 0.9,
    kmeans_max_iters: int = 500,
    kmeans_restarts: int = 5,
) -> MauveReport:
    """Full pipeline: joint quantization, divergence curve, area score.

    Returns the score together with the curve, the endpoint divergences
    of the quantized histograms (in nats; the one-sided KLs may be
    ``inf``), and the quantizer model for inspection.
    """
    p_hist, q_hist, model = quantize.quantize_pair(
        p_embeds,
        q_embeds,
        k,
        seed,
        pca_variance=pca_variance,
        kmeans_max_iters=kmeans_max_iters,
        kmeans_restarts=kmeans_restarts,
    )
    curve = divergence_curve(p_hist, q_hist, c, n_grid, anchors=anchors)
    score = mauve_from_curve(curve)
    n_p = p_embeds.n if isinstance(p_embeds, EmbeddingSet) else len(p_embeds)
    n_q = q_embeds.n if isinstance(q_embeds, EmbeddingSet) else len(q_embeds)
    return MauveReport(
        mauve=score,
        curve=curve,
        kl_p_q=divergence.kl(p_hist, q_hist),
        kl_q_p=divergence.kl(q_hist, p_hist),
        js=divergence.js(p_hist, q_hist),
        k=int(k),
        seed=int(seed),
        n_p=n_p,
        n_q=n_q,
        model=model,
    )


def _sample_moments(
    embeds: EmbeddingSet,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    mean = embeds.data.mean(axis=0)
    cov = np.atleast_2d(np.cov(embeds.data, rowvar=False, ddof=1))
    return mean, cov


def _clamped_eigh(
    matrix: npt.NDArray[np.float64],
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Eigendecomposition of a symmetric PSD matrix with tiny/negative
    eigenvalues snapped to zero (threshold 1e-12 relative to the largest)."""
    values, vectors = np.linalg.eigh((matrix + matrix.T) / 2.0)
    threshold = max(float(values.max()), 0.0) * 1e-12
    values = np.where(values < threshold, 0.0, values)
    return values, vectors


def frechet_distance(
    p_embeds: EmbeddingSet | npt.ArrayLike, q_embeds: EmbeddingSet | npt.ArrayLike
) -> float:
    """Squared Wasserstein-2 distance between Gaussian fits of two sets.

    ``|mu_p - mu_q|^2 + tr(S_p + S_q - 2 (S_p S_q)^{1/2})`` with sample
    means and covariances (ddof=1).  The cross square root uses the
    symmetric form ``S_p^{1/2} S_q S_p^{1/2}``.
    """
    p_embeds = quantize._coerce_embeddings(p_embeds)
    q_embeds = quantize._coerce_embeddings(q_embeds)
    if p_embeds.dim != q_embeds.dim:
        raise DimensionError(
            f"embedding dimensions differ: {p_embeds.dim} vs {q_embeds.dim}"
        )
    if p_embeds.n < 2 or q_embeds.n < 2:
        raise ParameterError("covariance needs at least 2 samples per set")

    mean_p, cov_p = _sample_moments(p_embeds)
    mean_q, cov_q = _sample_moments(q_embeds)

    values_p, vectors_p = _clamped_eigh(cov_p)
    root_p = (vectors_p * np.sqrt(values_p)) @ vectors_p.T
    cross = root_p @ cov_q @ root_p
    cross_values, _ = _clamped_eigh(cross)
    trace_root = float(np.sqrt(cross_values).sum())

    gap = float(np.sum((mean_p - mean_q) ** 2))
    value = gap + float(np.trace(cov_p) + np.trace(cov_q)) - 2.0 * trace_root
    if value < -1e-8:
        raise ConsistencyError(f"Fréchet distance came out negative: {value}")
    return max(value, 0.0)


@dataclasses.dataclass(frozen=True)
class SweepResult:
    """Scores for each (candidate, c) pair and the shared ranking."""

    values: npt.NDArray[np.float64]
    c_values: tuple[float, ...]
    ranking: tuple[int, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def scaling_sweep(
    p: npt.ArrayLike,
    q_list: Sequence[npt.ArrayLike],
    c_list: Sequence[float],
    *,
    n_grid: int = 25,
) -> SweepResult:
    """Score every candidate distribution against ``p`` at several ``c``.

    Because ``x -> exp(-c*x)`` is strictly monotone for every positive
    ``c``, the induced ranking of candidates must not depend on ``c``;
    this is checked and a violation raises :class:`ConsistencyError`.
    """
    if len(q_list) == 0:
        raise ParameterError("q_list must not be empty")
    if len(c_list) == 0:
        raise ParameterError("c_list must not be empty")
    cs = [float(c) for c in c_list]
    if any(not c > 0.0 for c in cs):
        raise ParameterError("every scaling constant must be positive")

    values = np.empty((len(q_list), len(cs)))
    for i, q in enumerate(q_list):
        for j, c in enumerate(cs):
            values[i, j] = mauve_from_curve(divergence_curve(p, q, c, n_grid))

    rankings = [tuple(np.argsort(-values[:, j], kind="stable")) for j in range(len(cs))]
    if any(r != rankings[0] for r in rankings[1:]):
        raise ConsistencyError(
            "candidate ranking changed with the scaling constant: "
            + "; ".join(f"c={c}: {r}" for c, r in zip(cs, rankings))
        )
    return SweepResult(values=values, c_values=tuple(cs), ranking=rankings[0])
