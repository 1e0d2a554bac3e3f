"""Bradley-Terry preference fitting and rank correlation.

Pairwise comparison counts go in; latent player scores come out, on a
scale where ``P(i beats j) = sigmoid((w_i - w_j) / 100)`` and the
fitted scores are mean-centered.  Fitting uses Zermelo's fixed-point
iteration, whose negative log-likelihood never increases.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateDataError, DimensionError, ParameterError

#: Rating labels accepted by :func:`preprocess_ratings`, per the CSV contract.
RATING_LABELS = ("def_a", "slight_a", "tie", "slight_b", "def_b")


@dataclasses.dataclass(frozen=True)
class PreferenceDataset:
    """A square matrix of win counts: ``wins[i, j]`` = times i beat j."""

    wins: npt.NDArray[np.int64]
    player_names: tuple[str, ...] = ()
    tie_seed: int | None = None

    def __post_init__(self) -> None:
        wins = np.asarray(self.wins, dtype=np.int64)
        if wins.ndim != 2 or wins.shape[0] != wins.shape[1]:
            raise DimensionError("wins must be a square matrix")
        if wins.shape[0] < 2:
            raise ParameterError("a preference dataset needs at least 2 players")
        if np.any(wins < 0):
            raise ParameterError("win counts must be non-negative")
        if np.any(np.diag(wins) != 0):
            raise ParameterError("the diagonal of the wins matrix must be zero")
        wins.setflags(write=False)
        object.__setattr__(self, "wins", wins)
        names = tuple(self.player_names) or tuple(
            str(i) for i in range(wins.shape[0])
        )
        if len(names) != wins.shape[0]:
            raise DimensionError(
                f"{len(names)} player names for {wins.shape[0]} players"
            )
        object.__setattr__(self, "player_names", names)

    @property
    def n_players(self) -> int:
        return self.wins.shape[0]


@dataclasses.dataclass(frozen=True)
class BtScores:
    """Fitted mean-centered scores plus fit diagnostics."""

    w: npt.NDArray[np.float64]
    n_iters: int = 0
    converged: bool = True
    nll_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.size < 2:
            raise ParameterError("scores must be a vector of length >= 2")
        if abs(float(w.mean())) > 1e-9:
            raise ParameterError("scores must be mean-centered")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


def _negative_log_likelihood(
    wins: npt.NDArray[np.int64], scaled_scores: npt.NDArray[np.float64]
) -> float:
    """NLL of the win counts under scores already divided by 100."""
    deltas = scaled_scores[:, None] - scaled_scores[None, :]
    return float(np.sum(wins * np.logaddexp(0.0, -deltas)))


def _check_fittable(data: PreferenceDataset) -> None:
    wins = data.wins
    losses = wins.T
    no_win = np.flatnonzero(wins.sum(axis=1) == 0)
    no_loss = np.flatnonzero(losses.sum(axis=1) == 0)
    problems = []
    if no_win.size:
        problems.append(
            "players with zero wins: " + ", ".join(data.player_names[i] for i in no_win)
        )
    if no_loss.size:
        problems.append(
            "players with zero losses: "
            + ", ".join(data.player_names[i] for i in no_loss)
        )
    if not problems:
        graph = scipy.sparse.csr_matrix((wins > 0).astype(np.int8))
        n_components, _ = connected_components(
            graph, directed=True, connection="strong"
        )
        if n_components > 1:
            problems.append(
                f"comparison graph splits into {n_components} strongly "
                "connected components"
            )
    if problems:
        raise DegenerateDataError(
            "dataset cannot support a maximum-likelihood fit: " + "; ".join(problems)
        )


def bt_fit(
    data: PreferenceDataset, max_iters: int = 10_000, tol: float = 1e-10
) -> BtScores:
    """Fit Bradley-Terry scores with Zermelo's fixed-point updates.

    Each sweep replaces every score ``u_i`` with
    ``ln(wins_i) - ln(sum_j (N_ij + N_ji) / (e^{u_i} + e^{u_j}))`` and
    re-centers the vector; iteration stops when the largest score change
    drops below ``tol``.  Structural degeneracy (a player who never wins
    or never loses, or a disconnected comparison graph) makes the MLE
    diverge and raises :class:`DegenerateDataError` instead.
    """
    if max_iters < 1:
        raise ParameterError("max_iters must be at least 1")
    if not tol > 0.0:
        raise ParameterError("tol must be positive")
    _check_fittable(data)

    wins = data.wins.astype(np.float64)
    total_per_pair = wins + wins.T
    win_totals = wins.sum(axis=1)

    scores = np.zeros(data.n_players)
    history = [_negative_log_likelihood(data.wins, scores)]
    iterations = 0
    converged = False
    for iterations in range(1, max_iters + 1):
        exp_scores = np.exp(scores)
        pair_denominators = total_per_pair / (exp_scores[:, None] + exp_scores[None, :])
        np.fill_diagonal(pair_denominators, 0.0)
        updated = np.log(win_totals) - np.log(pair_denominators.sum(axis=1))
        updated -= updated.mean()
        history.append(_negative_log_likelihood(data.wins, updated))
        change = float(np.max(np.abs(updated - scores)))
        scores = updated
        if change < tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"Zermelo iteration did not reach tol={tol} in {max_iters} sweeps",
            UserWarning,
            stacklevel=2,
        )
    scores -= scores.mean()
    return BtScores(
        w=100.0 * scores,
        n_iters=iterations,
        converged=converged,
        nll_history=tuple(history),
    )


def bt_win_prob(scores: BtScores, i: int, j: int) -> float:
    """Model probability that player ``i`` beats player ``j``."""
    w = scores.w
    if not (0 <= i < w.size and 0 <= j < w.size):
        raise ParameterError(
            f"player indices ({i}, {j}) out of range for {w.size} players"
        )
    return float(1.0 / (1.0 + math.exp(-(w[i] - w[j]) / 100.0)))


def preprocess_ratings(
    raw: Sequence[tuple[str, str, str]], seed: int = 0
) -> PreferenceDataset:
    """Accumulate 5-way ratings into a win-count matrix.

    ``def_*``/``slight_*`` both count as a win for that side; ``tie``
    is awarded to either side by a seeded fair coin.  Players are
    indexed in order of first appearance.
    """
    if len(raw) == 0:
        raise ParameterError("no ratings to preprocess")
    rng = np.random.default_rng(seed)
    names: list[str] = []
    index: dict[str, int] = {}

    def player(name: str) -> int:
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    records = []
    for row, (a, b, rating) in enumerate(raw):
        if rating not in RATING_LABELS:
            raise ParameterError(
                f"rating {rating!r} on row {row} is not one of {RATING_LABELS}"
            )
        if a == b:
            raise ParameterError(f"row {row} compares player {a!r} with itself")
        records.append((player(a), player(b), rating))
    if len(names) < 2:
        raise ParameterError("ratings must mention at least 2 distinct players")

    wins = np.zeros((len(names), len(names)), dtype=np.int64)
    for i, j, rating in records:
        if rating in ("def_a", "slight_a"):
            wins[i, j] += 1
        elif rating in ("def_b", "slight_b"):
            wins[j, i] += 1
        else:
            if rng.integers(2) == 0:
                wins[i, j] += 1
            else:
                wins[j, i] += 1
    return PreferenceDataset(wins=wins, player_names=tuple(names), tie_seed=seed)


def _average_ranks(values: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """1-based ranks with ties replaced by the mean rank of the tie group."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_values = values[order]
    start = 0
    while start < values.size:
        stop = start
        while stop + 1 < values.size and sorted_values[stop + 1] == sorted_values[start]:
            stop += 1
        ranks[order[start : stop + 1]] = (start + stop) / 2.0 + 1.0
        start = stop + 1
    return ranks


def spearman(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionError("inputs must be 1-D vectors of equal length")
    if a.size < 2:
        raise ParameterError("rank correlation needs at least 2 values")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ParameterError("rank correlation is undefined for a constant vector")
    ranks_a = _average_ranks(a)
    ranks_b = _average_ranks(b)
    return float(np.corrcoef(ranks_a, ranks_b)[0, 1])
