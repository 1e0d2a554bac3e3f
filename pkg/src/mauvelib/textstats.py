"""Classical corpus statistics over pre-tokenized sequences.

Token sequences arrive as lists of non-negative integer ids; no
tokenizer lives here.  Log-probabilities likewise arrive pre-computed
as per-sequence totals, since producing them requires an external
language model.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from collections import Counter
from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from . import divergence
from .divergence import DiscreteDistribution
from .errors import ParameterError


@dataclasses.dataclass(frozen=True)
class TokenCorpus:
    """A list of non-empty token-id sequences with an optional vocab bound."""

    sequences: tuple[npt.NDArray[np.int64], ...]
    vocab_size: int | None = None

    def __post_init__(self) -> None:
        converted = []
        for i, seq in enumerate(self.sequences):
            arr = np.asarray(seq, dtype=np.int64)
            if arr.ndim != 1 or arr.size == 0:
                raise ParameterError(f"sequence {i} must be a non-empty 1-D id list")
            if arr.min() < 0:
                raise ParameterError(f"sequence {i} contains negative token ids")
            if self.vocab_size is not None and arr.max() >= self.vocab_size:
                raise ParameterError(
                    f"sequence {i} has ids >= vocab_size {self.vocab_size}"
                )
            arr.setflags(write=False)
            converted.append(arr)
        if not converted:
            raise ParameterError("a corpus must contain at least one sequence")
        object.__setattr__(self, "sequences", tuple(converted))

    def __len__(self) -> int:
        return len(self.sequences)


def _as_corpus(corpus: TokenCorpus | Iterable[Sequence[int]]) -> TokenCorpus:
    if isinstance(corpus, TokenCorpus):
        return corpus
    return TokenCorpus(tuple(corpus))


@dataclasses.dataclass(frozen=True)
class LogProbRecord:
    """Total log-probability (nats) of one sequence and its token count."""

    total_logprob: float
    n_tokens: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.total_logprob):
            raise ParameterError("total_logprob must be finite")
        if self.n_tokens < 1:
            raise ParameterError("n_tokens must be at least 1")


def zipf_coefficient(corpus: TokenCorpus | Iterable[Sequence[int]]) -> float:
    """Magnitude of the log-log slope of unigram frequency against rank.

    Ranks are 1-based over tokens sorted by descending count, ties
    broken by ascending token id.  A corpus whose frequencies follow
    ``1 / rank**s`` returns ``s``.
    """
    corpus = _as_corpus(corpus)
    tokens = np.concatenate(corpus.sequences)
    ids, counts = np.unique(tokens, return_counts=True)
    if ids.size < 2:
        raise ParameterError("zipf fit needs at least 2 distinct tokens")
    order = np.lexsort((ids, -counts))
    log_rank = np.log(np.arange(1, ids.size + 1, dtype=np.float64))
    log_freq = np.log(counts[order].astype(np.float64))
    slope = np.polyfit(log_rank, log_freq, 1)[0]
    return float(abs(slope))


def _ends_with_repeat(seq: npt.NDArray[np.int64]) -> bool:
    for length in range(1, seq.size // 2 + 1):
        if np.array_equal(seq[-length:], seq[-2 * length : -length]):
            return True
    return False


def repetition_frequency(corpus: TokenCorpus | Iterable[Sequence[int]]) -> float:
    """Fraction of sequences ending in >= 2 contiguous copies of a phrase.

    Phrase lengths 1 to len//2 are checked, anchored at the end of the
    sequence.
    """
    corpus = _as_corpus(corpus)
    hits = sum(_ends_with_repeat(seq) for seq in corpus.sequences)
    return hits / len(corpus)


def _ngrams(seq: npt.NDArray[np.int64], n: int) -> Iterable[tuple[int, ...]]:
    return (tuple(seq[i : i + n].tolist()) for i in range(seq.size - n + 1))


def distinct_n(corpus: TokenCorpus | Iterable[Sequence[int]], n: int) -> float:
    """Distinct n-grams divided by total n-gram slots, pooled corpus-wide."""
    corpus = _as_corpus(corpus)
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n!r}")
    slots = sum(max(seq.size - n + 1, 0) for seq in corpus.sequences)
    if slots == 0:
        raise ParameterError(f"no sequence is long enough for {n}-grams")
    unique: set[tuple[int, ...]] = set()
    for seq in corpus.sequences:
        unique.update(_ngrams(seq, n))
    return len(unique) / slots


def _bleu_against(
    hypothesis: npt.NDArray[np.int64],
    reference_counts: list[list[Counter]],
    reference_lengths: npt.NDArray[np.int64],
    n_max: int,
) -> float:
    """BLEU of one hypothesis against pre-counted references.

    Modified precision per order (counts clipped at the max reference
    count), geometric mean over orders 1..n_max, brevity penalty using
    the reference length closest to the hypothesis (ties -> shorter).
    No smoothing: a zero precision at any order gives 0.
    """
    log_precision_sum = 0.0
    for n in range(1, n_max + 1):
        hyp_counts = Counter(_ngrams(hypothesis, n))
        total = sum(hyp_counts.values())
        if total == 0:
            return 0.0
        clipped = 0
        for gram, count in hyp_counts.items():
            best = max(counts[n - 1][gram] for counts in reference_counts)
            clipped += min(count, best)
        if clipped == 0:
            return 0.0
        log_precision_sum += math.log(clipped / total)

    gaps = np.abs(reference_lengths - hypothesis.size)
    candidates = reference_lengths[gaps == gaps.min()]
    closest = int(candidates.min())
    brevity = 1.0 if hypothesis.size > closest else math.exp(1.0 - closest / hypothesis.size)
    return brevity * math.exp(log_precision_sum / n_max)


def self_bleu(
    corpus: TokenCorpus | Iterable[Sequence[int]],
    n_max: int = 4,
    sample_size: int = 1000,
    seed: int = 0,
) -> float:
    """Mean BLEU of sampled sequences against all remaining sequences.

    ``sample_size`` hypotheses are drawn without replacement (seeded);
    each is scored with every other sequence of the corpus as a
    reference.  A request larger than the corpus is clamped with a
    warning.
    """
    corpus = _as_corpus(corpus)
    if len(corpus) < 2:
        raise ParameterError("self-BLEU needs at least 2 sequences")
    if n_max < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max!r}")
    if sample_size < 1:
        raise ParameterError(f"sample_size must be at least 1, got {sample_size!r}")
    if sample_size > len(corpus):
        warnings.warn(
            f"sample_size {sample_size} exceeds corpus size {len(corpus)}; clamping",
            UserWarning,
            stacklevel=2,
        )
        sample_size = len(corpus)

    per_sequence_counts = [
        [Counter(_ngrams(seq, n)) for n in range(1, n_max + 1)]
        for seq in corpus.sequences
    ]
    lengths = np.array([seq.size for seq in corpus.sequences], dtype=np.int64)

    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(corpus), size=sample_size, replace=False)
    scores = []
    for idx in chosen:
        reference_counts = [
            per_sequence_counts[j] for j in range(len(corpus)) if j != idx
        ]
        scores.append(
            _bleu_against(
                corpus.sequences[idx], reference_counts, np.delete(lengths, idx), n_max
            )
        )
    return float(np.mean(scores))


def perplexity(records: Sequence[LogProbRecord]) -> float:
    """Token-weighted corpus perplexity: exp of the mean negative log-prob."""
    if len(records) == 0:
        raise ParameterError("perplexity needs at least one record")
    total_logprob = sum(r.total_logprob for r in records)
    total_tokens = sum(r.n_tokens for r in records)
    return math.exp(-total_logprob / total_tokens)


def gen_ppl_gap(
    model_records: Sequence[LogProbRecord], human_records: Sequence[LogProbRecord]
) -> float:
    """Absolute difference of the two corpus perplexities."""
    return abs(perplexity(model_records) - perplexity(human_records))


def nucleus_truncate(probs: npt.ArrayLike, p: float) -> DiscreteDistribution:
    """Keep the smallest descending-probability prefix with mass >= p.

    Ties are broken by index (stable sort); the survivors are
    renormalized and everything else becomes exactly zero.
    """
    probs = divergence.as_distribution(probs)
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"p must be in (0, 1], got {p!r}")
    order = np.argsort(-probs, kind="stable")
    cumulative = np.cumsum(probs[order])
    # Slack keeps p=1 from dropping the tail when the sum is 1 - epsilon.
    cut = int(np.searchsorted(cumulative, p - 1e-12)) + 1
    keep = order[: min(cut, probs.size)]
    out = np.zeros_like(probs)
    out[keep] = probs[keep]
    return out / out.sum()
