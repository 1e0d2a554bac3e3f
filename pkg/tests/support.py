"""Shared helpers for the test suite."""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np


def random_simplex(rng: np.random.Generator, k: int) -> np.ndarray:
    """A random point on the k-simplex (flat Dirichlet)."""
    return rng.dirichlet(np.ones(k))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def simplex_grid(k: int, units: int) -> np.ndarray:
    """Every distribution over k buckets whose entries are multiples of
    1/units — the exhaustive lattice used for dominance searches."""
    rows = np.array(list(_compositions(units, k)), dtype=np.float64)
    return rows / units


# ---------------------------------------------------------------------------
# Independent reference implementations (oracles) over plain python lists.
# These deliberately avoid numpy and any code under src/.


def reference_repetition(sequences) -> float:
    """Fraction of sequences ending in two contiguous copies of a phrase."""
    hits = 0
    for seq in sequences:
        seq = list(seq)
        for length in range(1, len(seq) // 2 + 1):
            if seq[-length:] == seq[-2 * length : -length]:
                hits += 1
                break
    return hits / len(sequences)


def reference_distinct_n(sequences, n: int) -> float:
    """Unique n-grams over total n-gram slots, pooled."""
    grams = set()
    slots = 0
    for seq in sequences:
        seq = list(seq)
        for i in range(len(seq) - n + 1):
            grams.add(tuple(seq[i : i + n]))
            slots += 1
    return len(grams) / slots


def _reference_bleu(hyp, refs, n_max: int) -> float:
    import math

    hyp = list(hyp)
    log_sum = 0.0
    for n in range(1, n_max + 1):
        hyp_grams = [tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1)]
        if not hyp_grams:
            return 0.0
        counts: dict = {}
        for gram in hyp_grams:
            counts[gram] = counts.get(gram, 0) + 1
        clipped = 0
        for gram, count in counts.items():
            best = 0
            for ref in refs:
                ref = list(ref)
                ref_grams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
                best = max(best, ref_grams.count(gram))
            clipped += min(count, best)
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / len(hyp_grams))
    closest = sorted((abs(len(list(r)) - len(hyp)), len(list(r))) for r in refs)[0][1]
    brevity = 1.0 if len(hyp) > closest else math.exp(1.0 - closest / len(hyp))
    return brevity * math.exp(log_sum / n_max)


def reference_self_bleu(sequences, n_max: int) -> float:
    """Mean BLEU of every sequence against all the others (full sample)."""
    sequences = [list(s) for s in sequences]
    scores = []
    for i, hyp in enumerate(sequences):
        refs = sequences[:i] + sequences[i + 1 :]
        scores.append(_reference_bleu(hyp, refs, n_max))
    return sum(scores) / len(scores)
