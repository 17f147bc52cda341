"""Timeline post-processing: near-duplicate removal and SumBasic selection.

Both passes operate on preprocessed content tokens (no placeholder slots).
Duplicate detection defaults to binary bag-of-words vectors so it works on
timelines loaded from disk without any trained model; a model-backed vector
function can be supplied instead.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .corpus import load_stoplist, preprocess_text
from .vecspace import binary_bow, cosine


@dataclass(frozen=True)
class SummaryConfig:
    target_length: int
    dup_threshold: float = 0.9

    def __post_init__(self):
        if self.target_length < 1:
            raise ValueError("target_length must be >= 1")
        if not 0.0 <= self.dup_threshold <= 1.0:
            raise ValueError("dup_threshold must be in [0, 1]")


def _entry_tokens(entries, stoplist) -> list[tuple[str, ...]]:
    return [
        preprocess_text(e.tweet.text, stoplist, placeholder_mode=False).tokens
        for e in entries
    ]


def dedupe(
    entries: Sequence,
    config: SummaryConfig,
    stoplist: Optional[frozenset] = None,
    vector_fn: Optional[Callable] = None,
) -> list:
    """Drop entries too similar to an earlier kept entry.

    Scans chronologically; exact text duplicates always go, near-duplicates
    go when cosine to any kept entry reaches the threshold.
    """
    if stoplist is None:
        stoplist = load_stoplist()
    entries = list(entries)
    tokens = _entry_tokens(entries, stoplist)
    if vector_fn is not None:
        vectors = [vector_fn(t) for t in tokens]
    else:
        vectors = binary_bow(tokens)

    kept = []
    kept_texts = set()
    kept_vectors = []
    for entry, vec in zip(entries, vectors):
        text = entry.tweet.text.strip()
        if text in kept_texts:
            continue
        if vec is not None and any(
            kv is not None and cosine(vec, kv) >= config.dup_threshold
            for kv in kept_vectors
        ):
            continue
        kept.append(entry)
        kept_texts.add(text)
        kept_vectors.append(vec)
    return kept


def sumbasic(
    entries: Sequence,
    config: SummaryConfig,
    stoplist: Optional[frozenset] = None,
) -> list:
    """Greedy frequency-driven selection of up to target_length entries.

    Repeatedly takes the highest-probability word, picks the best
    average-probability entry containing it, then squares the probabilities
    of that entry's words to discourage repetition. Word ties break
    lexicographically, entry ties by earlier timestamp. The result is
    re-sorted chronologically.
    """
    if stoplist is None:
        stoplist = load_stoplist()
    entries = list(entries)
    if len(entries) <= config.target_length:
        return list(entries)
    tokens = _entry_tokens(entries, stoplist)

    probs: dict[str, float] = {}
    total = 0
    for toks in tokens:
        total += len(toks)
        for t in toks:
            probs[t] = probs.get(t, 0.0) + 1.0
    for t in probs:
        probs[t] /= total

    remaining = [
        (i, entries[i], toks) for i, toks in enumerate(tokens) if toks
    ]
    picked: list[tuple[int, object]] = []
    while len(picked) < config.target_length and remaining:
        chosen = None
        for word in sorted(probs, key=lambda w: (-probs[w], w)):
            containing = [item for item in remaining if word in item[2]]
            if containing:
                chosen = min(
                    containing,
                    key=lambda item: (
                        -sum(probs[t] for t in item[2]) / len(item[2]),
                        item[1].tweet.timestamp_ms,
                        item[0],
                    ),
                )
                break
        if chosen is None:
            break
        picked.append((chosen[0], chosen[1]))
        remaining.remove(chosen)
        for t in set(chosen[2]):
            probs[t] = probs[t] ** 2

    picked.sort(key=lambda p: (p[1].tweet.timestamp_ms, p[0]))
    return [entry for _, entry in picked]


def summarize(
    entries: Sequence,
    config: SummaryConfig,
    stoplist: Optional[frozenset] = None,
    vector_fn: Optional[Callable] = None,
) -> list:
    """Dedupe then SumBasic-select; the standard post-processing pipeline."""
    return sumbasic(dedupe(entries, config, stoplist, vector_fn), config, stoplist)
