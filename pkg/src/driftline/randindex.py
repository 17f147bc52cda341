"""Random indexing word spaces: ternary index vectors with two accumulation
strategies.

The term-term variant sums index vectors of co-occurring terms inside a
context window; the term-reflective variant goes through document vectors
(term -> containing documents -> their terms). Accumulation is plain integer
arithmetic, so training is order-independent and exactly linear in the
corpus.
"""

import hashlib
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .corpus import STOP_TOKEN, TokenSequence
from .errors import EmptyVocabularyError
from .vecspace import TernarySparseVector, compose

VARIANT_TERM_TERM = "ttri"
VARIANT_TERM_REFLECTIVE = "trri"
_VARIANTS = (VARIANT_TERM_TERM, VARIANT_TERM_REFLECTIVE)


@dataclass(frozen=True)
class RandomIndexConfig:
    dim: int = 2500
    nonzeros: int = 8
    context_radius: int = 5
    variant: str = VARIANT_TERM_TERM
    seed: int = 1

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if not 0 < self.nonzeros <= self.dim:
            raise ValueError("nonzeros must be in (0, dim]")
        if self.nonzeros % 2 != 0:
            raise ValueError("nonzeros must be even (balanced +1/-1 split)")
        if self.context_radius < 1:
            raise ValueError("context_radius must be >= 1")
        if self.variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}")


@lru_cache(maxsize=1 << 18)
def _index_vector_cached(
    term: str, seed: int, dim: int, nonzeros: int
) -> TernarySparseVector:
    digest = hashlib.sha256(f"{seed}\x00{term}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    positions = rng.choice(dim, size=nonzeros, replace=False)
    half = nonzeros // 2
    signs = np.concatenate(
        [np.ones(half, dtype=np.int64), -np.ones(nonzeros - half, dtype=np.int64)]
    )
    order = np.argsort(positions)
    return TernarySparseVector(
        dim=dim,
        indices=tuple(int(p) for p in positions[order]),
        signs=tuple(int(s) for s in signs[order]),
    )


def index_vector(term: str, config: RandomIndexConfig) -> TernarySparseVector:
    """Near-orthogonal ternary vector, reproducible from (seed, term) alone."""
    return _index_vector_cached(term, config.seed, config.dim, config.nonzeros)


class RiModel:
    """Accumulated context vectors for one window snapshot; immutable."""

    def __init__(
        self,
        terms: dict[str, int],
        context: np.ndarray,
        config: RandomIndexConfig,
        trained_at_ms: int = 0,
    ):
        context = np.asarray(context)
        context.setflags(write=False)
        self.terms = terms
        self.context = context
        self.config = config
        self.variant = config.variant
        self.trained_at_ms = trained_at_ms

    @property
    def kind(self) -> str:
        return f"ri-{self.variant}"

    @property
    def dim(self) -> int:
        return self.config.dim

    def index_vector(self, term: str) -> TernarySparseVector:
        return index_vector(term, self.config)

    def context_vector(self, term: str) -> Optional[np.ndarray]:
        row = self.terms.get(term)
        if row is None:
            return None
        return self.context[row]

    # shared naming with SkipGramModel so trackers can stay model-agnostic
    def term_vector(self, term: str) -> Optional[np.ndarray]:
        return self.context_vector(term)

    def tweet_vector(self, tokens) -> Optional[np.ndarray]:
        """Element-wise sum of context vectors; None when all tokens are OOV."""
        if isinstance(tokens, TokenSequence):
            tokens = tokens.tokens
        rows = [
            self.context[self.terms[t]]
            for t in tokens
            if t != STOP_TOKEN and t in self.terms
        ]
        if not rows:
            return None
        return compose(rows)


def _term_table(snapshot: Sequence[TokenSequence]) -> dict[str, int]:
    terms = sorted(
        {tok for seq in snapshot for tok in seq.tokens if tok != STOP_TOKEN}
    )
    if not terms:
        raise EmptyVocabularyError("no non-placeholder terms in snapshot")
    return {t: i for i, t in enumerate(terms)}


def train_ttri(
    snapshot: Sequence[TokenSequence],
    config: RandomIndexConfig,
    trained_at_ms: int = 0,
) -> RiModel:
    """Sum index vectors of every co-occurring term within the context radius.

    Windows are tweet-bounded; placeholder slots count for distance but are
    skipped as partners.
    """
    snapshot = list(snapshot)
    terms = _term_table(snapshot)
    pair_counts: Counter = Counter()
    radius = config.context_radius
    for seq in snapshot:
        toks = seq.tokens
        n = len(toks)
        for i, tok in enumerate(toks):
            if tok == STOP_TOKEN:
                continue
            wi = terms[tok]
            lo = max(0, i - radius)
            hi = min(n, i + radius + 1)
            for j in range(lo, hi):
                if j == i or toks[j] == STOP_TOKEN:
                    continue
                pair_counts[(wi, terms[toks[j]])] += 1

    context = np.zeros((len(terms), config.dim), dtype=np.int64)
    by_index = sorted(terms.items(), key=lambda kv: kv[1])
    index_vectors = [index_vector(t, config) for t, _ in by_index]
    for (wi, vi), count in pair_counts.items():
        index_vectors[vi].add_into(context[wi], weight=count)
    return RiModel(terms, context, config, trained_at_ms)


def train_trri(
    snapshot: Sequence[TokenSequence],
    config: RandomIndexConfig,
    trained_at_ms: int = 0,
) -> RiModel:
    """Reflective accumulation: index vectors -> document vectors -> terms.

    Document vectors sum index vectors per token occurrence; each term then
    sums the vectors of the distinct documents containing it.
    """
    snapshot = list(snapshot)
    terms = _term_table(snapshot)
    by_index = sorted(terms.items(), key=lambda kv: kv[1])
    index_vectors = [index_vector(t, config) for t, _ in by_index]

    context = np.zeros((len(terms), config.dim), dtype=np.int64)
    doc_vec = np.empty(config.dim, dtype=np.int64)
    for seq in snapshot:
        content = [t for t in seq.tokens if t != STOP_TOKEN]
        if not content:
            continue
        doc_vec[:] = 0
        for tok in content:
            index_vectors[terms[tok]].add_into(doc_vec)
        for tok in set(content):
            context[terms[tok]] += doc_vec
    return RiModel(terms, context, config, trained_at_ms)


def train(
    snapshot: Sequence[TokenSequence],
    config: RandomIndexConfig,
    trained_at_ms: int = 0,
) -> RiModel:
    if config.variant == VARIANT_TERM_TERM:
        return train_ttri(snapshot, config, trained_at_ms)
    return train_trri(snapshot, config, trained_at_ms)
