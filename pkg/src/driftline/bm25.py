"""Okapi BM25 scoring with corpus statistics rebuilt from window snapshots.

Placeholder tokens count toward document length but never toward term
frequencies, so stopword slots still exert length normalization.
"""

import math
from collections import Counter
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from .corpus import STOP_TOKEN, TokenSequence


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75
    floor_negative_idf: bool = False

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must be in [0, 1]")


@dataclass(frozen=True)
class Bm25Stats:
    """Document frequencies over one window snapshot; immutable after build."""

    n_docs: int
    doc_freq: Mapping[str, int]
    avgdl: float
    built_at_ms: int = 0

    def df(self, term: str) -> int:
        return self.doc_freq.get(term, 0)


def build_stats(
    snapshot: Iterable[TokenSequence], built_at_ms: int = 0
) -> Bm25Stats:
    """Count N, per-term document frequency and average document length."""
    docs = list(snapshot)
    if not docs:
        raise ValueError("cannot build statistics from an empty snapshot")
    df: Counter = Counter()
    total_len = 0
    for seq in docs:
        total_len += len(seq.tokens)
        df.update(set(seq.content_tokens))
    avgdl = total_len / len(docs)
    if avgdl <= 0.0:
        raise ValueError("all documents are empty; avgdl must be positive")
    return Bm25Stats(
        n_docs=len(docs),
        doc_freq=MappingProxyType(dict(df)),
        avgdl=avgdl,
        built_at_ms=built_at_ms,
    )


def idf(stats: Bm25Stats, term: str, floor_negative: bool = False) -> float:
    """log((N - n + 0.5) / (n + 0.5)); unseen terms use n = 0."""
    n = stats.df(term)
    value = math.log((stats.n_docs - n + 0.5) / (n + 0.5))
    if floor_negative and value < 0.0:
        return 0.0
    return value


def score(
    stats: Bm25Stats,
    params: Bm25Params,
    query_terms: Iterable[str],
    doc: TokenSequence,
) -> float:
    """BM25 score of a document against a bag of query terms.

    Query terms absent from the document contribute exactly zero.
    """
    tf = Counter(doc.content_tokens)
    doc_len = len(doc.tokens)
    norm = params.k1 * (1.0 - params.b + params.b * doc_len / stats.avgdl)
    total = 0.0
    for term in query_terms:
        if term == STOP_TOKEN:
            continue
        f = tf.get(term, 0)
        if f == 0:
            continue
        total += (
            idf(stats, term, params.floor_negative_idf)
            * f
            * (params.k1 + 1.0)
            / (f + norm)
        )
    return total
