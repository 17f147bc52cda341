"""Skip-gram word embeddings trained with a Huffman-coded hierarchical softmax.

Training maximizes the average log probability of context words given each
center word, with a per-position context width sampled uniformly from
1..max_context. Tweets are sentence boundaries; stopword placeholders hold
their positions but never participate in training pairs. There is no
negative sampling and no frequent-word subsampling.
"""

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import STOP_TOKEN, TokenSequence
from .errors import EmptyVocabularyError, TrainingError
from .vecspace import compose


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 200
    max_context: int = 5
    epochs: int = 15
    alpha: float = 0.025
    min_count: int = 2
    seed: int = 1

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.max_context < 1:
            raise ValueError("max_context must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")


@dataclass(frozen=True)
class VocabWord:
    term: str
    index: int
    count: int
    code: tuple[int, ...]
    path: tuple[int, ...]


class Vocabulary:
    """Retained terms with counts and their Huffman codes/paths.

    Terms are indexed by descending count (ties by term). ``code`` holds the
    branch bits root-to-leaf and ``path`` the inner-node indices alongside;
    both are empty for a single-term vocabulary.
    """

    def __init__(self, words: dict[str, VocabWord], total_tokens: int):
        self._words = words
        self.total_tokens = total_tokens
        self._by_index = sorted(words.values(), key=lambda w: w.index)

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, term: str) -> bool:
        return term in self._words

    def __getitem__(self, term: str) -> VocabWord:
        return self._words[term]

    def get(self, term: str) -> Optional[VocabWord]:
        return self._words.get(term)

    @property
    def terms(self) -> list[str]:
        return [w.term for w in self._by_index]

    def by_index(self, index: int) -> VocabWord:
        return self._by_index[index]


def _huffman(counts: list[int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Codes and inner-node paths for leaves with the given weights.

    Ties pop by leaf order first (leaves are pre-sorted by count then term),
    then by inner-node creation order, so the tree is deterministic.
    """
    v = len(counts)
    if v == 1:
        return [((), ())]
    parent = [0] * (2 * v - 1)
    branch = [0] * (2 * v - 1)
    heap = [(c, i, i) for i, c in enumerate(counts)]
    heapq.heapify(heap)
    next_id = v
    while len(heap) > 1:
        c1, _, n1 = heapq.heappop(heap)
        c2, _, n2 = heapq.heappop(heap)
        parent[n1] = next_id
        parent[n2] = next_id
        branch[n1] = 0
        branch[n2] = 1
        heapq.heappush(heap, (c1 + c2, next_id, next_id))
        next_id += 1
    root = next_id - 1
    out = []
    for leaf in range(v):
        code = []
        path = []
        node = leaf
        while node != root:
            code.append(branch[node])
            path.append(parent[node] - v)
            node = parent[node]
        code.reverse()
        path.reverse()
        out.append((tuple(code), tuple(path)))
    return out


def build_vocab(
    snapshot: Iterable[TokenSequence], min_count: int = 2
) -> Vocabulary:
    """Count terms, drop those below min_count, and build the Huffman tree.

    The stopword placeholder never enters the vocabulary.
    """
    counts: dict[str, int] = {}
    for seq in snapshot:
        for tok in seq.tokens:
            if tok == STOP_TOKEN:
                continue
            counts[tok] = counts.get(tok, 0) + 1
    retained = [(term, c) for term, c in counts.items() if c >= min_count]
    if not retained:
        raise EmptyVocabularyError(
            f"vocabulary empty: no term occurs at least {min_count} times"
        )
    retained.sort(key=lambda tc: (-tc[1], tc[0]))
    codes = _huffman([c for _, c in retained])
    words = {
        term: VocabWord(term, i, c, codes[i][0], codes[i][1])
        for i, (term, c) in enumerate(retained)
    }
    return Vocabulary(words, total_tokens=sum(c for _, c in retained))


class SkipGramModel:
    """Immutable trained embedding table plus the inner-node weights."""

    kind = "sgns"

    def __init__(
        self,
        vocab: Vocabulary,
        embeddings: np.ndarray,
        inner: Optional[np.ndarray],
        config: SkipGramConfig,
        trained_at_ms: int = 0,
    ):
        embeddings = np.asarray(embeddings, dtype=np.float64)
        embeddings.setflags(write=False)
        if inner is not None:
            inner = np.asarray(inner, dtype=np.float64)
            inner.setflags(write=False)
        self.vocab = vocab
        self.embeddings = embeddings
        self.inner = inner
        self.config = config
        self.trained_at_ms = trained_at_ms

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def term_vector(self, term: str) -> Optional[np.ndarray]:
        word = self.vocab.get(term)
        if word is None:
            return None
        return self.embeddings[word.index]

    def tweet_vector(self, tokens) -> Optional[np.ndarray]:
        """Element-wise sum of in-vocabulary token vectors; None if all OOV."""
        if isinstance(tokens, TokenSequence):
            tokens = tokens.tokens
        rows = [
            self.embeddings[self.vocab[t].index]
            for t in tokens
            if t != STOP_TOKEN and t in self.vocab
        ]
        if not rows:
            return None
        return compose(rows)


def _sentence_indices(seq: TokenSequence, vocab: Vocabulary) -> list[int]:
    """Vocabulary indices with -1 for placeholder slots; rare terms collapse."""
    out = []
    for tok in seq.tokens:
        if tok == STOP_TOKEN:
            out.append(-1)
        else:
            word = vocab.get(tok)
            if word is not None:
                out.append(word.index)
    return out


def train(
    snapshot: Sequence[TokenSequence],
    config: SkipGramConfig,
    trained_at_ms: int = 0,
) -> SkipGramModel:
    """SGD over (center, context) pairs with hierarchical softmax outputs.

    The learning rate decays linearly from alpha to alpha/10000 over the
    planned number of center-word visits. Deterministic for a fixed seed.
    Per-position context widths are drawn in one batch per epoch to keep
    the inner loop free of generator calls.
    """
    vocab = build_vocab(snapshot, config.min_count)
    v = len(vocab)
    dim = config.dim
    rng = np.random.default_rng(config.seed)

    syn0 = (rng.random((v, dim)) - 0.5) / dim
    syn1 = np.zeros((max(v - 1, 0), dim))

    paths = [np.asarray(vocab.by_index(i).path, dtype=np.int64) for i in range(v)]
    neg_codes = [
        1.0 - np.asarray(vocab.by_index(i).code, dtype=np.float64) for i in range(v)
    ]
    sentences = [_sentence_indices(seq, vocab) for seq in snapshot]
    visits_per_epoch = sum(1 for s in sentences for c in s if c >= 0)

    alpha0 = config.alpha
    min_alpha = alpha0 * 1e-4
    planned = config.epochs * vocab.total_tokens
    processed = 0
    window = config.max_context
    alpha_step = alpha0 / planned if planned else 0.0

    with np.errstate(over="ignore"):
        for epoch in range(config.epochs):
            widths = rng.integers(1, window + 1, size=visits_per_epoch).tolist()
            k = 0
            for sent in sentences:
                n = len(sent)
                for pos in range(n):
                    center = sent[pos]
                    if center < 0:
                        continue
                    alpha = alpha0 - alpha_step * processed
                    if alpha < min_alpha:
                        alpha = min_alpha
                    processed += 1
                    b = widths[k]
                    k += 1
                    lo = pos - b
                    if lo < 0:
                        lo = 0
                    hi = pos + b + 1
                    if hi > n:
                        hi = n
                    l1 = syn0[center]
                    for j in range(lo, hi):
                        if j == pos:
                            continue
                        target = sent[j]
                        if target < 0:
                            continue
                        path = paths[target]
                        if path.size == 0:
                            continue
                        l2 = syn1[path]
                        g = neg_codes[target] - 1.0 / (1.0 + np.exp(-(l2 @ l1)))
                        g *= alpha
                        syn1[path] = l2 + g[:, None] * l1
                        l1 += g @ l2
            if not (np.all(np.isfinite(syn0)) and np.all(np.isfinite(syn1))):
                raise TrainingError(
                    f"non-finite update after epoch {epoch + 1}; "
                    f"alpha={alpha0}, vocab={v}, tokens={vocab.total_tokens}"
                )

    return SkipGramModel(vocab, syn0, syn1, config, trained_at_ms)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, -np.log1p(np.exp(-np.abs(x))), x - np.log1p(np.exp(x)))


def hs_logprob(
    center_vec: np.ndarray,
    inner: np.ndarray,
    code: Sequence[int],
    path: Sequence[int],
) -> float:
    """log p(leaf | center) along one Huffman path.

    Each step multiplies in sigma(x) for branch bit 0 and sigma(-x) for
    bit 1, where x is the inner node's activation of the center vector.
    """
    code = np.asarray(code, dtype=np.float64)
    path = np.asarray(path, dtype=np.int64)
    if path.size == 0:
        return 0.0
    x = inner[path] @ center_vec
    signs = 1.0 - 2.0 * code
    return float(np.sum(_log_sigmoid(signs * x)))


def hs_gradients(
    center_vec: np.ndarray,
    inner: np.ndarray,
    code: Sequence[int],
    path: Sequence[int],
) -> tuple[float, np.ndarray, np.ndarray]:
    """(log p, d/d center_vec, d/d inner[path]) for one Huffman path.

    The same per-node error (1 - bit - sigma(x)) drives the SGD updates in
    train(); tests compare these gradients against finite differences.
    """
    code = np.asarray(code, dtype=np.float64)
    path = np.asarray(path, dtype=np.int64)
    if path.size == 0:
        return 0.0, np.zeros_like(center_vec), np.zeros((0, center_vec.size))
    l2 = inner[path]
    x = l2 @ center_vec
    signs = 1.0 - 2.0 * code
    logp = float(np.sum(_log_sigmoid(signs * x)))
    err = (1.0 - code) - _sigmoid(x)
    grad_center = err @ l2
    grad_inner = err[:, None] * center_vec
    return logp, grad_center, grad_inner


def predict_logprob(model: SkipGramModel, center: str, target: str) -> float:
    """log p(target | center) under the trained hierarchical softmax."""
    if model.inner is None:
        raise TrainingError("model snapshot lacks inner-node weights")
    c = model.vocab[center]
    t = model.vocab[target]
    return hs_logprob(model.embeddings[c.index], model.inner, t.code, t.path)
