"""Dense and sparse ternary vector arithmetic shared by all representation models.

All similarity arithmetic happens in 64-bit floats; integer-valued vectors
(random indexing accumulators, bag-of-words) are widened on comparison.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TernarySparseVector:
    """Sparse vector over {+1, -1, 0} with entries sorted by index."""

    dim: int
    indices: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if len(self.indices) != len(self.signs):
            raise ValueError("indices and signs must align")
        prev = -1
        for idx in self.indices:
            if idx <= prev:
                raise ValueError("indices must be strictly increasing")
            if idx >= self.dim:
                raise ValueError("index out of range")
            prev = idx
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        # cached numpy views for fast accumulation; not part of equality/hash
        object.__setattr__(self, "_idx", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "_sgn", np.asarray(self.signs, dtype=np.int64))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def to_dense(self, dtype=np.int64) -> np.ndarray:
        out = np.zeros(self.dim, dtype=dtype)
        out[self._idx] = self._sgn
        return out

    def add_into(self, out: np.ndarray, weight: int = 1) -> None:
        """Accumulate weight * self into a dense array of matching dim."""
        if out.shape[-1] != self.dim:
            raise ValueError("dimension mismatch")
        out[..., self._idx] += self._sgn * weight


def _as_dense(v) -> np.ndarray:
    if isinstance(v, TernarySparseVector):
        return v.to_dense(dtype=np.float64)
    return np.asarray(v, dtype=np.float64)


def cosine(a, b) -> float:
    """Cosine similarity in [-1, 1]; zero-norm operands compare as 0.0."""
    av = _as_dense(a)
    bv = _as_dense(b)
    if av.shape != bv.shape:
        raise ValueError(f"dimension mismatch: {av.shape} vs {bv.shape}")
    denom = float(np.linalg.norm(av)) * float(np.linalg.norm(bv))
    if denom == 0.0:
        return 0.0
    return float(np.dot(av, bv) / denom)


def compose(vectors) -> np.ndarray:
    """Element-wise sum of a nonempty list of equal-length vectors.

    The sum is unnormalized; cosine comparison absorbs scale.
    """
    vectors = list(vectors)
    if not vectors:
        raise ValueError("cannot compose an empty list of vectors")
    first = np.asarray(vectors[0])
    total = first.copy()
    for v in vectors[1:]:
        arr = np.asarray(v)
        if arr.shape != first.shape:
            raise ValueError(f"dimension mismatch: {arr.shape} vs {first.shape}")
        total = total + arr
    return total


def binary_bow(token_lists) -> list[np.ndarray]:
    """Binary bag-of-words vectors over a shared vocabulary.

    Used as the model-free fallback representation for duplicate detection
    and timeline diversity. Empty token lists map to zero vectors.
    """
    token_lists = [list(toks) for toks in token_lists]
    vocab = {}
    for toks in token_lists:
        for t in toks:
            if t not in vocab:
                vocab[t] = len(vocab)
    dim = max(len(vocab), 1)
    out = []
    for toks in token_lists:
        v = np.zeros(dim, dtype=np.float64)
        for t in toks:
            v[vocab[t]] = 1.0
        out.append(v)
    return out
