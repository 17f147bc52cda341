import numpy as np
import pytest

from driftline.corpus import STOP_TOKEN, TokenSequence
from driftline.errors import EmptyVocabularyError
from driftline.randindex import (
    RandomIndexConfig,
    index_vector,
    train,
    train_trri,
    train_ttri,
)
from driftline.vecspace import cosine

CFG = RandomIndexConfig(dim=256, nonzeros=8, context_radius=5, seed=7)


def seqs(*token_groups):
    return [TokenSequence(tuple(g), str(i)) for i, g in enumerate(token_groups)]


def dense_index_matrix(terms, config):
    return np.stack([index_vector(t, config).to_dense() for t in terms])


def brute_force_cooccurrence(corpus, terms, radius):
    """Independent count matrix: rows = focus terms, cols = context terms."""
    tindex = {t: i for i, t in enumerate(terms)}
    f = np.zeros((len(terms), len(terms)), dtype=np.int64)
    for seq in corpus:
        toks = seq.tokens
        for i, a in enumerate(toks):
            if a == STOP_TOKEN:
                continue
            for j, b in enumerate(toks):
                if i == j or b == STOP_TOKEN:
                    continue
                if abs(i - j) <= radius:
                    f[tindex[a], tindex[b]] += 1
    return f


class TestIndexVector:
    def test_deterministic(self):
        assert index_vector("storm", CFG) == index_vector("storm", CFG)

    def test_signs_balance(self):
        iv = index_vector("anything", CFG)
        assert sum(iv.signs) == 0
        assert iv.nnz == CFG.nonzeros

    def test_seed_changes_vector(self):
        other = RandomIndexConfig(dim=256, nonzeros=8, seed=8)
        assert index_vector("storm", CFG) != index_vector("storm", other)

    def test_near_orthogonality_monte_carlo(self):
        # with 8 nonzeros in 2500 dims, ~2.5% of random pairs share a
        # position (|cos| = 1/8); everything else is exactly orthogonal
        config = RandomIndexConfig(dim=2500, nonzeros=8, seed=1)
        cos = np.array(
            [
                cosine(
                    index_vector(f"term{2 * k}", config),
                    index_vector(f"term{2 * k + 1}", config),
                )
                for k in range(1000)
            ]
        )
        assert abs(cos.mean()) <= 0.01
        assert (cos == 0.0).mean() >= 0.95
        assert (np.abs(cos) <= 0.13).mean() >= 0.99

    def test_nonzeros_must_be_even(self):
        with pytest.raises(ValueError):
            RandomIndexConfig(dim=100, nonzeros=7)


class TestTermTerm:
    def test_shared_context_aligns_exactly(self):
        n1, n2 = 3, 5
        corpus = seqs(*([["a", "b"]] * n1 + [["c", "b"]] * n2))
        model = train_ttri(corpus, CFG)
        idx_b = index_vector("b", CFG).to_dense()
        np.testing.assert_array_equal(model.context_vector("a"), n1 * idx_b)
        np.testing.assert_array_equal(model.context_vector("c"), n2 * idx_b)
        assert cosine(model.context_vector("a"), model.context_vector("c")) == pytest.approx(1.0)

    def test_single_token_corpus_all_zero(self):
        model = train_ttri(seqs(["a"]), CFG)
        np.testing.assert_array_equal(model.context_vector("a"), np.zeros(CFG.dim))

    def test_matches_brute_force_projection(self):
        corpus = seqs(
            ["the", "storm", "made", "landfall"],
            ["storm", STOP_TOKEN, "surge", "warning"],
            ["made", "landfall", "storm"],
            ["warning", "issued", "surge", "the", "storm"],
        )
        model = train_ttri(corpus, CFG)
        terms = sorted(model.terms, key=model.terms.get)
        f = brute_force_cooccurrence(corpus, terms, CFG.context_radius)
        r = dense_index_matrix(terms, CFG)
        np.testing.assert_array_equal(model.context, f @ r)

    def test_placeholder_counts_for_distance(self):
        # radius 1: the placeholder blocks the only would-be pair
        cfg = RandomIndexConfig(dim=64, nonzeros=4, context_radius=1, seed=3)
        model = train_ttri(seqs(["a", STOP_TOKEN, "b"]), cfg)
        np.testing.assert_array_equal(model.context_vector("a"), np.zeros(64))
        np.testing.assert_array_equal(model.context_vector("b"), np.zeros(64))

    def test_linearity_over_corpus_union(self):
        part_a = seqs(["x", "y", "z"], ["x", "w"])
        part_b = seqs(["y", "z"], ["w", "x", "y"])
        joint = train_ttri(part_a + part_b, CFG)
        ma = train_ttri(part_a, CFG)
        mb = train_ttri(part_b, CFG)
        for term in joint.terms:
            va = ma.context_vector(term)
            vb = mb.context_vector(term)
            total = np.zeros(CFG.dim, dtype=np.int64)
            if va is not None:
                total += va
            if vb is not None:
                total += vb
            np.testing.assert_array_equal(joint.context_vector(term), total)

    def test_deterministic(self):
        corpus = seqs(["a", "b", "c"], ["b", "c", "d"])
        m1 = train_ttri(corpus, CFG)
        m2 = train_ttri(corpus, CFG)
        assert m1.terms == m2.terms
        np.testing.assert_array_equal(m1.context, m2.context)

    def test_empty_vocabulary(self):
        with pytest.raises(EmptyVocabularyError):
            train_ttri([], CFG)
        with pytest.raises(EmptyVocabularyError):
            train_ttri(seqs([STOP_TOKEN, STOP_TOKEN]), CFG)


class TestTermReflective:
    def test_single_document_unrolled(self):
        model = train_trri(seqs(["a", "b"]), CFG)
        expected = index_vector("a", CFG).to_dense() + index_vector("b", CFG).to_dense()
        np.testing.assert_array_equal(model.context_vector("a"), expected)
        np.testing.assert_array_equal(model.context_vector("b"), expected)

    def test_absent_term_not_in_model(self):
        model = train_trri(seqs(["a", "b"]), CFG)
        assert model.context_vector("zzz") is None

    def test_three_document_hand_unroll(self):
        corpus = seqs(["a", "b"], ["b", "c", "c"], ["a", STOP_TOKEN, "c"])
        model = train_trri(corpus, CFG)
        terms = sorted(model.terms, key=model.terms.get)
        r = dense_index_matrix(terms, CFG)
        tindex = {t: i for i, t in enumerate(terms)}
        # step 2: document vectors sum index vectors per occurrence
        doc_vecs = []
        for seq in corpus:
            content = [t for t in seq.tokens if t != STOP_TOKEN]
            doc_vecs.append(sum(r[tindex[t]] for t in content))
        # step 3: each term sums the vectors of distinct containing documents
        for term in terms:
            expected = np.zeros(CFG.dim, dtype=np.int64)
            for seq, dv in zip(corpus, doc_vecs):
                if term in seq.tokens:
                    expected += dv
            np.testing.assert_array_equal(model.context_vector(term), expected)

    def test_variant_dispatch(self):
        cfg_t = RandomIndexConfig(dim=64, nonzeros=4, seed=2, variant="ttri")
        cfg_r = RandomIndexConfig(dim=64, nonzeros=4, seed=2, variant="trri")
        corpus = seqs(["a", "b"])
        assert train(corpus, cfg_t).variant == "ttri"
        assert train(corpus, cfg_r).variant == "trri"
        assert train(corpus, cfg_r).kind == "ri-trri"


class TestJohnsonLindenstrauss:
    def test_projection_preserves_cosine_structure(self):
        rng = np.random.default_rng(123)
        n_terms = 30
        config = RandomIndexConfig(dim=2500, nonzeros=8, seed=11)
        terms = [f"t{i}" for i in range(n_terms)]
        f = rng.integers(0, 20, size=(n_terms, n_terms)).astype(np.float64)
        np.fill_diagonal(f, 0)
        r = dense_index_matrix(terms, config).astype(np.float64)
        f_prime = f @ r
        orig, proj = [], []
        for i in range(n_terms):
            for j in range(i + 1, n_terms):
                orig.append(cosine(f[i], f[j]))
                proj.append(cosine(f_prime[i], f_prime[j]))
        r_coef = np.corrcoef(orig, proj)[0, 1]
        assert r_coef >= 0.9


class TestTweetVector:
    @pytest.fixture
    def model(self):
        return train_ttri(seqs(["a", "b", "c"], ["a", "c"]), CFG)

    def test_all_oov(self, model):
        assert model.tweet_vector(("zz", "yy")) is None

    def test_singleton(self, model):
        np.testing.assert_array_equal(
            model.tweet_vector(("a",)), model.context_vector("a")
        )

    def test_two_term_sum(self, model):
        expected = model.context_vector("a") + model.context_vector("b")
        np.testing.assert_array_equal(
            model.tweet_vector(TokenSequence(("a", STOP_TOKEN, "b"), "t")), expected
        )

    def test_context_matrix_immutable(self, model):
        with pytest.raises(ValueError):
            model.context[0, 0] = 5
