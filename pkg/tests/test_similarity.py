"""Cosine scores, matrix symmetry, zero-overlap perturbation, fusion."""
import numpy as np
import pytest

from mmnews import (
    ENTITY,
    EXPECTED_DIMS,
    FeatureMatrix,
    OBJECTS,
    PERTURBATION_SCALE,
    SimilarityError,
    SimilarityMatrix,
    cosine,
    fuse,
    perturb_zero_rows,
    similarity_matrix,
)

from conftest import build_corpus, one_hot_feature_matrices, random_feature_matrices


def random_similarity(rng, ids, language="en", features=frozenset({"objects"})):
    raw = rng.standard_normal((len(ids), len(ids)))
    scores = (raw + raw.T) / 2.0
    np.fill_diagonal(scores, 0.0)
    return SimilarityMatrix(features=features, language=language, ids=ids, scores=scores)


class TestCosine:
    def test_identical_one_hot_is_one(self):
        v = np.zeros(16)
        v[3] = 1.0
        assert cosine(v, v) == 1.0

    def test_disjoint_one_hot_is_zero(self):
        u = np.zeros(16)
        w = np.zeros(16)
        u[0] = 1.0
        w[1] = 1.0
        assert cosine(u, w) == 0.0

    def test_zero_vector_scores_zero(self):
        assert cosine(np.zeros(4), np.ones(4)) == 0.0

    def test_binary_overlap_value(self):
        u = np.array([1.0, 1.0, 0.0])
        w = np.array([0.0, 1.0, 1.0])
        assert cosine(u, w) == pytest.approx(0.5, abs=1e-15)

    def test_antiparallel_is_minus_one(self):
        v = np.array([1.0, 2.0])
        assert cosine(v, -v) == pytest.approx(-1.0, abs=1e-12)

    def test_result_clipped_to_unit_interval(self):
        v = np.array([1e200, 1e200])
        assert -1.0 <= cosine(v, v) <= 1.0

    def test_dim_mismatch_rejected(self):
        with pytest.raises(SimilarityError, match="mismatch"):
            cosine(np.ones(3), np.ones(4))

    def test_non_finite_rejected(self):
        with pytest.raises(SimilarityError, match="finite"):
            cosine(np.array([np.nan, 1.0]), np.ones(2))


class TestSimilarityMatrix:
    def test_matches_pairwise_cosine(self):
        corpus = build_corpus(3, 2, languages=("en",))
        rng = np.random.default_rng(5)
        m = random_feature_matrices(corpus, "en", rng)[OBJECTS]
        sim = similarity_matrix(m)
        n = len(m.row_ids)
        for i in range(n):
            for j in range(n):
                expected = 0.0 if i == j else cosine(m.rows[i], m.rows[j])
                assert sim.scores[i, j] == pytest.approx(expected, abs=1e-12)

    def test_exactly_symmetric(self):
        corpus = build_corpus(4, 3, languages=("en",))
        rng = np.random.default_rng(6)
        m = random_feature_matrices(corpus, "en", rng)[OBJECTS]
        sim = similarity_matrix(m)
        np.testing.assert_array_equal(sim.scores, sim.scores.T)

    def test_diagonal_is_zero(self):
        corpus = build_corpus(2, 2, languages=("en",))
        rng = np.random.default_rng(7)
        sim = similarity_matrix(random_feature_matrices(corpus, "en", rng)[OBJECTS])
        np.testing.assert_array_equal(np.diag(sim.scores), 0.0)

    def test_zero_rows_score_zero_everywhere(self):
        ids = ("a", "b", "c")
        rows = np.zeros((3, EXPECTED_DIMS[OBJECTS]))
        rows[1, 5] = 1.0
        m = FeatureMatrix(feature=OBJECTS, language="en", row_ids=ids, rows=rows)
        sim = similarity_matrix(m)
        np.testing.assert_array_equal(sim.scores[0], 0.0)
        np.testing.assert_array_equal(sim.scores[:, 0], 0.0)

    def test_asymmetric_scores_rejected(self):
        scores = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(SimilarityError, match="symmetric"):
            SimilarityMatrix(
                features=frozenset({OBJECTS}), language="en", ids=("a", "b"), scores=scores
            )

    def test_shape_mismatch_rejected(self):
        with pytest.raises(SimilarityError, match="shape"):
            SimilarityMatrix(
                features=frozenset({OBJECTS}),
                language="en",
                ids=("a", "b"),
                scores=np.zeros((3, 3)),
            )

    def test_unknown_id_lookup_rejected(self):
        m = random_similarity(np.random.default_rng(0), ("a", "b"))
        with pytest.raises(SimilarityError, match="ghost"):
            m.index_of("ghost")


class TestPerturbation:
    def _entity_sim(self, overlap=False):
        """Three articles; a-b share an entity, c shares nothing."""
        rows = np.array(
            [
                [1.0, 1.0, 0.0, 0.0],
                [0.0, 1.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )
        m = FeatureMatrix(feature=ENTITY, language="en", row_ids=("a", "b", "c"), rows=rows)
        return similarity_matrix(m)

    def test_zero_scores_replaced_in_range(self):
        sim = self._entity_sim()
        out = perturb_zero_rows(sim, seed=9)
        for i, j in ((0, 2), (1, 2)):
            assert 0.0 < out.scores[i, j] < PERTURBATION_SCALE

    def test_nonzero_scores_untouched(self):
        sim = self._entity_sim()
        out = perturb_zero_rows(sim, seed=9)
        assert out.scores[0, 1] == sim.scores[0, 1]
        assert out.scores[1, 0] == sim.scores[1, 0]

    def test_diagonal_stays_zero(self):
        out = perturb_zero_rows(self._entity_sim(), seed=9)
        np.testing.assert_array_equal(np.diag(out.scores), 0.0)

    def test_symmetry_preserved(self):
        out = perturb_zero_rows(self._entity_sim(), seed=9)
        np.testing.assert_array_equal(out.scores, out.scores.T)

    def test_same_seed_bit_identical(self):
        sim = self._entity_sim()
        a = perturb_zero_rows(sim, seed=123)
        b = perturb_zero_rows(sim, seed=123)
        np.testing.assert_array_equal(a.scores, b.scores)

    def test_different_seeds_differ(self):
        sim = self._entity_sim()
        a = perturb_zero_rows(sim, seed=1)
        b = perturb_zero_rows(sim, seed=2)
        assert a.scores[0, 2] != b.scores[0, 2]

    def test_draws_keyed_by_id_pair_not_position(self):
        sim = self._entity_sim()
        reversed_ids = tuple(reversed(sim.ids))
        flipped = SimilarityMatrix(
            features=sim.features,
            language=sim.language,
            ids=reversed_ids,
            scores=sim.scores[::-1, ::-1],
        )
        out = perturb_zero_rows(sim, seed=5)
        out_flipped = perturb_zero_rows(flipped, seed=5)
        i, j = sim.ids.index("a"), sim.ids.index("c")
        fi, fj = reversed_ids.index("a"), reversed_ids.index("c")
        assert out.scores[i, j] == out_flipped.scores[fi, fj]

    def test_warns_when_injection_could_reorder(self):
        scores = np.array([[0.0, 0.0, 5e-8], [0.0, 0.0, 0.0], [5e-8, 0.0, 0.0]])
        sim = SimilarityMatrix(
            features=frozenset({ENTITY}), language="en", ids=("a", "b", "c"), scores=scores
        )
        with pytest.warns(RuntimeWarning, match="smallest nonzero"):
            perturb_zero_rows(sim, seed=40)

    def test_bad_seed_rejected(self):
        with pytest.raises(SimilarityError, match="seed"):
            perturb_zero_rows(self._entity_sim(), seed=-1)
        with pytest.raises(SimilarityError, match="seed"):
            perturb_zero_rows(self._entity_sim(), seed=2**64)


class TestFusion:
    def test_singleton_fuse_is_bit_exact(self):
        m = random_similarity(np.random.default_rng(1), ("a", "b", "c"))
        fused = fuse([m])
        np.testing.assert_array_equal(fused.scores, m.scores)
        assert fused.ids == m.ids
        assert fused.features == m.features

    def test_permutation_invariant_bit_exact(self):
        rng = np.random.default_rng(2)
        ids = tuple(f"a{i}" for i in range(6))
        ms = [
            random_similarity(rng, ids, features=frozenset({f}))
            for f in ("objects", "places", "geolocation")
        ]
        forward = fuse(ms)
        backward = fuse(list(reversed(ms)))
        shuffled = fuse([ms[1], ms[2], ms[0]])
        np.testing.assert_array_equal(forward.scores, backward.scores)
        np.testing.assert_array_equal(forward.scores, shuffled.scores)

    def test_agrees_with_entrywise_mean(self):
        rng = np.random.default_rng(3)
        ids = tuple(f"a{i}" for i in range(5))
        ms = [random_similarity(rng, ids) for _ in range(5)]
        fused = fuse(ms)
        naive = sum(m.scores for m in ms) / 5.0
        np.testing.assert_allclose(fused.scores, naive, rtol=0, atol=1e-12)

    def test_features_are_union(self):
        rng = np.random.default_rng(4)
        ids = ("a", "b")
        m1 = random_similarity(rng, ids, features=frozenset({"objects"}))
        m2 = random_similarity(rng, ids, features=frozenset({"places"}))
        assert fuse([m1, m2]).features == {"objects", "places"}

    def test_idempotent_on_identical_matrices(self):
        m = random_similarity(np.random.default_rng(8), ("a", "b", "c"))
        fused = fuse([m, m, m])
        np.testing.assert_allclose(fused.scores, m.scores, rtol=0, atol=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(SimilarityError, match="at least one"):
            fuse([])

    def test_language_mismatch_rejected(self):
        rng = np.random.default_rng(9)
        m1 = random_similarity(rng, ("a", "b"), language="en")
        m2 = random_similarity(rng, ("a", "b"), language="de")
        with pytest.raises(SimilarityError, match="language"):
            fuse([m1, m2])

    def test_id_order_mismatch_rejected(self):
        rng = np.random.default_rng(10)
        m1 = random_similarity(rng, ("a", "b"))
        m2 = random_similarity(rng, ("b", "a"))
        with pytest.raises(SimilarityError, match="id"):
            fuse([m1, m2])


class TestOneHotSeparation:
    def test_same_event_scores_one_cross_event_zero(self):
        corpus = build_corpus(3, 2, languages=("en",))
        sims = {
            f: similarity_matrix(m)
            for f, m in one_hot_feature_matrices(corpus, "en").items()
        }
        ids = corpus.partition("en")
        for sim in sims.values():
            for i, a in enumerate(ids):
                for j, b in enumerate(ids):
                    if i == j:
                        continue
                    same = corpus.article(a).event == corpus.article(b).event
                    assert sim.scores[i, j] == (1.0 if same else 0.0)
