import math

import numpy as np
import pytest

from support import bce_loss_loop, dot_matrix_loop, ranking_oracle, softmax_scalar
from vloc import (
    LocalizationResult,
    ScoreConfig,
    contrastive_loss,
    localize,
    rank_of,
    similarity_matrix,
)


class TestScoreConfig:
    def test_defaults(self):
        cfg = ScoreConfig()
        assert cfg.normalize is True and cfg.temperature == 1.0

    @pytest.mark.parametrize("temp", [0.0, -1.0, math.inf, math.nan])
    def test_bad_temperature(self, temp):
        with pytest.raises(ValueError, match="temperature"):
            ScoreConfig(temperature=temp)


class TestSimilarityMatrix:
    def test_orthonormal_basis(self):
        out = similarity_matrix([[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])
        assert np.allclose(out, [[1.0, 0.0]])

    def test_identical_unit_vectors_have_unit_diagonal(self):
        rng = np.random.default_rng(1)
        vecs = rng.standard_normal((5, 8))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        out = similarity_matrix(vecs, vecs)
        assert np.allclose(np.diag(out), 1.0)
        for i in range(5):
            assert np.argmax(out[i]) == i

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(2)
        texts = rng.standard_normal((3, 6))
        images = rng.standard_normal((4, 6))
        cfg = ScoreConfig(normalize=False)
        out = similarity_matrix(texts, images, cfg)
        assert np.max(np.abs(out - dot_matrix_loop(texts, images))) < 1e-6

    def test_temperature_scales_logits(self):
        texts = [[1.0, 0.0]]
        images = [[0.5, 0.5]]
        base = similarity_matrix(texts, images, ScoreConfig(normalize=False))
        hot = similarity_matrix(texts, images, ScoreConfig(normalize=False, temperature=3.0))
        assert np.allclose(hot, 3.0 * base)

    def test_normalized_entries_bounded_by_temperature(self):
        rng = np.random.default_rng(3)
        for temp in (0.5, 1.0, 4.0):
            out = similarity_matrix(
                rng.standard_normal((6, 5)) * 10,
                rng.standard_normal((7, 5)) * 10,
                ScoreConfig(temperature=temp),
            )
            assert np.all(np.abs(out) <= temp * (1 + 1e-12))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            similarity_matrix([[1.0, 0.0]], [[1.0, 0.0, 0.0]])

    def test_zero_vector_with_normalize(self):
        with pytest.raises(ValueError, match="zero vector"):
            similarity_matrix([[0.0, 0.0]], [[1.0, 0.0]])

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            similarity_matrix(np.empty((0, 4)), [[1.0] * 4])


class TestLocalize:
    def test_uniform_when_logits_equal(self):
        vecs = np.eye(4)
        query = np.ones(4)
        result = localize(query, ["a", "b", "c", "d"], vecs)
        assert np.allclose(result.probs, 0.25)
        assert result.ranking == ("a", "b", "c", "d")  # tie-break on id

    def test_single_candidate(self):
        result = localize([1.0, 0.0], ["only"], [[0.3, 0.1]])
        assert result.probs.tolist() == [1.0]
        assert result.ranking == ("only",)

    def test_softmax_values_against_scalar_oracle(self):
        # candidate vectors engineered to give logits [2, 1, 0]
        query = np.array([1.0, 0.0, 0.0])
        vecs = np.array([[2.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0]])
        result = localize(query, ["a", "b", "c"], vecs, ScoreConfig(normalize=False))
        expected = softmax_scalar([2.0, 1.0, 0.0])
        assert np.max(np.abs(result.probs - expected)) < 1e-4
        assert np.allclose(result.probs, [0.6652, 0.2447, 0.0900], atol=1e-4)

    def test_probs_sum_to_one(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            m = int(rng.integers(1, 12))
            vecs = rng.standard_normal((m, 6))
            result = localize(rng.standard_normal(6), [f"v{i}" for i in range(m)], vecs)
            assert abs(result.probs.sum() - 1.0) < 1e-9
            assert np.all(result.probs > 0)

    def test_ranking_probabilities_nonincreasing(self):
        rng = np.random.default_rng(5)
        vecs = rng.standard_normal((9, 4))
        result = localize(rng.standard_normal(4), [f"v{i}" for i in range(9)], vecs)
        by_id = dict(zip(result.candidate_ids, result.probs))
        ranked = [by_id[cid] for cid in result.ranking]
        assert all(a >= b for a, b in zip(ranked, ranked[1:]))

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            m = int(rng.integers(2, 15))
            ids = [f"v{i:02d}" for i in range(m)]
            vecs = rng.standard_normal((m, 5))
            result = localize(rng.standard_normal(5), ids, vecs)
            assert list(result.ranking) == ranking_oracle(ids, result.probs)

    def test_order_equivariance(self):
        rng = np.random.default_rng(7)
        ids = [f"v{i}" for i in range(8)]
        vecs = rng.standard_normal((8, 5))
        query = rng.standard_normal(5)
        base = localize(query, ids, vecs)
        perm = rng.permutation(8)
        shuffled = localize(query, [ids[i] for i in perm], vecs[perm])
        assert shuffled.ranking == base.ranking
        assert np.allclose(
            shuffled.probs, base.probs[perm], atol=1e-12
        )

    def test_temperature_never_changes_ranking(self):
        rng = np.random.default_rng(8)
        ids = [f"v{i}" for i in range(10)]
        vecs = rng.standard_normal((10, 6))
        query = rng.standard_normal(6)
        base = localize(query, ids, vecs, ScoreConfig(temperature=1.0))
        for temp in (0.25, 0.5, 2.0, 100.0):
            assert localize(query, ids, vecs, ScoreConfig(temperature=temp)).ranking == base.ranking

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            localize([1.0], ["a", "a"], [[1.0], [2.0]])

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError, match="candidate"):
            localize([1.0], ["a", "b"], [[1.0]])


class TestRankOf:
    def test_argmax_is_rank_one(self):
        result = localize([1.0, 0.0], ["a", "b"], [[1.0, 0.0], [0.0, 1.0]])
        assert rank_of(result, "a") == 1
        assert rank_of(result, "b") == 2

    def test_tie_break_by_ascending_id(self):
        result = localize([1.0, 1.0], ["b", "a"], [[1.0, 0.0], [0.0, 1.0]])
        # logits tie; 'a' outranks 'b'
        assert rank_of(result, "a") == 1
        assert rank_of(result, "b") == 2

    def test_missing_target(self):
        result = localize([1.0], ["a"], [[1.0]])
        with pytest.raises(KeyError, match="not among"):
            rank_of(result, "zzz")


class TestContrastiveLoss:
    def test_single_pair_is_zero_within_clamp(self):
        assert contrastive_loss([[5.0]]) == pytest.approx(0.0, abs=1e-6)

    def test_uniform_two_by_two_is_ln2(self):
        assert contrastive_loss(np.zeros((2, 2))) == pytest.approx(math.log(2), abs=1e-9)
        assert contrastive_loss(np.full((2, 2), 3.7)) == pytest.approx(math.log(2), abs=1e-9)

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(9)
        for n in (1, 2, 3, 4):
            for _ in range(25):
                logits = rng.standard_normal((n, n)) * 3
                assert contrastive_loss(logits) == pytest.approx(
                    bce_loss_loop(logits.tolist()), abs=1e-6
                )

    def test_diagonal_sweep_strictly_decreasing_to_zero(self):
        values = [contrastive_loss(np.eye(3) * c) for c in np.linspace(0.0, 10.0, 21)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert contrastive_loss(np.eye(3) * 40.0) < 1e-6

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            contrastive_loss(np.zeros((2, 3)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            contrastive_loss([[np.nan]])
