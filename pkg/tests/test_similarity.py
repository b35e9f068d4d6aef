import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import avcleanse.services.similarity as similarity_module
from avcleanse.core.exceptions import EmptyReferenceError, ModalityMismatchError, NormalizationError
from avcleanse.models.embedding import EmbeddingSet, Modality
from avcleanse.models.scores import PLACEHOLDER_SCORE, ScoreFlag
from avcleanse.services.similarity import SimilarityService, mask_digest, pair_cosines
from tests.fixtures.embedding_data import make_embeddings, make_ids, make_labels, random_instance


@pytest.fixture
def service():
    return SimilarityService(threads=1)


@pytest.mark.unit
class TestIntraClassScores:
    """Centroid-sum scoring"""

    def test_identical_vectors_score_one(self, service):
        embeddings = make_embeddings([[1.0, 0.0]] * 3)
        labels = make_labels(embeddings.sample_ids, ["k"] * 3)
        scores = service.intra_class_scores(embeddings, labels).scores
        assert np.allclose(scores, 1.0, atol=1e-6)

    def test_orthogonal_pair(self, service):
        embeddings = make_embeddings([[1.0, 0.0], [0.0, 1.0]])
        labels = make_labels(embeddings.sample_ids, ["k", "k"])
        scores = service.intra_class_scores(embeddings, labels).scores
        assert np.allclose(scores, 0.0, atol=1e-6)

    def test_singleton_class_without_self_is_placeholder(self, service):
        embeddings = make_embeddings([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        labels = make_labels(embeddings.sample_ids, ["alone", "k", "k"])
        vector = service.intra_class_scores(embeddings, labels)
        assert vector.scores[0] == PLACEHOLDER_SCORE
        assert vector.no_reference.tolist() == [True, False, False]

    def test_self_inclusion_counts_own_vector(self, service):
        embeddings = make_embeddings([[1.0, 0.0], [0.0, 1.0]])
        labels = make_labels(embeddings.sample_ids, ["k", "k"])
        scores = service.intra_class_scores(embeddings, labels, self_inclusion=True).scores
        assert np.allclose(scores, 0.5, atol=1e-6)

    @pytest.mark.parametrize(
        "self_inclusion,expected",
        [(True, [2 / 3, 1 / 3, 2 / 3]), (False, [0.5, 0.0, 0.5])],
    )
    def test_three_member_class(self, service, self_inclusion, expected):
        embeddings = make_embeddings([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        labels = make_labels(embeddings.sample_ids, ["k"] * 3)
        fast = service.intra_class_scores(embeddings, labels, self_inclusion=self_inclusion).scores
        slow = service.pairwise_scores_bruteforce(embeddings, labels, None, self_inclusion).scores
        assert np.allclose(fast, expected, atol=1e-6)
        assert np.allclose(slow, expected, atol=1e-6)

    def test_singleton_class_with_self_scores_one(self, service):
        embeddings = make_embeddings([[0.6, 0.8], [1.0, 0.0], [0.0, 1.0]])
        labels = make_labels(embeddings.sample_ids, ["alone", "k", "k"])
        vector = service.intra_class_scores(embeddings, labels, self_inclusion=True)
        assert vector.scores[0] == pytest.approx(1.0, abs=1e-6)
        assert not vector.no_reference[0]

    def test_reference_index_out_of_range(self, service):
        embeddings = make_embeddings([[1.0, 0.0], [0.0, 1.0]])
        labels = make_labels(embeddings.sample_ids, ["k", "k"])
        with pytest.raises(ValueError, match="index 2"):
            service.intra_class_scores(embeddings, labels, [0, 2])
        with pytest.raises(ValueError, match="index -1"):
            service.intra_class_scores(embeddings, labels, [-1])

    def test_reference_mask_restricts_centre(self, two_class_set, service):
        speech, _, labels = two_class_set
        mask = np.asarray([True, True, False, True, True, True])
        scores = service.intra_class_scores(speech, labels, mask).scores
        # a3 is not a reference, so its own score uses a1, a2 only
        direct = speech.vectors[2].astype(np.float64) @ speech.vectors[:2].T.astype(np.float64)
        assert scores[2] == pytest.approx(direct.mean(), abs=1e-6)
        assert scores[0] == pytest.approx(float(speech.vectors[0] @ speech.vectors[1]), abs=1e-6)

    def test_stray_sample_scores_low(self, two_class_set, service):
        speech, _, labels = two_class_set
        scores = service.intra_class_scores(speech, labels).scores
        assert scores[2] < 0.1 < scores[0]

    def test_zero_vector_placeholder(self, service):
        embeddings = make_embeddings([[1.0, 0.0], [0.0, 0.0], [1.0, 0.1]])
        labels = make_labels(embeddings.sample_ids, ["k"] * 3)
        vector = service.intra_class_scores(embeddings, labels)
        assert vector.scores[1] == PLACEHOLDER_SCORE
        assert vector.zero_vector.tolist() == [False, True, False]
        # zero rows never act as references
        assert vector.scores[0] == pytest.approx(float(embeddings.vectors[0] @ embeddings.vectors[2]), abs=1e-6)

    def test_requires_normalized(self, service):
        embeddings = make_embeddings([[2.0, 0.0]], normalize=False)
        labels = make_labels(embeddings.sample_ids, ["k"])
        with pytest.raises(NormalizationError):
            service.intra_class_scores(embeddings, labels)

    def test_empty_reference(self, service):
        embeddings = make_embeddings([[1.0, 0.0], [0.0, 1.0]])
        labels = make_labels(embeddings.sample_ids, ["k", "k"])
        with pytest.raises(EmptyReferenceError):
            service.intra_class_scores(embeddings, labels, np.zeros(2, dtype=bool))

    def test_index_mask_equals_boolean_mask(self, service):
        embeddings, labels = random_instance(3, 40, 8, 4)
        as_bool = np.zeros(40, dtype=bool)
        as_bool[[0, 5, 7, 20, 33]] = True
        a = service.intra_class_scores(embeddings, labels, as_bool).scores
        b = service.intra_class_scores(embeddings, labels, [0, 5, 7, 20, 33]).scores
        assert np.array_equal(a, b)


@pytest.mark.property
class TestOracleEquivalence:
    """Centroid path against the literal pairwise average"""

    @settings(max_examples=60, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(1, 400),
        dim=st.integers(1, 64),
        n_classes=st.integers(1, 50),
        mask_rate=st.floats(0.05, 1.0),
        self_inclusion=st.booleans(),
        zero_rows=st.integers(0, 3),
    )
    def test_matches_bruteforce(self, seed, n, dim, n_classes, mask_rate, self_inclusion, zero_rows):
        embeddings, labels = random_instance(seed, n, dim, n_classes, zero_rows)
        mask = np.random.default_rng(seed + 1).random(n) < mask_rate
        mask[0] = True
        service = SimilarityService(threads=1)
        fast = service.intra_class_scores(embeddings, labels, mask, self_inclusion)
        slow = service.pairwise_scores_bruteforce(embeddings, labels, mask, self_inclusion)
        assert np.max(np.abs(fast.scores - slow.scores)) <= 1e-5
        assert np.array_equal(fast.no_reference, slow.no_reference)
        assert np.array_equal(fast.zero_vector, slow.zero_vector)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 300), n_classes=st.integers(1, 20))
    def test_self_inclusion_algebra(self, seed, n, n_classes):
        embeddings, labels = random_instance(seed, n, 16, n_classes)
        service = SimilarityService(threads=1)
        excl = service.intra_class_scores(embeddings, labels, self_inclusion=False)
        incl = service.intra_class_scores(embeddings, labels, self_inclusion=True).scores
        classes = labels.class_vector(embeddings.sample_ids)
        sizes = np.bincount(classes)[classes].astype(np.float64)
        scored = ~excl.no_reference
        expected = ((sizes - 1) * excl.scores + 1) / sizes
        assert np.max(np.abs(incl[scored] - expected[scored]), initial=0.0) <= 1e-6

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 300), self_inclusion=st.booleans())
    def test_permutation_equivariance(self, seed, n, self_inclusion):
        embeddings, labels = random_instance(seed, n, 8, 6)
        order = np.random.default_rng(seed).permutation(n)
        permuted = EmbeddingSet(
            modality=embeddings.modality,
            sample_ids=[embeddings.sample_ids[i] for i in order],
            vectors=embeddings.vectors[order],
        )
        service = SimilarityService(threads=1)
        original = service.intra_class_scores(embeddings, labels, self_inclusion=self_inclusion)
        shuffled = service.intra_class_scores(permuted, labels, self_inclusion=self_inclusion)
        assert np.allclose(shuffled.scores, original.scores[order], atol=1e-6)
        assert np.array_equal(shuffled.no_reference, original.no_reference[order])

    def test_large_instances_within_budget(self):
        start = time.perf_counter()
        service = SimilarityService(threads=1)
        for seed in range(5):
            embeddings, labels = random_instance(seed, 2000, 64, 50)
            mask = np.random.default_rng(seed).random(2000) < 0.8
            for self_inclusion in (False, True):
                fast = service.intra_class_scores(embeddings, labels, mask, self_inclusion).scores
                slow = service.pairwise_scores_bruteforce(embeddings, labels, mask, self_inclusion).scores
                assert np.max(np.abs(fast - slow)) <= 1e-5
        assert time.perf_counter() - start < 30.0


@pytest.mark.unit
class TestDeterminism:
    def test_thread_cap_does_not_change_bits(self, monkeypatch):
        monkeypatch.setattr(similarity_module, "BLOCK_ROWS", 64)
        embeddings, labels = random_instance(9, 1000, 16, 30)
        one = SimilarityService(threads=1).intra_class_scores(embeddings, labels).scores
        four = SimilarityService(threads=4).intra_class_scores(embeddings, labels).scores
        assert one.tobytes() == four.tobytes()

    def test_pair_cosines_thread_independent(self, monkeypatch):
        monkeypatch.setattr(similarity_module, "BLOCK_ROWS", 16)
        embeddings, _ = random_instance(4, 200, 8, 5)
        ids = embeddings.sample_ids
        a, b = ids[:150], ids[50:]
        assert pair_cosines(embeddings, a, b, 1).tobytes() == pair_cosines(embeddings, a, b, 4).tobytes()


@pytest.mark.unit
class TestScoreTable:
    def test_flags_and_face_column(self, service):
        ids = make_ids(3)
        speech = make_embeddings([[1.0, 0.0], [0.0, 0.0], [1.0, 0.2]], ids)
        face = make_embeddings([[1.0, 0.0], [1.0, 0.1], [0.0, 0.0]], ids, modality=Modality.FACE)
        labels = make_labels(ids, ["k"] * 3)
        table = service.build_score_table(speech, face, labels)
        assert table.flags[1] == ScoreFlag.SPEAKER_ZERO_VECTOR
        assert table.flags[2] == ScoreFlag.FACE_ZERO_VECTOR
        assert table.face_scores[2] == PLACEHOLDER_SCORE
        assert table.mask_id == "all"
        assert table.points().shape == (3, 2)
        assert table.speaker_placeholders().tolist() == [False, True, False]

    def test_misaligned_modalities(self, service):
        speech = make_embeddings([[1.0, 0.0], [0.0, 1.0]], ["a", "b"])
        face = make_embeddings([[1.0, 0.0], [0.0, 1.0]], ["a", "c"], modality=Modality.FACE)
        labels = make_labels(["a", "b"], ["k", "k"])
        with pytest.raises(ModalityMismatchError, match="'b'"):
            service.build_score_table(speech, face, labels)

    def test_mask_digest_is_stable(self):
        mask = np.asarray([True, False, True])
        assert mask_digest(mask, "easy") == mask_digest(mask.copy(), "easy")
        assert mask_digest(mask, "easy").startswith("easy-")
        assert mask_digest(np.ones(3, dtype=bool)) == "all"


@pytest.mark.slow
def test_scoring_throughput():
    """N = 100k, d = 192, K = 1000 through the centroid path"""
    rng = np.random.default_rng(0)
    n, dim, k = 100_000, 192, 1000
    ids = [f"s{i:06d}" for i in range(n)]
    embeddings = make_embeddings(rng.standard_normal((n, dim)), ids)
    labels = make_labels(ids, (np.arange(n) % k).tolist())
    service = SimilarityService(threads=4)
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        service.intra_class_scores(embeddings, labels)
        best = min(best, time.perf_counter() - start)
    assert best < 2.0


@pytest.mark.unit
def test_positive_rescaling_before_normalization():
    rng = np.random.default_rng(21)
    raw = rng.standard_normal((120, 24))
    factors = rng.uniform(0.01, 100.0, size=(120, 1))
    ids = make_ids(120)
    labels = make_labels(ids, (np.arange(120) % 7).tolist())
    service = SimilarityService(threads=1)
    base = service.intra_class_scores(make_embeddings(raw, ids), labels).scores
    scaled = service.intra_class_scores(make_embeddings(raw * factors, ids), labels).scores
    assert np.max(np.abs(base - scaled)) <= 1e-6
