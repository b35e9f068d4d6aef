import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avcleanse.core.exceptions import EvaluationError, MissingModalityError, NormalizationError
from avcleanse.models.verification import EvalMode, ScoredTrialList
from avcleanse.services.similarity import pair_cosines
from avcleanse.services.verification import VerificationService, compute_eer, fuse_embeddings


def _unit(rng, n, dim):
    vectors = rng.standard_normal((n, dim))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def _sweep_eer(scores, labels):
    """Exhaustive threshold enumeration, accept when score >= threshold"""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    targets, imposters = scores[labels == 1], scores[labels == 0]
    points = [(1.0, 0.0, np.inf)]
    for threshold in sorted(set(scores.tolist()), reverse=True):
        frr = float(np.mean(targets < threshold))
        far = float(np.mean(imposters >= threshold))
        points.append((frr, far, threshold))
    for (frr0, far0, th0), (frr1, far1, th1) in zip(points, points[1:]):
        if frr1 - far1 <= 0:
            t = (frr0 - far0) / ((frr0 - far0) - (frr1 - far1))
            threshold = th1 if np.isinf(th0) else th0 + t * (th1 - th0)
            return far0 + t * (far1 - far0), threshold
    raise AssertionError("sweep never crossed")


SEEDED_LISTS = st.tuples(st.integers(0, 2**32 - 1), st.integers(2, 2000))


def _scored_list(seed, n):
    """Quantized scores (plenty of ties) with both labels present"""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, n)
    labels[:2] = (1, 0)
    shift = rng.uniform(0.0, 0.5)
    scores = np.round(rng.random(n) + shift * labels, 2)
    return scores, labels


@pytest.mark.unit
class TestFusion:
    def test_cosine_is_mean_of_modality_cosines(self, rng):
        s1, s2 = _unit(rng, 1000, 192), _unit(rng, 1000, 192)
        f1, f2 = _unit(rng, 1000, 512), _unit(rng, 1000, 512)
        left, right = fuse_embeddings(s1, f1), fuse_embeddings(s2, f2)
        fused = (left * right).sum(axis=1) / (np.linalg.norm(left, axis=1) * np.linalg.norm(right, axis=1))
        expected = ((s1 * s2).sum(axis=1) + (f1 * f2).sum(axis=1)) / 2
        assert np.max(np.abs(fused - expected)) <= 1e-6

    def test_not_renormalized(self, rng):
        fused = fuse_embeddings(_unit(rng, 3, 4), _unit(rng, 3, 5))
        assert fused.shape == (3, 9)
        assert np.allclose(np.linalg.norm(fused, axis=1), np.sqrt(2.0))

    def test_identical_and_opposite_faces(self):
        speech = np.asarray([1.0, 0.0])
        a = fuse_embeddings(speech, np.asarray([0.0, 1.0]))
        b = fuse_embeddings(speech, np.asarray([0.0, -1.0]))
        assert a @ a / (np.linalg.norm(a) ** 2) == pytest.approx(1.0)
        assert a @ b / (np.linalg.norm(a) * np.linalg.norm(b)) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_non_unit_input(self):
        with pytest.raises(NormalizationError, match="face"):
            fuse_embeddings(np.asarray([1.0, 0.0]), np.asarray([2.0, 0.0]))


@pytest.mark.unit
class TestComputeEer:
    def test_perfect_separation(self):
        eer, threshold = compute_eer([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0])
        assert eer == 0.0
        assert threshold == pytest.approx(0.8)

    def test_same_distribution_is_chance(self):
        eer, threshold = compute_eer([0.1, 0.5, 0.9, 0.1, 0.5, 0.9], [1, 1, 1, 0, 0, 0])
        assert eer == pytest.approx(0.5)
        assert threshold == pytest.approx(0.7)

    def test_interleaved_example(self):
        scores = [0.7, 0.5, 0.4, 0.6, 0.3, 0.2]
        labels = [1, 1, 1, 0, 0, 0]
        eer, threshold = compute_eer(scores, labels)
        assert eer == pytest.approx(1 / 3)
        assert threshold == pytest.approx(0.5)
        assert (eer, threshold) == pytest.approx(_sweep_eer(scores, labels))

    def test_single_label(self):
        with pytest.raises(EvaluationError, match="at least one target and one imposter"):
            compute_eer([0.1, 0.2], [1, 1])

    def test_mismatched_lengths(self):
        with pytest.raises(EvaluationError):
            ScoredTrialList(scores=np.zeros(3), labels=np.zeros(2))

    def test_non_finite_scores(self):
        with pytest.raises(EvaluationError):
            compute_eer([0.1, np.nan], [1, 0])

    @pytest.mark.property
    @settings(max_examples=120, deadline=None)
    @given(SEEDED_LISTS)
    def test_matches_threshold_sweep(self, data):
        scores, labels = _scored_list(*data)
        eer, threshold = compute_eer(scores, labels)
        expected_eer, expected_threshold = _sweep_eer(scores, labels)
        assert abs(eer - expected_eer) <= 1e-9
        assert abs(threshold - expected_threshold) <= 1e-9

    @pytest.mark.property
    @settings(max_examples=60, deadline=None)
    @given(SEEDED_LISTS)
    def test_invariant_under_increasing_transform(self, data):
        scores, labels = _scored_list(*data)
        eer, _ = compute_eer(scores, labels)
        transformed, _ = compute_eer(np.exp(3.0 * np.asarray(scores)) - 7.0, labels)
        assert transformed == pytest.approx(eer, abs=1e-12)

    @pytest.mark.property
    @settings(max_examples=60, deadline=None)
    @given(SEEDED_LISTS)
    def test_rate_stays_in_unit_interval(self, data):
        """Only [0, 1] holds for arbitrary scorers; 0.5 bounds scorers no worse than chance"""
        eer, _ = compute_eer(*_scored_list(*data))
        assert -1e-9 <= eer <= 1.0 + 1e-9

    def test_chance_scorer_stays_near_half(self, rng):
        scores = rng.random(4000)
        labels = rng.integers(0, 2, 4000)
        eer, _ = compute_eer(scores, labels)
        assert eer <= 0.5 + 0.05

    def test_inverted_scorer_is_not_folded(self):
        # targets score below imposters; no relabelling to 1 - EER
        eer, threshold = compute_eer([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])
        assert eer == pytest.approx(1.0)
        assert eer > 0.5
        assert threshold == pytest.approx(0.8)


@pytest.mark.integration
class TestEvaluate:
    def test_modes_on_synthetic_identities(self, small_dataset):
        dataset, speech, face = small_dataset
        service = VerificationService(threads=1)
        for mode in EvalMode:
            result = service.evaluate(dataset.trials, speech, face, mode)
            assert result.mode == mode
            assert result.scored.n == dataset.trials.n
            assert result.eer <= 0.05
        fused = service.evaluate(dataset.trials, speech, face, EvalMode.FUSION)
        assert fused.eer == 0.0

    def test_fused_scores_are_modality_means(self, small_dataset):
        dataset, speech, face = small_dataset
        trials = dataset.trials
        fused = VerificationService(threads=1).fused_cosines(trials, speech, face)
        mean = (
            pair_cosines(speech, trials.sample_a, trials.sample_b)
            + pair_cosines(face, trials.sample_a, trials.sample_b)
        ) / 2
        assert np.max(np.abs(fused - mean)) <= 1e-6

    def test_speech_mode_ignores_face(self, small_dataset):
        dataset, speech, face = small_dataset
        service = VerificationService(threads=1)
        with_face = service.evaluate(dataset.trials, speech, face, EvalMode.SPEECH)
        without = service.evaluate(dataset.trials, speech, None, EvalMode.SPEECH)
        assert with_face.eer == without.eer
        assert np.array_equal(with_face.scored.scores, without.scored.scores)

    @pytest.mark.parametrize("mode", [EvalMode.FACE, EvalMode.FUSION])
    def test_missing_face(self, small_dataset, mode):
        dataset, speech, _ = small_dataset
        with pytest.raises(MissingModalityError):
            VerificationService().evaluate(dataset.trials, speech, None, mode)
