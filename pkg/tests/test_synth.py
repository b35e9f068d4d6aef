import os

import numpy as np
import pytest

from avcleanse.core.exceptions import ConfigError
from avcleanse.models.boundary import TrialLabel
from avcleanse.models.synth import DEFAULT_CONCENTRATION, SynthConfig
from avcleanse.services.embed_store import l2_normalize
from avcleanse.services.similarity import SimilarityService
from avcleanse.services.synth import SynthService, class_name, sample_id
from tests.fixtures.embedding_data import small_synth_config


def _class_centres(vectors, class_rows):
    return {k: vectors[rows].astype(np.float64).mean(axis=0) for k, rows in class_rows.items()}


@pytest.mark.unit
class TestGenerate:
    """Synthetic identity datasets with known noise"""

    def test_zero_noise(self):
        dataset = SynthService().generate(small_synth_config(noise_rate=0.0))
        assert dataset.ground_truth_noisy == []
        assert dataset.source_classes == {}

    def test_default_noise_count(self):
        dataset = SynthService().generate(SynthConfig(n_target_trials=10, n_imposter_trials=10))
        assert dataset.speech.n == 10000
        assert len(dataset.ground_truth_noisy) == 190
        assert len(set(dataset.ground_truth_noisy)) == 190

    def test_same_seed_same_bytes(self):
        first = SynthService().generate(small_synth_config())
        second = SynthService().generate(small_synth_config())
        assert first.speech.vectors.tobytes() == second.speech.vectors.tobytes()
        assert first.face.vectors.tobytes() == second.face.vectors.tobytes()
        assert first.ground_truth_noisy == second.ground_truth_noisy
        assert first.trials.sample_a == second.trials.sample_a
        assert np.array_equal(first.trials.labels, second.trials.labels)

    def test_other_seed_differs(self):
        first = SynthService().generate(small_synth_config())
        second = SynthService().generate(small_synth_config(seed=12))
        assert first.speech.vectors.tobytes() != second.speech.vectors.tobytes()

    def test_vectors_are_unit_norm(self, small_dataset):
        dataset, _, _ = small_dataset
        for embeddings in (dataset.speech, dataset.face):
            norms = np.linalg.norm(embeddings.vectors.astype(np.float64), axis=1)
            assert np.allclose(norms, 1.0, atol=1e-5)
            assert not embeddings.normalized

    def test_naming(self, small_dataset):
        dataset, _, _ = small_dataset
        assert dataset.speech.sample_ids[0] == "c0001-s001" == sample_id(0, 0)
        assert dataset.labels.original_id(1) == "id00001" == class_name(0)
        assert dataset.labels.num_classes == 20
        assert all(size == 12 for size in dataset.labels.class_sizes.values())

    def test_single_class_cannot_carry_noise(self):
        with pytest.raises(ConfigError, match="two classes"):
            SynthConfig(n_classes=1, noise_rate=0.1)

    def test_imposters_need_two_classes(self):
        config = SynthConfig(n_classes=1, samples_per_class=5, noise_rate=0.0, n_target_trials=3)
        with pytest.raises(ConfigError, match="imposter"):
            SynthService().generate(config)

    def test_heavy_noise_keeps_slots_distinct(self):
        dataset = SynthService().generate(
            small_synth_config(n_classes=4, samples_per_class=5, noise_rate=0.9, n_target_trials=0,
                               n_imposter_trials=0)
        )
        assert len(dataset.ground_truth_noisy) == 18
        assert len(set(dataset.ground_truth_noisy)) == 18


@pytest.mark.unit
class TestGroundTruth:
    def test_noisy_vectors_follow_their_source_class(self, small_dataset):
        dataset, speech, face = small_dataset
        ids = speech.sample_ids
        noisy = set(dataset.ground_truth_noisy)
        classes = dataset.labels.class_vector(ids)
        clean_rows = {
            k: np.asarray([i for i in range(len(ids)) if classes[i] == k and ids[i] not in noisy])
            for k in range(1, dataset.labels.num_classes + 1)
        }
        speech_centres = _class_centres(speech.vectors, clean_rows)
        face_centres = _class_centres(face.vectors, clean_rows)
        for noisy_id, source in dataset.source_classes.items():
            row = speech.index[noisy_id]
            own = int(classes[row])
            assert source != own
            v = speech.vectors[row].astype(np.float64)
            assert v @ speech_centres[source] > v @ speech_centres[own]
            f = face.vectors[row].astype(np.float64)
            assert f @ face_centres[source] > f @ face_centres[own]

    def test_inconsistent_modalities_keep_face_correct(self):
        dataset = SynthService().generate(small_synth_config(modality_consistency=False))
        ids = dataset.speech.sample_ids
        classes = dataset.labels.class_vector(ids)
        noisy = set(dataset.ground_truth_noisy)
        clean_rows = {
            k: np.asarray([i for i in range(len(ids)) if classes[i] == k and ids[i] not in noisy])
            for k in range(1, dataset.labels.num_classes + 1)
        }
        face_centres = _class_centres(dataset.face.vectors, clean_rows)
        speech_centres = _class_centres(dataset.speech.vectors, clean_rows)
        for noisy_id, source in dataset.source_classes.items():
            row = dataset.speech.index[noisy_id]
            own = int(classes[row])
            f = dataset.face.vectors[row].astype(np.float64)
            v = dataset.speech.vectors[row].astype(np.float64)
            assert f @ face_centres[own] > f @ face_centres[source]
            assert v @ speech_centres[source] > v @ speech_centres[own]


@pytest.mark.unit
class TestTrials:
    def test_trials_use_clean_samples_only(self, small_dataset):
        dataset, _, _ = small_dataset
        noisy = set(dataset.ground_truth_noisy)
        trials = dataset.trials
        assert trials.counts() == (200, 200)
        assert not noisy & (set(trials.sample_a) | set(trials.sample_b))

    def test_trial_labels_match_classes(self, small_dataset):
        dataset, _, _ = small_dataset
        trials = dataset.trials
        assignments = dataset.labels.assignments
        for a, b, label in zip(trials.sample_a, trials.sample_b, trials.labels):
            assert a != b
            same = assignments[a] == assignments[b]
            assert same == (label == TrialLabel.TARGET)


@pytest.mark.integration
class TestCalibration:
    def test_default_concentration_matches_recorded_sweep(self):
        path = os.path.join(os.path.dirname(__file__), "fixtures", "concentration_sweep.txt")
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line for line in fh if line.strip() and not line.startswith("#")]
        rows = [dict(part.split("=") for part in line.split()) for line in lines]
        recorded = {float(row["concentration"]): float(row["mean_cos"]) for row in rows}
        assert DEFAULT_CONCENTRATION in recorded

        dataset = SynthService().generate(SynthConfig(noise_rate=0.0, n_target_trials=0, n_imposter_trials=0))
        service = SimilarityService(threads=1)
        scores = service.intra_class_scores(l2_normalize(dataset.speech), dataset.labels).scores
        assert float(scores.mean()) == pytest.approx(recorded[DEFAULT_CONCENTRATION], abs=0.01)
        assert abs(recorded[DEFAULT_CONCENTRATION] - 0.7) < 0.05
