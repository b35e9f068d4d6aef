"""
Synthetic audio-visual identity datasets with known label noise.

Every draw comes from one numpy PCG64 generator seeded with ``SynthConfig.seed``, in a
fixed order:

1. speech prototypes (K x d_s), then face prototypes (K x d_f), standard normal, normalized
2. victim classes of the mislabeled samples and their slots inside the class
3. source classes of the mislabeled samples (speech, then face when inconsistent)
4. speech perturbations (N x d_s), then face perturbations (N x d_f)
5. target trials, imposter trials, then the shuffle of the trial list
"""

from typing import Dict, List, Tuple

import numpy as np

from avcleanse.core.exceptions import ConfigError
from avcleanse.models.boundary import TrialLabel, TrialSet
from avcleanse.models.embedding import EmbeddingSet, LabelMap, Modality
from avcleanse.models.synth import GENERATOR_NAME, SynthConfig, SynthDataset
from avcleanse.utils.logger import get_logger
from avcleanse.utils.validators import round_half_up

logger = get_logger(__name__)


def sample_id(class_index: int, slot: int) -> str:
    return f"c{class_index + 1:04d}-s{slot + 1:03d}"


def class_name(class_index: int) -> str:
    return f"id{class_index + 1:05d}"


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    return matrix / np.linalg.norm(matrix, axis=1, keepdims=True)


class SynthService:
    def _victims(self, rng: np.random.Generator, config: SynthConfig, n_noisy: int) -> np.ndarray:
        """
        Flat sample indices of the mislabeled samples.

        Victim classes are drawn without replacement until every class was hit once, then
        with replacement among classes that still have an unused slot.
        """
        K, M = config.n_classes, config.samples_per_class
        classes = list(rng.permutation(K)[: min(n_noisy, K)])
        used = np.zeros(K, dtype=np.int64)
        for k in classes:
            used[k] += 1
        while len(classes) < n_noisy:
            k = int(rng.integers(0, K))
            if used[k] < M:
                used[k] += 1
                classes.append(k)

        taken: Dict[int, set] = {}
        victims = []
        for k in classes:
            free = [s for s in range(M) if s not in taken.setdefault(int(k), set())]
            slot = free[int(rng.integers(0, len(free)))]
            taken[int(k)].add(slot)
            victims.append(int(k) * M + slot)
        return np.asarray(victims, dtype=np.int64)

    def _other_class(self, rng: np.random.Generator, victim_classes: np.ndarray, K: int) -> np.ndarray:
        """A uniformly random class different from each victim's own"""
        return (victim_classes + rng.integers(1, K, size=victim_classes.shape[0])) % K

    def _trials(
        self, rng: np.random.Generator, config: SynthConfig, true_class: np.ndarray, clean: np.ndarray
    ) -> Tuple[List[int], List[int], List[int]]:
        clean_rows = np.flatnonzero(clean)
        by_class: Dict[int, np.ndarray] = {
            int(k): clean_rows[true_class[clean_rows] == k] for k in np.unique(true_class[clean_rows])
        }
        pair_a: List[int] = []
        pair_b: List[int] = []
        labels: List[int] = []

        if config.n_target_trials:
            eligible = np.concatenate(
                [rows for rows in by_class.values() if rows.size >= 2] or [np.zeros(0, dtype=np.int64)]
            )
            if eligible.size == 0:
                raise ConfigError("target trials need a class with at least two clean samples")
            for a in rng.choice(eligible, size=config.n_target_trials):
                peers = by_class[int(true_class[a])]
                peers = peers[peers != a]
                pair_a.append(int(a))
                pair_b.append(int(peers[int(rng.integers(0, peers.size))]))
                labels.append(TrialLabel.TARGET)

        if config.n_imposter_trials:
            if len(by_class) < 2:
                raise ConfigError("imposter trials need clean samples from at least two classes")
            for a in rng.choice(clean_rows, size=config.n_imposter_trials):
                others = clean_rows[true_class[clean_rows] != true_class[a]]
                pair_a.append(int(a))
                pair_b.append(int(others[int(rng.integers(0, others.size))]))
                labels.append(TrialLabel.IMPOSTER)

        order = rng.permutation(len(labels))
        return (
            [pair_a[i] for i in order],
            [pair_b[i] for i in order],
            [labels[i] for i in order],
        )

    def generate(self, config: SynthConfig) -> SynthDataset:
        """
        Build a dataset whose mislabeled samples are known.

        A mislabeled sample keeps the label (and id) of its victim class but its vectors are
        drawn around another class's prototype. With ``modality_consistency`` the face vector
        comes from the same wrong class; without it only the speech vector is wrong.
        """
        rng = np.random.Generator(np.random.PCG64(config.seed))
        K, M = config.n_classes, config.samples_per_class
        N = config.n_samples

        speech_protos = _unit_rows(rng.standard_normal((K, config.dim_speech)))
        face_protos = _unit_rows(rng.standard_normal((K, config.dim_face)))

        n_noisy = round_half_up(config.noise_rate * N)
        labelled_class = np.repeat(np.arange(K, dtype=np.int64), M)
        speech_class = labelled_class.copy()
        face_class = labelled_class.copy()
        victims = self._victims(rng, config, n_noisy) if n_noisy else np.zeros(0, dtype=np.int64)
        if victims.size:
            sources = self._other_class(rng, labelled_class[victims], K)
            speech_class[victims] = sources
            face_class[victims] = sources if config.modality_consistency else labelled_class[victims]

        speech_noise = rng.standard_normal((N, config.dim_speech))
        face_noise = rng.standard_normal((N, config.dim_face))
        speech_vectors = _unit_rows(speech_protos[speech_class] + config.concentration_speech * speech_noise)
        face_vectors = _unit_rows(face_protos[face_class] + config.concentration_face * face_noise)

        ids = [sample_id(k, s) for k in range(K) for s in range(M)]
        clean = np.ones(N, dtype=bool)
        clean[victims] = False
        pair_a, pair_b, trial_labels = self._trials(rng, config, labelled_class, clean)

        speech = EmbeddingSet(
            modality=Modality.SPEECH, sample_ids=ids, vectors=speech_vectors.astype(np.float32)
        )
        face = EmbeddingSet(modality=Modality.FACE, sample_ids=ids, vectors=face_vectors.astype(np.float32))
        labels = LabelMap.from_pairs([(ids[i], class_name(int(labelled_class[i]))) for i in range(N)])
        noisy_ids = [ids[i] for i in sorted(victims.tolist())]
        trials = TrialSet(
            sample_a=[ids[i] for i in pair_a],
            sample_b=[ids[i] for i in pair_b],
            labels=np.asarray(trial_labels, dtype=np.int8),
        )
        logger.info(
            "synth_generated",
            n_classes=K,
            samples_per_class=M,
            n_noisy=len(noisy_ids),
            n_trials=trials.n,
            seed=config.seed,
            generator=GENERATOR_NAME,
        )
        return SynthDataset(
            config=config,
            speech=speech,
            face=face,
            labels=labels,
            ground_truth_noisy=noisy_ids,
            source_classes={ids[v]: int(speech_class[v]) + 1 for v in victims.tolist()},
            trials=trials,
        )
