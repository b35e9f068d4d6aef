import os
import sys

import numpy as np
import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from avcleanse.models.embedding import Modality
from avcleanse.services.boundary import BoundaryService
from avcleanse.services.embed_store import l2_normalize
from avcleanse.services.synth import SynthService
from tests.fixtures.embedding_data import make_embeddings, make_labels, make_trials, small_synth_config


@pytest.fixture
def rng():
    """Seeded generator for ad-hoc random data"""
    return np.random.default_rng(1234)


@pytest.fixture
def two_class_set():
    """Hand-built speech set: class A along e1, class B along e2, one stray sample"""
    ids = ["a1", "a2", "a3", "b1", "b2", "b3"]
    speech = make_embeddings(
        [
            [1.0, 0.0, 0.0],
            [1.0, 0.1, 0.0],
            [0.0, 0.0, 1.0],  # labelled A, points elsewhere
            [0.0, 1.0, 0.0],
            [0.1, 1.0, 0.0],
            [0.0, 1.0, 0.1],
        ],
        ids,
    )
    face = make_embeddings(
        [
            [1.0, 0.0],
            [1.0, 0.2],
            [-1.0, 0.0],
            [0.0, 1.0],
            [0.2, 1.0],
            [0.0, 1.0],
        ],
        ids,
        modality=Modality.FACE,
    )
    labels = make_labels(ids, ["A", "A", "A", "B", "B", "B"])
    return speech, face, labels


@pytest.fixture
def separable_trials():
    return make_trials(targets=[(0.8, 0.8), (0.9, 0.7)], imposters=[(0.0, 0.1), (0.1, 0.0)])


@pytest.fixture
def toy_model(separable_trials):
    return BoundaryService().train_boundary(separable_trials, C=1.0)


@pytest.fixture(scope="session")
def small_dataset():
    """20 classes x 12 samples, 5% label noise, normalized"""
    dataset = SynthService().generate(small_synth_config())
    return dataset, l2_normalize(dataset.speech), l2_normalize(dataset.face)


@pytest.fixture(scope="session")
def small_model(small_dataset):
    dataset, speech, face = small_dataset
    service = BoundaryService()
    return service.train_boundary(service.score_trials(dataset.trials, speech, face), C=1.0)
