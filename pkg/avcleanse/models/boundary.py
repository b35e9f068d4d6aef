"""
Boundary Models
Validation trials và the linear SVM decision boundary in (speaker, face) score space
"""

from enum import Enum, IntEnum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from avcleanse.core.exceptions import TrialFileError


class TrialLabel(IntEnum):
    IMPOSTER = 0
    TARGET = 1


class Kernel(str, Enum):
    LINEAR = "linear"


class TrialSet(BaseModel):
    """Pairs of samples labelled target (same identity) or imposter"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sample_a: List[str]
    sample_b: List[str]
    labels: np.ndarray
    speaker_scores: Optional[np.ndarray] = None
    face_scores: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def validate_trials(self) -> "TrialSet":
        n = len(self.sample_a)
        if len(self.sample_b) != n or self.labels.shape != (n,):
            raise TrialFileError("trial columns have different lengths")
        if not np.isin(self.labels, (TrialLabel.IMPOSTER, TrialLabel.TARGET)).all():
            raise TrialFileError("trial labels must be 0 (imposter) or 1 (target)")
        for scores in (self.speaker_scores, self.face_scores):
            if scores is not None and scores.shape != (n,):
                raise TrialFileError("cached trial scores must have one entry per trial")
        return self

    @property
    def n(self) -> int:
        return len(self.sample_a)

    @property
    def is_scored(self) -> bool:
        return self.speaker_scores is not None and self.face_scores is not None

    def counts(self) -> Tuple[int, int]:
        """(n_target, n_imposter)"""
        n_target = int(np.count_nonzero(self.labels == TrialLabel.TARGET))
        return n_target, self.n - n_target

    def points(self) -> np.ndarray:
        if not self.is_scored:
            raise TrialFileError("trials have not been scored")
        return np.column_stack([self.speaker_scores, self.face_scores])

    def with_scores(self, speaker_scores: np.ndarray, face_scores: np.ndarray) -> "TrialSet":
        return TrialSet(
            sample_a=self.sample_a,
            sample_b=self.sample_b,
            labels=self.labels,
            speaker_scores=speaker_scores,
            face_scores=face_scores,
        )


class BoundaryModel(BaseModel):
    """
    Soft-margin linear SVM over standardized (x, y).

    decision(x, y) = w . ((x, y) - means) / stds + b; positive means target / clean.
    """

    model_config = ConfigDict(frozen=True)

    w: Tuple[float, float]
    b: float
    means: Tuple[float, float]
    stds: Tuple[float, float]
    C: float = Field(1.0, gt=0)
    kernel: Kernel = Kernel.LINEAR
    objective: Optional[float] = None
    n_trials: Optional[int] = None

    @model_validator(mode="after")
    def validate_stds(self) -> "BoundaryModel":
        if min(self.stds) <= 0:
            raise ValueError("standardization stds must be positive")
        return self

    def standardize(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - np.asarray(self.means)) / np.asarray(self.stds)

    def decision_function(self, points: np.ndarray) -> np.ndarray:
        """Signed margins for an (n, 2) array of raw score points"""
        z = self.standardize(np.atleast_2d(points))
        return z @ np.asarray(self.w, dtype=np.float64) + self.b
