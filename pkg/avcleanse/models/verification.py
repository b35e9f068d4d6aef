"""
Verification Models
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from avcleanse.core.exceptions import EvaluationError
from avcleanse.models.boundary import TrialLabel


class EvalMode(str, Enum):
    SPEECH = "speech"
    FACE = "face"
    FUSION = "fusion"


class ScoredTrialList(BaseModel):
    """One similarity per trial, plus its target / imposter label"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    scores: np.ndarray
    labels: np.ndarray

    @model_validator(mode="after")
    def validate_lengths(self) -> "ScoredTrialList":
        if self.scores.ndim != 1 or self.scores.shape != self.labels.shape:
            raise EvaluationError("scores and labels must be 1-D arrays of equal length")
        if not np.isfinite(self.scores).all():
            raise EvaluationError("trial scores must be finite")
        return self

    @property
    def n(self) -> int:
        return int(self.scores.shape[0])

    @property
    def n_target(self) -> int:
        return int(np.count_nonzero(self.labels == TrialLabel.TARGET))

    @property
    def n_imposter(self) -> int:
        return self.n - self.n_target


class EvalResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: EvalMode
    eer: float
    threshold: float
    scored: ScoredTrialList
