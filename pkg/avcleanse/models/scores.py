"""
Score Models
Per-sample intra-class scores (speaker x_i, face y_i) và placeholder flags
"""

from enum import IntFlag
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from avcleanse.core.exceptions import ModalityMismatchError

PLACEHOLDER_SCORE = -1.0
SCORE_TOLERANCE = 1e-6


class ScoreFlag(IntFlag):
    """Why a score is a placeholder"""
    NONE = 0
    SPEAKER_ZERO_VECTOR = 1
    SPEAKER_NO_REFERENCE = 2
    FACE_ZERO_VECTOR = 4
    FACE_NO_REFERENCE = 8


class ScoreVector(BaseModel):
    """Scores of one modality plus the placeholder reasons"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    scores: np.ndarray
    zero_vector: np.ndarray
    no_reference: np.ndarray

    @property
    def placeholder(self) -> np.ndarray:
        return self.zero_vector | self.no_reference


class ScoreTable(BaseModel):
    """x_i / y_i per training sample"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sample_ids: List[str]
    speaker_scores: np.ndarray
    face_scores: Optional[np.ndarray] = None
    flags: np.ndarray
    self_inclusion: bool = False
    mask_id: str = "all"

    @model_validator(mode="after")
    def validate_table(self) -> "ScoreTable":
        n = len(self.sample_ids)
        if self.speaker_scores.shape != (n,) or self.flags.shape != (n,):
            raise ModalityMismatchError("speaker scores and flags must have one entry per sample")
        if self.face_scores is not None and self.face_scores.shape != (n,):
            raise ModalityMismatchError("face scores must have one entry per sample")
        for scores in (self.speaker_scores, self.face_scores):
            if scores is None:
                continue
            if np.any(np.abs(scores) > 1.0 + SCORE_TOLERANCE):
                raise ValueError("scores must lie in [-1, 1]")
        return self

    @property
    def n(self) -> int:
        return len(self.sample_ids)

    @property
    def has_face(self) -> bool:
        return self.face_scores is not None

    def points(self) -> np.ndarray:
        """N x 2 array of (x, y); requires face scores"""
        if self.face_scores is None:
            raise ModalityMismatchError("score table has no face scores")
        return np.column_stack([self.speaker_scores, self.face_scores])

    def speaker_placeholders(self) -> np.ndarray:
        speaker = ScoreFlag.SPEAKER_ZERO_VECTOR | ScoreFlag.SPEAKER_NO_REFERENCE
        return (self.flags & int(speaker)) != 0
