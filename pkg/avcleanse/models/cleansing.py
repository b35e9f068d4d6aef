"""
Cleansing Models
Coarse partition, per-round records và the final cleansing report
"""

from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from avcleanse.models.scores import ScoreTable


class Decision(str, Enum):
    CLEAN = "clean"
    NOISY = "noisy"


class SampleCategory(str, Enum):
    """Final category of a training sample"""
    EASY = "easy"  # easy and clean
    HARD = "hard"  # peculiar but clean
    NOISY = "noisy"


class CleanseScope(str, Enum):
    ALL_SAMPLES = "all_samples"
    PECULIAR_ONLY = "peculiar_only"


class CoarsePartition(BaseModel):
    """Global-threshold split into easy / peculiar samples"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    tau: float
    easy_mask: np.ndarray
    keep_fraction: float = Field(..., gt=0, lt=1)

    @property
    def easy(self) -> List[int]:
        return np.flatnonzero(self.easy_mask).tolist()

    @property
    def peculiar(self) -> List[int]:
        return np.flatnonzero(~self.easy_mask).tolist()

    @property
    def n(self) -> int:
        return int(self.easy_mask.shape[0])


class RoundRecord(BaseModel):
    """One fine-cleansing round"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    round: int = Field(..., ge=1)
    reference_mask: np.ndarray
    table: ScoreTable
    clean_mask: np.ndarray
    margins: np.ndarray

    @model_validator(mode="after")
    def validate_round(self) -> "RoundRecord":
        n = self.table.n
        if self.reference_mask.shape != (n,) or self.clean_mask.shape != (n,):
            raise ValueError("round masks must have one entry per sample")
        return self

    @property
    def n_clean(self) -> int:
        return int(np.count_nonzero(self.clean_mask))


class CleansingConfigEcho(BaseModel):
    """Every parameter that shaped a cleansing run"""

    keep_fraction: float
    rounds: int
    self_inclusion: bool
    scope: CleanseScope
    boundary_model_id: str
    C: float
    refined_speech: bool = False
    refined_face: bool = False
    initial_mask: bool = False


class CleansingReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sample_ids: List[str]
    class_ids: np.ndarray
    coarse: CoarsePartition
    rounds: List[RoundRecord]
    config: CleansingConfigEcho
    stopped_early: bool = False

    @property
    def final_clean_mask(self) -> np.ndarray:
        return self.rounds[-1].clean_mask

    @property
    def final_clean(self) -> List[str]:
        return [s for s, keep in zip(self.sample_ids, self.final_clean_mask) if keep]

    @property
    def final_noisy(self) -> List[str]:
        return [s for s, keep in zip(self.sample_ids, self.final_clean_mask) if not keep]

    @property
    def final_hard(self) -> List[str]:
        hard = self.final_clean_mask & ~self.coarse.easy_mask
        return [s for s, flag in zip(self.sample_ids, hard) if flag]

    def categories(self) -> List[SampleCategory]:
        result = []
        for clean, easy in zip(self.final_clean_mask, self.coarse.easy_mask):
            if not clean:
                result.append(SampleCategory.NOISY)
            elif easy:
                result.append(SampleCategory.EASY)
            else:
                result.append(SampleCategory.HARD)
        return result

    def noisy_per_class(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        noisy = ~self.final_clean_mask
        for class_id, is_noisy in zip(self.class_ids.tolist(), noisy):
            counts.setdefault(class_id, 0)
            if is_noisy:
                counts[class_id] += 1
        return counts


class RecoveryMetrics(BaseModel):
    """Noisy-sample detection quality against ground truth"""

    precision: float
    recall: float
    f1: float
    n_true_noisy: int
    n_found_noisy: int
    n_correct: int
    reference: Optional[str] = None
