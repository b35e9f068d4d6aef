"""
Embedding Models
Pydantic models cho per-sample identity embeddings và class label assignments
"""

from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from avcleanse.core.exceptions import FormatError, LabelError
from avcleanse.utils.validators import (
    validate_finite_rows,
    validate_unique_ids,
    validate_unit_rows,
)


class Modality(str, Enum):
    """Embedding modalities"""
    SPEECH = "speech"
    FACE = "face"

    @property
    def code(self) -> int:
        return 0 if self is Modality.SPEECH else 1

    @classmethod
    def from_code(cls, code: int) -> "Modality":
        if code == 0:
            return cls.SPEECH
        if code == 1:
            return cls.FACE
        raise FormatError(f"malformed header: unknown modality code {code}", {"modality": code})


def _readonly(array: np.ndarray) -> np.ndarray:
    view = array.view()
    view.flags.writeable = False
    return view


class EmbeddingSet(BaseModel):
    """Dense N x d matrix of identity embeddings for one modality"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    modality: Modality
    sample_ids: List[str] = Field(..., min_length=1)
    vectors: np.ndarray
    normalized: bool = False
    zero_rows: Optional[np.ndarray] = Field(
        None, description="Rows that were all-zero at normalization time"
    )

    @field_validator("vectors")
    @classmethod
    def validate_vectors(cls, v: np.ndarray) -> np.ndarray:
        array = np.ascontiguousarray(v, dtype=np.float32)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"vectors must be a non-empty 2-D matrix, got shape {array.shape}")
        return _readonly(array)

    @model_validator(mode="after")
    def validate_set(self) -> "EmbeddingSet":
        if len(self.sample_ids) != self.vectors.shape[0]:
            raise FormatError(
                f"{len(self.sample_ids)} sample ids for {self.vectors.shape[0]} rows",
                {"ids": len(self.sample_ids), "rows": self.vectors.shape[0]},
            )
        validate_unique_ids(self.sample_ids)
        validate_finite_rows(self.vectors, self.sample_ids)
        if self.zero_rows is not None:
            if self.zero_rows.shape != (self.vectors.shape[0],):
                raise ValueError("zero_rows must hold one flag per row")
            object.__setattr__(self, "zero_rows", _readonly(self.zero_rows.astype(bool)))
        if self.normalized:
            validate_unit_rows(self.vectors, self.zero_mask)
        return self

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def zero_mask(self) -> np.ndarray:
        """Boolean flag per row; all False when nothing was flagged"""
        if self.zero_rows is None:
            return np.zeros(self.n, dtype=bool)
        return self.zero_rows

    @cached_property
    def index(self) -> Dict[str, int]:
        return {sample_id: i for i, sample_id in enumerate(self.sample_ids)}

    def rows_for(self, sample_ids: Sequence[str]) -> np.ndarray:
        """Row indices for ``sample_ids``; raises LabelError on an unknown id"""
        index = self.index
        rows = np.empty(len(sample_ids), dtype=np.int64)
        for k, sample_id in enumerate(sample_ids):
            row = index.get(sample_id)
            if row is None:
                raise LabelError(
                    f"unknown sample id {sample_id!r} ({self.modality.value} embeddings)",
                    {"sample_id": sample_id},
                )
            rows[k] = row
        return rows


class LabelMap(BaseModel):
    """sample_id -> dense class id (1..K) with class sizes"""

    model_config = ConfigDict(frozen=True)

    assignments: Dict[str, int]
    num_classes: int = Field(..., ge=1)
    class_sizes: Dict[int, int]
    original_ids: Dict[int, str] = Field(
        default_factory=dict, description="Dense class id -> class id as written in the labels file"
    )

    @model_validator(mode="after")
    def validate_labels(self) -> "LabelMap":
        expected = set(range(1, self.num_classes + 1))
        if set(self.class_sizes) != expected:
            raise LabelError("class ids must be dense 1..K", {"num_classes": self.num_classes})
        if any(size < 1 for size in self.class_sizes.values()):
            raise LabelError("every class needs at least one sample")
        if sum(self.class_sizes.values()) != len(self.assignments):
            raise LabelError("class sizes do not add up to the number of samples")
        return self

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple]) -> "LabelMap":
        """
        Build from (sample_id, raw class id) pairs, re-indexing classes densely in
        first-appearance order
        """
        dense: Dict[str, int] = {}
        assignments: Dict[str, int] = {}
        sizes: Dict[int, int] = {}
        for sample_id, raw_class in pairs:
            raw = str(raw_class)
            if raw not in dense:
                dense[raw] = len(dense) + 1
            class_id = dense[raw]
            if sample_id in assignments:
                raise LabelError(f"duplicate sample id {sample_id!r}", {"sample_id": sample_id})
            assignments[sample_id] = class_id
            sizes[class_id] = sizes.get(class_id, 0) + 1
        return cls(
            assignments=assignments,
            num_classes=len(dense),
            class_sizes=sizes,
            original_ids={class_id: raw for raw, class_id in dense.items()},
        )

    def class_vector(self, sample_ids: Sequence[str]) -> np.ndarray:
        """Dense class ids aligned with ``sample_ids``"""
        try:
            return np.fromiter(
                (self.assignments[s] for s in sample_ids), dtype=np.int64, count=len(sample_ids)
            )
        except KeyError as exc:
            raise LabelError(f"sample {exc.args[0]!r} has no label", {"sample_id": exc.args[0]})

    def original_id(self, class_id: int) -> str:
        return self.original_ids.get(class_id, str(class_id))
