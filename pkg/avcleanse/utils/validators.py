"""
Validation utilities cho embedding matrices, score vectors và config values
"""

import math
from typing import Iterable, List, Sequence, Type

import numpy as np

from avcleanse.core.exceptions import (
    AVCleanseError,
    ConfigError,
    FormatError,
    NonFiniteValueError,
    NormalizationError,
)

UNIT_NORM_TOLERANCE = 1e-5


def round_half_up(value: float) -> int:
    """Round to nearest integer, halves upward (0.5 -> 1, 2.5 -> 3)."""
    return int(math.floor(value + 0.5))


def validate_finite_rows(vectors: np.ndarray, sample_ids: Sequence[str]) -> None:
    """
    Raise on the first row containing NaN or Inf

    Args:
        vectors: N x d matrix
        sample_ids: ids aligned with the rows
    """
    finite = np.isfinite(vectors).all(axis=1)
    if finite.all():
        return
    row = int(np.flatnonzero(~finite)[0])
    raise NonFiniteValueError(
        f"non-finite value in row {row} (sample id {sample_ids[row]!r})",
        {"row": row, "sample_id": sample_ids[row]},
    )


def validate_unique_ids(
    sample_ids: Sequence[str], error_cls: Type[AVCleanseError] = FormatError
) -> None:
    seen = set()
    for sample_id in sample_ids:
        if sample_id in seen:
            raise error_cls(f"duplicate sample id {sample_id!r}", {"sample_id": sample_id})
        seen.add(sample_id)


def validate_unit_rows(vectors: np.ndarray, zero_rows: np.ndarray, what: str = "embeddings") -> None:
    """Every non-placeholder row must be unit norm within UNIT_NORM_TOLERANCE."""
    norms_sq = np.einsum("ij,ij->i", vectors.astype(np.float64), vectors.astype(np.float64))
    bad = np.abs(norms_sq - 1.0) > UNIT_NORM_TOLERANCE
    bad &= ~zero_rows
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise NormalizationError(
            f"{what} are not L2-normalized (row {row} has squared norm {norms_sq[row]:.6f})",
            {"row": row},
        )


def validate_fraction(name: str, value: float, low_open: float = 0.0, high_open: float = 1.0) -> float:
    if not (low_open < value < high_open):
        raise ConfigError(
            f"{name} must lie in ({low_open}, {high_open}), got {value}",
            {name: value},
        )
    return value


def first_missing(expected: Iterable[str], present: Iterable[str]) -> List[str]:
    """Ids in ``expected`` that are not in ``present``, in expected order."""
    present_set = set(present)
    return [item for item in expected if item not in present_set]
