"""
Intra-class cosine scoring

x_i (speech) and y_i (face) are the mean cosine between sample i and the reference
samples labelled with the same class. For unit vectors the mean cosine equals
v_i . (sum of reference vectors) / M_k, so each class is reduced once and every sample
costs one d-dimensional dot product.
"""

import hashlib
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from avcleanse.core.config import settings
from avcleanse.core.exceptions import (
    EmptyReferenceError,
    ModalityMismatchError,
    NormalizationError,
)
from avcleanse.models.embedding import EmbeddingSet, LabelMap
from avcleanse.models.scores import PLACEHOLDER_SCORE, ScoreFlag, ScoreTable, ScoreVector
from avcleanse.utils.logger import get_logger

logger = get_logger(__name__)

MaskLike = Union[np.ndarray, Sequence[int], None]

# Rows per scoring block. Fixed so the work split never depends on the thread cap.
BLOCK_ROWS = 8192


def as_mask(reference_mask: MaskLike, n: int) -> np.ndarray:
    """Boolean mask from None (everything), a boolean array or a list of indices"""
    if reference_mask is None:
        return np.ones(n, dtype=bool)
    array = np.asarray(reference_mask)
    if array.dtype == bool:
        if array.shape != (n,):
            raise ValueError(f"reference mask has {array.shape[0]} entries for {n} samples")
        return array.copy()
    indices = array.astype(np.int64).ravel()
    bad = (indices < 0) | (indices >= n)
    if bad.any():
        raise ValueError(f"reference index {int(indices[bad][0])} out of range for {n} samples")
    mask = np.zeros(n, dtype=bool)
    mask[indices] = True
    return mask


def mask_digest(mask: np.ndarray, name: str = "mask") -> str:
    if mask.all():
        return "all"
    digest = hashlib.sha1(np.packbits(mask).tobytes()).hexdigest()[:12]
    return f"{name}-{digest}"


class SimilarityService:
    """Per-sample intra-class scores"""

    def __init__(self, threads: Optional[int] = None):
        self.threads = threads or settings.threads

    def _prepare(
        self, embeddings: EmbeddingSet, labels: LabelMap, reference_mask: MaskLike
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not embeddings.normalized:
            raise NormalizationError(
                f"{embeddings.modality.value} embeddings must be L2-normalized before scoring"
            )
        classes = labels.class_vector(embeddings.sample_ids)
        mask = as_mask(reference_mask, embeddings.n)
        if not mask.any():
            raise EmptyReferenceError("reference mask selects no samples")
        zero = embeddings.zero_mask
        return classes, mask & ~zero, zero

    def _class_sums(
        self, vectors: np.ndarray, classes: np.ndarray, reference: np.ndarray, num_classes: int
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Float64 per-class sums over reference rows, added in sample-index order"""
        sums = np.zeros((num_classes + 1, vectors.shape[1]), dtype=np.float64)
        counts = np.zeros(num_classes + 1, dtype=np.int64)
        ref_rows = np.flatnonzero(reference)
        if ref_rows.size == 0:
            return sums, counts
        order = np.argsort(classes[ref_rows], kind="stable")
        rows = ref_rows[order]
        present, starts, sizes = np.unique(classes[rows], return_index=True, return_counts=True)
        sums[present] = np.add.reduceat(vectors[rows].astype(np.float64), starts, axis=0)
        counts[present] = sizes
        return sums, counts

    def _score_block(
        self,
        vectors: np.ndarray,
        classes: np.ndarray,
        sums: np.ndarray,
        start: int,
        stop: int,
    ) -> Tuple[np.ndarray, np.ndarray]:
        block = vectors[start:stop].astype(np.float64)
        dots = (block * sums[classes[start:stop]]).sum(axis=1)
        self_dots = (block * block).sum(axis=1)
        return dots, self_dots

    def intra_class_scores(
        self,
        embeddings: EmbeddingSet,
        labels: LabelMap,
        reference_mask: MaskLike = None,
        self_inclusion: bool = False,
    ) -> ScoreVector:
        """
        Centroid-sum scoring.

        Args:
            embeddings: normalized embedding set
            labels: class assignment for every sample
            reference_mask: samples allowed to act as class members (default: all)
            self_inclusion: keep the j = i term when sample i is itself a reference

        Returns:
            ScoreVector; samples with a zero embedding or no reference peers get -1
        """
        classes, reference, zero = self._prepare(embeddings, labels, reference_mask)
        vectors = embeddings.vectors
        sums, counts = self._class_sums(vectors, classes, reference, labels.num_classes)

        bounds = [(s, min(s + BLOCK_ROWS, embeddings.n)) for s in range(0, embeddings.n, BLOCK_ROWS)]
        if self.threads > 1 and len(bounds) > 1:
            parts = Parallel(n_jobs=self.threads, backend="threading")(
                delayed(self._score_block)(vectors, classes, sums, s, e) for s, e in bounds
            )
        else:
            parts = [self._score_block(vectors, classes, sums, s, e) for s, e in bounds]
        dots = np.concatenate([p[0] for p in parts])
        self_dots = np.concatenate([p[1] for p in parts])

        excluded = reference & (not self_inclusion)
        numerators = dots - np.where(excluded, self_dots, 0.0)
        denominators = counts[classes] - excluded.astype(np.int64)
        return self._finish(numerators, denominators, zero, embeddings)

    def pairwise_scores_bruteforce(
        self,
        embeddings: EmbeddingSet,
        labels: LabelMap,
        reference_mask: MaskLike = None,
        self_inclusion: bool = False,
    ) -> ScoreVector:
        """Literal O(N^2) average of pairwise cosines; oracle for intra_class_scores"""
        classes, reference, zero = self._prepare(embeddings, labels, reference_mask)
        vectors = embeddings.vectors.astype(np.float64)
        norms = np.linalg.norm(vectors, axis=1)
        numerators = np.zeros(embeddings.n, dtype=np.float64)
        denominators = np.zeros(embeddings.n, dtype=np.int64)
        for class_id in np.unique(classes):
            members = np.flatnonzero(classes == class_id)
            members = members[~zero[members]]
            refs = members[reference[members]]
            if members.size == 0 or refs.size == 0:
                continue
            # full member x reference cosine matrix
            cosines = (vectors[members] @ vectors[refs].T) / np.outer(norms[members], norms[refs])
            keep = np.ones_like(cosines, dtype=bool)
            if not self_inclusion:
                keep &= members[:, None] != refs[None, :]
            numerators[members] = np.where(keep, cosines, 0.0).sum(axis=1)
            denominators[members] = keep.sum(axis=1)
        return self._finish(numerators, denominators, zero, embeddings)

    def _finish(
        self,
        numerators: np.ndarray,
        denominators: np.ndarray,
        zero: np.ndarray,
        embeddings: EmbeddingSet,
    ) -> ScoreVector:
        no_reference = (denominators <= 0) & ~zero
        valid = ~(zero | no_reference)
        scores = np.full(embeddings.n, PLACEHOLDER_SCORE, dtype=np.float64)
        scores[valid] = numerators[valid] / denominators[valid]
        if no_reference.any():
            logger.debug(
                "placeholder_scores",
                modality=embeddings.modality.value,
                no_reference=int(no_reference.sum()),
                zero_vector=int(zero.sum()),
            )
        return ScoreVector(scores=scores, zero_vector=zero.copy(), no_reference=no_reference)

    def build_score_table(
        self,
        speech: EmbeddingSet,
        face: Optional[EmbeddingSet],
        labels: LabelMap,
        reference_mask: MaskLike = None,
        self_inclusion: bool = False,
        mask_name: str = "mask",
    ) -> ScoreTable:
        """x_i from ``speech`` and, when given, y_i from ``face`` against the same reference"""
        if face is not None:
            check_aligned(speech, face)
        mask = as_mask(reference_mask, speech.n)
        speaker = self.intra_class_scores(speech, labels, mask, self_inclusion)
        flags = np.zeros(speech.n, dtype=np.int64)
        flags[speaker.zero_vector] |= int(ScoreFlag.SPEAKER_ZERO_VECTOR)
        flags[speaker.no_reference] |= int(ScoreFlag.SPEAKER_NO_REFERENCE)
        face_scores = None
        if face is not None:
            face_vector = self.intra_class_scores(face, labels, mask, self_inclusion)
            flags[face_vector.zero_vector] |= int(ScoreFlag.FACE_ZERO_VECTOR)
            flags[face_vector.no_reference] |= int(ScoreFlag.FACE_NO_REFERENCE)
            face_scores = face_vector.scores
        table = ScoreTable(
            sample_ids=list(speech.sample_ids),
            speaker_scores=speaker.scores,
            face_scores=face_scores,
            flags=flags,
            self_inclusion=self_inclusion,
            mask_id=mask_digest(mask, mask_name),
        )
        logger.debug(
            "score_table_built",
            n=table.n,
            has_face=table.has_face,
            mask_id=table.mask_id,
            n_reference=int(mask.sum()),
        )
        return table


def check_aligned(first: EmbeddingSet, second: EmbeddingSet) -> None:
    """Both sets must list identical sample ids in identical order"""
    if first.sample_ids == second.sample_ids:
        return
    offending = _first_mismatch(first.sample_ids, second.sample_ids)
    raise ModalityMismatchError(
        f"{first.modality.value} and {second.modality.value} embeddings are not aligned; "
        f"first offending id {offending!r}",
        {"sample_id": offending},
    )


def _first_mismatch(a: List[str], b: List[str]) -> str:
    for left, right in zip(a, b):
        if left != right:
            return left
    return a[len(b)] if len(a) > len(b) else b[len(a)]


def pair_cosines(
    embeddings: EmbeddingSet,
    sample_a: Sequence[str],
    sample_b: Sequence[str],
    threads: Optional[int] = None,
) -> np.ndarray:
    """
    Cosine of each (a, b) pair of a normalized set; pairs touching a zero-vector
    placeholder score -1.
    """
    if not embeddings.normalized:
        raise NormalizationError(
            f"{embeddings.modality.value} embeddings must be L2-normalized before scoring"
        )
    rows_a = embeddings.rows_for(sample_a)
    rows_b = embeddings.rows_for(sample_b)
    vectors = embeddings.vectors
    n = rows_a.shape[0]

    def _block(start: int, stop: int) -> np.ndarray:
        left = vectors[rows_a[start:stop]].astype(np.float64)
        right = vectors[rows_b[start:stop]].astype(np.float64)
        return (left * right).sum(axis=1)

    bounds = [(s, min(s + BLOCK_ROWS, n)) for s in range(0, n, BLOCK_ROWS)]
    cap = threads or settings.threads
    if cap > 1 and len(bounds) > 1:
        parts = Parallel(n_jobs=cap, backend="threading")(delayed(_block)(s, e) for s, e in bounds)
    else:
        parts = [_block(s, e) for s, e in bounds]
    cosines = np.concatenate(parts) if parts else np.zeros(0, dtype=np.float64)
    zero = embeddings.zero_mask
    cosines[zero[rows_a] | zero[rows_b]] = PLACEHOLDER_SCORE
    return cosines
