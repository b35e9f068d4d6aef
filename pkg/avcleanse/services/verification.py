"""
Verification: per-trial cosine scoring, audio-visual fusion và EER
"""

from typing import Optional, Tuple

import numpy as np
from sklearn.metrics import roc_curve

from avcleanse.core.config import settings
from avcleanse.core.exceptions import EvaluationError, MissingModalityError, NormalizationError
from avcleanse.models.boundary import TrialLabel, TrialSet
from avcleanse.models.embedding import EmbeddingSet
from avcleanse.models.scores import PLACEHOLDER_SCORE
from avcleanse.models.verification import EvalMode, EvalResult, ScoredTrialList
from avcleanse.services.similarity import BLOCK_ROWS, check_aligned, pair_cosines
from avcleanse.utils.logger import get_logger
from avcleanse.utils.validators import UNIT_NORM_TOLERANCE

logger = get_logger(__name__)


def fuse_embeddings(speech: np.ndarray, face: np.ndarray) -> np.ndarray:
    """
    Concatenate unit-norm speech and face vectors (last axis).

    The result is not renormalized, so the cosine of two fused vectors is the mean of
    the two modality cosines.

    Raises:
        NormalizationError: an input row is not unit-norm
    """
    speech = np.asarray(speech, dtype=np.float64)
    face = np.asarray(face, dtype=np.float64)
    for name, part in (("speech", speech), ("face", face)):
        norms = np.linalg.norm(part, axis=-1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE):
            raise NormalizationError(f"{name} vector passed to fusion is not unit-norm")
    return np.concatenate([speech, face], axis=-1)


def compute_eer(scores: np.ndarray, labels: np.ndarray) -> Tuple[float, float]:
    """
    Equal error rate over the threshold sweep.

    Scores >= threshold are accepted as targets; tied scores form one operating point.
    Where false rejection and false acceptance cross between two operating points both
    the rate and the threshold are interpolated linearly.
    The rate is not folded around 0.5: a scorer that ranks imposters above targets
    reports an EER above one half.

    Returns:
        (eer, threshold)
    """
    listed = ScoredTrialList(
        scores=np.asarray(scores, dtype=np.float64), labels=np.asarray(labels)
    )
    if listed.n_target == 0 or listed.n_imposter == 0:
        raise EvaluationError(
            "EER needs at least one target and one imposter trial",
            {"n_target": listed.n_target, "n_imposter": listed.n_imposter},
        )
    y_true = (listed.labels == TrialLabel.TARGET).astype(np.int64)
    fpr, tpr, thresholds = roc_curve(y_true, listed.scores, drop_intermediate=False)
    fnr = 1.0 - tpr
    gap = fnr - fpr
    # gap starts at 1 (nothing accepted) and ends at -1 (everything accepted)
    i = int(np.flatnonzero(gap <= 0)[0])
    t = gap[i - 1] / (gap[i - 1] - gap[i])
    eer = float(fpr[i - 1] + t * (fpr[i] - fpr[i - 1]))
    upper = thresholds[i - 1]
    if not np.isfinite(upper):
        threshold = float(thresholds[i])
    else:
        threshold = float(upper + t * (thresholds[i] - upper))
    return eer, threshold


class VerificationService:
    def __init__(self, threads: Optional[int] = None):
        self.threads = threads or settings.threads

    def fused_cosines(self, trials: TrialSet, speech: EmbeddingSet, face: EmbeddingSet) -> np.ndarray:
        """Cosine between the concatenated embeddings of each trial's two samples"""
        check_aligned(speech, face)
        if not (speech.normalized and face.normalized):
            raise NormalizationError("fusion needs L2-normalized speech and face embeddings")
        rows_a = speech.rows_for(trials.sample_a)
        rows_b = speech.rows_for(trials.sample_b)
        zero = speech.zero_mask | face.zero_mask
        usable = ~(zero[rows_a] | zero[rows_b])
        scores = np.full(trials.n, PLACEHOLDER_SCORE, dtype=np.float64)
        for start in range(0, trials.n, BLOCK_ROWS):
            stop = min(start + BLOCK_ROWS, trials.n)
            keep = np.flatnonzero(usable[start:stop]) + start
            if keep.size == 0:
                continue
            left = fuse_embeddings(speech.vectors[rows_a[keep]], face.vectors[rows_a[keep]])
            right = fuse_embeddings(speech.vectors[rows_b[keep]], face.vectors[rows_b[keep]])
            norms = np.linalg.norm(left, axis=1) * np.linalg.norm(right, axis=1)
            scores[keep] = (left * right).sum(axis=1) / norms
        return scores

    def evaluate(
        self,
        trials: TrialSet,
        speech: Optional[EmbeddingSet],
        face: Optional[EmbeddingSet],
        mode: EvalMode,
    ) -> EvalResult:
        """Score every trial in ``mode`` and compute the EER"""
        mode = EvalMode(mode)
        if mode in (EvalMode.SPEECH, EvalMode.FUSION) and speech is None:
            raise MissingModalityError(f"{mode.value} evaluation needs speech embeddings")
        if mode in (EvalMode.FACE, EvalMode.FUSION) and face is None:
            raise MissingModalityError(f"{mode.value} evaluation needs face embeddings")

        if mode == EvalMode.SPEECH:
            scores = pair_cosines(speech, trials.sample_a, trials.sample_b, self.threads)
        elif mode == EvalMode.FACE:
            scores = pair_cosines(face, trials.sample_a, trials.sample_b, self.threads)
        else:
            scores = self.fused_cosines(trials, speech, face)

        eer, threshold = compute_eer(scores, trials.labels)
        n_target, n_imposter = trials.counts()
        logger.info(
            "eer_computed",
            mode=mode.value,
            eer=round(eer, 6),
            threshold=round(threshold, 6),
            n_target=n_target,
            n_imposter=n_imposter,
        )
        return EvalResult(
            mode=mode,
            eer=eer,
            threshold=threshold,
            scored=ScoredTrialList(scores=scores, labels=trials.labels),
        )
