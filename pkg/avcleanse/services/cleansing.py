"""
Two-step cleansing.

Coarse step: one global threshold on the speaker score x_i splits the data into easy
and peculiar samples. Fine step: the score-space SVM decides clean / noisy from
(x_i, y_i) computed against a reference set, which starts as the easy set and is
replaced by the previous round's clean set on every later round.
"""

from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
from sklearn.metrics import f1_score, precision_score, recall_score

from avcleanse.core.config import settings
from avcleanse.core.exceptions import EmptyReferenceError, LabelError, MissingModalityError
from avcleanse.models.boundary import BoundaryModel
from avcleanse.models.cleansing import (
    CleanseScope,
    CleansingConfigEcho,
    CleansingReport,
    CoarsePartition,
    RecoveryMetrics,
    RoundRecord,
)
from avcleanse.models.embedding import EmbeddingSet, LabelMap
from avcleanse.models.pipeline import DEFAULT_KEEP_FRACTION, DEFAULT_ROUNDS
from avcleanse.models.scores import PLACEHOLDER_SCORE, ScoreTable
from avcleanse.repositories.tables import read_ground_truth
from avcleanse.services.boundary import model_digest
from avcleanse.services.similarity import MaskLike, SimilarityService, as_mask, check_aligned
from avcleanse.utils.logger import get_logger
from avcleanse.utils.validators import round_half_up, validate_fraction

logger = get_logger(__name__)

PathLike = Union[str, Path]


def coarse_partition(
    scores: np.ndarray, keep_fraction: float, placeholder: Optional[np.ndarray] = None
) -> CoarsePartition:
    """
    Keep the top round(keep_fraction * N) samples by score as easy.

    Ordering is (score descending, index ascending), so ties at the cut go to the lower
    index. Placeholder-scored samples are never easy; ``placeholder`` defaults to
    ``scores <= -1``.
    """
    validate_fraction("keep_fraction", keep_fraction)
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    if n == 0:
        raise EmptyReferenceError("cannot partition an empty score vector")
    if placeholder is None:
        placeholder = scores <= PLACEHOLDER_SCORE
    key = np.where(placeholder, -np.inf, scores)
    order = np.argsort(-key, kind="stable")

    n_easy = round_half_up(keep_fraction * n)
    n_valid = int(np.count_nonzero(~placeholder))
    if n_easy > n_valid:
        logger.warning("coarse_short_of_target", wanted=n_easy, available=n_valid)
        n_easy = n_valid

    easy_mask = np.zeros(n, dtype=bool)
    easy_mask[order[:n_easy]] = True
    if n_easy:
        tau = float(scores[order[n_easy - 1]])
    else:
        tau = float(np.nextafter(np.max(scores), np.inf))
    return CoarsePartition(tau=tau, easy_mask=easy_mask, keep_fraction=keep_fraction)


def fine_cleanse(
    table: ScoreTable,
    model: BoundaryModel,
    scope: CleanseScope,
    coarse: CoarsePartition,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Clean iff the model puts (x_i, y_i) on the target side.

    Under ``peculiar_only`` easy samples are clean regardless of their margin.

    Returns:
        (clean mask, signed margins)
    """
    if not table.has_face:
        raise MissingModalityError("fine cleansing needs face scores for the 2-D boundary")
    margins = model.decision_function(table.points())
    clean = margins >= 0
    if CleanseScope(scope) == CleanseScope.PECULIAR_ONLY:
        clean = clean | coarse.easy_mask
    return clean, margins


class CleansingService:
    def __init__(self, threads: Optional[int] = None):
        self.similarity = SimilarityService(threads or settings.threads)

    def run_pipeline(
        self,
        speech: EmbeddingSet,
        face: Optional[EmbeddingSet],
        labels: LabelMap,
        model: BoundaryModel,
        keep_fraction: float = DEFAULT_KEEP_FRACTION,
        rounds: int = DEFAULT_ROUNDS,
        self_inclusion: bool = False,
        scope: CleanseScope = CleanseScope.ALL_SAMPLES,
        refined_speech: Optional[EmbeddingSet] = None,
        refined_face: Optional[EmbeddingSet] = None,
        initial_mask: MaskLike = None,
    ) -> CleansingReport:
        """
        Coarse partition once, then up to ``rounds`` fine rounds.

        Args:
            refined_speech / refined_face: replace the modality for every fine-round
                scoring pass; the coarse step always uses ``speech``
            initial_mask: round-1 reference instead of the easy set

        Stops before ``rounds`` when a round's clean set equals the one of the round just before it;
        masks from earlier rounds are not compared.
        """
        if face is None:
            raise MissingModalityError(
                "fine cleansing requires both modalities; provide face embeddings"
            )
        if rounds < 1:
            raise ValueError("rounds must be >= 1")
        check_aligned(speech, face)
        fine_speech = refined_speech if refined_speech is not None else speech
        fine_face = refined_face if refined_face is not None else face
        check_aligned(speech, fine_speech)
        check_aligned(speech, fine_face)

        coarse_scores = self.similarity.intra_class_scores(speech, labels, None, self_inclusion)
        coarse = coarse_partition(coarse_scores.scores, keep_fraction, coarse_scores.placeholder)
        logger.info(
            "coarse_partitioned",
            n=coarse.n,
            n_easy=int(coarse.easy_mask.sum()),
            tau=round(coarse.tau, 6),
        )

        if initial_mask is None:
            reference, mask_name = coarse.easy_mask, "easy"
        else:
            reference, mask_name = as_mask(initial_mask, speech.n), "initial"

        records = []
        stopped_early = False
        for r in range(1, rounds + 1):
            logger.debug("round_started", round=r, n_reference=int(reference.sum()))
            table = self.similarity.build_score_table(
                fine_speech, fine_face, labels, reference, self_inclusion, mask_name=mask_name
            )
            clean, margins = fine_cleanse(table, model, scope, coarse)
            records.append(
                RoundRecord(
                    round=r,
                    reference_mask=reference.copy(),
                    table=table,
                    clean_mask=clean,
                    margins=margins,
                )
            )
            logger.info(
                "round_finished",
                round=r,
                n_clean=int(clean.sum()),
                n_noisy=int((~clean).sum()),
            )
            if r > 1 and np.array_equal(clean, records[-2].clean_mask):
                stopped_early = r < rounds
                break
            reference, mask_name = clean, "clean"

        return CleansingReport(
            sample_ids=list(speech.sample_ids),
            class_ids=labels.class_vector(speech.sample_ids),
            coarse=coarse,
            rounds=records,
            config=CleansingConfigEcho(
                keep_fraction=keep_fraction,
                rounds=rounds,
                self_inclusion=self_inclusion,
                scope=CleanseScope(scope),
                boundary_model_id=model_digest(model),
                C=model.C,
                refined_speech=refined_speech is not None,
                refined_face=refined_face is not None,
                initial_mask=initial_mask is not None,
            ),
            stopped_early=stopped_early,
        )


def recovery_metrics(
    report: CleansingReport,
    ground_truth: Union[Dict[str, bool], Iterable[str]],
    reference: Optional[str] = None,
) -> RecoveryMetrics:
    """
    Precision / recall / F1 of the reported noisy set.

    ``ground_truth`` is either sample_id -> is_noisy covering every sample, or the
    collection of truly noisy ids.
    """
    if isinstance(ground_truth, dict):
        missing = [s for s in report.sample_ids if s not in ground_truth]
        if missing:
            raise LabelError(
                f"ground truth has no entry for {len(missing)} sample(s), first {missing[0]!r}",
                {"sample_id": missing[0]},
            )
        truth = np.fromiter((ground_truth[s] for s in report.sample_ids), dtype=bool)
    else:
        noisy = set(ground_truth)
        truth = np.fromiter((s in noisy for s in report.sample_ids), dtype=bool)
    found = ~report.final_clean_mask
    metrics = RecoveryMetrics(
        precision=float(precision_score(truth, found, zero_division=1.0)),
        recall=float(recall_score(truth, found, zero_division=1.0)),
        f1=float(f1_score(truth, found, zero_division=1.0)),
        n_true_noisy=int(truth.sum()),
        n_found_noisy=int(found.sum()),
        n_correct=int((truth & found).sum()),
        reference=reference,
    )
    logger.info(
        "recovery_measured",
        precision=round(metrics.precision, 6),
        recall=round(metrics.recall, 6),
        f1=round(metrics.f1, 6),
    )
    return metrics


def load_ground_truth(path: PathLike) -> Dict[str, bool]:
    truth = read_ground_truth(path)
    logger.info("ground_truth_loaded", path=str(path), n=len(truth), n_noisy=sum(truth.values()))
    return truth
