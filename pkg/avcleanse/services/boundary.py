"""
Decision boundary in the two-dimensional (speaker score, face score) space.

A linear soft-margin SVM is fitted on validation trials: target trials (same identity)
stand for clean samples, imposter trials for noisy ones. Features are standardized on
the training trials first. The fitted problem is

    min_{w, b}  1/2 ||w||^2 + (C / n) * sum_i max(0, 1 - t_i (w . z_i + b))

with t_i = +1 for targets and -1 for imposters.
"""

import hashlib
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from sklearn.svm import SVC

from avcleanse.core.config import settings
from avcleanse.core.exceptions import BoundaryTrainingError, MissingModalityError
from avcleanse.models.boundary import BoundaryModel, Kernel, TrialLabel, TrialSet
from avcleanse.models.embedding import EmbeddingSet
from avcleanse.repositories.documents import read_document, write_document
from avcleanse.repositories.tables import read_trials
from avcleanse.schemas.documents import BoundaryLine
from avcleanse.services.similarity import pair_cosines
from avcleanse.utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

# libsvm KKT-violation tolerance
SOLVER_TOL = 1e-10
MIN_STD = 1e-12
# margin distance under which a trial counts as sitting on the margin
ACTIVE_TOL = 1e-6


class BoundaryService:
    """Train and apply the score-space SVM"""

    def __init__(self, threads: Optional[int] = None):
        self.threads = threads or settings.threads

    def score_trials(
        self, trials: TrialSet, speech: EmbeddingSet, face: Optional[EmbeddingSet]
    ) -> TrialSet:
        """Attach (speech cosine, face cosine) to every trial"""
        if face is None:
            raise MissingModalityError("scoring trials for the boundary needs face embeddings")
        speaker_scores = pair_cosines(speech, trials.sample_a, trials.sample_b, self.threads)
        face_scores = pair_cosines(face, trials.sample_a, trials.sample_b, self.threads)
        n_target, n_imposter = trials.counts()
        logger.info("trials_scored", n=trials.n, n_target=n_target, n_imposter=n_imposter)
        return trials.with_scores(speaker_scores, face_scores)

    def train_boundary(self, trials: TrialSet, C: float = 1.0) -> BoundaryModel:
        """
        Fit the linear SVM on scored trials.

        Raises:
            BoundaryTrainingError: only one label present, or a score axis has zero variance
        """
        if C <= 0:
            raise BoundaryTrainingError(f"C must be positive, got {C}")
        points = trials.points()
        n_target, n_imposter = trials.counts()
        if n_target == 0 or n_imposter == 0:
            raise BoundaryTrainingError(
                "boundary training needs at least one target and one imposter trial",
                {"n_target": n_target, "n_imposter": n_imposter},
            )
        means = points.mean(axis=0)
        stds = points.std(axis=0)
        if np.any(stds <= MIN_STD):
            axis = "speaker" if stds[0] <= MIN_STD else "face"
            raise BoundaryTrainingError(
                f"{axis} scores have zero variance over the training trials", {"axis": axis}
            )
        z = (points - means) / stds
        targets = (trials.labels == TrialLabel.TARGET).astype(np.int64)

        svc = SVC(kernel="linear", C=C / trials.n, tol=SOLVER_TOL, shrinking=True)
        svc.fit(z, targets)
        # classes_ is sorted, so the positive side of decision_function is class 1 (target)
        signs = np.where(targets == 1, 1.0, -1.0)
        w, b = polish(z, signs, svc.coef_[0].astype(np.float64), float(svc.intercept_[0]), C / trials.n)

        model = BoundaryModel(
            w=(float(w[0]), float(w[1])),
            b=b,
            means=(float(means[0]), float(means[1])),
            stds=(float(stds[0]), float(stds[1])),
            C=C,
            kernel=Kernel.LINEAR,
            n_trials=trials.n,
        )
        objective = hinge_objective(model, trials)
        model = model.model_copy(update={"objective": objective})
        accuracy = float(np.mean((model.decision_function(points) >= 0) == targets.astype(bool)))
        logger.info(
            "boundary_fitted",
            w=model.w,
            b=round(b, 6),
            objective=round(objective, 9),
            train_accuracy=round(accuracy, 6),
            n_target=n_target,
            n_imposter=n_imposter,
        )
        return model

    def predict(self, model: BoundaryModel, point: Tuple[float, float]) -> Tuple[TrialLabel, float]:
        """Target iff the margin is >= 0"""
        margin = float(model.decision_function(np.asarray([point], dtype=np.float64))[0])
        return (TrialLabel.TARGET if margin >= 0 else TrialLabel.IMPOSTER), margin

    def predict_many(self, model: BoundaryModel, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(is_target mask, margins) for an (n, 2) array"""
        margins = model.decision_function(points)
        return margins >= 0, margins


def _primal(z: np.ndarray, signs: np.ndarray, w: np.ndarray, b: float, box: float) -> float:
    return float(0.5 * w @ w + box * np.maximum(0.0, 1.0 - signs * (z @ w + b)).sum())


def polish(
    z: np.ndarray, signs: np.ndarray, w: np.ndarray, b: float, box: float
) -> Tuple[np.ndarray, float]:
    """
    Re-solve the KKT system on the active set found by libsvm.

    Trials inside the margin keep alpha = box, trials on the margin get their alpha and b
    from the equality conditions. The refined point is kept only when its multipliers are
    feasible and the primal objective does not go up.
    """
    margins = signs * (z @ w + b)
    free = np.abs(margins - 1.0) <= ACTIVE_TOL
    bound = margins < 1.0 - ACTIVE_TOL
    if not free.any():
        return w, b
    w_bound = box * (signs[bound, None] * z[bound]).sum(axis=0)
    zf, sf = z[free], signs[free]
    k = zf.shape[0]
    system = np.zeros((k + 1, k + 1), dtype=np.float64)
    system[:k, :k] = np.outer(sf, sf) * (zf @ zf.T)
    system[:k, k] = sf
    system[k, :k] = sf
    rhs = np.empty(k + 1, dtype=np.float64)
    rhs[:k] = 1.0 - sf * (zf @ w_bound)
    rhs[k] = -box * signs[bound].sum()
    solution = np.linalg.lstsq(system, rhs, rcond=None)[0]
    alpha, refined_b = solution[:k], float(solution[k])
    if np.any(alpha < -ACTIVE_TOL * box) or np.any(alpha > box * (1.0 + ACTIVE_TOL)):
        return w, b
    refined_w = w_bound + (alpha * sf) @ zf
    if _primal(z, signs, refined_w, refined_b, box) > _primal(z, signs, w, b, box) + 1e-12:
        return w, b
    return refined_w, refined_b


def hinge_objective(model: BoundaryModel, trials: TrialSet) -> float:
    """Value of the fitted problem at ``model`` on ``trials``"""
    z = model.standardize(trials.points())
    signs = np.where(trials.labels == TrialLabel.TARGET, 1.0, -1.0)
    w = np.asarray(model.w, dtype=np.float64)
    hinge = np.maximum(0.0, 1.0 - signs * (z @ w + model.b))
    return float(0.5 * w @ w + model.C * hinge.mean())


def model_digest(model: BoundaryModel) -> str:
    """Short content hash identifying a trained model in reports"""
    return "svm-" + hashlib.sha1(model.model_dump_json().encode("utf-8")).hexdigest()[:12]


def boundary_line(model: BoundaryModel) -> BoundaryLine:
    """The zero-margin line expressed in raw (x, y) score coordinates"""
    a = model.w[0] / model.stds[0]
    b = model.w[1] / model.stds[1]
    c = model.b - a * model.means[0] - b * model.means[1]
    slope = intercept = None
    if b != 0.0:
        slope = -a / b
        intercept = -c / b
    return BoundaryLine(a=a, b=b, c=c, slope=slope, intercept=intercept, objective=model.objective)


def save_model(model: BoundaryModel, path: PathLike) -> None:
    write_document(model, path)
    logger.debug("boundary_saved", path=str(path), model_id=model_digest(model))


def load_model(path: PathLike) -> BoundaryModel:
    model = read_document(BoundaryModel, path)
    logger.info("boundary_loaded", path=str(path), model_id=model_digest(model))
    return model


def load_trials(path: PathLike) -> TrialSet:
    trials = read_trials(path)
    n_target, n_imposter = trials.counts()
    logger.info("trials_loaded", path=str(path), n_target=n_target, n_imposter=n_imposter)
    return trials
