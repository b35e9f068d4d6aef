"""
fit-boundary: train the score-space SVM from validation trials
"""

from typing import Optional

import click

from avcleanse.cli.common import common_options, load_normalized, print_summary, require, run_command
from avcleanse.core.exceptions import MissingModalityError
from avcleanse.models.boundary import BoundaryModel
from avcleanse.models.embedding import EmbeddingSet, Modality
from avcleanse.models.pipeline import PipelineConfig
from avcleanse.repositories.artifacts import ArtifactSet
from avcleanse.repositories.documents import write_document
from avcleanse.services.boundary import (
    BoundaryService,
    boundary_line,
    load_model,
    load_trials,
    model_digest,
    save_model,
)


def train_from_trials(
    config: PipelineConfig, speech: EmbeddingSet, face: Optional[EmbeddingSet], artifacts: ArtifactSet
) -> BoundaryModel:
    """Score the configured trials, fit the SVM, write boundary.json and boundary_line.json"""
    require(config, "trials")
    if face is None:
        raise MissingModalityError("the boundary is trained on (speech, face) trial scores; provide face embeddings")
    service = BoundaryService(config.threads)
    trials = service.score_trials(load_trials(config.trials), speech, face)
    model = service.train_boundary(trials, config.C)
    save_model(model, artifacts.path("boundary.json"))
    write_document(boundary_line(model), artifacts.path("boundary_line.json"))
    return model


def obtain_boundary(
    config: PipelineConfig, speech: EmbeddingSet, face: Optional[EmbeddingSet], artifacts: ArtifactSet
) -> BoundaryModel:
    """Pre-trained model when 'boundary' is set, otherwise trained from 'trials'"""
    if config.boundary:
        model = load_model(config.boundary)
        write_document(boundary_line(model), artifacts.path("boundary_line.json"))
        return model
    return train_from_trials(config, speech, face, artifacts)


def _fit(config: PipelineConfig, artifacts: ArtifactSet) -> Optional[str]:
    require(config, "speech", "face", "trials")
    speech = load_normalized(config.speech, Modality.SPEECH)
    face = load_normalized(config.face, Modality.FACE)
    model = train_from_trials(config, speech, face, artifacts)
    line = boundary_line(model)
    print_summary(
        "decision boundary",
        [
            ("model", model_digest(model)),
            ("w", f"({model.w[0]:.6f}, {model.w[1]:.6f})"),
            ("b", f"{model.b:.6f}"),
            ("line", f"{line.a:.6f}*x + {line.b:.6f}*y + {line.c:.6f} = 0"),
            ("objective", f"{model.objective:.9f}"),
        ],
    )
    return None


@click.command("fit-boundary")
@common_options
@click.option("--speech", type=click.Path(dir_okay=False), default=None, help="Speech AVCE file")
@click.option("--face", type=click.Path(dir_okay=False), default=None, help="Face AVCE file")
@click.option("--trials", type=click.Path(dir_okay=False), default=None, help="Validation trial list")
@click.option("--C", "C", type=float, default=None, help="SVM regularization (default 1.0)")
def fit_boundary_command(
    config_path: Optional[str],
    threads: Optional[int],
    output_dir: Optional[str],
    log_level: Optional[str],
    log_json: Optional[bool],
    speech: Optional[str],
    face: Optional[str],
    trials: Optional[str],
    C: Optional[float],
) -> None:
    """Fit the clean/noisy boundary in (speaker score, face score) space."""
    overrides = {
        "threads": threads,
        "output_dir": output_dir,
        "speech": speech,
        "face": face,
        "trials": trials,
        "C": C,
    }
    run_command("fit-boundary", config_path, overrides, _fit, log_level, log_json)
