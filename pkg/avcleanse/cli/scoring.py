"""
score: per-sample intra-class scores; coarse: easy / peculiar split of a score table
"""

from typing import Optional

import click
import numpy as np

from avcleanse.cli.common import (
    common_options,
    load_label_map,
    load_normalized,
    print_summary,
    require,
    run_command,
)
from avcleanse.models.embedding import Modality
from avcleanse.models.pipeline import PipelineConfig
from avcleanse.repositories.artifacts import ArtifactSet
from avcleanse.repositories.documents import write_document
from avcleanse.repositories.tables import read_score_table, write_score_table
from avcleanse.schemas.documents import CoarseSummary
from avcleanse.services.cleansing import coarse_partition
from avcleanse.services.similarity import SimilarityService


def _score(config: PipelineConfig, artifacts: ArtifactSet) -> Optional[str]:
    require(config, "speech")
    speech = load_normalized(config.speech, Modality.SPEECH)
    face = load_normalized(config.face, Modality.FACE)
    labels = load_label_map(config, speech)
    table = SimilarityService(config.threads).build_score_table(
        speech, face, labels, None, config.self_inclusion
    )
    write_score_table(table, artifacts.path("scores.tsv"))
    rows = [("samples", table.n), ("classes", labels.num_classes), ("mean x", f"{table.speaker_scores.mean():.4f}")]
    if table.face_scores is not None:
        rows.append(("mean y", f"{table.face_scores.mean():.4f}"))
    rows.append(("placeholders", int(np.count_nonzero(table.flags))))
    print_summary("intra-class scores", rows)
    return None


def _coarse(config: PipelineConfig, artifacts: ArtifactSet) -> Optional[str]:
    require(config, "scores")
    table = read_score_table(config.scores)
    partition = coarse_partition(table.speaker_scores, config.keep_fraction, table.speaker_placeholders())
    summary = CoarseSummary(
        tau=partition.tau,
        keep_fraction=partition.keep_fraction,
        easy=[table.sample_ids[i] for i in partition.easy],
        peculiar=[table.sample_ids[i] for i in partition.peculiar],
    )
    write_document(summary, artifacts.path("coarse.json"))
    print_summary(
        "coarse partition",
        [("tau", f"{partition.tau:.6f}"), ("easy", len(summary.easy)), ("peculiar", len(summary.peculiar))],
    )
    return None


@click.command("score")
@common_options
@click.option("--speech", type=click.Path(dir_okay=False), default=None, help="Speech AVCE file")
@click.option("--face", type=click.Path(dir_okay=False), default=None, help="Face AVCE file (optional)")
@click.option("--labels", type=click.Path(dir_okay=False), default=None, help="Labels TSV")
@click.option("--self-inclusion/--no-self-inclusion", default=None,
              help="Count each sample against itself")
def score_command(
    config_path: Optional[str],
    threads: Optional[int],
    output_dir: Optional[str],
    log_level: Optional[str],
    log_json: Optional[bool],
    speech: Optional[str],
    face: Optional[str],
    labels: Optional[str],
    self_inclusion: Optional[bool],
) -> None:
    """Compute x_i (and y_i when face embeddings are given) against all samples."""
    overrides = {
        "threads": threads,
        "output_dir": output_dir,
        "speech": speech,
        "face": face,
        "labels": labels,
        "self_inclusion": self_inclusion,
    }
    run_command("score", config_path, overrides, _score, log_level, log_json)


@click.command("coarse")
@common_options
@click.option("--scores", type=click.Path(dir_okay=False), default=None, help="scores.tsv from 'score'")
@click.option("--keep-fraction", type=float, default=None, help="Share of samples kept as easy")
def coarse_command(
    config_path: Optional[str],
    threads: Optional[int],
    output_dir: Optional[str],
    log_level: Optional[str],
    log_json: Optional[bool],
    scores: Optional[str],
    keep_fraction: Optional[float],
) -> None:
    """Split a score table into easy and peculiar samples."""
    overrides = {
        "threads": threads,
        "output_dir": output_dir,
        "scores": scores,
        "keep_fraction": keep_fraction,
    }
    run_command("coarse", config_path, overrides, _coarse, log_level, log_json)
