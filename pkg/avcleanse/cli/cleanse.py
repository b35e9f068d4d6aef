"""
cleanse: full pipeline; plot-data: scatter data + boundary line from a finished report
"""

from typing import Optional

import click
import numpy as np

from avcleanse.cli.boundary import obtain_boundary
from avcleanse.cli.common import (
    common_options,
    load_label_map,
    load_normalized,
    print_summary,
    report_echo,
    require,
    run_command,
)
from avcleanse.core.exceptions import MissingModalityError
from avcleanse.models.cleansing import CleanseScope, Decision
from avcleanse.models.embedding import Modality
from avcleanse.models.pipeline import PipelineConfig
from avcleanse.repositories.artifacts import ArtifactSet
from avcleanse.repositories.documents import read_document, write_document
from avcleanse.repositories.tables import write_manifest, write_plot_data
from avcleanse.schemas.report import ReportDocument
from avcleanse.services.boundary import boundary_line, load_model
from avcleanse.services.cleansing import CleansingService, load_ground_truth, recovery_metrics


def write_plot(document: ReportDocument, path: str) -> None:
    """Final-round (x, y) per sample with its decision and coarse group"""
    last = document.rounds[-1].samples
    easy = set(document.coarse.easy)
    points = np.asarray(
        [[s.x, s.y if s.y is not None else np.nan] for s in last], dtype=np.float64
    )
    write_plot_data(
        [s.sample_id for s in last],
        points,
        np.asarray([s.decision == Decision.CLEAN for s in last], dtype=bool),
        np.asarray([s.sample_id in easy for s in last], dtype=bool),
        path,
    )


def _cleanse(config: PipelineConfig, artifacts: ArtifactSet) -> Optional[str]:
    require(config, "speech", "labels")
    speech = load_normalized(config.speech, Modality.SPEECH)
    face = load_normalized(config.face, Modality.FACE)
    if face is None:
        raise MissingModalityError(
            "fine cleansing classifies (speaker score, face score) pairs and requires both "
            "modalities; set 'face' in the config file or pass --face"
        )
    labels = load_label_map(config, speech)
    refined_speech = load_normalized(config.refined_speech, Modality.SPEECH)
    refined_face = load_normalized(config.refined_face, Modality.FACE)

    model = obtain_boundary(
        config,
        refined_speech if refined_speech is not None else speech,
        refined_face if refined_face is not None else face,
        artifacts,
    )

    initial_mask = None
    if config.report:
        previous = read_document(ReportDocument, config.report)
        kept = set(previous.final_clean)
        initial_mask = np.asarray([s in kept for s in speech.sample_ids], dtype=bool)

    report = CleansingService(config.threads).run_pipeline(
        speech,
        face,
        labels,
        model,
        keep_fraction=config.keep_fraction,
        rounds=config.rounds,
        self_inclusion=config.self_inclusion,
        scope=config.scope,
        refined_speech=refined_speech,
        refined_face=refined_face,
        initial_mask=initial_mask,
    )

    recovery = None
    if config.ground_truth:
        recovery = recovery_metrics(report, load_ground_truth(config.ground_truth), config.ground_truth)

    document = ReportDocument.from_report(report, labels, recovery, run=report_echo(config))
    write_document(document, artifacts.path("report.json"))
    write_manifest(labels, report.final_clean, artifacts.path("manifest.tsv"))
    write_plot(document, str(artifacts.path("plot_data.csv")))

    rows = [
        ("rounds run", len(report.rounds)),
        ("easy", len(document.coarse.easy)),
        ("clean", len(report.final_clean)),
        ("hard", len(report.final_hard)),
        ("noisy", len(report.final_noisy)),
    ]
    if recovery is not None:
        rows += [
            ("precision", f"{recovery.precision:.4f}"),
            ("recall", f"{recovery.recall:.4f}"),
            ("f1", f"{recovery.f1:.4f}"),
        ]
    print_summary("cleansing", rows)
    return None


def _plot_data(config: PipelineConfig, artifacts: ArtifactSet) -> Optional[str]:
    require(config, "report", "boundary")
    document = read_document(ReportDocument, config.report)
    model = load_model(config.boundary)
    write_plot(document, str(artifacts.path("plot_data.csv")))
    line = boundary_line(model)
    write_document(line, artifacts.path("boundary_line.json"))
    print_summary(
        "plot data",
        [("samples", len(document.rounds[-1].samples)), ("slope", line.slope), ("intercept", line.intercept)],
    )
    return None


@click.command("cleanse")
@common_options
@click.option("--speech", type=click.Path(dir_okay=False), default=None, help="Speech AVCE file")
@click.option("--face", type=click.Path(dir_okay=False), default=None, help="Face AVCE file")
@click.option("--labels", type=click.Path(dir_okay=False), default=None, help="Labels TSV")
@click.option("--trials", type=click.Path(dir_okay=False), default=None, help="Validation trials for the boundary")
@click.option("--boundary", type=click.Path(dir_okay=False), default=None, help="Pre-trained boundary.json")
@click.option("--refined-speech", type=click.Path(dir_okay=False), default=None,
              help="Speech embeddings used for fine cleansing")
@click.option("--refined-face", type=click.Path(dir_okay=False), default=None,
              help="Face embeddings used for fine cleansing")
@click.option("--ground-truth", type=click.Path(dir_okay=False), default=None,
              help="sample_id<TAB>is_noisy, for recovery metrics")
@click.option("--report", type=click.Path(dir_okay=False), default=None,
              help="Previous report; its clean set seeds the first round")
@click.option("--keep-fraction", type=float, default=None)
@click.option("--rounds", type=int, default=None)
@click.option("--self-inclusion/--no-self-inclusion", default=None)
@click.option("--scope", type=click.Choice([s.value for s in CleanseScope]), default=None)
@click.option("--C", "C", type=float, default=None)
def cleanse_command(
    config_path: Optional[str],
    threads: Optional[int],
    output_dir: Optional[str],
    log_level: Optional[str],
    log_json: Optional[bool],
    **flags: object,
) -> None:
    """Coarse partition, boundary and multi-round fine cleansing."""
    overrides = dict(flags, threads=threads, output_dir=output_dir)
    run_command("cleanse", config_path, overrides, _cleanse, log_level, log_json)


@click.command("plot-data")
@common_options
@click.option("--report", type=click.Path(dir_okay=False), default=None, help="report.json from 'cleanse'")
@click.option("--boundary", type=click.Path(dir_okay=False), default=None, help="boundary.json")
def plot_data_command(
    config_path: Optional[str],
    threads: Optional[int],
    output_dir: Optional[str],
    log_level: Optional[str],
    log_json: Optional[bool],
    report: Optional[str],
    boundary: Optional[str],
) -> None:
    """Export the score scatter and the boundary line for external plotting."""
    overrides = {"threads": threads, "output_dir": output_dir, "report": report, "boundary": boundary}
    run_command("plot-data", config_path, overrides, _plot_data, log_level, log_json)
