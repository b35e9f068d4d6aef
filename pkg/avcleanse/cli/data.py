"""
synth: write a synthetic dataset with known label noise
"""

from typing import Any, Optional

import click

from avcleanse.cli.common import common_options, print_summary, run_command
from avcleanse.models.pipeline import PipelineConfig
from avcleanse.repositories.artifacts import ArtifactSet
from avcleanse.repositories.tables import write_ground_truth, write_labels, write_trials
from avcleanse.services.embed_store import write_embeddings
from avcleanse.services.synth import SynthService

SYNTH_FIELDS = (
    "n_classes",
    "samples_per_class",
    "dim_speech",
    "dim_face",
    "concentration_speech",
    "concentration_face",
    "noise_rate",
    "modality_consistency",
    "n_target_trials",
    "n_imposter_trials",
    "seed",
)


def _synth(config: PipelineConfig, artifacts: ArtifactSet) -> Optional[str]:
    dataset = SynthService().generate(config.synth)
    ids = dataset.speech.sample_ids
    write_embeddings(dataset.speech, artifacts.path("speech.avce"))
    write_embeddings(dataset.face, artifacts.path("face.avce"))
    write_labels(dataset.labels, ids, artifacts.path("labels.tsv"))
    write_ground_truth(ids, dataset.ground_truth_noisy, artifacts.path("ground_truth.tsv"))
    write_trials(dataset.trials, artifacts.path("trials.tsv"))

    n_target, n_imposter = dataset.trials.counts()
    print_summary(
        "synthetic dataset",
        [
            ("samples", len(ids)),
            ("classes", dataset.labels.num_classes),
            ("noisy", len(dataset.ground_truth_noisy)),
            ("target trials", n_target),
            ("imposter trials", n_imposter),
            ("seed", config.synth.seed),
        ],
    )
    return dataset.generator


@click.command("synth")
@common_options
@click.option("--n-classes", type=int, default=None, help="Number of identities K")
@click.option("--samples-per-class", type=int, default=None, help="Samples per identity M")
@click.option("--dim-speech", type=int, default=None)
@click.option("--dim-face", type=int, default=None)
@click.option("--concentration-speech", type=float, default=None, help="Within-class spread")
@click.option("--concentration-face", type=float, default=None)
@click.option("--noise-rate", type=float, default=None, help="Fraction of mislabeled samples")
@click.option("--modality-consistency/--no-modality-consistency", default=None,
              help="Mislabeled samples are wrong in both modalities")
@click.option("--n-target-trials", type=int, default=None)
@click.option("--n-imposter-trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
def synth_command(
    config_path: Optional[str],
    threads: Optional[int],
    output_dir: Optional[str],
    log_level: Optional[str],
    log_json: Optional[bool],
    **synth_flags: Any,
) -> None:
    """Generate speech/face embeddings, labels, ground truth and validation trials."""
    overrides = {
        "threads": threads,
        "output_dir": output_dir,
        "synth": {k: synth_flags[k] for k in SYNTH_FIELDS if synth_flags.get(k) is not None},
    }
    run_command("synth", config_path, overrides, _synth, log_level, log_json)
