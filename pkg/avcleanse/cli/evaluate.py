"""
eval: EER of speech, face or fused cosine scoring on a trial list
"""

from typing import Optional

import click

from avcleanse.cli.common import common_options, load_normalized, print_summary, require, run_command
from avcleanse.models.embedding import Modality
from avcleanse.models.pipeline import PipelineConfig
from avcleanse.models.verification import EvalMode
from avcleanse.repositories.artifacts import ArtifactSet
from avcleanse.repositories.documents import write_document
from avcleanse.repositories.tables import write_scored_trials
from avcleanse.schemas.documents import EvalSummary
from avcleanse.services.boundary import load_trials
from avcleanse.services.verification import VerificationService


def _eval(config: PipelineConfig, artifacts: ArtifactSet) -> Optional[str]:
    require(config, "trials")
    trials = load_trials(config.trials)
    # modalities the mode does not use are never opened
    speech = load_normalized(config.speech, Modality.SPEECH) if config.mode != EvalMode.FACE else None
    face = load_normalized(config.face, Modality.FACE) if config.mode != EvalMode.SPEECH else None

    result = VerificationService(config.threads).evaluate(trials, speech, face, config.mode)
    summary = EvalSummary(
        mode=result.mode.value,
        eer=result.eer,
        threshold=result.threshold,
        n_target=result.scored.n_target,
        n_imposter=result.scored.n_imposter,
    )
    write_scored_trials(result.scored.scores, result.scored.labels, artifacts.path("scored_trials.tsv"))
    write_document(summary, artifacts.path("eval.json"))
    print_summary(
        f"{result.mode.value} verification",
        [
            ("EER", f"{100 * result.eer:.4f}%"),
            ("threshold", f"{result.threshold:.6f}"),
            ("target trials", summary.n_target),
            ("imposter trials", summary.n_imposter),
        ],
    )
    return None


@click.command("eval")
@common_options
@click.option("--trials", type=click.Path(dir_okay=False), default=None, help="Trial list TSV")
@click.option("--speech", type=click.Path(dir_okay=False), default=None, help="Speech AVCE file")
@click.option("--face", type=click.Path(dir_okay=False), default=None, help="Face AVCE file")
@click.option("--mode", type=click.Choice([m.value for m in EvalMode]), default=None,
              help="Scoring mode (default fusion)")
def eval_command(
    config_path: Optional[str],
    threads: Optional[int],
    output_dir: Optional[str],
    log_level: Optional[str],
    log_json: Optional[bool],
    trials: Optional[str],
    speech: Optional[str],
    face: Optional[str],
    mode: Optional[str],
) -> None:
    """Equal error rate of the chosen scoring mode."""
    overrides = {
        "threads": threads,
        "output_dir": output_dir,
        "trials": trials,
        "speech": speech,
        "face": face,
        "mode": mode,
    }
    run_command("eval", config_path, overrides, _eval, log_level, log_json)
