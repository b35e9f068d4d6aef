"""
Reference run of the default synthetic benchmark.

Runs synth -> boundary -> cleanse with the default configuration, prints recovery and
EER figures and writes the thresholds the end-to-end test enforces (measured value minus
a safety margin).

Usage:
  python scripts/capture_recovery_thresholds.py --out tests/fixtures/recovery_thresholds.json
"""

import json

import click

from avcleanse.models.synth import SynthConfig
from avcleanse.models.verification import EvalMode
from avcleanse.services.boundary import BoundaryService
from avcleanse.services.cleansing import CleansingService, recovery_metrics
from avcleanse.services.embed_store import l2_normalize
from avcleanse.services.synth import SynthService
from avcleanse.services.verification import VerificationService


@click.command()
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write thresholds JSON here")
@click.option("--margin", type=float, default=0.02, help="Subtracted from the measured values")
def main(out: str, margin: float) -> None:
    config = SynthConfig()
    dataset = SynthService().generate(config)
    speech, face = l2_normalize(dataset.speech), l2_normalize(dataset.face)
    boundary = BoundaryService()
    model = boundary.train_boundary(boundary.score_trials(dataset.trials, speech, face))
    report = CleansingService().run_pipeline(speech, face, dataset.labels, model)
    metrics = recovery_metrics(report, dataset.ground_truth_noisy)

    verification = VerificationService()
    eers = {
        mode.value: verification.evaluate(dataset.trials, speech, face, mode).eer for mode in EvalMode
    }
    click.echo(f"rounds={len(report.rounds)} precision={metrics.precision:.4f} recall={metrics.recall:.4f}")
    click.echo("EER " + " ".join(f"{k}={v:.4f}" for k, v in eers.items()))

    thresholds = {
        "seed": config.seed,
        "precision": round(max(0.0, metrics.precision - margin), 4),
        "recall": round(max(0.0, metrics.recall - margin), 4),
        "measured": {
            "precision": round(metrics.precision, 4),
            "recall": round(metrics.recall, 4),
            "n_true_noisy": metrics.n_true_noisy,
            "n_found_noisy": metrics.n_found_noisy,
            "rounds": len(report.rounds),
        },
    }
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(thresholds, fh, indent=2)
            fh.write("\n")
        click.echo(f"thresholds written to {out}")


if __name__ == "__main__":
    main()
