"""
Concentration sweep for the synthetic generator.

Prints the mean intra-class cosine of clean samples for a range of concentration
values; the default in avcleanse.models.synth targets roughly 0.7 at d = 64.

Usage:
  python scripts/calibrate_concentration.py --dim 64 --start 0.05 --stop 0.12 --step 0.005 \
      --out tests/fixtures/concentration_sweep.txt
"""

from typing import Optional

import click
import numpy as np

from avcleanse.models.synth import SynthConfig
from avcleanse.services.embed_store import l2_normalize
from avcleanse.services.similarity import SimilarityService
from avcleanse.services.synth import SynthService


@click.command()
@click.option("--dim", type=int, default=64, help="Embedding dimension for both modalities")
@click.option("--n-classes", type=int, default=200)
@click.option("--samples-per-class", type=int, default=50)
@click.option("--start", type=float, default=0.05)
@click.option("--stop", type=float, default=0.12)
@click.option("--step", type=float, default=0.005)
@click.option("--target", type=float, default=0.7, help="Mean intra-class cosine wanted")
@click.option("--seed", type=int, default=20230311)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the sweep table here")
def main(
    dim: int,
    n_classes: int,
    samples_per_class: int,
    start: float,
    stop: float,
    step: float,
    target: float,
    seed: int,
    out: Optional[str],
) -> None:
    similarity = SimilarityService()
    best = None
    lines = [f"# dim={dim} n_classes={n_classes} samples_per_class={samples_per_class} seed={seed}"]
    for concentration in np.arange(start, stop + step / 2, step):
        config = SynthConfig(
            n_classes=n_classes,
            samples_per_class=samples_per_class,
            dim_speech=dim,
            dim_face=dim,
            concentration_speech=float(concentration),
            concentration_face=float(concentration),
            noise_rate=0.0,
            n_target_trials=0,
            n_imposter_trials=0,
            seed=seed,
        )
        dataset = SynthService().generate(config)
        scores = similarity.intra_class_scores(l2_normalize(dataset.speech), dataset.labels).scores
        mean = float(scores.mean())
        line = f"concentration={concentration:.4f} mean_cos={mean:.4f} std={scores.std():.4f}"
        click.echo(line)
        lines.append(line)
        if best is None or abs(mean - target) < abs(best[1] - target):
            best = (float(concentration), mean)
    if best:
        click.echo(f"closest to {target}: concentration={best[0]:.4f} (mean_cos={best[1]:.4f})")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        click.echo(f"sweep written to {out}")


if __name__ == "__main__":
    main()
