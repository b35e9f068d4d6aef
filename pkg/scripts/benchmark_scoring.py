"""
Timing of centroid-sum scoring against the pairwise reference.

Usage:
  python scripts/benchmark_scoring.py --n 100000 --dim 192 --classes 1000 --threads 4
"""

import time

import click
import numpy as np

from avcleanse.models.embedding import EmbeddingSet, LabelMap, Modality
from avcleanse.services.embed_store import l2_normalize
from avcleanse.services.similarity import SimilarityService


def _random_set(n: int, dim: int, classes: int, seed: int):
    rng = np.random.Generator(np.random.PCG64(seed))
    ids = [f"s{i:07d}" for i in range(n)]
    vectors = rng.standard_normal((n, dim)).astype(np.float32)
    embeddings = l2_normalize(EmbeddingSet(modality=Modality.SPEECH, sample_ids=ids, vectors=vectors))
    labels = LabelMap.from_pairs([(s, f"k{i % classes}") for i, s in enumerate(ids)])
    return embeddings, labels


@click.command()
@click.option("--n", type=int, default=100_000)
@click.option("--dim", type=int, default=192)
@click.option("--classes", type=int, default=1000)
@click.option("--threads", type=int, default=1)
@click.option("--repeat", type=int, default=3)
@click.option("--pairwise-n", type=int, default=5000, help="Size of the pairwise comparison run")
@click.option("--seed", type=int, default=7)
def main(n: int, dim: int, classes: int, threads: int, repeat: int, pairwise_n: int, seed: int) -> None:
    embeddings, labels = _random_set(n, dim, classes, seed)
    service = SimilarityService(threads)
    timings = []
    for _ in range(repeat):
        start = time.perf_counter()
        service.intra_class_scores(embeddings, labels)
        timings.append(time.perf_counter() - start)
    click.echo(f"centroid path: N={n} d={dim} K={classes} threads={threads} best={min(timings):.3f}s")

    small, small_labels = _random_set(pairwise_n, dim, max(1, classes * pairwise_n // n), seed)
    start = time.perf_counter()
    fast = service.intra_class_scores(small, small_labels).scores
    fast_time = time.perf_counter() - start
    start = time.perf_counter()
    slow = service.pairwise_scores_bruteforce(small, small_labels).scores
    slow_time = time.perf_counter() - start
    click.echo(
        f"N={pairwise_n}: centroid {fast_time:.4f}s, pairwise {slow_time:.4f}s, "
        f"max |diff| = {np.abs(fast - slow).max():.2e}"
    )


if __name__ == "__main__":
    main()
