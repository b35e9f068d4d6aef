"""
Embedding store: load, validate, normalize embeddings và label assignments
"""

from pathlib import Path
from typing import Union

import numpy as np

from avcleanse.core.exceptions import LabelError
from avcleanse.models.embedding import EmbeddingSet, LabelMap, Modality
from avcleanse.repositories.avce import read_avce, write_avce
from avcleanse.repositories.tables import read_label_pairs
from avcleanse.utils.logger import get_logger
from avcleanse.utils.validators import first_missing

logger = get_logger(__name__)

PathLike = Union[str, Path]


def load_embeddings(path: PathLike, modality: Union[Modality, str]) -> EmbeddingSet:
    """Load an AVCE file; the result is not normalized"""
    embeddings = read_avce(path, Modality(modality))
    logger.info(
        "embeddings_loaded",
        path=str(path),
        modality=embeddings.modality.value,
        n=embeddings.n,
        dim=embeddings.dim,
    )
    return embeddings


def write_embeddings(embeddings: EmbeddingSet, path: PathLike) -> None:
    write_avce(embeddings, path)


def l2_normalize(embeddings: EmbeddingSet) -> EmbeddingSet:
    """
    Scale every nonzero row to unit Euclidean norm.

    All-zero rows stay zero and are flagged in ``zero_rows``; downstream scoring gives
    them the placeholder score.
    """
    vectors = embeddings.vectors.astype(np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", vectors, vectors))
    zero = (norms == 0.0) | embeddings.zero_mask
    safe = np.where(zero, 1.0, norms)
    normalized = (vectors / safe[:, None]).astype(np.float32)
    normalized[zero] = 0.0
    if zero.any():
        logger.warning(
            "zero_vectors_flagged",
            modality=embeddings.modality.value,
            count=int(zero.sum()),
            first=embeddings.sample_ids[int(np.flatnonzero(zero)[0])],
        )
    return EmbeddingSet(
        modality=embeddings.modality,
        sample_ids=embeddings.sample_ids,
        vectors=normalized,
        normalized=True,
        zero_rows=zero,
    )


def load_labels(path: PathLike, embeddings: EmbeddingSet) -> LabelMap:
    """
    Read 'sample_id<TAB>class_id' pairs covering exactly the samples of ``embeddings``.

    Class ids are re-indexed densely (1..K) in order of first appearance in the file;
    the ids as written are kept in ``LabelMap.original_ids``.
    """
    pairs = read_label_pairs(path)
    known = embeddings.index
    seen = set()
    for sample_id, _, line_no in pairs:
        if sample_id not in known:
            raise LabelError(
                f"{path}:{line_no}: unknown sample id {sample_id!r}",
                {"sample_id": sample_id, "line": line_no},
            )
        if sample_id in seen:
            raise LabelError(
                f"{path}:{line_no}: duplicate sample id {sample_id!r}",
                {"sample_id": sample_id, "line": line_no},
            )
        seen.add(sample_id)
    missing = first_missing(embeddings.sample_ids, seen)
    if missing:
        shown = ", ".join(missing[:10]) + (" ..." if len(missing) > 10 else "")
        raise LabelError(
            f"{path}: {len(missing)} sample(s) have no label: {shown}",
            {"missing": missing[:100]},
        )
    labels = LabelMap.from_pairs([(sample_id, raw) for sample_id, raw, _ in pairs])
    logger.info("labels_loaded", path=str(path), n=len(labels.assignments), classes=labels.num_classes)
    return labels
