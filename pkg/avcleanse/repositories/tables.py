"""
Text tables: labels, trials, score tables, manifests, ground truth và plot data.

All TSV files are UTF-8, LF line endings, no header unless stated.
"""

import csv
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from avcleanse.core.config import settings
from avcleanse.core.exceptions import LabelError, TrialFileError
from avcleanse.models.boundary import TrialLabel, TrialSet
from avcleanse.models.embedding import LabelMap
from avcleanse.models.scores import ScoreTable

PathLike = Union[str, Path]

SCORE_HEADER = ("sample_id", "x", "y", "flags")
PLOT_HEADER = ("sample_id", "x", "y", "decision", "is_easy")


def _fmt(value: float, digits: Optional[int] = None) -> str:
    return f"{value:.{settings.float_digits if digits is None else digits}f}"


def _lines(path: PathLike) -> Iterator[Tuple[int, str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if line.strip():
                yield line_no, line


def _write_lines(path: PathLike, lines: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


# Labels

def read_label_pairs(path: PathLike) -> List[Tuple[str, str, int]]:
    """(sample_id, raw class id, line number) per line"""
    pairs = []
    for line_no, line in _lines(path):
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise LabelError(
                f"{path}:{line_no}: expected 'sample_id<TAB>class_id'", {"line": line_no}
            )
        pairs.append((fields[0], fields[1], line_no))
    return pairs


def write_labels(labels: LabelMap, sample_ids: Sequence[str], path: PathLike) -> None:
    _write_lines(
        path,
        [f"{s}\t{labels.original_id(labels.assignments[s])}" for s in sample_ids],
    )


def write_manifest(labels: LabelMap, sample_ids: Sequence[str], path: PathLike) -> None:
    """Cleansed training list; same layout as the labels file"""
    write_labels(labels, sample_ids, path)


# Ground truth

def write_ground_truth(sample_ids: Sequence[str], noisy: Sequence[str], path: PathLike) -> None:
    noisy_set = set(noisy)
    _write_lines(path, [f"{s}\t{int(s in noisy_set)}" for s in sample_ids])


def read_ground_truth(path: PathLike) -> Dict[str, bool]:
    truth: Dict[str, bool] = {}
    for line_no, line in _lines(path):
        fields = line.split("\t")
        if len(fields) != 2 or fields[1] not in ("0", "1"):
            raise LabelError(
                f"{path}:{line_no}: expected 'sample_id<TAB>is_noisy' with is_noisy in {{0,1}}",
                {"line": line_no},
            )
        truth[fields[0]] = fields[1] == "1"
    return truth


# Trials

def read_trials(path: PathLike) -> TrialSet:
    """
    Trial list 'label<TAB>sample_a<TAB>sample_b', label 1 = target, 0 = imposter.
    Whitespace-separated lists (VoxCeleb style) are accepted as well.
    """
    labels: List[int] = []
    sample_a: List[str] = []
    sample_b: List[str] = []
    for line_no, line in _lines(path):
        fields = line.split("\t") if "\t" in line else line.split()
        if len(fields) != 3:
            raise TrialFileError(
                f"{path}:{line_no}: expected 'label<TAB>sample_a<TAB>sample_b', got {len(fields)} fields",
                {"line": line_no},
            )
        if fields[0] not in ("0", "1"):
            raise TrialFileError(
                f"{path}:{line_no}: trial label must be 0 or 1, got {fields[0]!r}", {"line": line_no}
            )
        labels.append(int(fields[0]))
        sample_a.append(fields[1])
        sample_b.append(fields[2])
    return TrialSet(sample_a=sample_a, sample_b=sample_b, labels=np.asarray(labels, dtype=np.int8))


def write_trials(trials: TrialSet, path: PathLike) -> None:
    _write_lines(
        path,
        [f"{int(label)}\t{a}\t{b}" for label, a, b in zip(trials.labels, trials.sample_a, trials.sample_b)],
    )


def write_scored_trials(scores: np.ndarray, labels: np.ndarray, path: PathLike) -> None:
    _write_lines(path, [f"{int(label)}\t{_fmt(score)}" for label, score in zip(labels, scores)])


def read_scored_trials(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    scores, labels = [], []
    for line_no, line in _lines(path):
        fields = line.split("\t")
        try:
            label = int(fields[0])
            score = float(fields[1])
        except (IndexError, ValueError):
            raise TrialFileError(f"{path}:{line_no}: expected 'label<TAB>score'", {"line": line_no})
        if label not in (TrialLabel.IMPOSTER, TrialLabel.TARGET):
            raise TrialFileError(f"{path}:{line_no}: label must be 0 or 1", {"line": line_no})
        labels.append(label)
        scores.append(score)
    return np.asarray(scores, dtype=np.float64), np.asarray(labels, dtype=np.int8)


# Score tables

def write_score_table(table: ScoreTable, path: PathLike) -> None:
    lines = ["\t".join(SCORE_HEADER)]
    face = table.face_scores
    for i, sample_id in enumerate(table.sample_ids):
        y = "" if face is None else _fmt(face[i])
        lines.append(f"{sample_id}\t{_fmt(table.speaker_scores[i])}\t{y}\t{int(table.flags[i])}")
    _write_lines(path, lines)


def read_score_table(path: PathLike) -> ScoreTable:
    rows = list(_lines(path))
    if not rows or tuple(rows[0][1].split("\t")) != SCORE_HEADER:
        raise LabelError(f"{path}: missing header '{' '.join(SCORE_HEADER)}'")
    sample_ids: List[str] = []
    xs: List[float] = []
    ys: List[Optional[float]] = []
    flags: List[int] = []
    for line_no, line in rows[1:]:
        fields = line.split("\t")
        try:
            sample_ids.append(fields[0])
            xs.append(float(fields[1]))
            ys.append(float(fields[2]) if fields[2] else None)
            flags.append(int(fields[3]))
        except (IndexError, ValueError):
            raise LabelError(f"{path}:{line_no}: malformed score row", {"line": line_no})
    has_face = all(y is not None for y in ys)
    if not has_face and any(y is not None for y in ys):
        raise LabelError(f"{path}: face scores present for only some samples")
    return ScoreTable(
        sample_ids=sample_ids,
        speaker_scores=np.asarray(xs, dtype=np.float64),
        face_scores=np.asarray(ys, dtype=np.float64) if has_face and ys else None,
        flags=np.asarray(flags, dtype=np.int64),
    )


# Plot data

def write_plot_data(
    sample_ids: Sequence[str],
    points: np.ndarray,
    clean_mask: np.ndarray,
    easy_mask: np.ndarray,
    path: PathLike,
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLOT_HEADER)
        for i, sample_id in enumerate(sample_ids):
            writer.writerow(
                [
                    sample_id,
                    _fmt(points[i, 0]),
                    _fmt(points[i, 1]),
                    "clean" if clean_mask[i] else "noisy",
                    int(easy_mask[i]),
                ]
            )
