"""
Report Schemas
JSON documents written by the cleansing pipeline
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from avcleanse.models.cleansing import (
    CleansingConfigEcho,
    CleansingReport,
    Decision,
    RecoveryMetrics,
    SampleCategory,
)
from avcleanse.models.embedding import LabelMap


class RoundSample(BaseModel):
    sample_id: str
    x: float
    y: Optional[float]
    decision: Decision
    reference: bool = Field(..., description="Sample was a class-centre member this round")
    margin: float


class RoundDocument(BaseModel):
    round: int
    mask_id: str
    n_reference: int
    n_clean: int
    n_noisy: int
    samples: List[RoundSample]


class CoarseDocument(BaseModel):
    tau: float
    keep_fraction: float
    n_easy: int
    n_peculiar: int
    easy: List[str]


class ClassSummary(BaseModel):
    class_id: str
    size: int
    noisy: int


class FinalSample(BaseModel):
    sample_id: str
    class_id: str
    category: SampleCategory


class ReportDocument(BaseModel):
    """Self-describing cleansing report"""

    config: CleansingConfigEcho
    run: Dict[str, Any] = Field(default_factory=dict, description="Effective CLI config")
    coarse: CoarseDocument
    rounds: List[RoundDocument]
    stopped_early: bool
    final_clean: List[str]
    final_noisy: List[str]
    final_hard: List[str]
    samples: List[FinalSample]
    class_summary: List[ClassSummary]
    recovery: Optional[RecoveryMetrics] = None

    @classmethod
    def from_report(
        cls,
        report: CleansingReport,
        labels: LabelMap,
        recovery: Optional[RecoveryMetrics] = None,
        run: Optional[Dict[str, Any]] = None,
    ) -> "ReportDocument":
        ids = report.sample_ids
        rounds = []
        for record in report.rounds:
            table = record.table
            face = table.face_scores
            samples = [
                RoundSample(
                    sample_id=sample_id,
                    x=float(table.speaker_scores[i]),
                    y=None if face is None else float(face[i]),
                    decision=Decision.CLEAN if record.clean_mask[i] else Decision.NOISY,
                    reference=bool(record.reference_mask[i]),
                    margin=float(record.margins[i]),
                )
                for i, sample_id in enumerate(ids)
            ]
            rounds.append(
                RoundDocument(
                    round=record.round,
                    mask_id=table.mask_id,
                    n_reference=int(record.reference_mask.sum()),
                    n_clean=record.n_clean,
                    n_noisy=table.n - record.n_clean,
                    samples=samples,
                )
            )

        coarse = report.coarse
        easy_ids = [ids[i] for i in coarse.easy]
        noisy_counts = report.noisy_per_class()
        class_summary = [
            ClassSummary(
                class_id=labels.original_id(class_id),
                size=labels.class_sizes[class_id],
                noisy=noisy_counts.get(class_id, 0),
            )
            for class_id in sorted(labels.class_sizes)
        ]
        samples = [
            FinalSample(sample_id=sample_id, class_id=labels.original_id(int(class_id)), category=category)
            for sample_id, class_id, category in zip(ids, report.class_ids.tolist(), report.categories())
        ]
        return cls(
            config=report.config,
            run=run or {},
            coarse=CoarseDocument(
                tau=float(coarse.tau),
                keep_fraction=coarse.keep_fraction,
                n_easy=len(easy_ids),
                n_peculiar=coarse.n - len(easy_ids),
                easy=easy_ids,
            ),
            rounds=rounds,
            stopped_early=report.stopped_early,
            final_clean=report.final_clean,
            final_noisy=report.final_noisy,
            final_hard=report.final_hard,
            samples=samples,
            class_summary=class_summary,
            recovery=recovery,
        )
