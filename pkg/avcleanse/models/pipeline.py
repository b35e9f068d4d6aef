"""
Pipeline configuration

Defaults follow the published recipe: 92% of the data kept as easy samples and five
re-centering rounds.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from avcleanse.models.cleansing import CleanseScope
from avcleanse.models.synth import SynthConfig
from avcleanse.models.verification import EvalMode

DEFAULT_KEEP_FRACTION = 0.92
DEFAULT_ROUNDS = 5
DEFAULT_C = 1.0


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    # Inputs
    speech: Optional[str] = Field(None, description="Speech AVCE file")
    face: Optional[str] = Field(None, description="Face AVCE file")
    labels: Optional[str] = Field(None, description="Labels TSV")
    trials: Optional[str] = Field(None, description="Validation trial list TSV")
    refined_speech: Optional[str] = Field(None, description="Speech AVCE file for fine cleansing")
    refined_face: Optional[str] = Field(None, description="Face AVCE file for fine cleansing")
    boundary: Optional[str] = Field(None, description="Pre-trained boundary JSON")
    ground_truth: Optional[str] = Field(None, description="Ground-truth noisy TSV")
    report: Optional[str] = Field(None, description="Existing cleansing report JSON")
    scores: Optional[str] = Field(None, description="Score table TSV")

    # Cleansing
    keep_fraction: float = Field(DEFAULT_KEEP_FRACTION, gt=0, lt=1)
    rounds: int = Field(DEFAULT_ROUNDS, ge=1)
    self_inclusion: bool = False
    scope: CleanseScope = CleanseScope.ALL_SAMPLES
    C: float = Field(DEFAULT_C, gt=0)
    seed: Optional[int] = Field(None, ge=0, lt=2**64, description="Run seed; fills synth.seed if unset")

    # Evaluation
    mode: EvalMode = EvalMode.FUSION

    # Execution
    threads: Optional[int] = Field(None, ge=1)
    output_dir: Optional[str] = None

    synth: SynthConfig = Field(default_factory=SynthConfig)
