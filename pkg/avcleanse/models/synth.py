"""
Synthetic dataset configuration
"""

from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator

from avcleanse.core.exceptions import ConfigError
from avcleanse.models.boundary import TrialSet
from avcleanse.models.embedding import EmbeddingSet, LabelMap

# Gaussian spread for a mean intra-class cosine near 0.7 at d = 64.
# Measured mean at the default seed: 0.6868 (tests/fixtures/concentration_sweep.txt).
DEFAULT_CONCENTRATION = 0.082

# Fraction of wrongly labelled samples found on VoxCeleb2
DEFAULT_NOISE_RATE = 0.019

GENERATOR_NAME = "numpy.random.PCG64"


class SynthConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_classes: int = Field(200, ge=1, description="K")
    samples_per_class: int = Field(50, ge=1, description="M")
    dim_speech: int = Field(64, ge=1)
    dim_face: int = Field(64, ge=1)
    concentration_speech: float = Field(DEFAULT_CONCENTRATION, gt=0)
    concentration_face: float = Field(DEFAULT_CONCENTRATION, gt=0)
    noise_rate: float = Field(DEFAULT_NOISE_RATE, ge=0, lt=1)
    modality_consistency: bool = True
    n_target_trials: int = Field(1000, ge=0)
    n_imposter_trials: int = Field(1000, ge=0)
    seed: int = Field(20230311, ge=0, lt=2**64)

    @model_validator(mode="after")
    def validate_noise(self) -> "SynthConfig":
        if self.noise_rate > 0 and self.n_classes < 2:
            raise ConfigError(
                "noise_rate > 0 needs at least two classes to misassign samples",
                {"n_classes": self.n_classes, "noise_rate": self.noise_rate},
            )
        return self

    @property
    def n_samples(self) -> int:
        return self.n_classes * self.samples_per_class


class SynthDataset(BaseModel):
    """Everything ``generate`` produces for one seed"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: SynthConfig
    speech: EmbeddingSet
    face: EmbeddingSet
    labels: LabelMap
    ground_truth_noisy: List[str]
    source_classes: Dict[str, int] = Field(
        default_factory=dict, description="Noisy sample id -> dense id of the class it was drawn from"
    )
    trials: TrialSet
    generator: str = GENERATOR_NAME
