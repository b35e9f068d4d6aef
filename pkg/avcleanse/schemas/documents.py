"""
Small JSON documents: evaluation summary, boundary line, coarse partition, run sidecar
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class EvalSummary(BaseModel):
    mode: str
    eer: float
    threshold: float
    n_target: int
    n_imposter: int


class BoundaryLine(BaseModel):
    """Decision boundary in raw score coordinates: a*x + b*y + c = 0"""

    a: float
    b: float
    c: float
    slope: Optional[float] = Field(None, description="y = slope * x + intercept; None when b == 0")
    intercept: Optional[float] = None
    objective: Optional[float] = None


class CoarseSummary(BaseModel):
    tau: float
    keep_fraction: float
    easy: List[str]
    peculiar: List[str]


class RunSidecar(BaseModel):
    """Written next to every command's artifacts"""

    command: str
    app_version: str
    config: Dict[str, Any]
    generator: Optional[str] = None
    artifacts: List[str]
