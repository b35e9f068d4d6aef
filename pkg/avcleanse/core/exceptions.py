"""
Exception hierarchy cho AVCleanse.

Every error carries a stable ``code`` and a ``detail`` dict so the CLI can log it
as structured fields and choose an exit code.
"""

from typing import Any, Dict, Optional


class AVCleanseError(Exception):
    """Base error"""

    code = "avcleanse_error"
    exit_code = 1

    def __init__(self, message: str, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def __str__(self) -> str:
        return self.message


class ConfigError(AVCleanseError):
    code = "config_error"
    exit_code = 2


class FormatError(AVCleanseError):
    """Malformed AVCE file"""

    code = "format_error"


class HeaderError(FormatError):
    code = "malformed_header"


class PayloadSizeError(FormatError):
    code = "payload_size_mismatch"


class NonFiniteValueError(FormatError):
    code = "non_finite_value"


class LabelError(AVCleanseError):
    code = "label_error"


class ModalityMismatchError(AVCleanseError):
    code = "modality_mismatch"


class MissingModalityError(AVCleanseError):
    code = "missing_modality"


class NormalizationError(AVCleanseError):
    code = "not_normalized"


class EmptyReferenceError(AVCleanseError):
    code = "empty_reference"


class BoundaryTrainingError(AVCleanseError):
    code = "boundary_training"


class TrialFileError(AVCleanseError):
    code = "trial_file"


class EvaluationError(AVCleanseError):
    code = "evaluation"
