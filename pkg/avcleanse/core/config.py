import json
from typing import TYPE_CHECKING, Any, Dict, Mapping, Optional

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from avcleanse.core.exceptions import ConfigError

if TYPE_CHECKING:
    from avcleanse.models.pipeline import PipelineConfig


class Settings(BaseSettings):
    # Application
    app_name: str = "AVCleanse"
    app_version: str = "1.0.0"

    # Logging
    log_level: str = "INFO"
    log_json: bool = False

    # Scoring parallelism (AVCLEANSE_THREADS)
    threads: int = 1

    # Output
    float_digits: int = 6  # TSV/CSV float precision
    output_dir: str = "./avcleanse-out"

    # Optional default config file for CLI commands
    config_file: Optional[str] = None

    model_config = SettingsConfigDict(
        env_prefix="AVCLEANSE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """Read a declarative JSON config file; missing path means no file values"""
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}", {"path": path})
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}", {"path": path})
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object", {"path": path})
    return data


def merge_overrides(base: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Flags win over file values; None means 'flag not given'. Nested dicts merge."""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_overrides(dict(merged[key]), value)
        else:
            merged[key] = value
    return merged


def build_pipeline_config(
    config_path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None
) -> "PipelineConfig":
    """
    Effective config with precedence flags > file > environment > defaults

    The environment only feeds ``threads`` (AVCLEANSE_THREADS) and ``output_dir``.
    """
    from avcleanse.models.pipeline import PipelineConfig

    values = {"threads": settings.threads, "output_dir": settings.output_dir}
    values = merge_overrides(values, load_config_file(config_path or settings.config_file))
    values = merge_overrides(values, overrides or {})
    synth = values.get("synth")
    if values.get("seed") is not None and (synth is None or isinstance(synth, Mapping)):
        # run seed fills synth.seed only where no synth seed was given
        values["synth"] = merge_overrides({"seed": values["seed"]}, synth or {})
    try:
        return PipelineConfig(**values)
    except ValidationError as exc:
        raise ConfigError(
            f"invalid configuration: {_first_error(exc)}",
            {"errors": [str(e.get("msg")) for e in exc.errors()]},
        )


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    location = ".".join(str(part) for part in error.get("loc", ()))
    return f"{location}: {error.get('msg')}" if location else str(error.get("msg"))
