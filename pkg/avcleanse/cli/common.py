"""
Shared CLI plumbing: common options, input loading và the command wrapper.

The wrapper logs start / finish / failure with elapsed time, writes every artifact
through an ArtifactSet (so a failing command leaves nothing behind), adds the run.json
sidecar and maps errors to exit codes.
"""

import functools
import sys
import time
from typing import Any, Callable, Dict, List, Mapping, Optional

import click
from rich.console import Console
from rich.table import Table

from avcleanse.core.config import build_pipeline_config, settings
from avcleanse.core.exceptions import AVCleanseError, ConfigError
from avcleanse.models.embedding import EmbeddingSet, LabelMap, Modality
from avcleanse.models.pipeline import PipelineConfig
from avcleanse.repositories.artifacts import ArtifactSet
from avcleanse.repositories.documents import write_document
from avcleanse.schemas.documents import RunSidecar
from avcleanse.services.embed_store import l2_normalize, load_embeddings, load_labels
from avcleanse.utils.logger import configure_logging, get_logger

logger = get_logger(__name__)

console = Console()

EXIT_UNEXPECTED = 3
SIDECAR_NAME = "run.json"

# Command body: (effective config, artifact set) -> generator name for the sidecar, or None
CommandBody = Callable[[PipelineConfig, ArtifactSet], Optional[str]]


def common_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """--config, --threads, --output-dir, --log-level, --log-json"""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="Declarative JSON config file")
    @click.option("--threads", type=click.IntRange(min=1), default=None,
                  help="Scoring thread cap (default: AVCLEANSE_THREADS)")
    @click.option("--output-dir", type=click.Path(file_okay=False), default=None,
                  help="Directory for the artifacts of this command")
    @click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"],
                  case_sensitive=False), default=None)
    @click.option("--log-json/--no-log-json", default=None, help="JSON log lines on stderr")
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        return func(*args, **kwargs)

    return wrapper


def run_command(
    command: str,
    config_path: Optional[str],
    overrides: Mapping[str, Any],
    body: CommandBody,
    log_level: Optional[str] = None,
    log_json: Optional[bool] = None,
) -> None:
    """Run ``body`` with logging, atomic artifacts and exit-code mapping"""
    configure_logging(log_level or settings.log_level, settings.log_json if log_json is None else log_json)
    start = time.perf_counter()
    logger.info("command_started", command=command)
    try:
        config = build_pipeline_config(config_path, overrides)
        output_dir = config.output_dir or settings.output_dir
        with ArtifactSet(output_dir) as artifacts:
            generator = body(config, artifacts)
            sidecar_path = artifacts.path(SIDECAR_NAME)
            sidecar = RunSidecar(
                command=command,
                app_version=settings.app_version,
                config=config.model_dump(mode="json"),
                generator=generator,
                artifacts=artifacts.names,
            )
            write_document(sidecar, sidecar_path)
    except AVCleanseError as exc:
        logger.error(
            "command_failed",
            command=command,
            error=exc.code,
            message=str(exc),
            elapsed_s=round(time.perf_counter() - start, 4),
        )
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)
    except OSError as exc:
        logger.error("command_failed", command=command, error="io_error", message=str(exc))
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:
        logger.exception(
            "command_crashed",
            command=command,
            error_type=type(exc).__name__,
            elapsed_s=round(time.perf_counter() - start, 4),
        )
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_UNEXPECTED)
    logger.info("command_finished", command=command, elapsed_s=round(time.perf_counter() - start, 4))


def require(config: PipelineConfig, *fields: str) -> None:
    """ConfigError naming the first missing input path"""
    for field in fields:
        if not getattr(config, field):
            flag = "--" + field.replace("_", "-")
            raise ConfigError(f"missing input: set '{field}' in the config file or pass {flag}")


def load_normalized(path: Optional[str], modality: Modality) -> Optional[EmbeddingSet]:
    if not path:
        return None
    return l2_normalize(load_embeddings(path, modality))


def load_label_map(config: PipelineConfig, embeddings: EmbeddingSet) -> LabelMap:
    require(config, "labels")
    return load_labels(config.labels, embeddings)


def report_echo(config: PipelineConfig) -> Dict[str, Any]:
    """Effective config without execution-only fields, for embedding in result documents"""
    return config.model_dump(mode="json", exclude={"threads", "output_dir"})


def print_summary(title: str, rows: List[tuple]) -> None:
    table = Table(title=title, show_header=False)
    table.add_column("key", style="bold")
    table.add_column("value")
    for key, value in rows:
        table.add_row(str(key), str(value))
    console.print(table)
