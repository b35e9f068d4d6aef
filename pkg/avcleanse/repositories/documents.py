"""
JSON documents backed by pydantic models
"""

from pathlib import Path
from typing import Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from avcleanse.core.exceptions import FormatError

ModelT = TypeVar("ModelT", bound=BaseModel)
PathLike = Union[str, Path]


def write_document(document: BaseModel, path: PathLike) -> None:
    """Deterministic JSON (field order fixed by the model, 2-space indent)"""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(document.model_dump_json(indent=2))
        fh.write("\n")


def read_document(model: Type[ModelT], path: PathLike) -> ModelT:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}", {"path": str(path)})
    try:
        return model.model_validate_json(text)
    except ValidationError as exc:
        raise FormatError(
            f"{path} is not a valid {model.__name__} document: {exc.errors()[0].get('msg')}",
            {"path": str(path)},
        )
