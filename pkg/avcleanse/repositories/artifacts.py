"""
All-or-nothing artifact writing.

Files are written under a temporary name and renamed into place only when the whole
set has been produced; on failure the temporaries are removed.
"""

import os
from pathlib import Path
from types import TracebackType
from typing import List, Optional, Tuple, Type, Union

from avcleanse.utils.logger import get_logger

logger = get_logger(__name__)


class ArtifactSet:
    """Collects the output files of one command"""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self._pending: List[Tuple[Path, Path]] = []
        self.committed: List[str] = []

    def __enter__(self) -> "ArtifactSet":
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc: Optional[BaseException],
        tb: Optional[TracebackType],
    ) -> None:
        if exc_type is None:
            self.commit()
        else:
            self.discard()

    def path(self, name: str) -> Path:
        """Temporary path to write artifact ``name`` to"""
        final = self.output_dir / name
        temp = self.output_dir / f".{name}.partial"
        self._pending.append((temp, final))
        return temp

    @property
    def names(self) -> List[str]:
        return [final.name for _, final in self._pending]

    def commit(self) -> List[str]:
        for temp, final in self._pending:
            if not temp.exists():
                self.discard()
                raise FileNotFoundError(f"artifact {final.name} was declared but never written")
        for temp, final in self._pending:
            os.replace(temp, final)
            self.committed.append(final.name)
        logger.info("artifacts_written", output_dir=str(self.output_dir), artifacts=self.committed)
        self._pending = []
        return self.committed

    def discard(self) -> None:
        for temp, _ in self._pending:
            try:
                temp.unlink()
            except FileNotFoundError:
                pass
        if self._pending:
            logger.warning("artifacts_discarded", output_dir=str(self.output_dir), count=len(self._pending))
        self._pending = []
