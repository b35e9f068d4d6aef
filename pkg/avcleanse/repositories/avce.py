"""
AVCE binary embedding files

Layout (little-endian):
    magic "AVCE" | version u16 = 1 | modality u8 | reserved u8 = 0 | N u64 | d u32
    N ids, each u16 byte length + UTF-8 bytes
    N x d float32, row-major
"""

import struct
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from avcleanse.core.exceptions import HeaderError, PayloadSizeError
from avcleanse.models.embedding import EmbeddingSet, Modality
from avcleanse.utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"AVCE"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHBBQI")
ID_LENGTH = struct.Struct("<H")
FLOAT_DTYPE = np.dtype("<f4")

PathLike = Union[str, Path]


def _parse_header(buffer: bytes, path: PathLike) -> Tuple[int, int, int]:
    if len(buffer) < HEADER.size:
        raise HeaderError(f"malformed header in {path}: file shorter than header", {"path": str(path)})
    magic, version, modality, reserved, n, d = HEADER.unpack_from(buffer, 0)
    if magic != MAGIC:
        raise HeaderError(f"malformed header in {path}: bad magic {magic!r}", {"path": str(path)})
    if version != FORMAT_VERSION:
        raise HeaderError(
            f"malformed header in {path}: unsupported version {version}", {"path": str(path)}
        )
    if reserved != 0:
        raise HeaderError(f"malformed header in {path}: reserved byte is {reserved}", {"path": str(path)})
    if n < 1 or d < 1:
        raise HeaderError(f"malformed header in {path}: N={n}, d={d}", {"path": str(path)})
    return modality, n, d


def _parse_ids(buffer: bytes, offset: int, n: int, path: PathLike) -> Tuple[List[str], int]:
    ids: List[str] = []
    for k in range(n):
        if offset + ID_LENGTH.size > len(buffer):
            raise HeaderError(
                f"malformed header in {path}: id block truncated at id {k}", {"path": str(path)}
            )
        (length,) = ID_LENGTH.unpack_from(buffer, offset)
        offset += ID_LENGTH.size
        raw = buffer[offset:offset + length]
        if len(raw) != length:
            raise HeaderError(
                f"malformed header in {path}: id block truncated at id {k}", {"path": str(path)}
            )
        try:
            ids.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise HeaderError(f"malformed header in {path}: id {k} is not UTF-8", {"path": str(path)})
        offset += length
    return ids, offset


def read_avce(path: PathLike, modality: Modality) -> EmbeddingSet:
    """Load an AVCE file; the stored modality must match ``modality``"""
    buffer = Path(path).read_bytes()
    modality_code, n, d = _parse_header(buffer, path)
    stored = Modality.from_code(modality_code)
    if stored is not modality:
        raise HeaderError(
            f"malformed header in {path}: file holds {stored.value} embeddings, expected {modality.value}",
            {"path": str(path)},
        )
    sample_ids, offset = _parse_ids(buffer, HEADER.size, n, path)

    payload = memoryview(buffer)[offset:]
    expected = n * d * FLOAT_DTYPE.itemsize
    if len(payload) != expected:
        raise PayloadSizeError(
            f"payload size mismatch in {path}: header declares {n}x{d} "
            f"({expected} bytes), payload holds {len(payload)} bytes",
            {"path": str(path), "expected": expected, "actual": len(payload)},
        )
    vectors = np.frombuffer(payload, dtype=FLOAT_DTYPE).reshape(n, d).astype(np.float32)
    logger.debug("avce_loaded", path=str(path), modality=modality.value, n=n, d=d)
    return EmbeddingSet(modality=modality, sample_ids=sample_ids, vectors=vectors)


def encode_avce(embeddings: EmbeddingSet) -> bytes:
    parts = [HEADER.pack(MAGIC, FORMAT_VERSION, embeddings.modality.code, 0, embeddings.n, embeddings.dim)]
    for sample_id in embeddings.sample_ids:
        raw = sample_id.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise HeaderError(f"sample id longer than 65535 bytes: {sample_id[:32]!r}...")
        parts.append(ID_LENGTH.pack(len(raw)))
        parts.append(raw)
    parts.append(np.ascontiguousarray(embeddings.vectors, dtype=FLOAT_DTYPE).tobytes())
    return b"".join(parts)


def write_avce(embeddings: EmbeddingSet, path: PathLike) -> None:
    """Write ``embeddings``; read_avce(path) reproduces it bit-exactly"""
    Path(path).write_bytes(encode_avce(embeddings))
    logger.debug("avce_written", path=str(path), n=embeddings.n, d=embeddings.dim)
