"""Binary container for codebooks, binding operators and memory states.

Layout::

    struct container_header {
        char magic[4],         /* b"VSAC" */
        uint16 version,
        uint8 kind,
        char pad,
        uint64 meta_len,
        uint64 payload_len,
    }
    meta     : meta_len bytes of UTF-8 JSON (every field except the array)
    payload  : payload_len bytes, the array in network byte order
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from struct import Struct
from typing import Union

import numpy as np

from .codebook import BindingOperator, Codebook
from .exceptions import DataError, InvalidDimensionError, InvalidParameterError
from .memory import MemoryState
from .utils import logger

MAGIC = b"VSAC"
FORMAT_VERSION = 1

Artifact = Union[Codebook, BindingOperator, MemoryState]


class ArtifactKind(IntEnum):
    CODEBOOK = 1
    BINDING = 2
    STATE = 3


# array field name and wire dtype per kind; None picks by array dtype
_ARRAY_FIELDS = {
    ArtifactKind.CODEBOOK: ("columns", ">f8"),
    ArtifactKind.BINDING: ("representation", None),
    ArtifactKind.STATE: ("x", ">f8"),
}


@dataclass
class ContainerHeader:
    fmt: str = "!4sHBxQQ"  # magic + version + kind + pad + meta_len + payload_len
    kind: int = 0
    meta_len: int = 0
    payload_len: int = 0
    version: int = FORMAT_VERSION

    @property
    def st(self) -> Struct:
        return Struct(self.fmt)

    def header_len(self) -> int:
        return self.st.size

    def build_header(self) -> bytes:
        return self.st.pack(MAGIC, self.version, self.kind, self.meta_len, self.payload_len)

    def parse(self, data: bytes) -> None:
        if len(data) < self.header_len():
            raise DataError(
                f"[-] Error: truncated header ({len(data)} < {self.header_len()} bytes)"
            )
        magic, self.version, self.kind, self.meta_len, self.payload_len = self.st.unpack(
            data[: self.header_len()]
        )
        if magic != MAGIC:
            raise DataError(f"[-] Error: bad magic {magic!r}, not a vsa container")
        if self.version != FORMAT_VERSION:
            raise DataError(f"[-] Error: unsupported container version {self.version}")
        try:
            ArtifactKind(self.kind)
        except ValueError:
            raise DataError(f"[-] Error: unknown artifact kind {self.kind}") from None


def _kind_of(artifact: Artifact) -> ArtifactKind:
    if isinstance(artifact, Codebook):
        return ArtifactKind.CODEBOOK
    if isinstance(artifact, BindingOperator):
        return ArtifactKind.BINDING
    if isinstance(artifact, MemoryState):
        return ArtifactKind.STATE
    raise DataError(f"[-] Error: cannot store {type(artifact).__name__}")


def dumps(artifact: Artifact) -> bytes:
    kind = _kind_of(artifact)
    name, wire = _ARRAY_FIELDS[kind]
    meta = artifact.to_dict()
    array = np.asarray(meta.pop(name))
    if wire is None:
        wire = ">i8" if np.issubdtype(array.dtype, np.integer) else ">f8"
    meta["__array__"] = {"dtype": wire, "shape": list(array.shape)}
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(array, dtype=wire).tobytes()
    header = ContainerHeader(kind=kind, meta_len=len(meta_bytes), payload_len=len(payload))
    return header.build_header() + meta_bytes + payload


def loads(data: bytes) -> Artifact:
    header = ContainerHeader()
    header.parse(data)
    start = header.header_len()
    end = start + header.meta_len + header.payload_len
    if len(data) != end:
        raise DataError(f"[-] Error: container holds {len(data)} bytes, header says {end}")
    try:
        meta = json.loads(data[start : start + header.meta_len].decode("utf-8"))
        layout = meta.pop("__array__")
        array = np.frombuffer(data[start + header.meta_len : end], dtype=layout["dtype"])
        array = array.reshape(layout["shape"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        logger.exception(e)
        raise DataError(str(e)) from e
    kind = ArtifactKind(header.kind)
    name, _ = _ARRAY_FIELDS[kind]
    meta[name] = array.astype(array.dtype.newbyteorder("="))
    try:
        if kind is ArtifactKind.CODEBOOK:
            return Codebook.from_dict(meta)
        if kind is ArtifactKind.BINDING:
            return BindingOperator.from_dict(meta)
        return MemoryState.from_dict(meta)
    except (KeyError, ValueError, InvalidDimensionError, InvalidParameterError) as e:
        raise DataError(f"[-] Error: invalid {kind.name.lower()} fields: {e}") from e


def save(artifact: Artifact, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_bytes(dumps(artifact))
    return path


def load(path: Union[str, Path]) -> Artifact:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        logger.exception(e)
        raise DataError(str(e)) from e
    return loads(data)
