"""
Wire formats - the SLSD smashed-batch frame, protocol messages and the
agreement payload. All integers are big-endian.
"""

import csv
import io
import json
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from models.errors import StructureMismatchError, ValidationError
from models.reference_set import AttributeMapping, ReferenceSet
from models.record import Party
from models.vectors import SmashedVector
from .errors import (
    BadMagicError, FrameDecodeError, LengthOverflowError, ProtocolViolation,
    TruncatedFrameError, VersionMismatchError,
)

SMASHED_MAGIC = b"SLSD"
SMASHED_VERSION = 1
FORMAT_VERSION = 1
DISTANCE_SPEC = "edit+cosine"

# magic, version, group_count, group_len, record_count
_BATCH_HEADER = struct.Struct(">4sHIII")
_ID_LENGTH = struct.Struct(">H")
_KIND = struct.Struct(">B")

MAX_FRAME_BYTES = 0xFFFFFFFF
MAX_DISTANCE = 0xFFFFFFFF


def encode_smashed_batch(vs: Sequence[SmashedVector]) -> bytes:
    """Serialize a non-empty batch of equally shaped smashed vectors"""
    if not vs:
        raise ValidationError("Cannot encode an empty smashed batch")
    group_count, group_len = vs[0].shape
    parts = [_BATCH_HEADER.pack(SMASHED_MAGIC, SMASHED_VERSION, group_count, group_len, len(vs))]
    for index, vector in enumerate(vs):
        if vector.shape != (group_count, group_len):
            raise StructureMismatchError(
                f"Smashed vector {vector.record_id} has shape {vector.shape}, "
                f"batch shape is {(group_count, group_len)}",
                pair_index=index
            )
        if vector.groups.size and int(vector.groups.max()) > MAX_DISTANCE:
            raise ValidationError(f"Distance in {vector.record_id} does not fit in 32 bits")
        record_id = vector.record_id.encode("utf-8")
        if len(record_id) > 0xFFFF:
            raise ValidationError(f"Record ID of {len(record_id)} bytes is too long to encode")
        parts.append(_ID_LENGTH.pack(len(record_id)))
        parts.append(record_id)
        parts.append(vector.groups.astype(">u4").tobytes())
    return b"".join(parts)


def decode_smashed_batch(b: bytes) -> List[SmashedVector]:
    """
    Inverse of ``encode_smashed_batch``. Declared sizes are checked against the
    buffer before anything is allocated.
    """
    if len(b) < len(SMASHED_MAGIC):
        raise TruncatedFrameError(f"Frame of {len(b)} bytes is shorter than its magic")
    if b[:len(SMASHED_MAGIC)] != SMASHED_MAGIC:
        raise BadMagicError(f"Bad magic {bytes(b[:4])!r}, expected {SMASHED_MAGIC!r}")
    if len(b) < _BATCH_HEADER.size:
        raise TruncatedFrameError(f"Frame of {len(b)} bytes is shorter than its header")
    _, version, group_count, group_len, record_count = _BATCH_HEADER.unpack_from(b)
    if version != SMASHED_VERSION:
        raise VersionMismatchError(SMASHED_VERSION, version, "smashed batch")

    payload_bytes = group_count * group_len * 4
    minimum = record_count * (_ID_LENGTH.size + payload_bytes)
    if payload_bytes > MAX_FRAME_BYTES or minimum > MAX_FRAME_BYTES:
        raise LengthOverflowError(minimum, MAX_FRAME_BYTES, "smashed batch")
    available = len(b) - _BATCH_HEADER.size
    if minimum > available:
        raise TruncatedFrameError(
            f"{record_count} records of {group_count}x{group_len} need at least "
            f"{minimum} bytes, frame holds {available}"
        )

    vectors = []
    offset = _BATCH_HEADER.size
    for index in range(record_count):
        if offset + _ID_LENGTH.size > len(b):
            raise TruncatedFrameError(f"Frame ends inside record {index}")
        (id_len,) = _ID_LENGTH.unpack_from(b, offset)
        offset += _ID_LENGTH.size
        end = offset + id_len + payload_bytes
        if end > len(b):
            raise TruncatedFrameError(f"Frame ends inside record {index}: need {end} bytes, have {len(b)}")
        try:
            record_id = bytes(b[offset:offset + id_len]).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FrameDecodeError(f"Record {index} has an invalid UTF-8 ID") from exc
        offset += id_len
        distances = np.frombuffer(b, dtype=">u4", count=group_count * group_len, offset=offset)
        offset = end
        vectors.append(SmashedVector(record_id, distances.astype(np.int64).reshape(group_count, group_len)))
    if offset != len(b):
        raise FrameDecodeError(f"{len(b) - offset} trailing bytes after {record_count} records")
    return vectors


class MessageKind(IntEnum):
    HELLO = 1
    AGREEMENT_CHECK = 2
    SMASHED_BATCH = 3
    MATCH_RESULT = 4
    DONE = 5
    ERROR = 6


@dataclass(frozen=True)
class ProtocolMessage:
    kind: MessageKind
    payload: bytes = b""

    def encode(self) -> bytes:
        return _KIND.pack(self.kind.value) + self.payload

    @classmethod
    def decode(cls, frame: bytes) -> "ProtocolMessage":
        if not frame:
            raise TruncatedFrameError("Empty protocol message")
        try:
            kind = MessageKind(frame[0])
        except ValueError:
            raise ProtocolViolation(f"Unknown message kind {frame[0]}") from None
        return cls(kind, bytes(frame[1:]))

    def __str__(self) -> str:
        return f"{self.kind.name}({len(self.payload)} bytes)"


def _json_bytes(data: Dict[str, Any]) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _json_load(payload: bytes, what: str) -> Dict[str, Any]:
    try:
        data = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolViolation(f"Malformed {what} payload: {exc}") from exc
    if not isinstance(data, dict):
        raise ProtocolViolation(f"Malformed {what} payload: expected an object")
    return data


@dataclass(frozen=True)
class Hello:
    role: Party
    record_count: int
    format_version: int = FORMAT_VERSION

    def to_message(self) -> ProtocolMessage:
        return ProtocolMessage(MessageKind.HELLO, _json_bytes({
            "role": self.role.value,
            "record_count": self.record_count,
            "format_version": self.format_version
        }))

    @classmethod
    def from_message(cls, message: ProtocolMessage) -> "Hello":
        data = _json_load(message.payload, "Hello")
        try:
            return cls(Party(data["role"]), int(data["record_count"]), int(data["format_version"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolViolation(f"Malformed Hello payload: {exc}") from exc


@dataclass(frozen=True)
class ProtocolAgreement:
    """What both parties must hold identically before any smashed data moves"""
    reference_set_digest: bytes
    mapping: AttributeMapping
    schema: Tuple[str, ...]
    distance_spec: str = DISTANCE_SPEC
    format_version: int = FORMAT_VERSION

    @classmethod
    def build(cls, rs: ReferenceSet, mapping: AttributeMapping, schema: Sequence[str]) -> "ProtocolAgreement":
        return cls(rs.digest(), mapping, tuple(schema))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reference_set_digest": self.reference_set_digest.hex(),
            "mapping": self.mapping.to_text(),
            "schema": list(self.schema),
            "distance_spec": self.distance_spec,
            "format_version": self.format_version
        }

    def to_bytes(self) -> bytes:
        return _json_bytes(self.to_dict())

    @classmethod
    def from_bytes(cls, payload: bytes) -> "ProtocolAgreement":
        data = _json_load(payload, "AgreementCheck")
        try:
            return cls(
                bytes.fromhex(data["reference_set_digest"]),
                AttributeMapping.parse(data["mapping"]),
                tuple(data["schema"]),
                data["distance_spec"],
                int(data["format_version"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolViolation(f"Malformed AgreementCheck payload: {exc}") from exc

    def differences(self, other: "ProtocolAgreement") -> List[str]:
        mine, theirs = self.to_dict(), other.to_dict()
        return [key for key in sorted(mine) if mine[key] != theirs[key]]


def encode_match_result(pairs: Sequence[Tuple[str, str]]) -> bytes:
    """Matched ID pairs as CSV (header record_id_A,record_id_B)"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["record_id_A", "record_id_B"])
    writer.writerows(pairs)
    return buffer.getvalue().encode("utf-8")


def decode_match_result(payload: bytes) -> List[Tuple[str, str]]:
    try:
        rows = list(csv.reader(io.StringIO(payload.decode("utf-8"))))
    except (UnicodeDecodeError, csv.Error) as exc:
        raise ProtocolViolation(f"Malformed MatchResult payload: {exc}") from exc
    if not rows or rows[0] != ["record_id_A", "record_id_B"]:
        raise ProtocolViolation("MatchResult payload is missing its header")
    pairs = []
    for row in rows[1:]:
        if len(row) != 2:
            raise ProtocolViolation(f"MatchResult row has {len(row)} fields, expected 2")
        pairs.append((row[0], row[1]))
    return pairs
