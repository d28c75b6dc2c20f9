"""Logit exchange format and evaluation manifests.

One ``.umlg`` file carries a single (w, q) float32 logit matrix plus a JSON
metadata block, so any model ecosystem can produce inputs for the toolkit:

    bytes 0-3    magic "UMLG"
    bytes 4-5    version, 0x01 0x00
    bytes 6-7    reserved, written as zeros
    byte  8      dtype code (0x01 = float32 little-endian)
    byte  9      element order (0x01 = row-major)
    bytes 10-13  w, uint32 LE
    bytes 14-17  q, uint32 LE
    bytes 18-21  metadata block length M, uint32 LE
    bytes 22..   M bytes of UTF-8 JSON metadata, then w*q*4 payload bytes

No padding anywhere; the file ends exactly after the payload.

Manifests are UTF-8 CSV with a required header row and columns
``utterance_id,mos,logit_path,task_id[,transcript_ref][,system_id]``.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateUtteranceId,
    IoFailure,
    MalformedHeader,
    MalformedLine,
    MissingField,
    MosOutOfRange,
    NonFiniteValue,
    ShapeMismatch,
    UnsupportedDtype,
    UnsupportedShape,
)

MAGIC = b"UMLG"
VERSION = (1, 0)
DTYPE_FLOAT32_LE = 0x01
ORDER_ROW_MAJOR = 0x01

_HEADER = struct.Struct("<4sBBBBBBIII")
HEADER_SIZE = _HEADER.size  # 22

LOGIT_SOURCES = ("contrastive", "asr_head", "encoder_raw")


@dataclass(frozen=True, eq=False)
class LogitMatrix:
    """A (w, q) matrix of per-window logits for one utterance.

    Stored as float32 row-major; computation upcasts to float64. Requires
    w >= 1, q >= 2 and all-finite values.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.ndim != 2:
            raise UnsupportedShape(f"logit matrix must be 2-D, got ndim={arr.ndim}")
        w, q = arr.shape
        if w < 1:
            raise UnsupportedShape(f"need at least one window, got w={w}")
        if q < 2:
            raise UnsupportedShape(f"need a categorical over q >= 2 tokens, got q={q}")
        if not np.isfinite(arr).all():
            i, j = np.argwhere(~np.isfinite(arr))[0]
            raise NonFiniteValue(f"non-finite logit at ({i}, {j})")
        object.__setattr__(self, "values", arr)

    @property
    def w(self) -> int:
        return self.values.shape[0]

    @property
    def q(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LogitMatrix):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class LogitFileMetadata:
    """Provenance block stored alongside the matrix.

    ``dropout_p`` and ``num_passes`` describe dropout-handicapped extraction;
    a plain single-pass dump has dropout_p = 0 and num_passes = 1.
    """

    utterance_id: str
    model_id: str
    logit_source: str
    dropout_p: float = 0.0
    num_passes: int = 1
    sample_rate_hz: int = 16000

    def __post_init__(self) -> None:
        if self.logit_source not in LOGIT_SOURCES:
            raise ValueError(
                f"logit_source must be one of {LOGIT_SOURCES}, got {self.logit_source!r}"
            )
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.num_passes < 1:
            raise ValueError(f"num_passes must be >= 1, got {self.num_passes}")
        if self.dropout_p == 0.0 and self.num_passes != 1:
            raise ValueError("dropout_p = 0 is a plain single-pass dump; num_passes must be 1")
        if self.sample_rate_hz < 1:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")

    def to_json_dict(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "model_id": self.model_id,
            "logit_source": self.logit_source,
            "dropout_p": self.dropout_p,
            "num_passes": self.num_passes,
            "sample_rate_hz": self.sample_rate_hz,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LogitFileMetadata":
        required = (
            "utterance_id",
            "model_id",
            "logit_source",
            "dropout_p",
            "num_passes",
            "sample_rate_hz",
        )
        missing = [k for k in required if k not in obj]
        if missing:
            raise ValueError(f"metadata missing fields: {', '.join(missing)}")
        return cls(
            utterance_id=str(obj["utterance_id"]),
            model_id=str(obj["model_id"]),
            logit_source=str(obj["logit_source"]),
            dropout_p=float(obj["dropout_p"]),
            num_passes=int(obj["num_passes"]),
            sample_rate_hz=int(obj["sample_rate_hz"]),
        )


@dataclass(frozen=True)
class UtteranceRecord:
    """One manifest row: an utterance, its MOS rating and its logit file."""

    utterance_id: str
    mos: float
    logit_path: Path
    task_id: str
    transcript_ref: str | None = None
    system_id: str | None = None


def read_logit_file(path: str | Path) -> tuple[LogitMatrix, LogitFileMetadata]:
    """Parse one exchange file; returns the matrix and its metadata.

    Raises MalformedHeader, UnsupportedDtype, UnsupportedShape, ShapeMismatch
    or NonFiniteValue on defective files; OSError if the file is unreadable.
    """
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise MalformedHeader(f"file shorter than the {HEADER_SIZE}-byte header: {path}")
    magic, vmaj, vmin, _r0, _r1, dtype, order, w, q, meta_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}, expected {MAGIC!r}: {path}")
    if (vmaj, vmin) != VERSION:
        raise MalformedHeader(f"unsupported version {vmaj}.{vmin}: {path}")
    if dtype != DTYPE_FLOAT32_LE:
        raise UnsupportedDtype(f"unknown dtype code 0x{dtype:02x}: {path}")
    if order != ORDER_ROW_MAJOR:
        raise UnsupportedDtype(f"unknown element-order code 0x{order:02x}: {path}")
    if w < 1 or q < 2:
        raise UnsupportedShape(f"declared shape ({w}, {q}) violates w >= 1, q >= 2: {path}")

    meta_end = HEADER_SIZE + meta_len
    if len(data) < meta_end:
        raise MalformedHeader(f"truncated metadata block: {path}")
    try:
        meta_obj = json.loads(data[HEADER_SIZE:meta_end].decode("utf-8"))
        if not isinstance(meta_obj, dict):
            raise ValueError("metadata block is not a JSON object")
        meta = LogitFileMetadata.from_json_dict(meta_obj)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedHeader(f"invalid metadata block: {exc}: {path}") from exc

    payload = data[meta_end:]
    expected = w * q * 4
    if len(payload) != expected:
        raise ShapeMismatch(
            f"payload is {len(payload)} bytes, expected {expected} for shape ({w}, {q}): {path}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(w, q)
    return LogitMatrix(values), meta


def write_logit_file(matrix: LogitMatrix, meta: LogitFileMetadata, path: str | Path) -> None:
    """Serialize matrix + metadata; write-then-read is the identity."""
    meta_bytes = json.dumps(meta.to_json_dict(), sort_keys=True, separators=(",", ":")).encode(
        "utf-8"
    )
    header = _HEADER.pack(
        MAGIC,
        VERSION[0],
        VERSION[1],
        0,
        0,
        DTYPE_FLOAT32_LE,
        ORDER_ROW_MAJOR,
        matrix.w,
        matrix.q,
        len(meta_bytes),
    )
    payload = matrix.values.astype("<f4", copy=False).tobytes(order="C")
    try:
        Path(path).write_bytes(header + meta_bytes + payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


_REQUIRED_COLUMNS = ("utterance_id", "mos", "logit_path", "task_id")
_OPTIONAL_COLUMNS = ("transcript_ref", "system_id")


def read_manifest(path: str | Path) -> list[UtteranceRecord]:
    """Parse a manifest CSV into records, in file order.

    Relative logit paths are resolved against the manifest's directory.
    The first defect is reported with its line number.
    """
    path = Path(path)
    base = path.parent
    records: list[UtteranceRecord] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, restkey="_extra")
        if reader.fieldnames is None:
            raise MissingField(f"{path}: empty manifest, header row required")
        for col in _REQUIRED_COLUMNS:
            if col not in reader.fieldnames:
                raise MissingField(f"{path}:1: header missing required column {col!r}")
        unknown = [
            c for c in reader.fieldnames if c not in _REQUIRED_COLUMNS + _OPTIONAL_COLUMNS
        ]
        if unknown:
            raise MalformedLine(f"{path}:1: unexpected column(s) {', '.join(map(repr, unknown))}")
        for row in reader:
            line = reader.line_num
            if "_extra" in row:
                raise MalformedLine(f"{path}:{line}: more fields than header columns")
            if any(v is None for v in row.values()):
                raise MalformedLine(f"{path}:{line}: fewer fields than header columns")
            for col in _REQUIRED_COLUMNS:
                if row[col] == "":
                    raise MissingField(f"{path}:{line}: empty {col!r}")
            uid = row["utterance_id"]
            if uid in seen:
                raise DuplicateUtteranceId(f"{path}:{line}: duplicate utterance_id {uid!r}")
            seen.add(uid)
            try:
                mos = float(row["mos"])
            except ValueError as exc:
                raise MalformedLine(f"{path}:{line}: unparsable mos {row['mos']!r}") from exc
            if not 1.0 <= mos <= 5.0:
                raise MosOutOfRange(f"{path}:{line}: mos {mos} outside [1.0, 5.0]")
            logit_path = Path(row["logit_path"])
            if not logit_path.is_absolute():
                logit_path = base / logit_path
            records.append(
                UtteranceRecord(
                    utterance_id=uid,
                    mos=mos,
                    logit_path=logit_path,
                    task_id=row["task_id"],
                    transcript_ref=row.get("transcript_ref") or None,
                    system_id=row.get("system_id") or None,
                )
            )
    return records


def write_manifest(rows: list[dict], path: str | Path, *, with_transcripts: bool = False) -> None:
    """Write manifest rows (dicts keyed by column name) with a header row.

    Helper for dataset generators; logit paths are written as given, so
    relative paths keep the tree relocatable.
    """
    columns = list(_REQUIRED_COLUMNS)
    if with_transcripts:
        columns.append("transcript_ref")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([row[c] for c in columns])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
