"""Persistence: parameter JSON, ``.hgi`` field containers, PNG and results CSV.

Parameter files are ``{"version": {major, minor, patch}, "values":
{path: value, ...}}`` with keys in flatten order; serialization is
deterministic, so equal trees produce identical bytes.

``.hgi`` is a self-describing container holding one complex field plus
its generation metadata: magic ``HGI1``, a 4-byte little-endian header
length, a UTF-8 JSON header ``{width, height, checksum, metadata}``, then
the raw payload of interleaved (re, im) little-endian float64 pairs in
row-major order. The checksum is CRC-32 of the payload bytes, so
truncation and bit corruption are detected; round trips are bit-exact.
"""

from __future__ import annotations

import copy
import csv
import json
import logging
import os
import struct
import zlib
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import (
    ChecksumMismatchError,
    EmptyImageError,
    HiddenPathError,
    MalformedJsonError,
    TruncatedPayloadError,
    UnknownKeyError,
    UnknownPathError,
    VersionMismatchError,
)
from .hierarchy import HierarchyVersion, OptionTree

logger = logging.getLogger(__name__)

HGI_MAGIC = b"HGI1"
HGI_EXTENSION = ".hgi"
_PAYLOAD_DTYPE = np.dtype("<c16")  # interleaved (re, im) float64, little-endian


# --- parameter trees ----------------------------------------------------------


def serialize_params(tree: OptionTree) -> str:
    """Deterministic JSON for the tree's visible leaves, in flatten order."""
    version = tree.version
    doc = {
        "version": {"major": version.major, "minor": version.minor, "patch": version.patch},
        "values": dict(tree.flatten()),
    }
    return json.dumps(doc, indent=2) + "\n"


def apply_values(tree: OptionTree, pairs) -> None:
    """Apply (path, value) pairs to a tree, resolving visibility order.

    Values that control visibility (selects, toggles with children) take
    effect as they are reached; values for not-yet-visible children are
    deferred and retried, so pairs may arrive in any order. A pair that
    stays hidden after the fixpoint is contradictory and raises.
    """
    pending = list(pairs)
    while pending:
        deferred = []
        first_hidden = None
        for path, value in pending:
            try:
                tree.resolve_option(path, visible_only=False)
            except UnknownPathError:
                raise UnknownKeyError(path) from None
            try:
                tree.set(path, value)
            except HiddenPathError as err:
                deferred.append((path, value))
                if first_hidden is None:
                    first_hidden = err
        if not deferred:
            return
        if len(deferred) == len(pending):
            raise first_hidden
        pending = deferred


def deserialize_params(text: str, schema: OptionTree) -> OptionTree:
    """Rebuild a tree from parameter JSON, starting from schema defaults.

    The file's major version must match the schema; minor/patch drift is
    logged and accepted. Unknown keys, range and type violations are
    rejected with their path.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedJsonError(f"invalid JSON: {err}") from None
    if not isinstance(doc, dict) or "version" not in doc or "values" not in doc:
        raise MalformedJsonError("parameter file needs 'version' and 'values' objects")
    try:
        raw = doc["version"]
        file_version = HierarchyVersion(int(raw["major"]), int(raw["minor"]), int(raw["patch"]))
    except (KeyError, TypeError, ValueError):
        raise MalformedJsonError("malformed 'version' object") from None
    if not isinstance(doc["values"], dict):
        raise MalformedJsonError("'values' must be an object")

    if file_version.major != schema.version.major:
        raise VersionMismatchError(file_version, schema.version)
    if file_version != schema.version:
        logger.warning(
            "parameter file version %s differs from schema %s; proceeding",
            file_version,
            schema.version,
        )

    tree = copy.deepcopy(schema)
    tree.reset("")
    apply_values(tree, doc["values"].items())
    return tree


# --- field containers -----------------------------------------------------------


@dataclass
class Metadata:
    """Traceability record attached to every generated field."""

    parameters: list  # full flatten of the generating tree
    seed: int
    app_version: str
    timestamp: str  # UTC ISO-8601
    algorithm: str
    error_final: float
    iterations: int


def _metadata_to_json(meta: Metadata) -> dict:
    return {
        "parameters": [[path, value] for path, value in meta.parameters],
        "seed": meta.seed,
        "appVersion": meta.app_version,
        "timestamp": meta.timestamp,
        "algorithm": meta.algorithm,
        "errorFinal": meta.error_final,
        "iterations": meta.iterations,
    }


def _metadata_from_json(obj: dict) -> Metadata:
    return Metadata(
        parameters=[(path, value) for path, value in obj["parameters"]],
        seed=int(obj["seed"]),
        app_version=obj["appVersion"],
        timestamp=obj["timestamp"],
        algorithm=obj["algorithm"],
        error_final=float(obj["errorFinal"]),
        iterations=int(obj["iterations"]),
    )


def save_field(field, meta: Metadata, path) -> None:
    """Write one complex field plus metadata as an ``.hgi`` container."""
    field = np.asarray(field, dtype=np.complex128)
    if field.ndim != 2 or field.size == 0:
        raise EmptyImageError("field must be a non-empty 2D array")
    height, width = field.shape
    payload = np.ascontiguousarray(field).astype(_PAYLOAD_DTYPE, copy=False).tobytes()
    header = {
        "width": width,
        "height": height,
        "checksum": zlib.crc32(payload) & 0xFFFFFFFF,
        "metadata": _metadata_to_json(meta),
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(HGI_MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)


def _read_container(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != HGI_MAGIC:
        raise MalformedJsonError(f"{path}: not an .hgi container")
    header_len = struct.unpack("<I", blob[4:8])[0]
    header_bytes = blob[8 : 8 + header_len]
    if len(header_bytes) < header_len:
        raise TruncatedPayloadError(f"{path}: header truncated")
    try:
        header = json.loads(header_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise MalformedJsonError(f"{path}: bad header ({err})") from None
    return header, blob[8 + header_len :]


def load_field(path):
    """Read an ``.hgi`` container, verifying length and checksum.

    Returns ``(field, metadata)``; the field reproduces the saved one
    bit-exactly.
    """
    header, payload = _read_container(path)
    width, height = header["width"], header["height"]
    expected = width * height * _PAYLOAD_DTYPE.itemsize
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload {len(payload)} bytes, expected {expected}"
        )
    if len(payload) > expected:
        raise MalformedJsonError(f"{path}: trailing bytes after payload")
    if zlib.crc32(payload) & 0xFFFFFFFF != header["checksum"]:
        raise ChecksumMismatchError(f"{path}: payload checksum mismatch")
    field = np.frombuffer(payload, dtype=_PAYLOAD_DTYPE).reshape(height, width)
    return field.astype(np.complex128), _metadata_from_json(header["metadata"])


def inspect_field(path):
    """Header plus checksum verdict without raising on payload corruption.

    Returns ``(header_dict, metadata, checksum_ok)``; header problems
    still raise since there is nothing to report without one.
    """
    header, payload = _read_container(path)
    expected = header["width"] * header["height"] * _PAYLOAD_DTYPE.itemsize
    ok = len(payload) == expected and zlib.crc32(payload) & 0xFFFFFFFF == header["checksum"]
    return header, _metadata_from_json(header["metadata"]), ok


# --- PNG -------------------------------------------------------------------------


def export_png(image, path) -> None:
    """Write an (H, W, 3) uint8 array as a standard RGB PNG."""
    arr = np.asarray(image)
    if arr.size == 0:
        raise EmptyImageError("refusing to write an empty image")
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValueError("expected an (H, W, 3) uint8 RGB array")
    Image.fromarray(arr, "RGB").save(path, format="PNG")


# --- results CSV -------------------------------------------------------------------


RESULTS_HEADER = [
    "job_id",
    "algorithm",
    "width",
    "height",
    "iterations",
    "final_error",
    "efficiency",
    "seed",
    "runtime_ms",
    "output_file",
]


@dataclass
class BatchRecord:
    """One results row; numeric fields may be None for failed jobs."""

    job_id: str
    algorithm: str = ""
    width: int = 0
    height: int = 0
    iterations: int = 0
    final_error: float | None = None
    efficiency: float | None = None
    seed: int | None = None
    runtime_ms: float = 0.0
    output_file: str = ""


def _fmt(value, spec="{}"):
    return "" if value is None else spec.format(value)


def write_results_row(path, record: BatchRecord) -> None:
    """Append one CSV row, creating the file with its header when absent."""
    fresh = not (os.path.exists(path) and os.path.getsize(path) > 0)
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(RESULTS_HEADER)
        writer.writerow(
            [
                record.job_id,
                record.algorithm,
                record.width,
                record.height,
                record.iterations,
                _fmt(record.final_error, "{:.12g}"),
                _fmt(record.efficiency, "{:.12g}"),
                _fmt(record.seed),
                "{:.3f}".format(record.runtime_ms),
                record.output_file,
            ]
        )
