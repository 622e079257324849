"""File formats.

QSCD (binary, little-endian) holds raw shots::

    offset  size  field
    0       4     magic b"QSCD"
    4       4     version (u32, currently 1)
    8       2     n_qubits (u16)
    10      4     n_shots (u32)
    14      4     n_samples (u32)
    18      8     sample_rate (f64)
    26      2     target_qubit (u16)
    28      ...   n_shots records of [label u16 bitmask, n_samples x f32]

Bit ``i`` of a record label is the prepared state of qubit ``i``. Samples are
stored as float32 and widened to float64 on read.

Kernels, discriminant lines, models and reports are JSON. Floats are written
as JSON numbers in shortest round-trip form, so parsing recovers every double
exactly.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .dsp import DemodKernel, DiscriminantLine
from .errors import DataFormatError
from .network import FeatureScaler, QscModel, TrainConfig
from .signal import Dataset

MAGIC = b"QSCD"
VERSION = 1
HEADER = struct.Struct("<4sIHIIdH")
HEADER_SIZE = HEADER.size  # 28


def record_dtype(n_samples: int) -> np.dtype:
    return np.dtype([("label", "<u2"), ("samples", "<f4", (n_samples,))])


def atomic_write(path, data: bytes | str):
    path = Path(path)
    mode = "w" if isinstance(data, str) else "wb"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dataset_to_bytes(dataset: Dataset) -> bytes:
    header = HEADER.pack(MAGIC, VERSION, dataset.n_qubits, len(dataset), dataset.n_samples,
                         dataset.sample_rate, dataset.target_qubit)
    rec = np.empty(len(dataset), dtype=record_dtype(dataset.n_samples))
    rec["label"] = dataset.masks
    rec["samples"] = dataset.samples.astype("<f4")
    return header + rec.tobytes()


def dataset_from_bytes(buf: bytes) -> Dataset:
    if len(buf) < HEADER_SIZE:
        raise DataFormatError(f"file is {len(buf)} bytes, shorter than the {HEADER_SIZE}-byte header",
                              offset=len(buf), expected=HEADER_SIZE, actual=len(buf))
    magic, version, n_qubits, n_shots, n_samples, sample_rate, target = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise DataFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != VERSION:
        what = "newer than supported" if version > VERSION else "unknown"
        raise DataFormatError(f"QSCD version {version} is {what} (reader supports {VERSION})", offset=4)
    if not 1 <= n_qubits <= 16:
        raise DataFormatError(f"n_qubits {n_qubits} out of range", offset=8)
    if n_samples < 1:
        raise DataFormatError("n_samples must be positive", offset=14)
    if not (np.isfinite(sample_rate) and sample_rate > 0):
        raise DataFormatError(f"invalid sample rate {sample_rate}", offset=18)
    if target >= n_qubits:
        raise DataFormatError(f"target qubit {target} out of range", offset=26)
    record_size = 2 + 4 * n_samples
    expected = HEADER_SIZE + n_shots * record_size
    if len(buf) != expected:
        kind = "truncated" if len(buf) < expected else "has trailing bytes"
        raise DataFormatError(f"file {kind}: expected {expected} bytes, got {len(buf)}",
                              offset=min(len(buf), expected), expected=expected, actual=len(buf))
    dt = record_dtype(n_samples)
    rec = np.frombuffer(buf, dtype=dt, count=n_shots, offset=HEADER_SIZE)
    labels = rec["label"].astype(np.int64)
    bad = np.flatnonzero(labels >> n_qubits)
    if bad.size:
        raise DataFormatError(f"record {bad[0]} label {labels[bad[0]]} has bits beyond qubit {n_qubits - 1}",
                              offset=HEADER_SIZE + int(bad[0]) * dt.itemsize)
    with np.errstate(invalid="ignore"):  # signalling NaNs are rejected just below
        samples = rec["samples"].astype(np.float64)
    nonfinite = np.flatnonzero(~np.all(np.isfinite(samples), axis=1)) if n_shots else []
    if len(nonfinite):
        raise DataFormatError(f"record {nonfinite[0]} holds non-finite samples",
                              offset=HEADER_SIZE + int(nonfinite[0]) * dt.itemsize + 2)
    states = ((labels[:, None] >> np.arange(n_qubits)) & 1).astype(np.uint8)
    return Dataset(n_qubits, float(sample_rate), n_samples, target, samples.reshape(n_shots, n_samples), states)


def write_dataset(dataset: Dataset, path):
    atomic_write(path, dataset_to_bytes(dataset))


def read_dataset(path) -> Dataset:
    return dataset_from_bytes(Path(path).read_bytes())


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path):
    atomic_write(path, dumps(obj))


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc.msg}", offset=exc.pos) from None


def _check_format(d, name):
    if not isinstance(d, dict) or d.get("format") != name:
        raise DataFormatError(f"expected a {name!r} document")
    if d.get("version", 1) != 1:
        raise DataFormatError(f"{name} version {d.get('version')} is not supported")


def _field(d, key, name):
    try:
        return d[key]
    except KeyError:
        raise DataFormatError(f"{name} document lacks {key!r}") from None


def kernel_to_dict(kernel: DemodKernel, meta: dict | None = None) -> dict:
    return {"format": "qsc.kernel", "version": 1, "d_matrix": kernel.d_matrix.tolist(),
            "bias": kernel.bias.tolist(), "meta": meta or {}}


def kernel_from_dict(d: dict) -> DemodKernel:
    _check_format(d, "qsc.kernel")
    return DemodKernel(_field(d, "d_matrix", "kernel"), _field(d, "bias", "kernel"))


def line_to_dict(line: DiscriminantLine) -> dict:
    return {"format": "qsc.line", "version": 1, "a": line.a, "b": line.b, "c": line.c}


def line_from_dict(d: dict) -> DiscriminantLine:
    _check_format(d, "qsc.line")
    a, b, c = (float(_field(d, k, "line")) for k in "abc")
    line = DiscriminantLine(a, b, c)
    if abs(np.hypot(a, b) - 1.0) < 1e-12:
        # stored lines are already normalised; keep the exact values
        line.a, line.b, line.c = a, b, c
    return line


def train_digest(cfg: TrainConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def model_to_dict(model: QscModel, meta: dict | None = None) -> dict:
    return {"format": "qsc.model", "version": 1,
            "scaler": {"shift": model.scaler.shift.tolist(), "scale": model.scaler.scale.tolist()},
            "w1": model.w1.tolist(), "b1": model.b1.tolist(), "w2": model.w2.tolist(), "b2": model.b2,
            "meta": {"n_samples": model.n_samples, **(meta or {})}}


def model_from_dict(d: dict) -> QscModel:
    _check_format(d, "qsc.model")
    sc = _field(d, "scaler", "model")
    scaler = FeatureScaler(_field(sc, "shift", "scaler"), _field(sc, "scale", "scaler"))
    return QscModel(scaler, *(_field(d, k, "model") for k in ("w1", "b1", "w2", "b2")))
