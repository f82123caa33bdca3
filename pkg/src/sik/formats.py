"""File formats: model and dataset binaries, CSV for data, scores, features, reports.

Model files ("SIKM"): magic, u32 format version, then d, psi, t, seed as
little-endian u64, then per partitioning the psi*d center coordinates and
psi radii as little-endian float64.  Round-trips are bit-exact.

Dataset files ("SIKD"): magic, n and d as little-endian u64, n*d
little-endian float32 values, then an optional n-byte 0/1 label block.

CSV datasets have an optional header; the last column is treated as labels
only when the header names it "label".  Score CSVs are written with 17
significant digits so parsing them returns the original float64 exactly.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ShapeError
from .partitioning import MAX_SEED, SphereEnsemble, as_embedding_matrix

__all__ = [
    "MODEL_MAGIC",
    "DATASET_MAGIC",
    "MODEL_FORMAT_VERSION",
    "ensemble_to_bytes",
    "ensemble_from_bytes",
    "save_ensemble",
    "load_ensemble",
    "write_dataset_binary",
    "read_dataset_binary",
    "write_dataset_csv",
    "read_dataset_csv",
    "read_dataset",
    "write_dataset",
    "write_scores_csv",
    "read_scores_csv",
    "write_sik_features_csv",
    "write_ik_features_csv",
    "write_reports_csv",
    "write_reports_jsonl",
    "write_bench_csv",
    "write_bench_jsonl",
]

MODEL_MAGIC = b"SIKM"
DATASET_MAGIC = b"SIKD"
MODEL_FORMAT_VERSION = 1

_MODEL_HEADER = struct.Struct("<4sIQQQQ")
_DATASET_HEADER = struct.Struct("<4sQQ")

# 17 significant digits: enough to round-trip any float64 exactly.
_FLOAT_FMT = "%.17g"


def ensemble_to_bytes(ensemble: SphereEnsemble) -> bytes:
    if not 0 <= ensemble.seed <= MAX_SEED:
        raise FormatError(f"seed {ensemble.seed} not representable as u64")
    buf = io.BytesIO()
    buf.write(
        _MODEL_HEADER.pack(
            MODEL_MAGIC, MODEL_FORMAT_VERSION, ensemble.d, ensemble.psi, ensemble.t, ensemble.seed
        )
    )
    for i in range(ensemble.t):
        buf.write(np.ascontiguousarray(ensemble.centers[i], dtype="<f8").tobytes())
        buf.write(np.ascontiguousarray(ensemble.radii[i], dtype="<f8").tobytes())
    return buf.getvalue()


def ensemble_from_bytes(raw: bytes) -> SphereEnsemble:
    if len(raw) < _MODEL_HEADER.size:
        raise FormatError("model file truncated: header incomplete")
    magic, version, d, psi, t, seed = _MODEL_HEADER.unpack_from(raw)
    if magic != MODEL_MAGIC:
        raise FormatError(f"bad model magic {magic!r}")
    if version != MODEL_FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {version}")
    if d < 1 or psi < 2 or t < 1:
        raise FormatError(f"invalid model header: d={d} psi={psi} t={t}")
    expected = _MODEL_HEADER.size + t * (psi * d + psi) * 8
    if len(raw) != expected:
        raise FormatError(f"model file length {len(raw)}, expected {expected}")
    body = np.frombuffer(raw, dtype="<f8", offset=_MODEL_HEADER.size)
    per_part = psi * d + psi
    centers = np.empty((t, psi, d), dtype=np.float64)
    radii = np.empty((t, psi), dtype=np.float64)
    for i in range(t):
        chunk = body[i * per_part : (i + 1) * per_part]
        centers[i] = chunk[: psi * d].reshape(psi, d)
        radii[i] = chunk[psi * d :]
    if not np.isfinite(centers).all() or not np.isfinite(radii).all() or (radii < 0).any():
        raise FormatError("model contains non-finite centers or invalid radii")
    return SphereEnsemble(centers=centers, radii=radii, seed=int(seed))


def save_ensemble(ensemble: SphereEnsemble, path) -> int:
    """Write the model file; returns the byte size written."""
    raw = ensemble_to_bytes(ensemble)
    with open(path, "wb") as fh:
        fh.write(raw)
    return len(raw)


def load_ensemble(path) -> SphereEnsemble:
    with open(path, "rb") as fh:
        return ensemble_from_bytes(fh.read())


@dataclass(frozen=True)
class DatasetOnDisk:
    """A parsed dataset: float64 matrix plus optional 0/1 labels."""

    values: np.ndarray
    labels: np.ndarray | None


def write_dataset_binary(path, values: np.ndarray, labels: np.ndarray | None = None) -> None:
    x = as_embedding_matrix(values)
    n, d = x.shape
    if labels is not None:
        labels = _check_labels(labels, n)
    with open(path, "wb") as fh:
        fh.write(_DATASET_HEADER.pack(DATASET_MAGIC, n, d))
        fh.write(np.ascontiguousarray(x, dtype="<f4").tobytes())
        if labels is not None:
            fh.write(labels.astype(np.uint8).tobytes())


def read_dataset_binary(path) -> DatasetOnDisk:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _DATASET_HEADER.size:
        raise FormatError("dataset file truncated: header incomplete")
    magic, n, d = _DATASET_HEADER.unpack_from(raw)
    if magic != DATASET_MAGIC:
        raise FormatError(f"bad dataset magic {magic!r}")
    if n < 1 or d < 1:
        raise FormatError(f"invalid dataset header: n={n} d={d}")
    body = _DATASET_HEADER.size + n * d * 4
    if len(raw) == body:
        labels = None
    elif len(raw) == body + n:
        labels = np.frombuffer(raw, dtype=np.uint8, offset=body)
        if not np.isin(labels, (0, 1)).all():
            raise FormatError("label block contains values other than 0/1")
    else:
        raise FormatError(f"dataset file length {len(raw)} matches neither labeled nor unlabeled size")
    values = np.frombuffer(raw, dtype="<f4", offset=_DATASET_HEADER.size, count=n * d)
    return DatasetOnDisk(values=values.reshape(n, d).astype(np.float64), labels=labels)


def write_dataset_csv(path, values: np.ndarray, labels: np.ndarray | None = None) -> None:
    x = as_embedding_matrix(values)
    n, d = x.shape
    if labels is not None:
        labels = _check_labels(labels, n)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"f{j}" for j in range(d)]
        if labels is not None:
            header.append("label")
        writer.writerow(header)
        for i in range(n):
            row = [_FLOAT_FMT % v for v in x[i]]
            if labels is not None:
                row.append(str(int(labels[i])))
            writer.writerow(row)


def read_dataset_csv(path) -> DatasetOnDisk:
    with open(path, "r", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise FormatError("empty CSV dataset")
    labeled = False
    first = rows[0]
    if _is_header(first):
        labeled = first[-1].strip() == "label"
        rows = rows[1:]
        if not rows:
            raise FormatError("CSV dataset has a header but no rows")
    width = len(rows[0])
    values = np.empty((len(rows), width - 1 if labeled else width), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.uint8) if labeled else None
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"CSV row {i} has {len(row)} cells, expected {width}")
        try:
            if labeled:
                values[i] = [float(c) for c in row[:-1]]
                labels[i] = _parse_label(row[-1], i)
            else:
                values[i] = [float(c) for c in row]
        except ValueError as exc:
            raise FormatError(f"CSV row {i}: {exc}") from exc
    return DatasetOnDisk(values=values, labels=labels)


def _parse_label(cell: str, row: int) -> int:
    v = int(float(cell))
    if v not in (0, 1):
        raise FormatError(f"CSV row {row}: label must be 0 or 1, got {cell!r}")
    return v


def _is_header(row) -> bool:
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def _check_labels(labels, n: int) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.shape != (n,):
        raise ShapeError(f"labels shape {arr.shape} does not match n={n}")
    if not np.isin(arr, (0, 1)).all():
        raise FormatError("labels must be 0 or 1")
    return arr.astype(np.uint8)


def read_dataset(path) -> DatasetOnDisk:
    """Read a dataset by extension: .sikd binary, anything else CSV."""
    if str(path).endswith(".sikd"):
        return read_dataset_binary(path)
    return read_dataset_csv(path)


def write_dataset(path, values: np.ndarray, labels: np.ndarray | None = None) -> None:
    if str(path).endswith(".sikd"):
        write_dataset_binary(path, values, labels)
    else:
        write_dataset_csv(path, values, labels)


def write_scores_csv(path, scores: np.ndarray, labels: np.ndarray | None = None) -> None:
    scores = np.asarray(scores, dtype=np.float64)
    if labels is not None:
        labels = _check_labels(labels, scores.shape[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "score", "label"] if labels is not None else ["index", "score"])
        for i, s in enumerate(scores):
            row = [str(i), _FLOAT_FMT % s]
            if labels is not None:
                row.append(str(int(labels[i])))
            writer.writerow(row)


def read_scores_csv(path) -> tuple[np.ndarray, np.ndarray | None]:
    with open(path, "r", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0][0] != "index":
        raise FormatError("score CSV must start with an 'index' header")
    labeled = rows[0][-1] == "label"
    body = rows[1:]
    scores = np.array([float(r[1]) for r in body], dtype=np.float64)
    labels = np.array([int(r[2]) for r in body], dtype=np.uint8) if labeled else None
    return scores, labels


def write_sik_features_csv(path, batch) -> None:
    """One row per point, t 0/1 integers."""
    bits = batch.bits()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in bits:
            writer.writerow([str(int(b)) for b in row])


def write_ik_features_csv(path, batch) -> None:
    """One row per point, t signed integers; -1 encodes outside-all-spheres."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in batch.assignments:
            writer.writerow([str(int(a)) for a in row])


_REPORT_FIELDS = ["method", "psi", "t", "seed", "auroc", "fit_seconds", "score_seconds", "feature_bytes"]


def _report_record(report) -> dict:
    rec = {
        "method": report.method,
        "psi": report.psi,
        "t": report.t,
        "seed": report.seed,
        "auroc": report.auroc,
        "fit_seconds": report.fit_seconds,
        "score_seconds": report.score_seconds,
        "feature_bytes": report.feature_bytes,
    }
    if report.ratio is not None:
        rec["ratio"] = report.ratio
    return rec


def write_reports_csv(path, reports) -> None:
    reports = list(reports)
    fields = list(_REPORT_FIELDS)
    if any(r.ratio is not None for r in reports):
        fields.append("ratio")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for r in reports:
            rec = _report_record(r)
            writer.writerow([_format_cell(rec.get(f)) for f in fields])


def write_reports_jsonl(path, reports) -> None:
    with open(path, "w") as fh:
        for r in reports:
            fh.write(json.dumps(_report_record(r)) + "\n")


_BENCH_FIELDS = [
    "size",
    "sik_fit_seconds",
    "sik_score_seconds",
    "idk_fit_seconds",
    "idk_score_seconds",
    "sik_feature_bytes",
    "idk_feature_bytes",
]


def write_bench_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_BENCH_FIELDS)
        for row in rows:
            writer.writerow([_format_cell(getattr(row, f)) for f in _BENCH_FIELDS])


def write_bench_jsonl(path, rows) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps({f: getattr(row, f) for f in _BENCH_FIELDS}) + "\n")


def _format_cell(v) -> str:
    if isinstance(v, float):
        return _FLOAT_FMT % v
    return str(v)
