"""File formats and report serialization.

Formats owned by this module:

* binary embeddings: 4-byte magic ``EMBF``, u16 version, u32 row count,
  u32 column count (all little-endian), then ``n*d`` little-endian
  float32 values in row-major order;
* embeddings as CSV (one row per line) or JSONL (one JSON array per
  line);
* token corpora as JSONL, one array of integer token ids per line;
* log-probability summaries as CSV with header ``total_logprob,n_tokens``;
* pairwise ratings as CSV with header ``player_a,player_b,rating``;
* curve exports as CSV with header ``lambda,x,y`` and as a standalone SVG;
* JSON report documents, floats serialized with 17 significant digits.

All writes go through a temp-file-plus-rename so a failed run never
leaves a partial file behind.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import struct
import tempfile
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from .divergence import DiscreteDistribution
from .errors import DataFormatError, ParameterError
from .frontier import DivergenceCurve
from .quantize import EmbeddingSet
from .textstats import LogProbRecord, TokenCorpus

MAGIC = b"EMBF"
VERSION = 1
_HEADER = struct.Struct("<4sHII")

EMBEDDING_FORMATS = ("binary", "csv", "jsonl")


# ---------------------------------------------------------------------------
# atomic writes


def atomic_write_bytes(path: str | Path, payload: bytes) -> None:
    """Write ``payload`` to ``path`` via a temp file in the same directory."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent if str(path.parent) else ".", prefix=path.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# embeddings


def write_embeddings(embeds: EmbeddingSet, path: str | Path) -> None:
    """Serialize an embedding set to the binary format (float32)."""
    header = _HEADER.pack(MAGIC, VERSION, embeds.n, embeds.dim)
    payload = embeds.data.astype("<f4").tobytes(order="C")
    atomic_write_bytes(path, header + payload)


def _read_embeddings_binary(path: Path) -> EmbeddingSet:
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise DataFormatError(f"{path}: too short for an embedding header")
    magic, version, n, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 4 * n * d
    if len(blob) != expected:
        raise DataFormatError(
            f"{path}: payload is {len(blob) - _HEADER.size} bytes, "
            f"expected {4 * n * d} for n={n}, d={d}"
        )
    if n < 1 or d < 1:
        raise DataFormatError(f"{path}: empty embedding matrix (n={n}, d={d})")
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    return _finite_matrix(data.reshape(n, d), path)


def _finite_matrix(matrix: npt.NDArray[np.float64], path: Path) -> EmbeddingSet:
    bad = np.flatnonzero(~np.all(np.isfinite(matrix), axis=1))
    if bad.size:
        raise DataFormatError(f"{path}: non-finite value in row {int(bad[0])}")
    return EmbeddingSet(matrix)


def _read_embeddings_csv(path: Path) -> EmbeddingSet:
    rows: list[list[float]] = []
    width: int | None = None
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise DataFormatError(
                f"{path}: line {lineno} has {len(fields)} values, expected {width}"
            )
        try:
            rows.append([float(field) for field in fields])
        except ValueError as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{path}: no embedding rows")
    return _finite_matrix(np.asarray(rows, dtype=np.float64), path)


def _read_embeddings_jsonl(path: Path) -> EmbeddingSet:
    rows: list[list[float]] = []
    width: int | None = None
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
        if not isinstance(record, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in record
        ):
            raise DataFormatError(
                f"{path}: line {lineno} is not an array of numbers"
            )
        if width is None:
            width = len(record)
        elif len(record) != width:
            raise DataFormatError(
                f"{path}: line {lineno} has {len(record)} values, expected {width}"
            )
        rows.append([float(v) for v in record])
    if not rows:
        raise DataFormatError(f"{path}: no embedding rows")
    return _finite_matrix(np.asarray(rows, dtype=np.float64), path)


def read_embeddings(path: str | Path, fmt: str = "binary") -> EmbeddingSet:
    """Load an embedding set; ``fmt`` is one of binary, csv, jsonl."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    if fmt == "binary":
        return _read_embeddings_binary(path)
    if fmt == "csv":
        return _read_embeddings_csv(path)
    if fmt == "jsonl":
        return _read_embeddings_jsonl(path)
    raise ParameterError(f"unknown embedding format {fmt!r}; use one of {EMBEDDING_FORMATS}")


def guess_embedding_format(path: str | Path) -> str:
    """Pick a reader from the file extension; anything unknown is binary."""
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".jsonl":
        return "jsonl"
    return "binary"


# ---------------------------------------------------------------------------
# token corpora and log-probs


def read_token_corpus(path: str | Path) -> TokenCorpus:
    """JSONL token corpus: one JSON array of non-negative ints per line."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    sequences = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
        if (
            not isinstance(record, list)
            or not record
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in record)
        ):
            raise DataFormatError(
                f"{path}: line {lineno} is not a non-empty array of integers"
            )
        if min(record) < 0:
            raise DataFormatError(f"{path}: line {lineno} has negative token ids")
        sequences.append(record)
    if not sequences:
        raise DataFormatError(f"{path}: no token sequences")
    return TokenCorpus(tuple(sequences))


def write_token_corpus(corpus: TokenCorpus, path: str | Path) -> None:
    lines = [json.dumps(seq.tolist()) for seq in corpus.sequences]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_logprob_csv(path: str | Path) -> tuple[LogProbRecord, ...]:
    """CSV with header ``total_logprob,n_tokens``, one record per line."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if not lines or lines[0].strip() != "total_logprob,n_tokens":
        raise DataFormatError(f"{path}: expected header 'total_logprob,n_tokens'")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 2:
            raise DataFormatError(
                f"{path}: line {lineno} has {len(fields)} values, expected 2"
            )
        try:
            record = LogProbRecord(float(fields[0]), int(fields[1]))
        except (ValueError, ParameterError) as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
        records.append(record)
    if not records:
        raise DataFormatError(f"{path}: no log-prob records")
    return tuple(records)


def write_logprob_csv(records: tuple[LogProbRecord, ...] | list, path: str | Path) -> None:
    lines = ["total_logprob,n_tokens"]
    lines += [f"{_float_repr(r.total_logprob)},{r.n_tokens}" for r in records]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_ratings_csv(path: str | Path) -> list[tuple[str, str, str]]:
    """CSV with header ``player_a,player_b,rating``."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if not lines or lines[0].strip() != "player_a,player_b,rating":
        raise DataFormatError(f"{path}: expected header 'player_a,player_b,rating'")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = [field.strip() for field in line.split(",")]
        if len(fields) != 3:
            raise DataFormatError(
                f"{path}: line {lineno} has {len(fields)} values, expected 3"
            )
        rows.append((fields[0], fields[1], fields[2]))
    if not rows:
        raise DataFormatError(f"{path}: no rating rows")
    return rows


def read_metric_columns(
    path: str | Path,
) -> tuple[tuple[str, str], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Two numeric CSV columns, with an optional header naming them."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    names = ("a", "b")
    start = 0
    first = [field.strip() for field in lines[0].split(",")]
    if len(first) == 2:
        try:
            float(first[0]), float(first[1])
        except ValueError:
            names = (first[0], first[1])
            start = 1
    column_a, column_b = [], []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        fields = line.split(",")
        if len(fields) != 2:
            raise DataFormatError(
                f"{path}: line {lineno} has {len(fields)} values, expected 2"
            )
        try:
            column_a.append(float(fields[0]))
            column_b.append(float(fields[1]))
        except ValueError as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
    if len(column_a) < 2:
        raise DataFormatError(f"{path}: need at least 2 data rows")
    return names, np.asarray(column_a), np.asarray(column_b)


# ---------------------------------------------------------------------------
# distributions


def renormalize(values: npt.ArrayLike) -> DiscreteDistribution:
    """Scale non-negative weights to sum to one (the one sanctioned place
    where unnormalized input becomes a distribution)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError("weights must form a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ParameterError("weights must be finite and non-negative")
    total = arr.sum()
    if total <= 0.0:
        raise ParameterError("weights must have positive total mass")
    return arr / total


# ---------------------------------------------------------------------------
# curve exports


def write_curve_csv(curve: DivergenceCurve, path: str | Path) -> None:
    """CSV rows ``lambda,x,y``; anchor rows carry lambda 0 and 1."""
    lines = ["lambda,x,y"]
    for lam, x, y in zip(curve.grid, curve.xs, curve.ys):
        lines.append(f"{_float_repr(lam)},{_float_repr(x)},{_float_repr(y)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_curve_svg(curve: DivergenceCurve, path: str | Path, size: int = 480) -> None:
    """A minimal standalone SVG of the curve in the unit square."""
    margin = 40
    span = size - 2 * margin

    def sx(x: float) -> float:
        return margin + x * span

    def sy(y: float) -> float:
        return size - margin - y * span

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(curve.xs, curve.ys))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="none" stroke="#999"/>',
        f'<line x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(1):.2f}" y2="{sy(1):.2f}" '
        'stroke="#ccc" stroke-dasharray="4 4"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f5fa8" stroke-width="2"/>',
        f'<text x="{size // 2}" y="{size - 8}" text-anchor="middle" '
        f'font-size="12">exp(-c KL(Q|R)), c={_float_repr(curve.c)}</text>',
        f'<text x="12" y="{size // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {size // 2})">exp(-c KL(P|R))</text>',
        "</svg>",
    ]
    atomic_write_text(path, "\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# report documents


@dataclasses.dataclass(frozen=True)
class ReportDocument:
    """A self-describing result document: what ran, with which knobs,
    what came out, and how long it took."""

    kind: str
    config: dict
    results: dict
    timing: dict

    REQUIRED = ("kind", "config", "results", "timing")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "results": self.results,
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ReportDocument":
        missing = [key for key in cls.REQUIRED if key not in raw]
        if missing:
            raise DataFormatError(f"report is missing required fields: {missing}")
        return cls(
            kind=raw["kind"],
            config=raw["config"],
            results=raw["results"],
            timing=raw["timing"],
        )


def _float_repr(value: float) -> str:
    """17 significant digits, which round-trips any binary64 exactly."""
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return format(value, ".17g")


def _json_serialize(value: Any, indent: int) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _float_repr(float(value))
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        items = [_json_serialize(v, indent + 2) for v in value]
        if not items:
            return "[]"
        return "[\n" + ",\n".join(inner + item for item in items) + "\n" + pad + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        entries = [
            f"{inner}{json.dumps(str(key))}: {_json_serialize(val, indent + 2)}"
            for key, val in sorted(value.items())
        ]
        return "{\n" + ",\n".join(entries) + "\n" + pad + "}"
    raise ParameterError(f"cannot serialize {type(value).__name__} into a report")


def report_to_json(report: ReportDocument) -> str:
    return _json_serialize(report.to_dict(), 0) + "\n"


def write_report(report: ReportDocument, path: str | Path) -> None:
    atomic_write_text(path, report_to_json(report))


def read_report(path: str | Path) -> ReportDocument:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataFormatError(f"{path}: report must be a JSON object")
    return ReportDocument.from_dict(raw)
