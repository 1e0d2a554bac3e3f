"""Readers and writers for the files this adapter produces or consumes.

The embedding container is a small binary format: the magic bytes
``EMBF``, a little-endian ``<4sHII`` header carrying (magic, version,
n_rows, n_cols), then ``n_rows * n_cols`` float32 values in row-major
order.  Log-probs travel as a CSV with the header
``total_logprob,n_tokens``.  Both are written atomically (temp file +
rename) so a crash never leaves a half-written artifact.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np
import numpy.typing as npt

from .errors import InputError

MAGIC = b"EMBF"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def _atomic_write(path: str | os.PathLike, blob: bytes) -> None:
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".embf-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_embedding_file(rows: npt.NDArray, path: str | os.PathLike) -> None:
    """Write a 2-D float array as a binary embedding file."""
    data = np.ascontiguousarray(rows, dtype="<f4")
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
        raise InputError(f"embeddings must form a non-empty 2-D array, got {data.shape}")
    header = _HEADER.pack(MAGIC, VERSION, data.shape[0], data.shape[1])
    _atomic_write(path, header + data.tobytes(order="C"))


def write_logprob_file(
    records: list[tuple[float, int]], path: str | os.PathLike
) -> None:
    """Write (total_logprob, n_tokens) rows as the log-prob CSV."""
    if not records:
        raise InputError("no scoreable texts: refusing to write an empty log-prob file")
    lines = ["total_logprob,n_tokens"]
    lines += [f"{repr(float(total))},{int(count)}" for total, count in records]
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_texts_jsonl(path: str | os.PathLike) -> list[str]:
    """Read a JSONL file with one ``{"text": ...}`` object per line."""
    texts: list[str] = []
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    payload = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise InputError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
                if not isinstance(payload, dict) or "text" not in payload:
                    raise InputError(
                        f"{path}: line {lineno}: expected an object with a 'text' key"
                    )
                if not isinstance(payload["text"], str):
                    raise InputError(f"{path}: line {lineno}: 'text' must be a string")
                texts.append(payload["text"])
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not texts:
        raise InputError(f"{path}: no texts found")
    return texts
