"""Binary container for named tensors plus JSON metadata.

Layout (all integers little-endian):

    bytes 0..7    magic b"TPTENS01"
    bytes 8..15   uint64 header length H
    bytes 16..16+H-1  UTF-8 JSON header:
        {"tensors": [{"name": str, "shape": [int...], "dtype": "f8"|"f4"}...],
         "meta": {...}}
    then one payload per header entry, in order: row-major (C-order)
    little-endian floats, no padding.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .autodiff import Tensor

__all__ = ["save_tensors", "load_tensors", "FormatError"]

MAGIC = b"TPTENS01"
_DTYPES = {"f8": "<f8", "f4": "<f4"}


class FormatError(ValueError):
    """Raised on malformed container files."""


def save_tensors(path, tensors: dict, meta: dict | None = None) -> None:
    """Write named arrays/Tensors and optional JSON-serializable metadata."""
    entries, payloads = [], []
    for name, t in tensors.items():
        arr = np.ascontiguousarray(t.value if isinstance(t, Tensor) else t)
        code = "f4" if arr.dtype == np.float32 else "f8"
        arr = arr.astype(_DTYPES[code])
        entries.append({"name": name, "shape": list(arr.shape), "dtype": code})
        payloads.append(arr.tobytes())
    header = json.dumps({"tensors": entries, "meta": meta or {}}).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for p in payloads:
            f.write(p)


def load_tensors(path) -> tuple[dict, dict]:
    """Read a container; returns ({name: ndarray}, meta)."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:8] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:8]!r}")
    (hlen,) = struct.unpack("<Q", blob[8:16])
    try:
        header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: bad header: {e}") from None
    offset = 16 + hlen
    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        dt = np.dtype(_DTYPES[entry["dtype"]])
        nbytes = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        chunk = blob[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise FormatError(f"{path}: truncated payload for {entry['name']!r}")
        tensors[entry["name"]] = np.frombuffer(chunk, dtype=dt).reshape(shape).copy()
        offset += nbytes
    return tensors, header.get("meta", {})
