"""Binary tensor file format: one JSON header line, then raw float32 payload.

Header: ``{"dtype":"f32","shape":[B,N,D],"layout":"row-major","endian":"little"}``
followed by a single newline and exactly 4*B*N*D little-endian float bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import TensorFileError


def write_tensor(path: str | Path, array: np.ndarray) -> None:
    """Write a (B, N, D) array as a float32 tensor file."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim != 3:
        raise TensorFileError(f"tensor files hold (B, N, D) arrays, got shape {arr.shape}")
    header = {
        "dtype": "f32",
        "shape": [int(s) for s in arr.shape],
        "layout": "row-major",
        "endian": "little",
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, separators=(",", ":")).encode("ascii"))
        f.write(b"\n")
        f.write(arr.tobytes())


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a tensor file back as a float32 (B, N, D) array."""
    with open(path, "rb") as f:
        line = f.readline()
        payload = f.read()
    try:
        header = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise TensorFileError(f"bad tensor header: {e}") from None
    if not isinstance(header, dict):
        raise TensorFileError("tensor header must be a JSON object")
    if header.get("dtype") != "f32":
        raise TensorFileError(f"unsupported dtype {header.get('dtype')!r}")
    if header.get("layout") != "row-major":
        raise TensorFileError(f"unsupported layout {header.get('layout')!r}")
    if header.get("endian") != "little":
        raise TensorFileError(f"unsupported endianness {header.get('endian')!r}")
    shape = header.get("shape")
    if (
        not isinstance(shape, list)
        or len(shape) != 3
        or not all(isinstance(s, int) and s >= 1 for s in shape)
    ):
        raise TensorFileError(f"bad shape {shape!r} (expected [B, N, D])")
    b, n, d = shape
    expected = 4 * b * n * d
    if len(payload) != expected:
        raise TensorFileError(
            f"payload is {len(payload)} bytes, header shape {shape} needs {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(b, n, d)
