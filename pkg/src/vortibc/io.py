"""File formats: VBF1 field checkpoints and diagnostics CSV.

VBF1 layout, little endian: 4 magic bytes "VBF1", u32 rank, u32 dims[rank],
u32 components, then float64 payload in row-major order with coordinate 2
fastest and the component index innermost.  Files are written atomically
(temp file + rename) so readers never observe partial output.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

MAGIC = b"VBF1"


def _atomic_write_bytes(path, payload: bytes):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_vbf_")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    _atomic_write_bytes(path, text.encode("utf-8"))


def write_vbf(path, array: np.ndarray, components: int = 1):
    """Write an array of shape dims (+ trailing component axis when
    components > 1) as a VBF1 checkpoint."""
    arr = np.ascontiguousarray(array, dtype="<f8")
    if components > 1:
        if arr.shape[-1] != components:
            raise ValueError("trailing axis must hold the components")
        dims = arr.shape[:-1]
    else:
        dims = arr.shape
    head = MAGIC + struct.pack("<I", len(dims))
    head += struct.pack(f"<{len(dims)}I", *dims)
    head += struct.pack("<I", components)
    _atomic_write_bytes(path, head + arr.tobytes(order="C"))


def read_vbf(path):
    """Read a VBF1 checkpoint; returns (array, components)."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:4]!r}")
    off = 4
    (rank,) = struct.unpack_from("<I", raw, off)
    off += 4
    dims = struct.unpack_from(f"<{rank}I", raw, off)
    off += 4 * rank
    (components,) = struct.unpack_from("<I", raw, off)
    off += 4
    count = int(np.prod(dims)) * components
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
    shape = tuple(dims) + ((components,) if components > 1 else ())
    return data.reshape(shape).copy(), components


def format_float(x: float) -> str:
    """17-significant-digit decimal, reproducible across runs."""
    return f"{x:.17g}"


def write_csv(path, columns, rows):
    """Write a diagnostics CSV with fixed header and 17-digit floats."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(
            format_float(v) if isinstance(v, float) else str(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def scalar_checkpoint(path, field):
    write_vbf(path, field.values, components=1)


def vector_checkpoint(path, field):
    write_vbf(path, np.stack([field.ux, field.uy], axis=-1), components=2)
