"""Tensor files, text matrices, per-band image export and key=value configs.

HST1 layout (little-endian)::

    offset  size  field
    0       4     magic b"HST1"
    4       4     rows   (uint32)
    8       4     cols   (uint32)
    12      4     bands  (uint32)
    16      1     dtype  (0 = float32, 1 = float64)
    17      ...   payload, band-sequential: band 0 row by row, then band 1, ...
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .tensor_core import as_tensor3

__all__ = [
    "TensorFormatError",
    "BadMagicError",
    "TruncatedError",
    "DimensionError",
    "ConfigError",
    "HEADER",
    "save_tensor",
    "load_tensor",
    "load_raw",
    "load_matrix",
    "export_band_images",
    "read_config",
]

MAGIC = b"HST1"
HEADER = struct.Struct("<4sIIIB")  # 17 bytes
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
MAX_ELEMENTS = 1 << 34  # refuse headers describing more than 16 Gi samples


class TensorFormatError(ValueError):
    """Base class for malformed tensor files; ``code`` is the CLI exit status."""

    code = 3


class BadMagicError(TensorFormatError):
    code = 3


class TruncatedError(TensorFormatError):
    code = 4


class DimensionError(TensorFormatError):
    code = 5


class ConfigError(ValueError):
    code = 6


def _dtype_code(dtype) -> int:
    for k, v in _DTYPES.items():
        if np.dtype(dtype) == v.newbyteorder("="):
            return k
    raise ValueError(f"unsupported dtype {dtype}; use float32 or float64")


def save_tensor(path, t, dtype="float64") -> None:
    """Write ``t`` as HST1. ``dtype`` is ``"float64"`` (exact) or ``"float32"``."""
    t = np.asarray(t)
    if t.ndim != 3 or min(t.shape) < 1:
        raise DimensionError(f"expected a non-empty 3-D tensor, got shape {t.shape}")
    if max(t.shape) >= 2**32:
        raise DimensionError(f"dimension too large for a 32-bit field: {t.shape}")
    code = _dtype_code(dtype)
    payload = np.ascontiguousarray(t.transpose(2, 0, 1), dtype=_DTYPES[code])
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, *t.shape, code))
        fh.write(payload.tobytes())


def _decode(buf: bytes, rows: int, cols: int, bands: int, code: int, where: str) -> np.ndarray:
    if code not in _DTYPES:
        raise DimensionError(f"{where}: unknown dtype code {code}")
    if min(rows, cols, bands) < 1:
        raise DimensionError(f"{where}: zero dimension in {rows}x{cols}x{bands}")
    n = rows * cols * bands
    if n > MAX_ELEMENTS:
        raise DimensionError(f"{where}: {rows}x{cols}x{bands} exceeds the size limit")
    need = n * _DTYPES[code].itemsize
    if len(buf) < need:
        raise TruncatedError(f"{where}: payload has {len(buf)} bytes, expected {need}")
    if len(buf) > need:
        raise DimensionError(f"{where}: {len(buf) - need} trailing bytes after the payload")
    data = np.frombuffer(buf, dtype=_DTYPES[code]).reshape(bands, rows, cols)
    return np.ascontiguousarray(data.transpose(1, 2, 0), dtype=np.float64)


def load_tensor(path) -> np.ndarray:
    """Read an HST1 file as float64 ``(rows, cols, bands)``."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: not an HST1 file")
    if len(raw) < HEADER.size:
        raise TruncatedError(f"{path}: header is {len(raw)} bytes, expected {HEADER.size}")
    _, rows, cols, bands, code = HEADER.unpack_from(raw)
    return _decode(raw[HEADER.size :], rows, cols, bands, code, str(path))


def load_raw(path, rows: int, cols: int, bands: int, dtype: int = 1) -> np.ndarray:
    """Read a headerless band-sequential little-endian file."""
    return _decode(Path(path).read_bytes(), rows, cols, bands, dtype, str(path))


def load_matrix(path) -> np.ndarray:
    """Whitespace-separated text matrix, one row per line (``#`` comments allowed)."""
    m = np.loadtxt(path, ndmin=2, dtype=np.float64)
    if m.size == 0:
        raise ValueError(f"{path}: empty matrix")
    return m


def export_band_images(t, directory, prefix: str = "band") -> list[Path]:
    """Write one binary PGM (P5, 8-bit) per band; values are clamped and rounded."""
    t = as_tensor3(t)
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(t.shape[2] - 1)))
    paths = []
    for b in range(t.shape[2]):
        img = np.clip(np.rint(t[:, :, b]), 0, 255).astype(np.uint8)
        p = out / f"{prefix}_{b:0{width}d}.pgm"
        with open(p, "wb") as fh:
            fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
            fh.write(img.tobytes())
        paths.append(p)
    return paths


def read_config(path, allowed=None) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored.

    Keys may use ``-`` or ``_``; they are returned with ``_``. With
    ``allowed`` given, any other key raises :class:`ConfigError`.
    """
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if allowed is not None and key not in allowed:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def sidecar(path, suffix: str) -> str:
    """``out.hst`` -> ``out.log`` style sibling path."""
    root, _ = os.path.splitext(str(path))
    return root + suffix
