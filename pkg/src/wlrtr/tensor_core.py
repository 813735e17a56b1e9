"""Dense 3-order tensors: unfolding, folding, n-mode products and norms.

Tensors are plain ``numpy.ndarray`` objects of shape ``(rows, cols, bands)``
holding float64 samples. Modes are numbered 1, 2, 3.

The mode-n unfolding places the mode-n fibers in the columns, with the
remaining indices enumerated lowest-index-fastest (Kolda & Bader). For a
3-order tensor that means column ``j + I2*k`` for mode 1, ``i + I1*k`` for
mode 2 and ``i + I1*j`` for mode 3.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "TensorShapeError",
    "as_tensor3",
    "as_matrix",
    "unfold",
    "fold",
    "nmode_product",
    "fro_norm",
    "l1_norm",
    "l211_norm",
]


class TensorShapeError(ValueError):
    """Raised when array dimensions are inconsistent with an operation."""


def as_tensor3(t, name: str = "tensor") -> np.ndarray:
    """Validate ``t`` as a finite 3-order tensor and return it as float64.

    float32 input is widened. Arrays are never modified in place.
    """
    arr = np.asarray(t)
    if arr.ndim != 3:
        raise TensorShapeError(f"{name} must be 3-order, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise TensorShapeError(f"{name} has an empty dimension: {arr.shape}")
    arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or min(arr.shape) < 1:
        raise TensorShapeError(f"{name} must be a non-empty 2-D array, got {arr.shape}")
    return arr


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    return mode - 1


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-n matricization: ``I_n x prod(other dims)`` matrix of mode-n fibers."""
    axis = _check_mode(mode)
    t = np.asarray(t)
    if t.ndim != 3:
        raise TensorShapeError(f"expected a 3-order tensor, got shape {t.shape}")
    return np.reshape(np.moveaxis(t, axis, 0), (t.shape[axis], -1), order="F")


def fold(m: np.ndarray, mode: int, dims: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of shape ``dims``."""
    axis = _check_mode(mode)
    m = np.asarray(m)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise TensorShapeError(f"dims must have three entries, got {dims}")
    rest = [d for i, d in enumerate(dims) if i != axis]
    if m.ndim != 2 or m.shape != (dims[axis], rest[0] * rest[1]):
        raise TensorShapeError(
            f"cannot fold matrix of shape {m.shape} in mode {mode} to dims {dims}"
        )
    moved = np.reshape(m, (dims[axis], rest[0], rest[1]), order="F")
    return np.moveaxis(moved, 0, axis)


def nmode_product(t: np.ndarray, M: np.ndarray, mode: int) -> np.ndarray:
    """Compute ``t x_n M``; the mode-n size becomes ``M.shape[0]``."""
    axis = _check_mode(mode)
    t = np.asarray(t, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] != t.shape[axis]:
        raise TensorShapeError(
            f"matrix of shape {M.shape} does not act on mode {mode} of size {t.shape[axis]}"
        )
    out = np.tensordot(M, t, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def fro_norm(t: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(t, dtype=np.float64))))


def l1_norm(t: np.ndarray) -> float:
    return float(np.sum(np.abs(t)))


def l211_norm(t: np.ndarray) -> float:
    """Sum over bands and columns of the l2 norms of the mode-1 fibers."""
    t = np.asarray(t, dtype=np.float64)
    return float(np.sum(np.sqrt(np.sum(t * t, axis=0))))
