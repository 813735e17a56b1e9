"""Non-local cubic grouping and overlapping-cubic aggregation.

A *cubic* is an ``m x m x B`` block whose top-left pixel is ``(row, col)``.
Similar cubics are found by comparing ``m x m`` patches of the band-mean
image, and a group stacks ``k + 1`` vectorized cubics into an
``m**2 x (k + 1) x B`` tensor: mode 1 runs over the spatial offsets of the
patch (row-major), mode 2 over the members, mode 3 over the bands.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "GroupingConfig",
    "CubicGroup",
    "band_mean_image",
    "key_positions",
    "match_similar",
    "build_group",
    "accumulate",
    "aggregate",
    "parallel_map",
]


@dataclass(frozen=True)
class GroupingConfig:
    patch: int = 7
    k: int = 140
    window: int = 20
    stride: int = 4

    def __post_init__(self):
        if self.patch < 1:
            raise ValueError("patch size must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.patch > self.window:
            raise ValueError(f"patch ({self.patch}) must not exceed window ({self.window})")


@dataclass
class CubicGroup:
    key_pos: tuple[int, int]
    member_pos: list[tuple[int, int]]
    group: np.ndarray = field(repr=False)

    @property
    def patch(self) -> int:
        return int(round(np.sqrt(self.group.shape[0])))


def band_mean_image(t: np.ndarray) -> np.ndarray:
    return np.mean(np.asarray(t, dtype=np.float64), axis=2)


def key_positions(rows: int, cols: int, patch: int, stride: int) -> list[tuple[int, int]]:
    """Regular key grid plus the last row/column so every pixel is covered."""

    def axis(n: int) -> list[int]:
        last = n - patch
        if last < 0:
            raise ValueError(f"patch {patch} does not fit an axis of length {n}")
        pos = list(range(0, last + 1, stride))
        if pos[-1] != last:
            pos.append(last)
        return pos

    return [(r, c) for r in axis(rows) for c in axis(cols)]


def match_similar(
    mean_img: np.ndarray,
    key: tuple[int, int],
    cfg: GroupingConfig,
    patches: np.ndarray | None = None,
) -> list[tuple[int, int]]:
    """Return ``k + 1`` top-left positions, the key first, nearest by patch SSD.

    Candidates are all patches whose top-left lies within ``cfg.window``
    pixels of the key along each axis and that fit inside the image. Ties are
    broken by row-major linear index. When fewer than ``k + 1`` candidates
    exist the ranked list is repeated cyclically.

    ``patches`` may carry a precomputed ``sliding_window_view`` of
    ``mean_img`` to avoid rebuilding it for every key.
    """
    m = cfg.patch
    mean_img = np.asarray(mean_img, dtype=np.float64)
    nr, nc = mean_img.shape[0] - m + 1, mean_img.shape[1] - m + 1
    kr, kc = key
    if not (0 <= kr < nr and 0 <= kc < nc):
        raise ValueError(f"key {key} does not fit a {m}x{m} patch in image {mean_img.shape}")
    if patches is None:
        patches = sliding_window_view(mean_img, (m, m))
    r0, r1 = max(0, kr - cfg.window), min(nr - 1, kr + cfg.window)
    c0, c1 = max(0, kc - cfg.window), min(nc - 1, kc + cfg.window)
    cand = patches[r0 : r1 + 1, c0 : c1 + 1].reshape(-1, m * m)
    diff = cand - patches[kr, kc].reshape(1, m * m)
    dist = np.einsum("ij,ij->i", diff, diff)

    rr, cc = np.meshgrid(np.arange(r0, r1 + 1), np.arange(c0, c1 + 1), indexing="ij")
    rr, cc = rr.ravel(), cc.ravel()
    others = ~((rr == kr) & (cc == kc))
    # candidates are enumerated row-major, so a stable sort breaks ties by linear index
    order = np.argsort(dist[others], kind="stable")
    ranked = [(int(kr), int(kc))] + list(
        zip(rr[others][order].tolist(), cc[others][order].tolist())
    )
    need = cfg.k + 1
    if len(ranked) >= need:
        return ranked[:need]
    return [ranked[i % len(ranked)] for i in range(need)]


def _gather(t: np.ndarray, positions: Sequence[tuple[int, int]], m: int) -> np.ndarray:
    rows, cols, _ = t.shape
    pos = np.asarray(positions, dtype=np.intp).reshape(-1, 2)
    if np.any(pos < 0) or np.any(pos[:, 0] > rows - m) or np.any(pos[:, 1] > cols - m):
        raise IndexError(f"cubic positions out of bounds for image {t.shape} and patch {m}")
    view = sliding_window_view(t, (m, m), axis=(0, 1))  # (r, c, B, m, m)
    cubes = view[pos[:, 0], pos[:, 1]]  # (K, B, m, m)
    return cubes.reshape(len(pos), t.shape[2], m * m).transpose(2, 0, 1)


def build_group(t: np.ndarray, positions: Sequence[tuple[int, int]], m: int) -> CubicGroup:
    t = np.asarray(t, dtype=np.float64)
    positions = [(int(r), int(c)) for r, c in positions]
    if not positions:
        raise ValueError("a group needs at least one position")
    group = np.ascontiguousarray(_gather(t, positions, m))
    return CubicGroup(key_pos=positions[0], member_pos=positions, group=group)


def _pixel_indices(positions, m: int, cols: int) -> np.ndarray:
    pos = np.asarray(positions, dtype=np.intp).reshape(-1, 2)
    dr, dc = np.divmod(np.arange(m * m), m)
    return (pos[None, :, 0] + dr[:, None]) * cols + (pos[None, :, 1] + dc[:, None])


def accumulate(
    groups: Iterable[tuple[CubicGroup, np.ndarray]], dims: tuple[int, int, int]
) -> tuple[np.ndarray, np.ndarray]:
    """Sum of all approximated cubics covering each pixel, and the cover count.

    Groups are accumulated in the order given, so the result is reproducible.
    """
    rows, cols, bands = dims
    npix = rows * cols
    total = np.zeros((bands, npix))
    count = np.zeros(npix)
    for g, approx in groups:
        m = g.patch
        if approx.shape != g.group.shape:
            raise ValueError(f"approximation shape {approx.shape} != group shape {g.group.shape}")
        idx = _pixel_indices(g.member_pos, m, cols).ravel()
        vals = approx.reshape(-1, bands)
        for b in range(bands):
            total[b] += np.bincount(idx, weights=vals[:, b], minlength=npix)
        count += np.bincount(idx, minlength=npix)
    total = total.T.reshape(rows, cols, bands)
    count = np.broadcast_to(count.reshape(rows, cols, 1), dims).copy()
    return total, count


def aggregate(
    groups: Iterable[tuple[CubicGroup, np.ndarray]],
    dims: tuple[int, int, int],
    y: np.ndarray,
    eta: float,
) -> np.ndarray:
    """Closed-form image update ``(Y + eta*sum) / (1 + eta*count)``.

    Pixels covered by no cubic keep their value from ``y``.
    """
    total, count = accumulate(groups, dims)
    return (np.asarray(y, dtype=np.float64) + eta * total) / (1.0 + eta * count)


def parallel_map(fn: Callable, items: Sequence, threads: int | None = 1) -> list:
    """Order-preserving map; ``threads=1`` runs sequentially in the caller."""
    if threads is None or threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]
