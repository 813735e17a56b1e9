"""Synthetic multiband scenes for tests, demos and the ``degrade`` command."""

from __future__ import annotations

import numpy as np


def material_scene(rows: int = 64, cols: int = 64, bands: int = 8, seed: int = 0) -> np.ndarray:
    """Four materials with smooth spectra on piecewise-constant regions, under smooth shading.

    Values lie roughly in ``[10, 230]`` (8-bit scale). The scene is low rank
    along the spectral mode (four spectra) and strongly self-similar.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:rows, 0:cols] / float(rows)
    wl = np.linspace(0.0, 1.0, bands)
    freq_phase = rng.uniform(0.2, 1.2, size=(4, 2))
    spectra = np.stack([0.5 + 0.4 * np.sin(2 * np.pi * (f * wl + p)) for f, p in freq_phase])
    labels = (xx > 0.3).astype(int) + 2 * ((yy + 0.3 * xx) > 0.55).astype(int)
    labels[(xx - 0.65) ** 2 + (yy - 0.3) ** 2 < 0.03] = 3
    shade = 0.75 + 0.25 * np.cos(3 * xx + 2 * yy)
    return 220.0 * shade[..., None] * spectra[labels] + 10.0


def low_rank_scene(rows: int = 48, cols: int = 48, bands: int = 8) -> np.ndarray:
    """Sum of two smooth separable outer products: multilinear rank (2, 2, 2).

    Values lie roughly in ``[15, 250]``.
    """
    r = np.linspace(0.0, 1.0, rows)
    c = np.linspace(0.0, 1.0, cols)
    b = np.linspace(0.0, 1.0, bands)
    t = 60.0 * np.einsum("i,j,k->ijk", 1 + 0.5 * np.sin(2 * np.pi * r), 1 + 0.5 * np.cos(3 * c), 1 + 0.3 * b)
    t += 30.0 * np.einsum("i,j,k->ijk", np.cos(4 * r) + 1.2, np.sin(5 * c) + 1.2, 1 - 0.5 * b)
    return t
