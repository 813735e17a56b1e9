"""Mixed random and stripe noise removal (WLRTR-RPCA).

The observation is split as ``Y = X + E + N``: ``X`` carries the weighted
low-rank tensor prior and the stripe component ``E`` an l2,1,1 penalty, so that
whole mode-1 fibers (image columns within one band) are switched on or off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .denoise import DenoiseConfig, denoise_step
from .shrinkage import ShrinkParams
from .tensor_core import as_tensor3, fold, l211_norm, unfold

__all__ = [
    "DestripeConfig",
    "DestripeResult",
    "shrink_l21_columns",
    "update_stripes",
    "destripe",
    "default_rho",
    "DESTRIPE_C",
]

# A stripe is a rank-one pattern inside each group, so it survives a mild
# shrinkage almost untouched. The image update therefore uses a much larger
# threshold constant than plain denoising; the fine texture it smooths away
# is small per column and stays below rho.
DESTRIPE_C = 2000.0


def default_rho(sigma: float, rows: int) -> float:
    """Column-norm threshold: five times the norm of a pure-noise column."""
    return 5.0 * sigma * math.sqrt(rows)


def _default_denoise() -> DenoiseConfig:
    return DenoiseConfig(shrink=ShrinkParams(c=DESTRIPE_C))


@dataclass(frozen=True)
class DestripeConfig:
    denoise: DenoiseConfig = field(default_factory=_default_denoise)
    rho: float | None = None  # None -> default_rho(sigma, rows)
    outer_iters: int = 4

    def __post_init__(self):
        if self.rho is not None and not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be >= 1")


@dataclass
class DestripeResult:
    x: np.ndarray
    e: np.ndarray
    rho: float
    sigmas: list[float]
    energies: list[float]


def shrink_l21_columns(m: np.ndarray, mu: float) -> np.ndarray:
    """Block soft threshold: scale column ``q`` by ``(|q| - mu)/|q|``, or zero it."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=0)
    scale = np.zeros_like(norms)
    alive = norms > mu
    scale[alive] = (norms[alive] - mu) / norms[alive]
    if mu == 0:
        scale[:] = 1.0
    return m * scale


def update_stripes(y: np.ndarray, x: np.ndarray, rho: float) -> np.ndarray:
    """Stripe update on the mode-1 unfolding of ``y - x``, folded back."""
    r = np.asarray(y, dtype=np.float64) - np.asarray(x, dtype=np.float64)
    return fold(shrink_l21_columns(unfold(r, 1), rho), 1, r.shape)


def destripe(
    y,
    sigma: float,
    cfg: DestripeConfig | None = None,
    threads: int | None = 1,
    horizontal: bool = False,
    callback: Callable[[int, np.ndarray, float, float], None] | None = None,
) -> DestripeResult:
    """Alternate the stripe update with one WLRTR denoising pass on ``y - e``.

    The noise level stays at ``sigma`` across iterations: the residual
    ``y - e - x`` also holds smoothed texture, so re-estimating from it would
    understate the noise. Groups are matched on the previous estimate ``x``.

    Stripes are assumed vertical; ``horizontal=True`` swaps rows and columns
    on the way in and out.
    """
    cfg = cfg or DestripeConfig()
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    y = as_tensor3(y, "y")
    if horizontal:
        y = y.transpose(1, 0, 2)
    # a zero noise level would zero every shrinkage threshold; keep a floor
    sig = max(float(sigma), 1.0)
    rho = cfg.rho if cfg.rho is not None else default_rho(sig, y.shape[0])
    x = y.copy()
    e = np.zeros_like(y)
    sigmas, energies = [], []
    for it in range(cfg.outer_iters):
        e = update_stripes(y, x, rho)
        x, energy = denoise_step(y - e, x, sig, cfg.denoise, threads)
        # the denoise energy already holds 0.5*||y - e - x||^2; add the stripe penalty
        energy += rho * l211_norm(e)
        sigmas.append(sig)
        energies.append(energy)
        if callback is not None:
            callback(it + 1, x, sig, energy)
    if horizontal:
        x, e = x.transpose(1, 0, 2), e.transpose(1, 0, 2)
    return DestripeResult(x=np.ascontiguousarray(x), e=np.ascontiguousarray(e), rho=rho, sigmas=sigmas, energies=energies)
