"""Weighted low-rank tensor approximation of a single group.

The group is expressed in its own HOSVD basis and every core coefficient is
soft-thresholded with its own threshold ``w * sigma**2 / 2``, where the weight
``w = c / (|s| + eps)`` shrinks large coefficients less than small ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hosvd import HosvdFactors, hosvd, matrix_svd, reconstruct

__all__ = [
    "ShrinkParams",
    "compute_weights",
    "soft_threshold",
    "wlrtr_approx",
    "uniform_approx",
    "matrix_wnn_shrink",
    "core_objective",
]


@dataclass(frozen=True)
class ShrinkParams:
    c: float = 0.04
    eps: float = 1e-6
    sigma: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")

    def with_sigma(self, sigma: float) -> "ShrinkParams":
        return ShrinkParams(c=self.c, eps=self.eps, sigma=float(sigma))


def compute_weights(core: np.ndarray, p: ShrinkParams) -> np.ndarray:
    """Per-coefficient weights ``c / (|core| + eps)``."""
    return p.c / (np.abs(core) + p.eps)


def soft_threshold(x: np.ndarray, thresh) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def wlrtr_approx(group: np.ndarray, p: ShrinkParams) -> tuple[np.ndarray, np.ndarray, HosvdFactors]:
    """Weighted shrinkage of ``group`` in its HOSVD basis.

    Returns
    -------
    approx : ndarray
        The group rebuilt from the shrunk core.
    core_hat : ndarray
        Shrunk core coefficients.
    factors : HosvdFactors
        HOSVD of the input group (its ``core`` is the unshrunk one).
    """
    factors = hosvd(group)
    if p.sigma == 0:
        core_hat = factors.core.copy()
    else:
        w = compute_weights(factors.core, p)
        core_hat = soft_threshold(factors.core, w * (p.sigma**2 / 2.0))
    return reconstruct(factors, core_hat), core_hat, factors


def uniform_approx(group: np.ndarray, thresh: float) -> tuple[np.ndarray, np.ndarray, HosvdFactors]:
    """Same as :func:`wlrtr_approx` but with one threshold for every coefficient."""
    factors = hosvd(group)
    core_hat = soft_threshold(factors.core, thresh)
    return reconstruct(factors, core_hat), core_hat, factors


def matrix_wnn_shrink(m: np.ndarray, lam: float) -> np.ndarray:
    """Singular value soft-thresholding ``U max(S - lam, 0) V^T``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    svd = matrix_svd(m)
    s = np.maximum(svd.singular_values - lam, 0.0)
    return (svd.u * s) @ svd.v.T


def core_objective(core_tilde, core_bar, weights, sigma: float) -> float:
    """``||core_tilde - core_bar||^2 + sigma^2 * ||weights o core_bar||_1``.

    This is the group objective once the factors are fixed to the HOSVD basis
    of the observation.
    """
    diff = np.asarray(core_tilde) - np.asarray(core_bar)
    return float(np.sum(diff * diff) + sigma**2 * np.sum(np.abs(weights * core_bar)))
