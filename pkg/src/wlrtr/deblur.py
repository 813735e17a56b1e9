"""Non-blind deblurring by ADMM with a WLRTR prior on the split variable.

Each outer iteration solves the deconvolution subproblem exactly in the
Fourier domain, rebuilds the image from the data estimate and the shrunk
groups, re-shrinks the groups and then updates the multiplier and penalty.
Boundaries are circular.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .degradation import Psf, convolve, psf_to_otf
from .denoise import DEFAULT_SOLVER_C, estimate_groups
from .grouping import GroupingConfig, accumulate
from .shrinkage import ShrinkParams
from .tensor_core import TensorShapeError, as_tensor3

__all__ = [
    "SingularSystemError",
    "DeblurConfig",
    "DeblurResult",
    "convolve",
    "deconv_step",
    "deconv_objective",
    "deblur",
]

log = logging.getLogger(__name__)


class SingularSystemError(ArithmeticError):
    """The frequency-domain system has a zero denominator."""


@dataclass(frozen=True)
class DeblurConfig:
    eta: float = 1e-8
    alpha0: float = 1e-3
    delta: float = 1.5
    outer_iters: int = 10
    shrink: ShrinkParams = field(default_factory=lambda: ShrinkParams(c=DEFAULT_SOLVER_C))
    grouping: GroupingConfig = field(default_factory=GroupingConfig)

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.alpha0 > 0:
            raise ValueError("alpha0 must be positive")
        if not self.delta > 1:
            raise ValueError("delta must exceed 1")
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be >= 1")


@dataclass
class DeblurResult:
    x: np.ndarray
    alphas: list[float]
    j_norms: list[float]
    energies: list[float]


def deconv_step(y, x, j, psf: Psf, alpha: float) -> np.ndarray:
    """Minimize ``0.5||y - h*a||^2 + alpha/2 ||a - x - j/alpha||^2`` over ``a``.

    Solved per band as ``(conj(H) Y + alpha X + J) / (|H|^2 + alpha)`` in the
    Fourier domain.

    Raises
    ------
    SingularSystemError
        If ``alpha`` is zero and the transfer function vanishes somewhere.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    y, x, j = as_tensor3(y, "y"), as_tensor3(x, "x"), as_tensor3(j, "j")
    if not y.shape == x.shape == j.shape:
        raise TensorShapeError(f"shape mismatch: {y.shape}, {x.shape}, {j.shape}")
    otf = psf_to_otf(psf, y.shape[:2])
    denom = np.abs(otf) ** 2 + alpha
    if np.min(denom) == 0:
        raise SingularSystemError("alpha = 0 and the transfer function has zeros")
    f = lambda t: np.fft.fft2(t, axes=(0, 1))
    num = np.conj(otf)[:, :, None] * f(y) + alpha * f(x) + f(j)
    a = np.fft.ifft2(num / denom[:, :, None], axes=(0, 1))
    return np.ascontiguousarray(np.real(a))


def deconv_objective(a, y, x, j, psf: Psf, alpha: float) -> float:
    """Objective minimized by :func:`deconv_step`, up to a constant."""
    r = y - convolve(a, psf)
    d = a - x - j / alpha
    return 0.5 * float(np.sum(r * r)) + 0.5 * alpha * float(np.sum(d * d))


def deblur(
    y,
    psf: Psf,
    sigma: float,
    cfg: DeblurConfig | None = None,
    threads: int | None = 1,
    callback: Callable[[int, np.ndarray, float, float], None] | None = None,
) -> DeblurResult:
    """Restore ``y = h * x + n`` for a known, band-shared kernel ``h``.

    Parameters
    ----------
    y : ndarray, shape (rows, cols, bands)
    psf : Psf
    sigma : float
        Noise level; ``0`` uses a floor of 1 for the prior step.
    cfg : DeblurConfig, optional
    threads : int or None
        Workers for the group stage; results do not depend on it.
    callback : callable, optional
        ``callback(iteration, x, alpha, energy)`` after each pass.

    Returns
    -------
    DeblurResult
        ``x`` plus per-iteration penalty, multiplier norm and
        ``0.5||y - h*x||^2`` values.
    """
    cfg = cfg or DeblurConfig()
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    y = as_tensor3(y, "y")
    sig = max(float(sigma), 1.0)
    x = y.copy()
    j = np.zeros_like(y)
    alpha = cfg.alpha0
    estimates = estimate_groups(x, sig, cfg.grouping, cfg.shrink, threads)
    res = DeblurResult(x=x, alphas=[], j_norms=[], energies=[])
    for it in range(cfg.outer_iters):
        a = deconv_step(y, x, j, psf, alpha)
        total, count = accumulate(((e.group, e.approx) for e in estimates), y.shape)
        w = 2.0 * cfg.eta
        x = (alpha * (a - j / alpha) + w * total) / (alpha + w * count)
        estimates = estimate_groups(x, sig, cfg.grouping, cfg.shrink, threads)
        j = j + alpha * (x - a)
        r = y - convolve(x, psf)
        energy = 0.5 * float(np.sum(r * r))
        res.alphas.append(alpha)
        res.j_norms.append(float(np.linalg.norm(j)))
        res.energies.append(energy)
        log.debug("deblur iter %d alpha=%.4g fidelity=%.6g", it + 1, alpha, energy)
        if not np.isfinite(res.j_norms[-1]):
            raise FloatingPointError("multiplier diverged")
        if callback is not None:
            callback(it + 1, x, alpha, energy)
        alpha *= cfg.delta
    res.x = x
    return res
