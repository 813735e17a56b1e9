"""Fusion super-resolution: a low-resolution multiband image plus a
high-resolution image with few channels, joined by an ADMM loop with a WLRTR
prior.

The spatial subproblem ``(T^T T + beta) Q = T^T Y + beta X + J1`` has no
Fourier-diagonal form once decimation is involved, so it is solved by
conjugate gradients with the exact adjoint. The spectral subproblem shares
one small SPD matrix over all pixels and is solved by Cholesky.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.ndimage import map_coordinates

from .degradation import (
    Psf,
    SpectralResponse,
    downsample_spectral,
    psf_to_otf,
    spatial_adjoint,
    spatial_degrade,
)
from .denoise import DEFAULT_SOLVER_C, estimate_groups
from .grouping import GroupingConfig, accumulate
from .shrinkage import ShrinkParams
from .tensor_core import TensorShapeError, as_tensor3, nmode_product

__all__ = [
    "CgConvergenceError",
    "SuperresConfig",
    "SuperresResult",
    "conjugate_gradient",
    "spatial_step",
    "spectral_step",
    "bilinear_upsample",
    "superres",
]

log = logging.getLogger(__name__)


class CgConvergenceError(ArithmeticError):
    """Conjugate gradients hit the iteration cap before the tolerance."""

    def __init__(self, iters: int, residual: float):
        super().__init__(f"CG did not converge in {iters} iterations (relative residual {residual:.3e})")
        self.iters = iters
        self.residual = residual


@dataclass(frozen=True)
class SuperresConfig:
    scale: int = 8
    eta: float = 1e-5
    beta0: float = 1e-3
    gamma0: float = 1e-3
    delta: float = 1.5
    outer_iters: int = 15
    cg_tol: float = 1e-6
    cg_max_iters: int = 200
    sigma: float = 1.0  # threshold level of the prior step
    shrink: ShrinkParams = field(default_factory=lambda: ShrinkParams(c=DEFAULT_SOLVER_C))
    grouping: GroupingConfig = field(default_factory=GroupingConfig)

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        for name in ("eta", "beta0", "gamma0", "cg_tol", "sigma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.delta > 1:
            raise ValueError("delta must exceed 1")
        if self.outer_iters < 1 or self.cg_max_iters < 1:
            raise ValueError("iteration counts must be >= 1")


@dataclass
class SuperresResult:
    x: np.ndarray
    cg_iters: list[int]
    j_norms: list[tuple[float, float]]
    energies: list[float]


def conjugate_gradient(apply, b: np.ndarray, x0: np.ndarray, tol: float, max_iters: int) -> tuple[np.ndarray, int]:
    """Solve ``apply(x) = b`` for a symmetric positive definite operator.

    Stops once ``||b - apply(x)|| <= tol * ||b||``. Returns the solution and
    the iteration count.
    """
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0
    x = x0.copy()
    r = b - apply(x)
    p = r.copy()
    rr = float(np.vdot(r, r))
    for it in range(max_iters + 1):
        if np.sqrt(rr) <= tol * bnorm:
            return x, it
        if it == max_iters:
            break
        ap = apply(p)
        step = rr / float(np.vdot(p, ap))
        x += step * p
        r -= step * ap
        rr_new = float(np.vdot(r, r))
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise CgConvergenceError(max_iters, np.sqrt(rr) / bnorm)


def spatial_step(
    y, x, j1, psf: Psf, s: int, beta: float, tol: float = 1e-6, max_iters: int = 200
) -> tuple[np.ndarray, int]:
    """Solve ``(T^T T + beta I) Q = T^T Y + beta X + J1``; returns ``(Q, cg_iters)``.

    ``T`` blurs with ``psf`` (circular) and keeps every ``s``-th sample.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    x, j1 = as_tensor3(x, "x"), as_tensor3(j1, "j1")
    y = as_tensor3(y, "y")
    if y.shape[0] * s != x.shape[0] or y.shape[1] * s != x.shape[1] or y.shape[2] != x.shape[2]:
        raise TensorShapeError(f"low-res {y.shape} does not match {x.shape} at scale {s}")
    otf = psf_to_otf(psf, x.shape[:2])

    def apply(q):
        return spatial_adjoint(spatial_degrade(q, otf, s), otf, s) + beta * q

    rhs = spatial_adjoint(y, otf, s) + beta * x + j1
    return conjugate_gradient(apply, rhs, x, tol, max_iters)


def spectral_step(z, x, j2, sr: SpectralResponse, gamma: float) -> np.ndarray:
    """Solve ``G x_3 (P^T P + gamma I) = Z x_3 P^T + gamma X + J2`` for ``G``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    z, x, j2 = as_tensor3(z, "z"), as_tensor3(x, "x"), as_tensor3(j2, "j2")
    p = sr.p
    if z.shape[2] != p.shape[0] or x.shape[2] != p.shape[1] or z.shape[:2] != x.shape[:2]:
        raise TensorShapeError(f"guide {z.shape} / image {x.shape} do not fit response {p.shape}")
    rhs = nmode_product(z, p.T, 3) + gamma * x + j2
    fac = cho_factor(p.T @ p + gamma * np.eye(p.shape[1]))
    flat = rhs.reshape(-1, rhs.shape[2])
    return cho_solve(fac, flat.T).T.reshape(rhs.shape)


def bilinear_upsample(y, s: int) -> np.ndarray:
    """Separable linear interpolation; low-res sample ``i`` sits at ``s*i``.

    Positions past the last sample repeat the edge value.
    """
    y = as_tensor3(y, "y")
    rows, cols = y.shape[0] * s, y.shape[1] * s
    rr, cc = np.meshgrid(np.arange(rows) / s, np.arange(cols) / s, indexing="ij")
    out = np.empty((rows, cols, y.shape[2]))
    for b in range(y.shape[2]):
        out[:, :, b] = map_coordinates(y[:, :, b], [rr, cc], order=1, mode="nearest")
    return out


def superres(
    y,
    z,
    psf: Psf,
    sr: SpectralResponse,
    cfg: SuperresConfig | None = None,
    threads: int | None = 1,
    callback: Callable[[int, np.ndarray, float, float], None] | None = None,
) -> SuperresResult:
    """Fuse low-res ``y`` (rows/s, cols/s, B) with the guide ``z`` (rows, cols, b).

    Parameters
    ----------
    y : ndarray
        Spatially degraded image, ``T(X)``.
    z : ndarray
        Spectrally degraded image, ``X x_3 P``.
    psf, sr : Psf, SpectralResponse
        The known degradation operators.
    cfg : SuperresConfig, optional
    threads : int or None
    callback : callable, optional
        ``callback(iteration, x, beta, energy)``; energy is the sum of both
        data-fit terms at ``x``.
    """
    cfg = cfg or SuperresConfig()
    y, z = as_tensor3(y, "y"), as_tensor3(z, "z")
    s = cfg.scale
    dims = (y.shape[0] * s, y.shape[1] * s, y.shape[2])
    if z.shape[:2] != dims[:2]:
        raise TensorShapeError(f"guide is {z.shape[:2]}, expected {dims[:2]}")
    otf = psf_to_otf(psf, dims[:2])
    x = bilinear_upsample(y, s)
    j1 = np.zeros(dims)
    j2 = np.zeros(dims)
    beta, gamma = cfg.beta0, cfg.gamma0
    estimates = estimate_groups(x, cfg.sigma, cfg.grouping, cfg.shrink, threads)
    res = SuperresResult(x=x, cg_iters=[], j_norms=[], energies=[])
    for it in range(cfg.outer_iters):
        q, n_cg = spatial_step(y, x, j1, psf, s, beta, cfg.cg_tol, cfg.cg_max_iters)
        g = spectral_step(z, x, j2, sr, gamma)
        total, count = accumulate(((e.group, e.approx) for e in estimates), dims)
        w = 2.0 * cfg.eta
        x = (beta * (q - j1 / beta) + gamma * (g - j2 / gamma) + w * total) / (beta + gamma + w * count)
        estimates = estimate_groups(x, cfg.sigma, cfg.grouping, cfg.shrink, threads)
        j1 = j1 + beta * (x - q)
        j2 = j2 + gamma * (x - g)
        energy = 0.5 * float(np.sum((y - spatial_degrade(x, otf, s)) ** 2)) + 0.5 * float(
            np.sum((z - downsample_spectral(x, sr)) ** 2)
        )
        res.cg_iters.append(n_cg)
        res.j_norms.append((float(np.linalg.norm(j1)), float(np.linalg.norm(j2))))
        res.energies.append(energy)
        log.debug("superres iter %d beta=%.4g cg=%d fit=%.6g", it + 1, beta, n_cg, energy)
        if callback is not None:
            callback(it + 1, x, beta, energy)
        beta *= cfg.delta
        gamma *= cfg.delta
    res.x = x
    return res
