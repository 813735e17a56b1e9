"""Full-reference quality indices: PSNR, SSIM, ERGAS and SAM (radians)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from skimage.metrics import structural_similarity

from .tensor_core import TensorShapeError, as_tensor3

__all__ = ["QualityReport", "psnr", "ssim", "ergas", "sam", "assess", "PSNR_CAP"]

log = logging.getLogger(__name__)

PSNR_CAP = 99.0
PEAK = 255.0


@dataclass(frozen=True)
class QualityReport:
    psnr: float
    ssim: float
    ergas: float
    sam: float
    per_band_psnr: list[float]

    def lines(self) -> list[str]:
        return [
            f"psnr {self.psnr:.4f}",
            f"ssim {self.ssim:.4f}",
            f"ergas {self.ergas:.4f}",
            f"sam {self.sam:.4f}",
        ]


def _pair(x, ref):
    x, ref = as_tensor3(x, "x"), as_tensor3(ref, "ref")
    if x.shape != ref.shape:
        raise TensorShapeError(f"shape mismatch: {x.shape} vs {ref.shape}")
    return x, ref


def psnr(x, ref) -> tuple[float, list[float]]:
    """Band-averaged PSNR on the 8-bit scale; exact bands are capped at 99 dB."""
    x, ref = _pair(x, ref)
    mse = np.mean((x - ref) ** 2, axis=(0, 1))
    bands = []
    for e in mse:
        bands.append(PSNR_CAP if e == 0 else min(PSNR_CAP, 10.0 * math.log10(PEAK**2 / e)))
    return float(np.mean(bands)), bands


def ssim(x, ref) -> float:
    """Band-averaged SSIM: 11x11 Gaussian window (std 1.5), K1=0.01, K2=0.03, L=255."""
    x, ref = _pair(x, ref)
    vals = [
        structural_similarity(
            x[:, :, b],
            ref[:, :, b],
            data_range=PEAK,
            gaussian_weights=True,
            sigma=1.5,
            use_sample_covariance=False,
            K1=0.01,
            K2=0.03,
        )
        for b in range(x.shape[2])
    ]
    return float(np.mean(vals))


def ergas(x, ref, s: int = 1) -> float:
    """``(100 / s) * sqrt(mean_b(MSE_b / mean_b(ref)^2))``; zero-mean bands are skipped."""
    if s < 1:
        raise ValueError("scale must be >= 1")
    x, ref = _pair(x, ref)
    mse = np.mean((x - ref) ** 2, axis=(0, 1))
    mu = np.mean(ref, axis=(0, 1))
    keep = mu != 0
    if not np.all(keep):
        log.warning("ERGAS: skipping %d band(s) with zero reference mean", int(np.sum(~keep)))
    if not np.any(keep):
        return 0.0
    return float(100.0 / s * np.sqrt(np.mean(mse[keep] / mu[keep] ** 2)))


def sam(x, ref) -> float:
    """Mean spectral angle in radians over pixels where both spectra are nonzero."""
    x, ref = _pair(x, ref)
    xv = x.reshape(-1, x.shape[2])
    rv = ref.reshape(-1, ref.shape[2])
    nx = np.linalg.norm(xv, axis=1)
    nr = np.linalg.norm(rv, axis=1)
    keep = (nx > 0) & (nr > 0)
    if not np.any(keep):
        return 0.0
    # half-angle form: exact 0 for identical spectra, unlike arccos near 1
    a = xv[keep] / nx[keep, None]
    b = rv[keep] / nr[keep, None]
    ang = 2.0 * np.arctan2(np.linalg.norm(a - b, axis=1), np.linalg.norm(a + b, axis=1))
    return float(np.mean(ang))


def assess(x, ref, s: int = 1) -> QualityReport:
    p, bands = psnr(x, ref)
    return QualityReport(psnr=p, ssim=ssim(x, ref), ergas=ergas(x, ref, s), sam=sam(x, ref), per_band_psnr=bands)
