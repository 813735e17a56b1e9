"""Weighted low-rank tensor recovery for multiband image restoration.

Denoising, destriping, deblurring and fusion super-resolution share one
prior: similar cubics are grouped into third-order tensors and each group is
shrunk in its HOSVD basis with coefficient-dependent thresholds.
"""

__version__ = "0.1.0"

from .deblur import DeblurConfig, deblur, deconv_step
from .degradation import (
    DegradationSpec,
    KernelSpec,
    Psf,
    SpectralResponse,
    add_gaussian_noise,
    add_stripes,
    convolve,
    default_response,
    downsample_spatial,
    downsample_spectral,
    make_kernel,
)
from .denoise import DenoiseConfig, denoise
from .destripe import DestripeConfig, destripe
from .grouping import GroupingConfig
from .hosvd import hosvd, reconstruct
from .quality import assess, ergas, psnr, sam, ssim
from .shrinkage import ShrinkParams, wlrtr_approx
from .superres import SuperresConfig, superres
from .synthetic import material_scene
from .tensor_core import fold, nmode_product, unfold
from .tensor_io import load_tensor, save_tensor

__all__ = [
    "DeblurConfig", "deblur", "deconv_step", "DegradationSpec", "KernelSpec", "Psf", "SpectralResponse",
    "add_gaussian_noise", "add_stripes", "convolve", "default_response", "downsample_spatial",
    "downsample_spectral", "make_kernel", "DenoiseConfig", "denoise", "DestripeConfig", "destripe",
    "GroupingConfig", "hosvd", "reconstruct", "assess", "ergas", "psnr", "sam", "ssim", "ShrinkParams",
    "wlrtr_approx", "SuperresConfig", "superres", "material_scene", "fold", "nmode_product", "unfold",
    "load_tensor", "save_tensor",
]
