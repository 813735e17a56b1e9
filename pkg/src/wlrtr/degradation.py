"""Seeded simulators for noisy, striped, blurred and downsampled images.

Random numbers come from NumPy's ``default_rng`` (the PCG64 bit generator),
so every simulator is reproducible for a given seed on any platform that
ships the same NumPy.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .tensor_core import as_tensor3, nmode_product

__all__ = [
    "Psf",
    "KernelSpec",
    "DegradationSpec",
    "make_kernel",
    "psf_to_otf",
    "add_gaussian_noise",
    "add_stripes",
    "convolve",
    "spatial_degrade",
    "spatial_adjoint",
    "downsample_spatial",
    "downsample_spectral",
    "default_response",
    "SpectralResponse",
]


@dataclass(frozen=True)
class Psf:
    """Spatial point spread function shared by all bands.

    The kernel centre is at index ``(h // 2, w // 2)``.
    """

    kernel: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=np.float64)
        if k.ndim != 2 or min(k.shape) < 1:
            raise ValueError(f"kernel must be a non-empty 2-D array, got {k.shape}")
        if np.any(k < 0):
            raise ValueError("kernel entries must be nonnegative")
        if abs(k.sum() - 1.0) > 1e-10:
            raise ValueError(f"kernel must sum to 1, sums to {k.sum():.12g}")
        object.__setattr__(self, "kernel", k)

    @classmethod
    def normalized(cls, kernel) -> "Psf":
        k = np.asarray(kernel, dtype=np.float64)
        return cls(k / k.sum())


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "delta"  # gaussian | uniform | delta
    size: int = 1
    std: float = 1.0

    def __str__(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian:{self.size}:{self.std:g}"
        if self.kind == "uniform":
            return f"uniform:{self.size}"
        return "delta"

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Parse ``gaussian:SIZE:STD``, ``uniform:SIZE`` or ``delta``."""
        parts = text.strip().split(":")
        kind = parts[0].lower()
        try:
            if kind == "gaussian" and len(parts) == 3:
                return cls("gaussian", int(parts[1]), float(parts[2]))
            if kind == "uniform" and len(parts) == 2:
                return cls("uniform", int(parts[1]))
            if kind == "delta" and len(parts) == 1:
                return cls("delta")
        except ValueError:
            pass
        raise ValueError(f"bad kernel spec {text!r}; use gaussian:SIZE:STD, uniform:SIZE or delta")


@dataclass(frozen=True)
class DegradationSpec:
    sigma: float = 0.0
    stripe_fraction: float = 0.0
    stripe_amp: float = 50.0
    stripe_mode: str = "additive"
    kernel: KernelSpec = KernelSpec()
    scale: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 <= self.stripe_fraction <= 1:
            raise ValueError("stripe_fraction must lie in [0, 1]")
        if self.stripe_mode not in ("additive", "multiplicative"):
            raise ValueError(f"unknown stripe mode {self.stripe_mode!r}")
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def as_text(self) -> str:
        d = asdict(self)
        d["kernel"] = str(self.kernel)
        return "".join(f"{k}={v}\n" for k, v in d.items())


def make_kernel(spec: KernelSpec) -> Psf:
    if spec.kind == "delta":
        return Psf(np.ones((1, 1)))
    if spec.size < 1:
        raise ValueError("kernel size must be >= 1")
    if spec.kind == "uniform":
        return Psf(np.full((spec.size, spec.size), 1.0 / spec.size**2))
    if spec.kind == "gaussian":
        if spec.std <= 0:
            raise ValueError("gaussian std must be positive")
        ax = np.arange(spec.size) - (spec.size - 1) / 2.0
        g = np.exp(-(ax**2) / (2.0 * spec.std**2))
        k = np.outer(g, g)
        return Psf(k / k.sum())
    raise ValueError(f"unknown kernel kind {spec.kind!r}")


def psf_to_otf(psf: Psf, shape: tuple[int, int]) -> np.ndarray:
    """Transfer function of ``psf`` on a ``shape`` grid with circular boundaries.

    The kernel is zero-padded and rolled so its centre sits at the origin, so a
    delta kernel has an all-ones transfer function.
    """
    k = psf.kernel
    if k.shape[0] > shape[0] or k.shape[1] > shape[1]:
        raise ValueError(f"kernel {k.shape} larger than image {shape}")
    pad = np.zeros(shape)
    pad[: k.shape[0], : k.shape[1]] = k
    pad = np.roll(pad, (-(k.shape[0] // 2), -(k.shape[1] // 2)), axis=(0, 1))
    return np.fft.fft2(pad)


def _apply_otf(t: np.ndarray, otf: np.ndarray) -> np.ndarray:
    return np.real(np.fft.ifft2(np.fft.fft2(t, axes=(0, 1)) * otf[:, :, None], axes=(0, 1)))


def convolve(t, psf: Psf) -> np.ndarray:
    """Per-band 2-D circular convolution."""
    t = as_tensor3(t)
    return _apply_otf(t, psf_to_otf(psf, t.shape[:2]))


def _check_scale(shape, s: int):
    if s < 1:
        raise ValueError("scale must be >= 1")
    if shape[0] % s or shape[1] % s:
        raise ValueError(f"image size {shape[:2]} not divisible by scale {s}")


def spatial_degrade(t: np.ndarray, otf: np.ndarray, s: int) -> np.ndarray:
    """Blur with a precomputed transfer function, then keep every ``s``-th sample."""
    return _apply_otf(t, otf)[::s, ::s]


def spatial_adjoint(y: np.ndarray, otf: np.ndarray, s: int) -> np.ndarray:
    """Adjoint of :func:`spatial_degrade`: zero-insertion upsampling then correlation."""
    up = np.zeros((y.shape[0] * s, y.shape[1] * s, y.shape[2]))
    up[::s, ::s] = y
    return _apply_otf(up, np.conj(otf))


def downsample_spatial(t, psf: Psf, s: int) -> np.ndarray:
    t = as_tensor3(t)
    _check_scale(t.shape, s)
    return spatial_degrade(t, psf_to_otf(psf, t.shape[:2]), s)


@dataclass(frozen=True)
class SpectralResponse:
    """``b x B`` response matrix with nonnegative rows summing to one."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("response must be a 2-D matrix")
        if np.any(p < 0):
            raise ValueError("response entries must be nonnegative")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-8):
            raise ValueError("every response row must sum to 1")
        if p.shape[0] > p.shape[1]:
            raise ValueError(f"response maps {p.shape[1]} bands to more channels ({p.shape[0]})")
        object.__setattr__(self, "p", p)


def default_response(bands: int, channels: int = 3) -> SpectralResponse:
    """Split the bands into ``channels`` contiguous groups with uniform weights."""
    if channels > bands:
        raise ValueError("cannot have more channels than bands")
    p = np.zeros((channels, bands))
    for i, grp in enumerate(np.array_split(np.arange(bands), channels)):
        p[i, grp] = 1.0 / grp.size
    return SpectralResponse(p)


def downsample_spectral(t, sr: SpectralResponse) -> np.ndarray:
    return nmode_product(as_tensor3(t), sr.p, 3)


def add_gaussian_noise(t, sigma: float, seed: int) -> np.ndarray:
    """Add i.i.d. ``N(0, sigma^2)`` noise; no clipping."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    t = as_tensor3(t)
    if sigma == 0:
        return t.copy()
    rng = np.random.default_rng(seed)
    return t + sigma * rng.standard_normal(t.shape)


def add_stripes(t, spec: DegradationSpec) -> np.ndarray:
    """Add vertical stripes on a random subset of columns, drawn per band.

    Each band gets ``floor(fraction * cols)`` distinct striped columns. Additive
    stripes shift a column by a constant in ``[-amp, amp]``; multiplicative
    stripes scale it by a factor in ``[1 - amp/255, 1 + amp/255]``.
    """
    t = as_tensor3(t)
    out = t.copy()
    rows, cols, bands = t.shape
    n = int(np.floor(spec.stripe_fraction * cols))
    if n == 0:
        return out
    # separate stream from the noise generator so both can share one seed
    rng = np.random.default_rng([spec.seed, 1])
    for b in range(bands):
        idx = rng.choice(cols, size=n, replace=False)
        if spec.stripe_mode == "additive":
            out[:, idx, b] += rng.uniform(-spec.stripe_amp, spec.stripe_amp, size=n)
        else:
            a = spec.stripe_amp / 255.0
            out[:, idx, b] *= rng.uniform(1 - a, 1 + a, size=n)
    return out
