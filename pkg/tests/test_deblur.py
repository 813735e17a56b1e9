import numpy as np
import pytest

from oracles import circulant_blur_matrix
from wlrtr.deblur import DeblurConfig, SingularSystemError, deblur, deconv_objective, deconv_step
from wlrtr.degradation import KernelSpec, Psf, convolve, make_kernel, psf_to_otf
from wlrtr.grouping import GroupingConfig

DELTA = make_kernel(KernelSpec("delta"))


def test_config_validation():
    with pytest.raises(ValueError):
        DeblurConfig(delta=1.0)
    with pytest.raises(ValueError):
        DeblurConfig(alpha0=0)
    with pytest.raises(ValueError):
        DeblurConfig(eta=0)
    c = DeblurConfig()
    assert (c.eta, c.alpha0, c.delta, c.outer_iters) == (1e-8, 1e-3, 1.5, 10)


def test_delta_kernel_convex_combination(rng):
    y, x = rng.standard_normal((2, 6, 5, 3))
    a = deconv_step(y, x, np.zeros_like(y), DELTA, 0.7)
    assert np.allclose(a, (y + 0.7 * x) / 1.7, atol=1e-12)


def test_large_alpha_limit(rng):
    y, x, j = rng.standard_normal((3, 8, 8, 2))
    psf = make_kernel(KernelSpec("gaussian", 3, 1.0))
    assert np.max(np.abs(deconv_step(y, x, j, psf, 1e9) - x)) < 1e-6


def test_dense_circulant_oracle(rng):
    y, x, j = rng.standard_normal((3, 8, 8, 2))
    psf = Psf.normalized(rng.uniform(size=(3, 4)))
    alpha = 0.05
    H = circulant_blur_matrix(psf.kernel, 8, 8)
    a = deconv_step(y, x, j, psf, alpha)
    for b in range(2):
        rhs = H.T @ y[:, :, b].ravel() + alpha * x[:, :, b].ravel() + j[:, :, b].ravel()
        ref = np.linalg.solve(H.T @ H + alpha * np.eye(64), rhs)
        assert np.max(np.abs(a[:, :, b].ravel() - ref)) < 1e-8


def test_matches_3d_transform(rng):
    y, x, j = rng.standard_normal((3, 8, 6, 4))
    psf = Psf.normalized(rng.uniform(size=(3, 3)))
    alpha = 0.2
    # 3-D kernel: the 2-D kernel placed in band 0, so no mixing across bands
    h2 = psf_to_otf(psf, (8, 6))
    H = np.repeat(h2[:, :, None], 4, axis=2)
    F = np.fft.fftn
    a3 = np.real(np.fft.ifftn((np.conj(H) * F(y) + alpha * F(x) + F(j)) / (np.abs(H) ** 2 + alpha)))
    assert np.max(np.abs(a3 - deconv_step(y, x, j, psf, alpha))) < 1e-8


def test_optimality_spot_check(rng):
    y, x, j = rng.standard_normal((3, 10, 10, 2))
    psf = make_kernel(KernelSpec("gaussian", 5, 1.5))
    alpha = 0.3
    a = deconv_step(y, x, j, psf, alpha)
    best = deconv_objective(a, y, x, j, psf, alpha)
    assert best <= deconv_objective(x, y, x, j, psf, alpha)
    assert best <= deconv_objective(y, y, x, j, psf, alpha)


def test_singular_system():
    psf = make_kernel(KernelSpec("uniform", 2))  # transfer function vanishes at Nyquist
    z = np.zeros((4, 4, 1))
    with pytest.raises(SingularSystemError):
        deconv_step(z, z, z, psf, 0.0)
    with pytest.raises(ValueError):
        deconv_step(z, z, z, psf, -1.0)


def test_delta_noiseless_returns_input(rng):
    y = rng.uniform(0, 255, (24, 24, 3))
    cfg = DeblurConfig(grouping=GroupingConfig(patch=5, k=20, window=6, stride=3))
    res = deblur(y, DELTA, 0.0, cfg)
    assert np.max(np.abs(res.x - y)) < 1e-4
    assert all(np.isfinite(res.j_norms))


@pytest.mark.slow
def test_multipliers_bounded_and_fit_improves(scene):
    t = scene[:32, :32, :4]
    psf = make_kernel(KernelSpec("gaussian", 8, 3.0))
    y = convolve(t, psf)
    cfg = DeblurConfig(grouping=GroupingConfig(patch=5, k=30, window=8, stride=3))
    res = deblur(y, psf, 0.0, cfg)
    assert np.all(np.isfinite(res.j_norms)) and max(res.j_norms) < 1e3
    assert res.energies[-1] < res.energies[0]
    assert np.allclose(res.alphas, [1e-3 * 1.5**k for k in range(10)])
