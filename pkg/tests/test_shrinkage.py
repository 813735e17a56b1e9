import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import scalar_prox_oracle
from wlrtr.hosvd import hosvd, reconstruct
from wlrtr.shrinkage import (
    ShrinkParams,
    compute_weights,
    core_objective,
    matrix_wnn_shrink,
    soft_threshold,
    uniform_approx,
    wlrtr_approx,
)
from wlrtr.tensor_core import fro_norm


def test_params_validation():
    with pytest.raises(ValueError):
        ShrinkParams(c=0)
    with pytest.raises(ValueError):
        ShrinkParams(eps=0)
    with pytest.raises(ValueError):
        ShrinkParams(sigma=-1)
    p = ShrinkParams()
    assert (p.c, p.eps, p.sigma) == (0.04, 1e-6, 0.0)
    assert p.with_sigma(3).sigma == 3.0


def test_weight_examples():
    p = ShrinkParams()
    assert compute_weights(np.zeros((1, 1, 1)), p)[0, 0, 0] == pytest.approx(4e4)
    w = compute_weights(np.array([1.0, 10.0, 1e6, -10.0]).reshape(4, 1, 1), p).ravel()
    assert w[0] > w[1] > w[2] > 0
    assert w[2] < 1e-7
    assert w[1] == w[3]


def test_sigma_zero_is_exact_copy(rng):
    g = rng.standard_normal((9, 5, 4))
    approx, core_hat, f = wlrtr_approx(g, ShrinkParams(sigma=0.0))
    assert np.array_equal(core_hat, f.core)
    assert fro_norm(approx - g) < 1e-10 * fro_norm(g)


@pytest.mark.parametrize("s", [5.0, -3.0, 0.1, 0.0])
def test_scalar_group(s):
    p = ShrinkParams(c=2.0, sigma=1.5)
    approx, core_hat, _ = wlrtr_approx(np.full((1, 1, 1), s), p)
    t = p.c * p.sigma**2 / (2 * (abs(s) + p.eps))
    expect = np.sign(s) * max(abs(s) - t, 0.0)
    assert core_hat[0, 0, 0] == pytest.approx(expect, abs=1e-12)
    assert approx[0, 0, 0] == pytest.approx(expect, abs=1e-12)


def test_random_group_matches_prox_oracle(rng):
    g = rng.standard_normal((4, 4, 3)) * 3
    p = ShrinkParams(c=1.0, sigma=1.2)
    _, core_hat, f = wlrtr_approx(g, p)
    w = compute_weights(f.core, p)
    for idx in np.ndindex(core_hat.shape):
        ref = scalar_prox_oracle(f.core[idx], w[idx], p.sigma)
        assert abs(core_hat[idx] - ref) < 1e-6


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 5.0), st.floats(0.1, 20.0))
@settings(max_examples=40, deadline=None)
def test_shrink_properties(seed, c, sigma):
    g = np.random.default_rng(seed).standard_normal((6, 4, 3)) * 10
    p = ShrinkParams(c=c, sigma=sigma)
    approx, core_hat, f = wlrtr_approx(g, p)
    assert np.all(np.abs(core_hat) <= np.abs(f.core) + 1e-15)
    assert fro_norm(approx) <= fro_norm(g) * (1 + 1e-12)
    # zero entries stay zero or keep sign
    assert np.all(core_hat * f.core >= 0)


def test_effective_threshold_strictly_decreasing():
    p = ShrinkParams(c=1.0, sigma=2.0)
    mags = np.array([0.0, 0.5, 1.0, 2.0, 10.0]).reshape(5, 1, 1)
    th = compute_weights(mags, p) * p.sigma**2 / 2
    assert np.all(np.diff(th.ravel()) < 0)


def test_objective_beats_uniform_and_perturbations(rng):
    g = rng.standard_normal((5, 4, 3)) * 4
    p = ShrinkParams(c=1.5, sigma=1.0)
    _, core_hat, f = wlrtr_approx(g, p)
    w = compute_weights(f.core, p)
    best = core_objective(f.core, core_hat, w, p.sigma)
    _, uni, _ = uniform_approx(g, float(np.median(w)) * p.sigma**2 / 2)
    assert best <= core_objective(f.core, uni, w, p.sigma)
    for _ in range(200):
        pert = core_hat + rng.standard_normal(core_hat.shape) * rng.uniform(1e-4, 1)
        assert best <= core_objective(f.core, pert, w, p.sigma)


def test_soft_threshold():
    x = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
    assert np.allclose(soft_threshold(x, 1.0), [-2, 0, 0, 0, 2])


def test_uniform_zero_threshold(rng):
    g = rng.standard_normal((4, 3, 2))
    approx, _, _ = uniform_approx(g, 0.0)
    assert np.allclose(approx, g, atol=1e-10)


def test_matrix_wnn_examples(rng):
    m = rng.standard_normal((6, 4))
    assert np.allclose(matrix_wnn_shrink(m, 0.0), m, atol=1e-8)
    a, b = rng.standard_normal(5), rng.standard_normal(3)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    r1 = 5 * np.outer(a, b)
    assert np.allclose(matrix_wnn_shrink(r1, 2.0), 3 * np.outer(a, b), atol=1e-10)
    s1 = np.linalg.svd(m, compute_uv=False)[0]
    assert not np.any(matrix_wnn_shrink(m, s1))
    with pytest.raises(ValueError):
        matrix_wnn_shrink(m, -1)


def test_core_objective_value():
    ct = np.array([2.0]).reshape(1, 1, 1)
    cb = np.array([1.0]).reshape(1, 1, 1)
    w = np.array([3.0]).reshape(1, 1, 1)
    assert core_objective(ct, cb, w, 2.0) == pytest.approx(1.0 + 4.0 * 3.0)


def test_reconstruct_matches_hosvd_basis(rng):
    g = rng.standard_normal((4, 3, 2))
    p = ShrinkParams(c=0.5, sigma=0.7)
    approx, core_hat, f = wlrtr_approx(g, p)
    assert np.allclose(approx, reconstruct(hosvd(g), core_hat))
