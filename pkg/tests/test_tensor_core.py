import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wlrtr.tensor_core import (
    TensorShapeError,
    as_tensor3,
    fold,
    fro_norm,
    l1_norm,
    l211_norm,
    nmode_product,
    unfold,
)

dims = st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 4))
floats = st.floats(-1e3, 1e3, allow_nan=False, width=64)


def tensors():
    return dims.flatmap(lambda d: arrays(np.float64, d, elements=floats))


def test_unfold_degenerate():
    t = np.full((1, 1, 1), 5.0)
    for n in (1, 2, 3):
        assert unfold(t, n).shape == (1, 1)
        assert unfold(t, n)[0, 0] == 5.0


def test_unfold_mode1_columns_are_fibers():
    i, j, k = np.meshgrid(np.arange(1, 3), np.arange(1, 3), np.arange(1, 3), indexing="ij")
    t = (i + 2 * j + 4 * k).astype(float)
    m = unfold(t, 1)
    assert m.shape == (2, 4)
    cols = {tuple(m[:, q]) for q in range(4)}
    fibers = {tuple(t[:, jj, kk]) for jj in range(2) for kk in range(2)}
    assert cols == fibers


def test_unfold_column_order_is_cyclic(rng):
    # lower remaining index varies fastest
    t = rng.standard_normal((3, 4, 5))
    m1, m2, m3 = unfold(t, 1), unfold(t, 2), unfold(t, 3)
    for i in range(3):
        for j in range(4):
            for k in range(5):
                assert m1[i, j + 4 * k] == t[i, j, k]
                assert m2[j, i + 3 * k] == t[i, j, k]
                assert m3[k, i + 3 * j] == t[i, j, k]


@given(tensors())
@settings(max_examples=60, deadline=None)
def test_fold_unfold_round_trip_exact(t):
    for n in (1, 2, 3):
        back = fold(unfold(t, n), n, t.shape)
        assert np.array_equal(back, t)
        assert fro_norm(unfold(t, n)) == pytest.approx(fro_norm(t), rel=1e-12, abs=1e-300)


def test_fold_degenerate_and_zero():
    m = np.arange(6.0).reshape(1, 6)
    t = fold(m, 1, (1, 2, 3))
    assert t.shape == (1, 2, 3)
    assert np.array_equal(unfold(t, 1), m)
    assert not np.any(fold(np.zeros((4, 6)), 2, (2, 4, 3)))


def test_fold_shape_mismatch():
    with pytest.raises(TensorShapeError):
        fold(np.zeros((3, 5)), 1, (3, 2, 2))


def test_bad_mode():
    with pytest.raises(ValueError):
        unfold(np.zeros((2, 2, 2)), 4)


def test_nmode_identity_and_scaling(rng):
    t = rng.standard_normal((2, 2, 2))
    for n in (1, 2, 3):
        assert np.allclose(nmode_product(t, np.eye(2), n), t, atol=0)
    assert np.array_equal(nmode_product(t, 2 * np.eye(2), 3), 2 * t)


def test_nmode_triple_loop_oracle(rng):
    t = rng.standard_normal((3, 3, 3))
    M = rng.standard_normal((2, 3))
    out = nmode_product(t, M, 1)
    ref = np.zeros((2, 3, 3))
    for a in range(2):
        for j in range(3):
            for k in range(3):
                ref[a, j, k] = sum(t[i, j, k] * M[a, i] for i in range(3))
    assert np.max(np.abs(out - ref)) < 1e-12
    assert np.max(np.abs(unfold(out, 1) - M @ unfold(t, 1))) < 1e-12


def test_nmode_mismatch():
    with pytest.raises(TensorShapeError):
        nmode_product(np.zeros((2, 3, 4)), np.zeros((2, 2)), 2)


@given(tensors(), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_nmode_orthogonal_round_trip(t, n):
    size = t.shape[n - 1]
    q, _ = np.linalg.qr(np.random.default_rng(size).standard_normal((size, size)))
    back = nmode_product(nmode_product(t, q, n), q.T, n)
    assert fro_norm(back - t) <= 1e-10 * max(fro_norm(t), 1.0)


def test_norm_examples():
    z = np.zeros((2, 3, 4))
    assert fro_norm(z) == 0 and l1_norm(z) == 0 and l211_norm(z) == 0
    one = np.full((1, 1, 1), 3.0)
    assert fro_norm(one) == 3 and l1_norm(one) == 3
    t = np.array([3.0, 4.0]).reshape(2, 1, 1)
    assert fro_norm(t) == pytest.approx(5.0)
    assert l1_norm(t) == pytest.approx(7.0)
    assert l211_norm(t) == pytest.approx(5.0)


def test_l211_single_fiber_and_homogeneity(rng):
    t = np.zeros((2, 3, 2))
    t[:, 1, 1] = [3, 4]
    assert l211_norm(t) == pytest.approx(5.0)
    r = rng.standard_normal((4, 5, 3))
    assert l211_norm(2.5 * r) == pytest.approx(2.5 * l211_norm(r))
    assert l211_norm(0 * r) == 0


@given(tensors())
@settings(max_examples=60, deadline=None)
def test_l211_dominates_fro(t):
    assert l211_norm(t) >= fro_norm(t) * (1 - 1e-12)


def test_norms_zero_iff_zero(rng):
    t = np.zeros((3, 3, 3))
    t[1, 2, 0] = 1e-9
    assert fro_norm(t) > 0 and l1_norm(t) > 0


def test_as_tensor3_widening_and_checks():
    t = as_tensor3(np.ones((2, 2, 2), dtype=np.float32))
    assert t.dtype == np.float64
    with pytest.raises(TensorShapeError):
        as_tensor3(np.ones((2, 2)))
    with pytest.raises(ValueError):
        as_tensor3(np.full((1, 1, 1), np.nan))
