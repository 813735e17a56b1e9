"""Matrix SVD and the higher-order SVD (Tucker decomposition with orthogonal factors).

The production path uses LAPACK through :func:`numpy.linalg.svd`. A one-sided
Jacobi SVD is kept alongside it; it is slower but independent of LAPACK and is
used to cross-check the fast path.

Sign convention: every left singular vector is flipped so that its entry of
largest magnitude is positive (the lowest row index wins ties), and the
matching right singular vector is flipped with it. This makes factors
reproducible bit-for-bit on the same platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import TensorShapeError, as_matrix, nmode_product, unfold

__all__ = [
    "SvdConvergenceError",
    "SvdResult",
    "HosvdFactors",
    "matrix_svd",
    "jacobi_svd",
    "hosvd",
    "reconstruct",
]


class SvdConvergenceError(ArithmeticError):
    """The singular value decomposition did not converge."""


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        k = self.singular_values.size
        return (self.u[:, :k] * self.singular_values) @ self.v[:, :k].T


@dataclass(frozen=True)
class HosvdFactors:
    """Core tensor plus one square orthogonal factor per mode."""

    core: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    @property
    def factors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.u1, self.u2, self.u3)


def _fix_signs(u: np.ndarray, v: np.ndarray | None = None):
    if u.shape[1] == 0:
        return u, v
    pivot = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivot, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = u * signs
    if v is not None:
        k = min(v.shape[1], signs.size)
        v = v.copy()
        v[:, :k] *= signs[:k]
    return u, v


def matrix_svd(m, full: bool = False) -> SvdResult:
    """Thin (or, with ``full=True``, square-``u``) SVD ``m = u diag(s) v^T``.

    Singular values are returned in descending order. Raises
    :class:`SvdConvergenceError` if LAPACK fails to converge.
    """
    m = as_matrix(m)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=full)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(str(exc)) from exc
    u, v = _fix_signs(u, vt.T)
    return SvdResult(u=u, singular_values=s, v=v)


def jacobi_svd(m, tol: float = 1e-12, max_sweeps: int = 60) -> SvdResult:
    """One-sided Jacobi SVD (Hestenes); returns the thin decomposition.

    Orthogonalizes the columns of ``m`` (or of ``m^T`` when ``m`` is wide) by
    plane rotations until every pair is orthogonal to ``tol`` relative.
    """
    m = as_matrix(m)
    wide = m.shape[0] < m.shape[1]
    a = (m.T if wide else m).copy()
    n = a.shape[1]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = a[:, p] @ a[:, p]
                beta = a[:, q] @ a[:, q]
                gamma = a[:, p] @ a[:, q]
                if gamma == 0.0 or alpha * beta == 0.0:
                    continue
                off = max(off, abs(gamma) / np.sqrt(alpha * beta))
                if abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                ap, aq = a[:, p].copy(), a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if off <= tol:
            break
    else:
        raise SvdConvergenceError(f"Jacobi SVD: off-diagonal mass {off:.3e} after {max_sweeps} sweeps")

    sv = np.linalg.norm(a, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    v = v[:, order]
    a = a[:, order]
    left = np.zeros_like(a)
    nz = sv > 0
    left[:, nz] = a[:, nz] / sv[nz]
    if wide:
        left, v = v, left
    left, v = _fix_signs(left, v)
    return SvdResult(u=left, singular_values=sv, v=v)


def _square_left_factor(m: np.ndarray, method: str) -> np.ndarray:
    if not np.any(m):
        return np.eye(m.shape[0])
    if method == "svd":
        return matrix_svd(m, full=m.shape[0] > m.shape[1]).u
    if method == "jacobi":
        u = jacobi_svd(m).u
        if u.shape[1] < u.shape[0]:
            # complete the basis; the extra columns span the null space of m^T
            q, _ = np.linalg.qr(np.hstack([u, np.eye(u.shape[0])]))
            u = np.hstack([u, q[:, u.shape[1] : u.shape[0]]])
            u, _ = _fix_signs(u)
        return u
    if method != "gram":
        raise ValueError(f"unknown HOSVD method {method!r}")
    try:
        _, vecs = np.linalg.eigh(m @ m.T)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(str(exc)) from exc
    u, _ = _fix_signs(vecs[:, ::-1])
    return u


def hosvd(t, method: str = "gram") -> HosvdFactors:
    """Full HOSVD: ``t = core x1 u1 x2 u2 x3 u3`` with square orthogonal ``u_n``.

    ``method`` selects how the left singular vectors of each unfolding are
    obtained: ``"gram"`` (default) diagonalizes ``X_(n) X_(n)^T``, which is
    several times faster for the wide unfoldings produced by grouping;
    ``"svd"`` calls LAPACK on the unfolding itself; ``"jacobi"`` uses the
    in-repo one-sided Jacobi SVD.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise TensorShapeError(f"expected a 3-order tensor, got shape {t.shape}")
    us = [_square_left_factor(unfold(t, n), method) for n in (1, 2, 3)]
    core = t
    for n, u in enumerate(us, start=1):
        core = nmode_product(core, u.T, n)
    return HosvdFactors(core=core, u1=us[0], u2=us[1], u3=us[2])


def reconstruct(f: HosvdFactors, core: np.ndarray | None = None) -> np.ndarray:
    """Multiply a core (``f.core`` unless given) by the factors in every mode."""
    out = f.core if core is None else np.asarray(core, dtype=np.float64)
    for n, u in enumerate(f.factors, start=1):
        if u.shape[1] != out.shape[n - 1]:
            raise TensorShapeError(
                f"factor {n} has shape {u.shape}, core mode size is {out.shape[n - 1]}"
            )
        out = nmode_product(out, u, n)
    return out
