"""Dense symmetric eigendecomposition for small matrices.

The matrices here are Hessians, so the dimension is the spatial
dimension of a grid (n <= 6 in practice, usually 1-3).  The workhorse
is a cyclic Jacobi sweep written to broadcast over a leading batch
axis: the membership checks and the Pucci solver hand it one Hessian
per grid node, and a Python-level loop per node would be hopeless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InputError

__all__ = [
    "SymMatrix",
    "EigenResult",
    "symmetric_eigenvalues",
    "eig_extremes",
    "jacobi_eigh_batch",
]

# Convergence threshold for the off-diagonal Frobenius norm, relative
# to 1 + ||M||_F, and the sweep cap guarding against a stall.
JACOBI_RELATIVE_TOL = 1e-12
JACOBI_SWEEP_CAP = 64


@dataclass(frozen=True)
class SymMatrix:
    """A real symmetric matrix stored densely.

    The entries array is symmetrized on construction so the stored
    upper and lower triangles agree bit for bit.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix entries must be finite")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues sorted ascending, with orthonormal column vectors."""

    values: np.ndarray
    vectors: np.ndarray | None = field(default=None)


def _as_entries(m) -> np.ndarray:
    if isinstance(m, SymMatrix):
        return m.entries
    return SymMatrix(np.asarray(m, dtype=float)).entries


def _off_frobenius(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum((a * mask) ** 2, axis=(-2, -1)))


def jacobi_eigh_batch(
    mats: np.ndarray, want_vectors: bool = False
) -> tuple[np.ndarray, np.ndarray | None]:
    """Diagonalize a stack of symmetric matrices by cyclic Jacobi rotations.

    mats has shape (..., n, n); returns ascending eigenvalues of shape
    (..., n) and, when requested, the rotation product with eigenvectors
    in columns.  All matrices in the stack are swept together, one
    (p, q) plane at a time, which keeps the inner work in numpy.
    """
    a = np.array(mats, dtype=float, copy=True)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InputError(f"expected stacked square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix entries must be finite")
    n = a.shape[-1]
    batch = a.shape[:-2]
    scale = 1.0 + np.sqrt(np.sum(a * a, axis=(-2, -1)))

    v = None
    if want_vectors:
        v = np.zeros_like(a)
        v[...] = np.eye(n)

    if n > 1:
        converged = False
        for _ in range(JACOBI_SWEEP_CAP):
            if np.all(_off_frobenius(a) <= JACOBI_RELATIVE_TOL * scale):
                converged = True
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[..., p, q]
                    rotate = apq != 0.0
                    if not np.any(rotate):
                        continue
                    diff = a[..., q, q] - a[..., p, p]
                    safe = np.where(rotate, 2.0 * apq, 1.0)
                    tau = diff / safe
                    sgn = np.where(tau >= 0.0, 1.0, -1.0)
                    t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    c = np.where(rotate, c, 1.0)
                    s = np.where(rotate, s, 0.0)
                    crow = c[..., None]
                    srow = s[..., None]
                    row_p = a[..., p, :].copy()
                    row_q = a[..., q, :].copy()
                    a[..., p, :] = crow * row_p - srow * row_q
                    a[..., q, :] = srow * row_p + crow * row_q
                    col_p = a[..., :, p].copy()
                    col_q = a[..., :, q].copy()
                    a[..., :, p] = crow * col_p - srow * col_q
                    a[..., :, q] = srow * col_p + crow * col_q
                    # The angle was chosen to annihilate this entry.
                    a[..., p, q] = np.where(rotate, 0.0, a[..., p, q])
                    a[..., q, p] = a[..., p, q]
                    if want_vectors:
                        vp = v[..., :, p].copy()
                        vq = v[..., :, q].copy()
                        v[..., :, p] = crow * vp - srow * vq
                        v[..., :, q] = srow * vp + crow * vq
        else:
            converged = bool(np.all(_off_frobenius(a) <= JACOBI_RELATIVE_TOL * scale))
        if not converged:
            raise ConvergenceError(
                f"Jacobi sweep cap {JACOBI_SWEEP_CAP} reached before tolerance"
            )

    values = np.einsum("...ii->...i", a).copy()
    order = np.argsort(values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    if want_vectors:
        v = np.take_along_axis(v, order[..., None, :].repeat(n, axis=-2), axis=-1)
        v = v.reshape(*batch, n, n)
    return values, v


def symmetric_eigenvalues(m, want_vectors: bool = True) -> EigenResult:
    """Eigendecomposition of one symmetric matrix, values ascending."""
    a = _as_entries(m)
    values, vectors = jacobi_eigh_batch(a, want_vectors=want_vectors)
    values.flags.writeable = False
    if vectors is not None:
        vectors.flags.writeable = False
    return EigenResult(values=values, vectors=vectors)


def eig_extremes(m) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    a = _as_entries(m)
    values, _ = jacobi_eigh_batch(a, want_vectors=False)
    return float(values[0]), float(values[-1])
