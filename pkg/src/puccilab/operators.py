"""Pointwise differential operators and solution-class membership.

Covers the Pucci extremal operators over an ellipticity box, the heat
operator, and the normalized p-Laplacian in exact and regularized
form, together with the two-sided membership test for the extended
solution class: a field u belongs (discretely, up to a stencil
tolerance) when

    u_t - M_minus(D^2 u) >= -f_bound   and   u_t - M_plus(D^2 u) <= f_bound

at every admissible interior node.

The per-node API mirrors the math; the membership check and the
residual evaluator work one time slice at a time with vectorized
stencils, since grids carry millions of nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, SingularGradientError
from .grid import GridFunction
from .linalg import SymMatrix, jacobi_eigh_batch

__all__ = [
    "EllipticityPair",
    "PLaplaceParams",
    "ClassReport",
    "HeatOp",
    "PucciPlusOp",
    "PucciMinusOp",
    "PLaplaceOp",
    "pucci_plus",
    "pucci_minus",
    "p_laplace_coeff",
    "normalized_p_laplacian",
    "envelope_residuals",
    "class_membership",
    "membership_tolerance",
    "pde_residual",
]


@dataclass(frozen=True)
class EllipticityPair:
    """Ellipticity box 0 < lam <= Lam for the extremal operators."""

    lam: float
    Lam: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and np.isfinite(self.Lam)):
            raise InputError("ellipticity constants must be finite")
        if not 0.0 < self.lam <= self.Lam:
            raise InputError(
                f"need 0 < lam <= Lam, got lam={self.lam}, Lam={self.Lam}"
            )


@dataclass(frozen=True)
class PLaplaceParams:
    """Exponent p > 1 and gradient regularization epsilon >= 0."""

    p: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p > 1.0):
            raise InputError(f"p must be finite and > 1, got {self.p}")
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise InputError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def lam(self) -> float:
        """Lower ellipticity bound min(p-1, 1) of the coefficient matrix."""
        return min(self.p - 1.0, 1.0)

    @property
    def Lam(self) -> float:
        """Upper ellipticity bound max(p-1, 1)."""
        return max(self.p - 1.0, 1.0)


@dataclass(frozen=True)
class ClassReport:
    """Outcome of a membership check.

    worst_sub_slack is the smallest margin of the lower inequality
    u_t - M_minus + f_bound >= 0 (negative when u is too strong a
    subsolution for the budget); worst_super_slack the same for the
    upper inequality f_bound - (u_t - M_plus) >= 0.  worst_node is the
    (time level, spatial index) achieving the smaller of the two, ties
    resolved toward the lower inequality and then the lowest node in
    time-major row-major order.
    """

    verdict: str
    worst_sub_slack: float
    worst_super_slack: float
    worst_node: tuple[int, tuple[int, ...]]
    tolerance: float


# ---------------------------------------------------------------------------
# Operator tags, shared with the solver.


@dataclass(frozen=True)
class HeatOp:
    """u_t = lam * trace(D^2 u) + f."""

    lam: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0.0):
            raise InputError(f"heat coefficient must be positive, got {self.lam}")

    @property
    def cfl_coefficient(self) -> float:
        return self.lam


@dataclass(frozen=True)
class PucciPlusOp:
    ell: EllipticityPair

    @property
    def cfl_coefficient(self) -> float:
        return self.ell.Lam


@dataclass(frozen=True)
class PucciMinusOp:
    ell: EllipticityPair

    @property
    def cfl_coefficient(self) -> float:
        return self.ell.Lam


@dataclass(frozen=True)
class PLaplaceOp:
    params: PLaplaceParams

    @property
    def cfl_coefficient(self) -> float:
        return self.params.Lam


# ---------------------------------------------------------------------------
# Pointwise operators.


def _pucci_from_values(values: np.ndarray, ell: EllipticityPair, plus: bool):
    pos = np.where(values > 0.0, values, 0.0).sum(axis=-1)
    neg = np.where(values < 0.0, values, 0.0).sum(axis=-1)
    if plus:
        return ell.Lam * pos + ell.lam * neg
    return ell.lam * pos + ell.Lam * neg


def pucci_plus(m, ell: EllipticityPair) -> float:
    """sup of tr(A M) over symmetric A with lam I <= A <= Lam I."""
    a = m.entries if isinstance(m, SymMatrix) else SymMatrix(np.asarray(m)).entries
    values, _ = jacobi_eigh_batch(a)
    return float(_pucci_from_values(values, ell, plus=True))


def pucci_minus(m, ell: EllipticityPair) -> float:
    """inf of tr(A M) over the same ellipticity box."""
    a = m.entries if isinstance(m, SymMatrix) else SymMatrix(np.asarray(m)).entries
    values, _ = jacobi_eigh_batch(a)
    return float(_pucci_from_values(values, ell, plus=False))


def p_laplace_coeff(q, params: PLaplaceParams) -> SymMatrix:
    """Coefficient matrix I + (p-2) q x q / (|q|^2 + eps^2)."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if not np.all(np.isfinite(q)):
        raise InputError("gradient must be finite")
    qq = float(q @ q)
    den = qq + params.epsilon * params.epsilon
    if den == 0.0:
        raise SingularGradientError(
            "coefficients undefined at q = 0 with epsilon = 0; use "
            "envelope_residuals or a positive epsilon"
        )
    n = q.shape[0]
    return SymMatrix(np.eye(n) + (params.p - 2.0) * np.outer(q, q) / den)


def normalized_p_laplacian(m, q, p: float) -> float:
    """tr(a(q) M) with a(q) = I + (p-2) q x q / |q|^2; needs q != 0."""
    a = m.entries if isinstance(m, SymMatrix) else SymMatrix(np.asarray(m)).entries
    q = np.atleast_1d(np.asarray(q, dtype=float))
    qq = float(q @ q)
    if qq == 0.0:
        raise SingularGradientError(
            "normalized p-Laplacian undefined at q = 0; use envelope_residuals"
        )
    return float(np.trace(a) + (p - 2.0) * (q @ a @ q) / qq)


def envelope_residuals(m, q, p: float) -> tuple[float, float]:
    """Operator values for the subsolution and supersolution tests.

    Away from q = 0 both coincide with the normalized p-Laplacian.  At
    q = 0 the subsolution test relaxes toward the extreme eigenvalue
    that helps it and the supersolution test toward the other one, with
    the roles of e_min and e_max swapping at p = 2.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if float(q @ q) != 0.0:
        val = normalized_p_laplacian(m, q, p)
        return val, val
    a = m.entries if isinstance(m, SymMatrix) else SymMatrix(np.asarray(m)).entries
    values, _ = jacobi_eigh_batch(a)
    tr = float(np.trace(a))
    e_min, e_max = float(values[0]), float(values[-1])
    if p >= 2.0:
        return tr + (p - 2.0) * e_max, tr + (p - 2.0) * e_min
    return tr + (p - 2.0) * e_min, tr + (p - 2.0) * e_max


# ---------------------------------------------------------------------------
# Slice-level stencils.  These operate on one time slice and return
# arrays over the interior block (one node trimmed from every spatial
# edge), keeping axis order ascending everywhere so that summation
# order, and therefore bit patterns, are reproducible.


def _interior_block(sl: np.ndarray, shifts=None) -> np.ndarray:
    n = sl.ndim
    if shifts is None:
        shifts = (0,) * n
    return sl[tuple(slice(1 + s, d - 1 + s) for s, d in zip(shifts, sl.shape))]


def _unit_shift(n: int, axis: int, sign: int) -> tuple[int, ...]:
    s = [0] * n
    s[axis] = sign
    return tuple(s)


def _slice_diag_diffs(sl: np.ndarray, h: float) -> list[np.ndarray]:
    n = sl.ndim
    h2 = h * h
    center = _interior_block(sl)
    out = []
    for i in range(n):
        up = _interior_block(sl, _unit_shift(n, i, 1))
        dn = _interior_block(sl, _unit_shift(n, i, -1))
        out.append((up - 2.0 * center + dn) / h2)
    return out


def _slice_cross_diffs(sl: np.ndarray, h: float) -> dict[tuple[int, int], np.ndarray]:
    n = sl.ndim
    h2 = h * h
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            pp = [0] * n
            pp[i], pp[j] = 1, 1
            pm = [0] * n
            pm[i], pm[j] = 1, -1
            mp = [0] * n
            mp[i], mp[j] = -1, 1
            mm = [0] * n
            mm[i], mm[j] = -1, -1
            out[(i, j)] = (
                _interior_block(sl, tuple(pp))
                - _interior_block(sl, tuple(pm))
                - _interior_block(sl, tuple(mp))
                + _interior_block(sl, tuple(mm))
            ) / (4.0 * h2)
    return out


def _slice_gradient(sl: np.ndarray, h: float) -> list[np.ndarray]:
    n = sl.ndim
    out = []
    for i in range(n):
        up = _interior_block(sl, _unit_shift(n, i, 1))
        dn = _interior_block(sl, _unit_shift(n, i, -1))
        out.append((up - dn) / (2.0 * h))
    return out


def _hessian_stack(diag, cross) -> np.ndarray:
    n = len(diag)
    shape = diag[0].shape
    hess = np.zeros(shape + (n, n))
    for i in range(n):
        hess[..., i, i] = diag[i]
    for (i, j), val in cross.items():
        hess[..., i, j] = val
        hess[..., j, i] = val
    return hess


def _slice_operator_value(op, sl: np.ndarray, h: float) -> np.ndarray:
    """Evaluate the tagged spatial operator over the interior of a slice."""
    diag = _slice_diag_diffs(sl, h)
    trace = diag[0].copy()
    for d in diag[1:]:
        trace += d
    if isinstance(op, HeatOp):
        return op.lam * trace
    if isinstance(op, (PucciPlusOp, PucciMinusOp)):
        cross = _slice_cross_diffs(sl, h) if sl.ndim > 1 else {}
        values, _ = jacobi_eigh_batch(_hessian_stack(diag, cross))
        return _pucci_from_values(values, op.ell, plus=isinstance(op, PucciPlusOp))
    if isinstance(op, PLaplaceOp):
        p, eps = op.params.p, op.params.epsilon
        grad = _slice_gradient(sl, h)
        cross = _slice_cross_diffs(sl, h) if sl.ndim > 1 else {}
        norm2 = grad[0] * grad[0]
        for g in grad[1:]:
            norm2 = norm2 + g * g
        quad = grad[0] * grad[0] * diag[0]
        for i in range(1, sl.ndim):
            quad = quad + grad[i] * grad[i] * diag[i]
        for (i, j), val in cross.items():
            quad = quad + 2.0 * (grad[i] * grad[j] * val)
        den = norm2 + eps * eps
        if eps > 0.0:
            return trace + (p - 2.0) * (quad / den)
        singular = den == 0.0
        if np.any(singular):
            raise SingularGradientError(
                "zero discrete gradient met with epsilon = 0; evaluate through "
                "envelope_residuals (zero_gradient='envelope') or use epsilon > 0"
            )
        return trace + (p - 2.0) * (quad / den)
    raise InputError(f"unknown operator tag {op!r}")


# ---------------------------------------------------------------------------
# Membership and residuals.


def membership_tolerance(u: GridFunction) -> float:
    """Default stencil-consistency tolerance 10 (h + tau) (1 + max|u|)."""
    return 10.0 * (u.grid.h + u.grid.tau) * (1.0 + u.sup_norm)


def class_membership(
    u: GridFunction, ell: EllipticityPair, f_bound: float, tol: float | None = None
) -> ClassReport:
    """Two-sided extremal-operator test at every admissible interior node.

    Admissible means at least one step from every spatial edge and at
    least one level above the bottom slice.  The verdict is pass when
    both worst slacks stay above -tol.
    """
    if f_bound < 0.0 or not np.isfinite(f_bound):
        raise InputError(f"f_bound is a sup norm and must be >= 0, got {f_bound}")
    grid = u.grid
    if grid.n_time_levels < 2:
        raise InputError("membership needs at least two time levels")
    if any(s < 3 for s in grid.spatial_shape):
        raise InputError("membership needs at least one interior node per axis")
    if tol is None:
        tol = membership_tolerance(u)

    worst_sub = np.inf
    worst_super = np.inf
    worst_node: tuple[int, tuple[int, ...]] = (1, (1,) * grid.n_dim)
    worst_key = np.inf
    n = grid.n_dim

    for m in range(1, grid.n_time_levels):
        sl = u.data[m]
        diag = _slice_diag_diffs(sl, grid.h)
        cross = _slice_cross_diffs(sl, grid.h) if n > 1 else {}
        values, _ = jacobi_eigh_batch(_hessian_stack(diag, cross))
        m_plus = _pucci_from_values(values, ell, plus=True)
        m_minus = _pucci_from_values(values, ell, plus=False)
        dt = (_interior_block(sl) - _interior_block(u.data[m - 1])) / grid.tau
        sub_slack = dt - m_minus + f_bound
        super_slack = f_bound - (dt - m_plus)

        for slack, is_sub in ((sub_slack, True), (super_slack, False)):
            flat = int(np.argmin(slack))
            val = float(slack.flat[flat])
            if is_sub:
                worst_sub = min(worst_sub, val)
            else:
                worst_super = min(worst_super, val)
            if val < worst_key:
                worst_key = val
                idx = np.unravel_index(flat, slack.shape)
                worst_node = (m, tuple(int(i) + 1 for i in idx))

    verdict = "pass" if (worst_sub >= -tol and worst_super >= -tol) else "fail"
    return ClassReport(
        verdict=verdict,
        worst_sub_slack=float(worst_sub),
        worst_super_slack=float(worst_super),
        worst_node=worst_node,
        tolerance=float(tol),
    )


def pde_residual(
    u: GridFunction, op, f: GridFunction, zero_gradient: str = "raise"
) -> GridFunction:
    """Residual u_t - operator(D^2 u, Du) - f on the admissible nodes.

    Non-admissible nodes (spatial edge, bottom slice) carry 0.  For the
    exact p-Laplacian (epsilon = 0), nodes with a vanishing discrete
    gradient raise by default; zero_gradient='envelope' instead scores
    them by the signed distance of zero to the interval spanned by the
    two envelope branches, so an exact solution reports residual 0.
    """
    if zero_gradient not in ("raise", "envelope"):
        raise InputError(f"zero_gradient must be 'raise' or 'envelope', got {zero_gradient!r}")
    grid = u.grid
    if f.grid != grid:
        raise InputError("forcing term lives on a different grid")
    out = np.zeros_like(u.data)
    n = grid.n_dim
    inner = tuple(slice(1, -1) for _ in range(n))

    for m in range(1, grid.n_time_levels):
        sl = u.data[m]
        dt = (_interior_block(sl) - _interior_block(u.data[m - 1])) / grid.tau
        rhs = _interior_block(f.data[m])
        if (
            isinstance(op, PLaplaceOp)
            and op.params.epsilon == 0.0
            and zero_gradient == "envelope"
        ):
            opval = _plaplace_envelope_value(op.params.p, sl, grid.h)
            res = dt - rhs
            r_lo = res - opval[1]
            r_hi = res - opval[0]
            value = np.where(r_lo > 0.0, r_lo, np.where(r_hi < 0.0, r_hi, 0.0))
        else:
            value = dt - _slice_operator_value(op, sl, grid.h) - rhs
        out[(m,) + inner] = value
    return GridFunction(grid=grid, data=out)


def _plaplace_envelope_value(p: float, sl: np.ndarray, h: float):
    """(low, high) operator values over a slice, envelope rules at q = 0."""
    n = sl.ndim
    diag = _slice_diag_diffs(sl, h)
    cross = _slice_cross_diffs(sl, h) if n > 1 else {}
    grad = _slice_gradient(sl, h)
    trace = diag[0].copy()
    for d in diag[1:]:
        trace += d
    norm2 = grad[0] * grad[0]
    for g in grad[1:]:
        norm2 = norm2 + g * g
    quad = grad[0] * grad[0] * diag[0]
    for i in range(1, n):
        quad = quad + grad[i] * grad[i] * diag[i]
    for (i, j), val in cross.items():
        quad = quad + 2.0 * (grad[i] * grad[j] * val)

    values, _ = jacobi_eigh_batch(_hessian_stack(diag, cross))
    e_min, e_max = values[..., 0], values[..., -1]
    if p >= 2.0:
        sub = trace + (p - 2.0) * e_max
        sup = trace + (p - 2.0) * e_min
    else:
        sub = trace + (p - 2.0) * e_min
        sup = trace + (p - 2.0) * e_max
    singular = norm2 == 0.0
    safe = np.where(singular, 1.0, norm2)
    smooth = trace + (p - 2.0) * (quad / safe)
    op_hi = np.where(singular, np.maximum(sub, sup), smooth)
    op_lo = np.where(singular, np.minimum(sub, sup), smooth)
    return op_lo, op_hi
