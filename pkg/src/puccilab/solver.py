"""Explicit time marching for parabolic Dirichlet problems on the ball.

The spatial domain is the open Euclidean ball |x| < R inside the
lattice box (intersected with x_n > 0 on half-space grids).  Interior
nodes advance by explicit Euler with the operator and the forcing
frozen at the current level; every other lattice node copies the
boundary data at every level, which makes the marched function a
discrete Dirichlet solution on the parabolic cylinder.

Boundary data g and forcing f may be full GridFunctions or callables
(x_mesh, t) -> array; callables are evaluated one slice at a time,
which matters once grids reach a few million nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError, CFLViolationError, InputError
from .grid import Grid, GridFunction
from .operators import (
    HeatOp,
    PLaplaceOp,
    PLaplaceParams,
    PucciMinusOp,
    PucciPlusOp,
    _interior_block,
    _slice_operator_value,
)

__all__ = [
    "DirichletProblem",
    "EpsilonContinuationReport",
    "solve_dirichlet",
    "solve_p_laplace_regularized",
    "epsilon_continuation",
    "cfl_limit",
]

CFL_SAFETY = 0.9


def cfl_limit(op, grid: Grid) -> float:
    """Largest admissible tau/h^2 for the operator's diffusion bound."""
    return CFL_SAFETY / (2.0 * grid.n_dim * op.cfl_coefficient)


def _field_slice(field, grid: Grid, level: int) -> np.ndarray:
    if isinstance(field, GridFunction):
        return field.data[level]
    vals = np.asarray(field(grid.coordinate_mesh(), grid.time_value(level)), dtype=float)
    return np.broadcast_to(vals, grid.spatial_shape)


def _check_field(field, grid: Grid, name: str):
    if isinstance(field, GridFunction):
        if field.grid != grid:
            raise InputError(f"{name} lives on a different grid")
    elif not callable(field):
        raise InputError(f"{name} must be a GridFunction or a callable field")


@dataclass(frozen=True)
class DirichletProblem:
    """Operator tag, forcing f, boundary data g, and the grid to march on.

    g supplies the bottom slice and every non-interior node at every
    later level (lateral shell, box corners outside the ball, and the
    flat face on half-space grids).
    """

    op_tag: object
    f: object
    g: object
    grid: Grid

    def __post_init__(self):
        if not isinstance(self.grid, Grid):
            raise InputError("grid must be a Grid")
        if not hasattr(self.op_tag, "cfl_coefficient"):
            raise InputError(f"unknown operator tag {self.op_tag!r}")
        _check_field(self.f, self.grid, "forcing f")
        _check_field(self.g, self.grid, "boundary data g")
        ratio = self.grid.tau / (self.grid.h * self.grid.h)
        limit = cfl_limit(self.op_tag, self.grid)
        if ratio > limit * (1.0 + 1e-12):
            raise CFLViolationError(
                f"tau/h^2 = {ratio:.6g} exceeds the explicit-scheme limit "
                f"{limit:.6g} = {CFL_SAFETY}/(2 n Lambda_eff) for {self.op_tag!r}"
            )


def _interior_ball_mask(grid: Grid) -> np.ndarray:
    mesh = grid.coordinate_mesh()
    dist2 = np.zeros(grid.spatial_shape)
    for i in range(grid.n_dim):
        dist2 = dist2 + mesh[i] ** 2
    r2 = grid.spatial_extent * grid.spatial_extent
    mask = dist2 < r2 - 1e-12 * r2
    if grid.half_space:
        mask &= np.broadcast_to(mesh[grid.n_dim - 1] > 0.0, grid.spatial_shape)
    return mask


def solve_dirichlet(prob: DirichletProblem) -> GridFunction:
    """March the problem to the top level and return the full field."""
    grid = prob.grid
    if any(s < 3 for s in grid.spatial_shape):
        raise InputError("grid has no interior column to update")
    inner = tuple(slice(1, -1) for _ in range(grid.n_dim))
    mask_inner = _interior_ball_mask(grid)[inner]
    tau = grid.tau

    u = np.empty((grid.n_time_levels,) + grid.spatial_shape)
    u[0] = _field_slice(prob.g, grid, 0)
    # overflow inside a step is legitimate state, not a numpy error: the
    # finiteness guard below turns it into a diagnosable BlowUpError
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(grid.n_time_levels - 1):
            opval = _slice_operator_value(prob.op_tag, u[m], grid.h)
            forcing = _interior_block(np.asarray(_field_slice(prob.f, grid, m)))
            stepped = _interior_block(u[m]) + tau * (opval + forcing)
            new = np.array(_field_slice(prob.g, grid, m + 1), dtype=float)
            new[inner] = np.where(mask_inner, stepped, new[inner])
            if not np.all(np.isfinite(new)):
                raise BlowUpError(
                    f"solution left the finite range at step {m + 1} "
                    f"(t = {grid.time_value(m + 1)})",
                    step=m + 1,
                )
            u[m + 1] = new
    return GridFunction(grid=grid, data=u)


def solve_p_laplace_regularized(
    p: float, epsilon: float | None, f, g, grid: Grid
) -> GridFunction:
    """Explicit march of the regularized normalized p-Laplace flow.

    Coefficients are rebuilt each step from the current level's
    centered gradient (lagged coefficients).  epsilon defaults to the
    spatial step, tying the regularization error to the truncation
    order; epsilon = 0 is refused, the exact operator is analysis-only.
    """
    if epsilon is None:
        epsilon = grid.h
    if epsilon <= 0.0:
        raise InputError("the marched p-Laplacian needs epsilon > 0")
    params = PLaplaceParams(p=p, epsilon=float(epsilon))
    prob = DirichletProblem(op_tag=PLaplaceOp(params), f=f, g=g, grid=grid)
    return solve_dirichlet(prob)


@dataclass(frozen=True)
class EpsilonContinuationReport:
    """Successive sup-distances along a decreasing regularization schedule.

    distances[k] = sup |v_{eps_k} - v_{eps_{k+1}}|, None when either
    solve failed.  cauchy flags monotone decrease (ties allowed) of the
    recorded distances, the discrete stand-in for uniform convergence;
    it is None when any solve failed.
    """

    epsilons: tuple[float, ...]
    distances: tuple[float | None, ...]
    cauchy: bool | None
    failures: tuple[str, ...]


def epsilon_continuation(
    p: float, eps_schedule, f, g, grid: Grid
) -> tuple[list[GridFunction | None], EpsilonContinuationReport]:
    """Solve for each epsilon in a strictly decreasing schedule."""
    schedule = [float(e) for e in eps_schedule]
    if len(schedule) == 0:
        raise InputError("epsilon schedule is empty")
    if any(e <= 0.0 for e in schedule):
        raise InputError("epsilon schedule must be positive")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise InputError("epsilon schedule must be strictly decreasing")

    solutions: list[GridFunction | None] = []
    failures: list[str] = []
    for eps in schedule:
        try:
            solutions.append(solve_p_laplace_regularized(p, eps, f, g, grid))
        except Exception as exc:  # noqa: BLE001 - partial report by contract
            solutions.append(None)
            failures.append(f"epsilon={eps!r}: {exc}")

    distances: list[float | None] = []
    for a, b in zip(solutions, solutions[1:]):
        if a is None or b is None:
            distances.append(None)
        else:
            distances.append(float(np.max(np.abs(a.data - b.data))))
    if any(d is None for d in distances):
        cauchy = None
    else:
        cauchy = all(b <= a for a, b in zip(distances, distances[1:]))
    report = EpsilonContinuationReport(
        epsilons=tuple(schedule),
        distances=tuple(distances),
        cauchy=cauchy,
        failures=tuple(failures),
    )
    return solutions, report
