"""Scenario runners tying solver and decay analysis into desk-scale studies.

Each run_* function is a plain Python entry point; ``execute`` adapts a
parsed ScenarioConfig onto them and renders the deterministic report
payloads the CLI writes to disk.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError, InputError, PucciLabError
from ..grid import Grid, GridFunction, restrict, sample, write_gridfn
from ..operators import (
    EllipticityPair,
    HeatOp,
    PLaplaceParams,
    PLaplaceOp,
    PucciMinusOp,
    PucciPlusOp,
    class_membership,
)
from ..regularity import (
    boundary_decay_sequence,
    coefficient_cauchy_check,
    decay_report_to_csv,
    decay_report_to_json,
    decay_sequence,
)
from ..solver import DirichletProblem, epsilon_continuation, solve_dirichlet
from .fields import field_on_grid, make_field
from .report import provenance, write_report

__all__ = [
    "CounterexampleReport",
    "PSweepRow",
    "PSweepTable",
    "EllipticityRow",
    "BoundaryRow",
    "BoundaryReport",
    "sample_interior_points",
    "run_counterexample",
    "run_p_sweep",
    "run_ellipticity_sweep",
    "run_boundary_study",
    "execute",
]

_PRIMES = (2, 3, 5, 7, 11, 13, 17)


def _radical_inverse(index: int, base: int) -> float:
    inv = 1.0
    result = 0.0
    while index > 0:
        inv /= base
        result += inv * (index % base)
        index //= base
    return result


def sample_interior_points(
    grid: Grid, n_points: int, seed: int, box_fraction: float = 0.35
):
    """Deterministic low-discrepancy points snapped to the lattice, t = 0.

    The seed offsets the start of the Halton sequence, so different
    seeds give different (but reproducible) point sets.
    """
    if grid.n_dim > len(_PRIMES):
        raise InputError(f"point sampling supports up to {len(_PRIMES)} dimensions")
    half = box_fraction * grid.spatial_extent
    axes = [grid.axis_coords(i) for i in range(grid.n_dim)]
    points = []
    seen = set()
    index = seed + 1
    while len(points) < n_points and index < seed + 100000:
        snapped = []
        for d in range(grid.n_dim):
            raw = (2.0 * _radical_inverse(index, _PRIMES[d]) - 1.0) * half
            j = int(np.argmin(np.abs(axes[d] - raw)))
            snapped.append(float(axes[d][j]))
        index += 1
        key = tuple(snapped)
        if key in seen:
            continue
        seen.add(key)
        points.append((np.array(snapped), 0.0))
    if len(points) < n_points:
        raise InputError(
            f"could not place {n_points} distinct lattice points in the sampling box"
        )
    return points


def _field_sup(field, grid: Grid) -> float:
    """Sup of |field| over the lattice, one time slice at a time."""
    if isinstance(field, GridFunction):
        return field.sup_norm
    mesh = grid.coordinate_mesh()
    worst = 0.0
    for m in range(grid.n_time_levels):
        vals = np.asarray(field(mesh, grid.time_value(m)), dtype=float)
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


# ---------------------------------------------------------------------------
# Counterexample study.


@dataclass(frozen=True)
class CounterexampleReport:
    """Membership, interface Hessian jump, and decay for the kinked quadratic."""

    delta: float
    membership: object
    ratio: float
    expected_ratio: float
    decay: object
    strict_membership: object


def _interface_second_diff_ratio(u: GridFunction) -> float:
    grid = u.grid
    h = grid.h
    coords = grid.axis_coords(grid.n_dim - 1)
    i_neg = int(np.argmin(np.abs(coords + 1.5 * h)))
    i_pos = int(np.argmin(np.abs(coords - 1.5 * h)))
    center = tuple(s // 2 for s in grid.spatial_shape[:-1])
    line = u.data[-1][center]
    d2_neg = (line[i_neg - 1] - 2.0 * line[i_neg] + line[i_neg + 1]) / (h * h)
    d2_pos = (line[i_pos - 1] - 2.0 * line[i_pos] + line[i_pos + 1]) / (h * h)
    return float(d2_pos / d2_neg)


def run_counterexample(
    delta: float, grid: Grid | None = None, eta: float = 0.5, K: int | None = 5
) -> CounterexampleReport:
    """Full study of the kinked quadratic that separates S* from C^{1,1}.

    The profile solves the two-operator inequalities with a genuine
    Hessian jump across {x_n = 0}: membership in the wide class holds,
    an affine profile still fits at rate one, but no single uniformly
    parabolic equation with the same constant forcing can hold across
    the interface, which the strict (lam = Lam) check exposes.
    """
    if not np.isfinite(delta) or delta <= 0.0:
        raise InputError(f"delta must be positive, got {delta}")
    if grid is None:
        grid = Grid(
            n_dim=1, h=1.0 / 128, tau=1.0 / 128, spatial_extent=1.0,
            time_extent=1.0, stagger=True,
        )
    if not grid.stagger:
        raise InputError(
            "the counterexample grid must stagger the last axis so the "
            "interface falls between nodes"
        )
    u = sample(make_field({"name": "counterexample", "delta": delta}, grid.n_dim), grid)
    membership = class_membership(u, EllipticityPair(1.0, 1.0 + delta), f_bound=2.0)
    ratio = _interface_second_diff_ratio(u)
    decay = decay_sequence(u, (np.zeros(grid.n_dim), 0.0), eta=eta, K=K)
    strict = class_membership(u, EllipticityPair(1.0, 1.0), f_bound=1.0)
    return CounterexampleReport(
        delta=float(delta),
        membership=membership,
        ratio=ratio,
        expected_ratio=1.0 / (1.0 + delta),
        decay=decay,
        strict_membership=strict,
    )


# ---------------------------------------------------------------------------
# p-sweep.


@dataclass(frozen=True)
class PSweepRow:
    p: float
    status: str
    verdict: str | None = None
    worst_sub_slack: float | None = None
    worst_super_slack: float | None = None
    alpha_min: float | None = None
    alphas: tuple | None = None
    boundary_alphas: tuple | None = None
    meets_target: bool | None = None


@dataclass(frozen=True)
class PSweepTable:
    alpha_target: float
    points: tuple
    boundary_points: tuple
    rows: tuple

    @property
    def all_ok(self) -> bool:
        return all(r.status == "ok" for r in self.rows)

    @property
    def all_meet_target(self) -> bool:
        return all(r.status == "ok" and bool(r.meets_target) for r in self.rows)


def _membership_inside_ball(u, ell, f_bound):
    """Class check away from the Dirichlet shell and the initial transient.

    The marched field solves the flow only inside the inscribed ball;
    stencils straddling the sphere mix solved and copied values and
    say nothing about the equation.  Early levels can carry a kink
    from the initial data that the lagged-coefficient comparison sees
    as noise, so the check runs on the latest half of the time window
    over the concentric half-size box.
    """
    grid = u.grid
    half_depth = ((grid.n_time_levels - 1) // 2) * grid.tau
    return class_membership(
        restrict(u, grid.spatial_extent / 2.0, half_depth), ell, f_bound
    )


def _sweep_one_p(p, grid, f, g, epsilon, f_bound, points, boundary_points, eta, K):
    try:
        params = PLaplaceParams(p=float(p), epsilon=float(epsilon))
        prob = DirichletProblem(op_tag=PLaplaceOp(params), f=f, g=g, grid=grid)
        u = solve_dirichlet(prob)
        ell = EllipticityPair(params.lam, params.Lam)
        membership = _membership_inside_ball(u, ell, f_bound)
        alphas = tuple(
            decay_sequence(u, pt, eta=eta, K=K).alpha_est for pt in points
        )
        boundary_alphas = tuple(
            boundary_decay_sequence(u, eta=eta, K=K, center=pt).alpha_est
            for pt in boundary_points
        )
        return u, PSweepRow(
            p=float(p),
            status="ok",
            verdict=membership.verdict,
            worst_sub_slack=membership.worst_sub_slack,
            worst_super_slack=membership.worst_super_slack,
            alpha_min=min(alphas) if alphas else None,
            alphas=alphas,
            boundary_alphas=boundary_alphas,
        )
    except PucciLabError as exc:
        return None, PSweepRow(p=float(p), status=f"failed: {exc}")


def run_p_sweep(
    p_list,
    alpha_target: float,
    grid: Grid,
    f,
    g,
    epsilon: float | None = None,
    n_points: int = 5,
    seed: int = 0,
    eta: float = 0.5,
    K: int | None = 3,
    threads: int = 1,
) -> PSweepTable:
    """Solve the regularized p-flow for each p and measure decay exponents.

    Failures of one p are isolated into a marked row; the remaining
    rows still fill in.  Points are Halton samples snapped to the
    lattice; on half-space grids their face projections get boundary
    fits as well.
    """
    epsilon = grid.h if epsilon is None else float(epsilon)
    points = sample_interior_points(grid, n_points, seed) if p_list else []
    if grid.half_space:
        boundary_points = [
            (np.concatenate([pt[0][:-1], [0.0]]), pt[1]) for pt in points
        ]
    else:
        boundary_points = []
    f_bound = _field_sup(f, grid) if p_list else 0.0

    def work(p):
        _, row = _sweep_one_p(
            p, grid, f, g, epsilon, f_bound, points, boundary_points, eta, K
        )
        return row

    p_values = [float(p) for p in p_list]
    if threads == 1 or len(p_values) <= 1:
        rows = [work(p) for p in p_values]
    else:
        workers = threads if threads > 0 else min(len(p_values), os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, p_values))
    rows = [
        row if row.status != "ok"
        else replace(row, meets_target=bool(row.alpha_min >= alpha_target))
        for row in rows
    ]
    return PSweepTable(
        alpha_target=float(alpha_target),
        points=tuple((tuple(x), t) for x, t in points),
        boundary_points=tuple((tuple(x), t) for x, t in boundary_points),
        rows=tuple(rows),
    )


# ---------------------------------------------------------------------------
# Ellipticity sweep.


@dataclass(frozen=True)
class EllipticityRow:
    delta: float
    status: str
    verdict: str | None = None
    alpha_est: float | None = None


def run_ellipticity_sweep(
    delta_list, grid: Grid, f, g, eta: float = 0.5, K: int | None = 3
):
    """Solve the maximal-operator flow per delta and record decay at the origin.

    Each solved field is a genuine wide-class member for f_bound equal
    to the forcing sup, so the alpha_est column tracks how regularity
    responds to the ellipticity ratio; the trend is recorded, not
    asserted (the theory promises a direction, not numbers).
    """
    deltas = [float(d) for d in delta_list]
    if any(d < 0.0 for d in deltas):
        raise ConfigError(f"ellipticity offsets must be >= 0, got {deltas}")
    f_bound = _field_sup(f, grid) if deltas else 0.0
    rows = []
    for delta in deltas:
        try:
            ell = EllipticityPair(1.0, 1.0 + delta)
            prob = DirichletProblem(op_tag=PucciPlusOp(ell), f=f, g=g, grid=grid)
            u = solve_dirichlet(prob)
            membership = _membership_inside_ball(u, ell, f_bound)
            decay = decay_sequence(u, (np.zeros(grid.n_dim), 0.0), eta=eta, K=K)
            rows.append(
                EllipticityRow(
                    delta=delta,
                    status="ok",
                    verdict=membership.verdict,
                    alpha_est=decay.alpha_est,
                )
            )
        except PucciLabError as exc:
            rows.append(EllipticityRow(delta=delta, status=f"failed: {exc}"))
    return tuple(rows)


# ---------------------------------------------------------------------------
# Boundary study.


@dataclass(frozen=True)
class BoundaryRow:
    center_x: tuple
    center_t: float
    alpha_est: float
    slope_reduced: float
    slope_total: float
    cauchy_passed: bool | None


@dataclass(frozen=True)
class BoundaryReport:
    rows: tuple
    decay_reports: tuple


def run_boundary_study(
    grid: Grid,
    g=None,
    u=None,
    affine_value: float = 0.0,
    affine_gradient=None,
    lam: float = 1.0,
    eta: float = 0.5,
    K: int | None = None,
    points=None,
    c1: float | None = None,
    alpha: float | None = None,
) -> BoundaryReport:
    """Face-slope fits for a half-space field after removing its affine part.

    Works either on a directly given field u (sample mode) or on the
    heat flow solved from boundary data g (solve mode).  The reduced
    field u - L must vanish on the face; its fitted slope at the face
    estimates the normal derivative, reported both reduced and with
    the affine part's own normal slope added back.
    """
    if not grid.half_space:
        raise InputError("boundary study needs a half-space grid")
    if (u is None) == (g is None):
        raise InputError("provide exactly one of u (sample mode) or g (solve mode)")
    if affine_gradient is None:
        affine_gradient = np.zeros(grid.n_dim)
    affine_gradient = np.asarray(affine_gradient, dtype=float)
    if affine_gradient.shape != (grid.n_dim,):
        raise InputError(f"affine gradient needs {grid.n_dim} components")

    if u is None:
        prob = DirichletProblem(
            op_tag=HeatOp(lam=lam), f=lambda mesh, t: 0.0, g=g, grid=grid
        )
        field = solve_dirichlet(prob)
    else:
        field = field_on_grid(u, grid)

    mesh = grid.coordinate_mesh()
    affine = np.asarray(sum(affine_gradient[i] * mesh[i] for i in range(grid.n_dim)))
    reduced = GridFunction(
        grid=grid, data=field.data - (affine_value + affine)[None, ...]
    )

    if points is None:
        points = [(np.zeros(grid.n_dim), 0.0)]
    rows = []
    reports = []
    for pt in points:
        rep = boundary_decay_sequence(reduced, eta=eta, K=K, center=pt)
        reports.append(rep)
        slope = float(rep.entries[-1].fit.b[grid.n_dim - 1])
        cauchy_passed = None
        if c1 is not None and alpha is not None:
            cauchy_passed = coefficient_cauchy_check(rep, c1, alpha).passed
        rows.append(
            BoundaryRow(
                center_x=tuple(float(c) for c in np.atleast_1d(pt[0])),
                center_t=float(pt[1]),
                alpha_est=rep.alpha_est,
                slope_reduced=slope,
                slope_total=slope + float(affine_gradient[grid.n_dim - 1]),
                cauchy_passed=cauchy_passed,
            )
        )
    return BoundaryReport(rows=tuple(rows), decay_reports=tuple(reports))


# ---------------------------------------------------------------------------
# Config-driven execution (the CLI surface).


def _membership_rows(report, prefix=""):
    return [
        [f"{prefix}verdict", report.verdict],
        [f"{prefix}worst_sub_slack", report.worst_sub_slack],
        [f"{prefix}worst_super_slack", report.worst_super_slack],
        [f"{prefix}tolerance", report.tolerance],
    ]


def _membership_payload(report):
    return {
        "verdict": report.verdict,
        "worst_sub_slack": report.worst_sub_slack,
        "worst_super_slack": report.worst_super_slack,
        "worst_node": [report.worst_node[0], list(report.worst_node[1])],
        "tolerance": report.tolerance,
    }


def _build_operator(op_section):
    kind = op_section["kind"]
    if kind == "heat":
        return HeatOp(lam=float(op_section.get("lam", 1.0)))
    if kind == "pucci_plus":
        return PucciPlusOp(
            ell=EllipticityPair(float(op_section["lam"]), float(op_section["Lam"]))
        )
    if kind == "pucci_minus":
        return PucciMinusOp(
            ell=EllipticityPair(float(op_section["lam"]), float(op_section["Lam"]))
        )
    params = PLaplaceParams(
        p=float(op_section["p"]),
        epsilon=float(op_section["epsilon"]) if "epsilon" in op_section else 0.0,
    )
    return PLaplaceOp(params)


def _exec_solve(config, out_dir, threads, verbose):
    grid = config.grid
    f = make_field(config.data["f"], grid.n_dim, config.base_dir)
    g = make_field(config.data["g"], grid.n_dim, config.base_dir)
    op_section = dict(config.operator)
    if op_section["kind"] == "p_laplace" and "epsilon" not in op_section:
        op_section["epsilon"] = grid.h
    op = _build_operator(op_section)
    u = solve_dirichlet(DirichletProblem(op_tag=op, f=f, g=g, grid=grid))
    os.makedirs(out_dir, exist_ok=True)
    solution_path = os.path.join(out_dir, "solution.puc")
    write_gridfn(u, solution_path)
    payload = {"sup_norm": u.sup_norm, "files": ["solution.puc"]}
    rows = [["sup_norm", u.sup_norm], ["solution_file", "solution.puc"]]
    return payload, ["quantity", "value"], rows


def _exec_class_check(config, out_dir, threads, verbose):
    grid = config.grid
    u = field_on_grid(make_field(config.data["u"], grid.n_dim, config.base_dir), grid)
    op = config.operator
    tol = float(op["tolerance"]) if "tolerance" in op else None
    report = class_membership(
        u,
        EllipticityPair(float(op["lam"]), float(op["Lam"])),
        float(op["f_bound"]),
        tol=tol,
    )
    payload = {"membership": _membership_payload(report)}
    return payload, ["quantity", "value"], _membership_rows(report)


def _exec_decay(config, out_dir, threads, verbose):
    grid = config.grid
    u = field_on_grid(make_field(config.data["u"], grid.n_dim, config.base_dir), grid)
    an = config.analysis
    center_spec = an.get("center", [0.0] * (grid.n_dim + 1))
    center = (np.asarray(center_spec[:-1], dtype=float), float(center_spec[-1]))
    report = decay_sequence(
        u,
        center,
        eta=float(an.get("eta", 0.5)),
        K=int(an["K"]) if "K" in an else None,
    )
    payload = {"decay": json.loads(decay_report_to_json(report))}
    csv_text = decay_report_to_csv(report)
    header, *rows = [line.split(",") for line in csv_text.strip().split("\n")]
    return payload, header, rows


def _exec_boundary(config, out_dir, threads, verbose):
    grid = config.grid
    an = config.analysis
    affine = config.data["affine_part"]
    kwargs = dict(
        affine_value=float(affine["value"]),
        affine_gradient=np.asarray(affine["gradient"], dtype=float),
        lam=float(config.operator.get("lam", 1.0)),
        eta=float(an.get("eta", 0.5)),
        K=int(an["K"]) if "K" in an else None,
        c1=float(an["c1"]) if "c1" in an else None,
        alpha=float(an["alpha"]) if "alpha" in an else None,
    )
    if "points" in an:
        kwargs["points"] = [
            (np.asarray(pt[:-1], dtype=float), float(pt[-1])) for pt in an["points"]
        ]
    if "u" in config.data:
        kwargs["u"] = make_field(config.data["u"], grid.n_dim, config.base_dir)
    else:
        kwargs["g"] = make_field(config.data["g"], grid.n_dim, config.base_dir)
    report = run_boundary_study(grid, **kwargs)
    payload = {
        "boundary": {
            "rows": [
                {
                    "center_x": list(r.center_x),
                    "center_t": r.center_t,
                    "alpha_est": r.alpha_est,
                    "slope_reduced": r.slope_reduced,
                    "slope_total": r.slope_total,
                    "cauchy_passed": r.cauchy_passed,
                }
                for r in report.rows
            ],
            "decay": [
                json.loads(decay_report_to_json(rep)) for rep in report.decay_reports
            ],
        }
    }
    header = (
        [f"x{i + 1}" for i in range(grid.n_dim)]
        + ["t", "alpha_est", "slope_reduced", "slope_total", "cauchy_passed"]
    )
    rows = [
        list(r.center_x)
        + [r.center_t, r.alpha_est, r.slope_reduced, r.slope_total, r.cauchy_passed]
        for r in report.rows
    ]
    return payload, header, rows


def _exec_counterexample(config, out_dir, threads, verbose):
    an = config.analysis
    report = run_counterexample(
        float(config.operator["delta"]),
        config.grid,
        eta=float(an.get("eta", 0.5)),
        K=int(an["K"]) if "K" in an else 5,
    )
    payload = {
        "delta": report.delta,
        "membership": _membership_payload(report.membership),
        "second_diff_ratio": report.ratio,
        "expected_ratio": report.expected_ratio,
        "decay": json.loads(decay_report_to_json(report.decay)),
        "strict_membership": _membership_payload(report.strict_membership),
    }
    rows = _membership_rows(report.membership)
    rows += [
        ["second_diff_ratio", report.ratio],
        ["expected_ratio", report.expected_ratio],
        ["alpha_est", report.decay.alpha_est],
    ]
    rows += _membership_rows(report.strict_membership, prefix="strict_")
    return payload, ["quantity", "value"], rows


def _exec_p_sweep(config, out_dir, threads, verbose):
    grid = config.grid
    an = config.analysis
    f = make_field(config.data["f"], grid.n_dim, config.base_dir)
    g = make_field(config.data["g"], grid.n_dim, config.base_dir)
    table = run_p_sweep(
        [float(p) for p in config.operator["p_list"]],
        alpha_target=float(an.get("alpha", 0.9)),
        grid=grid,
        f=f,
        g=g,
        epsilon=(
            float(config.operator["epsilon"])
            if "epsilon" in config.operator
            else None
        ),
        n_points=int(an.get("n_points", 5)),
        seed=config.seed,
        eta=float(an.get("eta", 0.5)),
        K=int(an["K"]) if "K" in an else 3,
        threads=threads,
    )
    payload = {
        "alpha_target": table.alpha_target,
        "points": [[list(x), t] for x, t in table.points],
        "rows": [
            {
                "p": r.p,
                "status": r.status,
                "verdict": r.verdict,
                "worst_sub_slack": r.worst_sub_slack,
                "worst_super_slack": r.worst_super_slack,
                "alpha_min": r.alpha_min,
                "alphas": None if r.alphas is None else list(r.alphas),
                "boundary_alphas": (
                    None if r.boundary_alphas is None else list(r.boundary_alphas)
                ),
                "meets_target": r.meets_target,
            }
            for r in table.rows
        ],
    }
    header = [
        "p",
        "status",
        "verdict",
        "worst_sub_slack",
        "worst_super_slack",
        "alpha_min",
        "meets_target",
    ]
    rows = [
        [r.p, r.status, r.verdict, r.worst_sub_slack, r.worst_super_slack,
         r.alpha_min, r.meets_target]
        for r in table.rows
    ]
    return payload, header, rows


def _exec_ellipticity_sweep(config, out_dir, threads, verbose):
    grid = config.grid
    an = config.analysis
    f = make_field(config.data["f"], grid.n_dim, config.base_dir)
    g = make_field(config.data["g"], grid.n_dim, config.base_dir)
    rows_data = run_ellipticity_sweep(
        [float(d) for d in config.operator["delta_list"]],
        grid,
        f,
        g,
        eta=float(an.get("eta", 0.5)),
        K=int(an["K"]) if "K" in an else 3,
    )
    payload = {
        "rows": [
            {
                "delta": r.delta,
                "status": r.status,
                "verdict": r.verdict,
                "alpha_est": r.alpha_est,
            }
            for r in rows_data
        ]
    }
    header = ["delta", "status", "verdict", "alpha_est"]
    rows = [[r.delta, r.status, r.verdict, r.alpha_est] for r in rows_data]
    return payload, header, rows


def _exec_eps_sweep(config, out_dir, threads, verbose):
    grid = config.grid
    f = make_field(config.data["f"], grid.n_dim, config.base_dir)
    g = make_field(config.data["g"], grid.n_dim, config.base_dir)
    _, report = epsilon_continuation(
        float(config.operator["p"]),
        [float(e) for e in config.operator["eps_schedule"]],
        f,
        g,
        grid,
    )
    payload = {
        "epsilons": list(report.epsilons),
        "distances": list(report.distances),
        "cauchy": report.cauchy,
        "failures": list(report.failures),
    }
    header = ["epsilon", "distance_to_next"]
    rows = []
    for i, eps in enumerate(report.epsilons):
        dist = report.distances[i] if i < len(report.distances) else None
        rows.append([eps, dist])
    return payload, header, rows


_EXECUTORS = {
    "solve": _exec_solve,
    "class_check": _exec_class_check,
    "decay": _exec_decay,
    "boundary": _exec_boundary,
    "counterexample": _exec_counterexample,
    "p_sweep": _exec_p_sweep,
    "ellipticity_sweep": _exec_ellipticity_sweep,
    "eps_sweep": _exec_eps_sweep,
}


def execute(config, out_dir: str, threads: int = 1, verbose: bool = False):
    """Run the configured scenario and write report.json / report.csv."""
    runner = _EXECUTORS[config.scenario]
    payload, header, rows = runner(config, out_dir, threads, verbose)
    document = {
        "provenance": provenance(config.grid, config.seed, config.scenario),
        "result": payload,
    }
    return write_report(out_dir, document, header, rows)
