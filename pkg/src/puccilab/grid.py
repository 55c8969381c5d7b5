"""Space-time lattices, grid functions, stencils, and file I/O.

A Grid is a uniform lattice over the box [-R, R]^n x [-T, 0], the
discrete stand-in for the parabolic cylinder B_R x (-T, 0].  Spatial
nodes sit at integer multiples of h, except that the last axis can be
staggered by h/2 so the hyperplane x_n = 0 falls exactly between
nodes (used when a field has a Hessian jump across that plane), or
restricted to x_n >= 0 with the face on nodes (half-space studies).
Time levels run from -T to 0 inclusive, step tau.

GridFunction data is stored time-slowest, spatial axes row-major, and
is frozen after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    BoundaryProximityError,
    DegenerateCylinderError,
    GridFileError,
    InputError,
)
from .linalg import SymMatrix

__all__ = [
    "Grid",
    "GridFunction",
    "CylinderIndex",
    "sample",
    "restrict",
    "cylinder_nodes",
    "parabolic_boundary_nodes",
    "centered_hessian",
    "centered_gradient",
    "backward_time_diff",
    "write_gridfn",
    "read_gridfn",
]

FILE_MAGIC = "PUCCILAB1"

# Relative slack for the open/closed cylinder inequalities.  Node
# coordinates are exact lattice multiples, so this only has to absorb
# rounding in dist**2 sums, never to decide a genuinely borderline node.
_EDGE_SLACK = 1e-12


def _int_ratio(num: float, den: float, what: str) -> int:
    ratio = num / den
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
        raise InputError(f"{what} must be a positive integer, got {ratio!r}")
    return n


@dataclass(frozen=True)
class Grid:
    """Uniform lattice over [-R, R]^n x [-T, 0].

    half_space restricts the last axis to x_n >= 0 with the face on
    nodes; stagger shifts the last axis by h/2 so x_n = 0 lies between
    nodes.  The two are mutually exclusive.
    """

    n_dim: int
    h: float
    tau: float
    spatial_extent: float = 1.0
    time_extent: float = 1.0
    half_space: bool = False
    stagger: bool = False

    def __post_init__(self):
        if int(self.n_dim) != self.n_dim or self.n_dim < 1:
            raise InputError(f"n_dim must be a positive integer, got {self.n_dim}")
        object.__setattr__(self, "n_dim", int(self.n_dim))
        for name in ("h", "tau", "spatial_extent", "time_extent"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val <= 0.0:
                raise InputError(f"{name} must be positive and finite, got {val}")
            object.__setattr__(self, name, val)
        if self.half_space and self.stagger:
            raise InputError("half_space and stagger both place x_n = 0; pick one")
        _int_ratio(self.spatial_extent, self.h, "spatial_extent / h")
        _int_ratio(self.time_extent, self.tau, "time_extent / tau")

    # -- lattice geometry ------------------------------------------------

    @property
    def steps_per_half_width(self) -> int:
        return int(round(self.spatial_extent / self.h))

    @property
    def n_time_levels(self) -> int:
        return int(round(self.time_extent / self.tau)) + 1

    def axis_size(self, axis: int) -> int:
        n_half = self.steps_per_half_width
        if axis == self.n_dim - 1:
            if self.half_space:
                return n_half + 1
            if self.stagger:
                return 2 * n_half
        return 2 * n_half + 1

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return tuple(self.axis_size(i) for i in range(self.n_dim))

    @property
    def node_count(self) -> int:
        return self.n_time_levels * int(np.prod(self.spatial_shape))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Coordinates along one spatial axis, exact lattice multiples."""
        n_half = self.steps_per_half_width
        last = axis == self.n_dim - 1
        if last and self.half_space:
            idx = np.arange(0, n_half + 1)
            return idx * self.h
        if last and self.stagger:
            idx = np.arange(-n_half, n_half)
            return idx * self.h + 0.5 * self.h
        idx = np.arange(-n_half, n_half + 1)
        return idx * self.h

    def coordinate_mesh(self) -> list[np.ndarray]:
        """Sparse spatial meshgrid, broadcastable to spatial_shape."""
        axes = [self.axis_coords(i) for i in range(self.n_dim)]
        return list(np.meshgrid(*axes, indexing="ij", sparse=True))

    def time_value(self, level: int) -> float:
        return (level - (self.n_time_levels - 1)) * self.tau

    @property
    def time_values(self) -> np.ndarray:
        m = self.n_time_levels - 1
        return (np.arange(m + 1) - m) * self.tau

    def node_coordinates(self, level: int, spatial_index: tuple[int, ...]):
        x = np.array(
            [self.axis_coords(i)[spatial_index[i]] for i in range(self.n_dim)]
        )
        return x, self.time_value(level)

    def time_level_of(self, t: float) -> int:
        """Level index of a time value that must lie on the lattice."""
        m = (t + self.time_extent) / self.tau
        level = int(round(m))
        if abs(m - level) > 1e-9 or level < 0 or level >= self.n_time_levels:
            raise AlignmentError(f"time {t!r} is not a lattice level of {self}")
        return level


@dataclass(frozen=True)
class GridFunction:
    """Real values on every node of a grid, frozen after construction."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        expected = (self.grid.n_time_levels,) + self.grid.spatial_shape
        a = np.asarray(self.data, dtype=float)
        if a.shape != expected:
            raise InputError(
                f"data shape {a.shape} does not match grid layout {expected}"
            )
        if not np.all(np.isfinite(a)):
            raise InputError("grid function values must be finite")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.data)))


def sample(expr, grid: Grid) -> GridFunction:
    """Evaluate expr(x, t) at every node; x is a broadcastable mesh tuple."""
    mesh = grid.coordinate_mesh()
    shape = grid.spatial_shape
    out = np.empty((grid.n_time_levels,) + shape)
    for m in range(grid.n_time_levels):
        vals = np.asarray(expr(mesh, grid.time_value(m)), dtype=float)
        out[m] = np.broadcast_to(vals, shape)
        if not np.all(np.isfinite(out[m])):
            bad = np.argwhere(~np.isfinite(out[m]))[0]
            raise InputError(
                f"field evaluated non-finite at level {m}, spatial index "
                f"{tuple(int(b) for b in bad)}"
            )
    return GridFunction(grid=grid, data=out)


def restrict(
    u: GridFunction, spatial_extent: float, time_extent: float | None = None
) -> GridFunction:
    """Concentric sub-box of a grid function, same steps, node-to-node.

    The time window keeps the latest levels (it always ends at t = 0).
    Useful for studying a marched field away from the Dirichlet shell,
    where the scheme's stencils mix solved and copied values.
    """
    grid = u.grid
    if time_extent is None:
        time_extent = grid.time_extent
    if spatial_extent > grid.spatial_extent + 1e-12:
        raise InputError(
            f"sub-box extent {spatial_extent} exceeds the grid's {grid.spatial_extent}"
        )
    if time_extent > grid.time_extent + 1e-12:
        raise InputError(
            f"sub-box depth {time_extent} exceeds the grid's {grid.time_extent}"
        )
    sub = Grid(
        n_dim=grid.n_dim,
        h=grid.h,
        tau=grid.tau,
        spatial_extent=spatial_extent,
        time_extent=time_extent,
        half_space=grid.half_space,
        stagger=grid.stagger,
    )
    k = sub.steps_per_half_width
    center = grid.steps_per_half_width
    slices = [slice(grid.n_time_levels - sub.n_time_levels, grid.n_time_levels)]
    for axis in range(grid.n_dim):
        last = axis == grid.n_dim - 1
        if last and grid.half_space:
            slices.append(slice(0, k + 1))
        elif last and grid.stagger:
            slices.append(slice(center - k, center + k))
        else:
            slices.append(slice(center - k, center + k + 1))
    return GridFunction(grid=sub, data=u.data[tuple(slices)])


# ---------------------------------------------------------------------------
# Cylinders


@dataclass(frozen=True)
class CylinderIndex:
    """Discrete Q_r(center): |x - x0| < r strictly, t0 - r^2 < t <= t0.

    Nodes are stored as a boolean spatial mask plus the time levels in
    the window; node_list materializes explicit (level, multi-index)
    pairs on demand.  contained records whether the continuum cylinder
    fits inside the lattice box, which the decay regressions use to
    drop clipped scales.
    """

    grid: Grid
    center_x: np.ndarray
    center_t: float
    radius: float
    spatial_mask: np.ndarray
    time_levels: np.ndarray
    contained: bool

    @property
    def node_count(self) -> int:
        return int(self.spatial_mask.sum()) * len(self.time_levels)

    @property
    def node_list(self) -> list[tuple[int, tuple[int, ...]]]:
        where = np.argwhere(self.spatial_mask)
        return [
            (int(m), tuple(int(i) for i in idx))
            for m in self.time_levels
            for idx in where
        ]

    def spatial_offsets(self) -> np.ndarray:
        """Offsets x - x0 of the masked spatial columns, shape (k, n)."""
        grid = self.grid
        where = np.argwhere(self.spatial_mask)
        cols = np.empty((where.shape[0], grid.n_dim))
        for i in range(grid.n_dim):
            cols[:, i] = grid.axis_coords(i)[where[:, i]] - self.center_x[i]
        return cols

    def time_offsets(self) -> np.ndarray:
        """Offsets t - t0 of the listed time levels."""
        return self.grid.time_values[self.time_levels] - self.center_t

    def values(self, u: GridFunction) -> np.ndarray:
        """Values of u on the cylinder, shape (levels, columns)."""
        if u.grid != self.grid:
            raise InputError("grid function lives on a different grid")
        return u.data[self.time_levels][:, self.spatial_mask]


def cylinder_nodes(grid: Grid, center, r: float) -> CylinderIndex:
    """Nodes of the discrete parabolic cylinder Q_r(center).

    center is (x0, t0) with x0 an n-vector and t0 a lattice-range time.
    Space is open (|x - x0| < r), time half-open (t0 - r^2 < t <= t0).
    On half-space grids only x_n > 0 nodes belong to the cylinder; the
    face is boundary.  A cylinder whose only spatial column sits at the
    center (or that holds no node at all) carries no usable spatial
    information and raises.
    """
    x0, t0 = center
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    t0 = float(t0)
    if x0.shape != (grid.n_dim,):
        raise InputError(f"center has {x0.shape} coordinates, grid needs {grid.n_dim}")
    if not (np.all(np.isfinite(x0)) and np.isfinite(t0) and np.isfinite(r)):
        raise InputError("cylinder center and radius must be finite")
    if r <= 0.0:
        raise InputError(f"cylinder radius must be positive, got {r}")

    mesh = grid.coordinate_mesh()
    dist2 = np.zeros(grid.spatial_shape)
    for i in range(grid.n_dim):
        dist2 = dist2 + (mesh[i] - x0[i]) ** 2
    slack = _EDGE_SLACK * r * r
    mask = dist2 < r * r - slack
    if grid.half_space:
        mask &= mesh[grid.n_dim - 1] > 0.0

    times = grid.time_values
    t_slack = _EDGE_SLACK * (1.0 + abs(t0) + r * r)
    in_window = (times > t0 - r * r + t_slack) & (times <= t0 + t_slack)
    levels = np.nonzero(in_window)[0]

    n_columns = int(mask.sum())
    spatially_trivial = False
    if n_columns == 1:
        # A single column is still usable when it sits away from the
        # center (half-space cylinders at the face in one dimension);
        # a lone column at the center carries no spatial information.
        col = np.argwhere(mask)[0]
        offset = np.array(
            [grid.axis_coords(i)[col[i]] - x0[i] for i in range(grid.n_dim)]
        )
        spatially_trivial = bool(np.linalg.norm(offset) < 0.25 * grid.h)
    if n_columns == 0 or spatially_trivial or len(levels) == 0:
        raise DegenerateCylinderError(
            f"Q_{r}(x0={x0.tolist()}, t0={t0}) holds {n_columns} spatial "
            f"column(s) and {len(levels)} time level(s) on h={grid.h}, "
            f"tau={grid.tau}; too small to use"
        )

    if grid.half_space:
        # Face-centered cylinders are the intended half cylinders and
        # count as contained; for interior centers the face clips the
        # ball like any other boundary.
        on_face = abs(x0[grid.n_dim - 1]) < 0.25 * grid.h
        last_lo_ok = on_face or x0[grid.n_dim - 1] - r >= -_EDGE_SLACK
    else:
        last_lo_ok = bool(
            x0[grid.n_dim - 1] - r >= -grid.spatial_extent - _EDGE_SLACK
        )
    contained = bool(
        np.all(x0 + r <= grid.spatial_extent + _EDGE_SLACK)
        and np.all(x0[: grid.n_dim - 1] - r >= -grid.spatial_extent - _EDGE_SLACK)
        and last_lo_ok
        and t0 - r * r >= -grid.time_extent - _EDGE_SLACK
        and t0 <= _EDGE_SLACK
    )

    mask.flags.writeable = False
    levels.flags.writeable = False
    x0.flags.writeable = False
    return CylinderIndex(
        grid=grid,
        center_x=x0,
        center_t=t0,
        radius=float(r),
        spatial_mask=mask,
        time_levels=levels,
        contained=contained,
    )


def parabolic_boundary_nodes(grid: Grid, r: float) -> list[tuple[int, tuple[int, ...]]]:
    """Nodes of the discrete parabolic boundary of Q_r centered at (0, 0).

    The set is the bottom slice (t = -r^2, all columns of the closed
    ball) plus the lateral shell (nodes outside the open ball that
    touch it through a stencil step, at every level -r^2 <= t < 0).
    The interior of the top slice is excluded.  Half-space grids add
    the face x_n = 0 inside the ball, at every level including the top.
    """
    steps = r / grid.h
    if abs(steps - round(steps)) > 1e-9:
        raise InputError(f"radius {r} is not a multiple of the spatial step {grid.h}")
    try:
        bottom_level = grid.time_level_of(-r * r)
    except AlignmentError as exc:
        raise AlignmentError(
            f"cylinder depth r^2 = {r * r} does not land on a time level"
        ) from exc

    mesh = grid.coordinate_mesh()
    dist2 = np.zeros(grid.spatial_shape)
    for i in range(grid.n_dim):
        dist2 = dist2 + mesh[i] ** 2
    slack = _EDGE_SLACK * r * r
    interior = dist2 < r * r - slack
    if grid.half_space:
        face = np.broadcast_to(mesh[grid.n_dim - 1] == 0.0, grid.spatial_shape)
        interior = interior & ~face
    closed_ball = dist2 <= r * r + slack

    # Lateral shell: outside the open ball but adjacent (Chebyshev
    # distance one, matching the stencil footprint) to an interior node.
    near_interior = np.zeros(grid.spatial_shape, dtype=bool)
    pad = np.pad(interior, 1, mode="constant")
    for offsets in np.ndindex(*(3,) * grid.n_dim):
        sl = tuple(slice(o, o + s) for o, s in zip(offsets, grid.spatial_shape))
        near_interior |= pad[sl]
    shell = closed_ball & ~interior & near_interior

    top = grid.n_time_levels - 1
    nodes: list[tuple[int, tuple[int, ...]]] = []
    for idx in np.argwhere(closed_ball):
        nodes.append((bottom_level, tuple(int(i) for i in idx)))
    for m in range(bottom_level + 1, top):
        for idx in np.argwhere(shell):
            nodes.append((m, tuple(int(i) for i in idx)))
    if grid.half_space:
        face_in_ball = closed_ball & np.broadcast_to(
            mesh[grid.n_dim - 1] == 0.0, grid.spatial_shape
        )
        for m in range(bottom_level + 1, top + 1):
            for idx in np.argwhere(face_in_ball):
                nodes.append((m, tuple(int(i) for i in idx)))
    return nodes


# ---------------------------------------------------------------------------
# Stencils


def _check_stencil_room(u: GridFunction, node) -> tuple[int, tuple[int, ...]]:
    level, idx = node
    level = int(level)
    idx = tuple(int(i) for i in idx)
    grid = u.grid
    if len(idx) != grid.n_dim:
        raise InputError(f"node index {idx} does not match dimension {grid.n_dim}")
    if level < 1 or level >= grid.n_time_levels:
        raise BoundaryProximityError(
            f"level {level} has no backward neighbor on {grid.n_time_levels} levels"
        )
    for i, a in enumerate(idx):
        if a < 1 or a > grid.axis_size(i) - 2:
            raise BoundaryProximityError(
                f"node {idx} lacks stencil room on axis {i} "
                f"(size {grid.axis_size(i)})"
            )
    return level, idx


def centered_hessian(u: GridFunction, node) -> SymMatrix:
    """Second-order centered Hessian at one node (four-point cross off-diagonal)."""
    level, idx = _check_stencil_room(u, node)
    grid = u.grid
    n = grid.n_dim
    sl = u.data[level]
    h2 = grid.h * grid.h
    out = np.empty((n, n))

    def at(shift):
        j = tuple(idx[i] + shift[i] for i in range(n))
        return sl[j]

    zero = (0,) * n
    for i in range(n):
        e = [0] * n
        e[i] = 1
        out[i, i] = (at(tuple(e)) - 2.0 * at(zero) + at(tuple(-v for v in e))) / h2
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
            val = (at(tuple(pp)) - at(tuple(pm)) - at(tuple(mp)) + at(tuple(mm))) / (
                4.0 * h2
            )
            out[i, j] = val
            out[j, i] = val
    return SymMatrix(out)


def centered_gradient(u: GridFunction, node) -> np.ndarray:
    """Second-order centered first differences at one node."""
    level, idx = _check_stencil_room(u, node)
    grid = u.grid
    sl = u.data[level]
    out = np.empty(grid.n_dim)
    for i in range(grid.n_dim):
        up = list(idx)
        up[i] += 1
        dn = list(idx)
        dn[i] -= 1
        out[i] = (sl[tuple(up)] - sl[tuple(dn)]) / (2.0 * grid.h)
    return out


def backward_time_diff(u: GridFunction, node) -> float:
    """First-order backward difference in time at one node."""
    level, idx = _check_stencil_room(u, node)
    return float((u.data[level][idx] - u.data[level - 1][idx]) / u.grid.tau)


# ---------------------------------------------------------------------------
# File format: ASCII magic line, JSON metadata line, raw little-endian
# float64 payload, time-major row-major.


def write_gridfn(u: GridFunction, path) -> None:
    grid = u.grid
    meta = {
        "endianness": "little",
        "h": grid.h,
        "half_space": grid.half_space,
        "index_order": "time-major row-major",
        "n_dim": grid.n_dim,
        "spatial_extent": grid.spatial_extent,
        "stagger": grid.stagger,
        "tau": grid.tau,
        "time_extent": grid.time_extent,
    }
    payload = np.ascontiguousarray(u.data, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(FILE_MAGIC.encode("ascii") + b"\n")
        fh.write(json.dumps(meta, sort_keys=True).encode("ascii") + b"\n")
        fh.write(payload)


def read_gridfn(path) -> GridFunction:
    raw = Path(path).read_bytes()
    first = raw.find(b"\n")
    if first < 0 or raw[:first].decode("ascii", errors="replace") != FILE_MAGIC:
        raise GridFileError(f"{path}: bad magic, expected {FILE_MAGIC!r}")
    second = raw.find(b"\n", first + 1)
    if second < 0:
        raise GridFileError(f"{path}: metadata line missing")
    try:
        meta = json.loads(raw[first + 1 : second].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GridFileError(f"{path}: metadata is not valid JSON: {exc}") from exc
    if "endianness" not in meta:
        raise GridFileError(f"{path}: endianness tag absent")
    if meta["endianness"] != "little":
        raise GridFileError(f"{path}: unsupported endianness {meta['endianness']!r}")
    if meta.get("index_order") != "time-major row-major":
        raise GridFileError(f"{path}: unsupported index order {meta.get('index_order')!r}")
    try:
        grid = Grid(
            n_dim=meta["n_dim"],
            h=meta["h"],
            tau=meta["tau"],
            spatial_extent=meta["spatial_extent"],
            time_extent=meta["time_extent"],
            half_space=meta["half_space"],
            stagger=meta.get("stagger", False),
        )
    except (KeyError, InputError) as exc:
        raise GridFileError(f"{path}: bad grid metadata: {exc}") from exc
    count = grid.node_count
    payload = raw[second + 1 :]
    if len(payload) < 8 * count:
        raise GridFileError(
            f"{path}: truncated payload, metadata claims {count} float64 values "
            f"({8 * count} bytes) but {len(payload)} bytes follow"
        )
    if len(payload) > 8 * count:
        raise GridFileError(
            f"{path}: payload longer than the {count} values the metadata claims"
        )
    data = np.frombuffer(payload, dtype="<f8").astype(float, copy=True)
    data = data.reshape((grid.n_time_levels,) + grid.spatial_shape)
    return GridFunction(grid=grid, data=data)
