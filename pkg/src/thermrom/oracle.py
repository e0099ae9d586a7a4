"""Explicit finite-difference solver for transient heat conduction on voxels.

Cells are cubes of edge ``dx`` on the bounding box of all bodies. Each cell
belongs to one body or is void (no capacity, no conductance). The scheme is
forward Euler on cell energies::

    C_i dT_i/dt = sum_f G_f (T_nb - T_i) + G_conv,i (T_amb - T_i) + Q_i

with face conductance ``G = k_h * dx`` (harmonic-mean conductivity across
the face) and ``G_conv = h * dx**2`` per exposed face. Interior fluxes are
antisymmetric, so energy is conserved to round-off in insulated runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import product

import numba
import numpy as np

from .core import Convection, PowerProfile, SystemConfig, power_at
from .errors import GeometryUnresolvable, StabilityViolation
from .trace import TemperatureTrace

__all__ = [
    "VoxelGrid",
    "TemperatureTrace",
    "build_grid",
    "stable_dt",
    "step",
    "advance",
    "simulate",
    "SAFETY_FACTOR",
]

SAFETY_FACTOR = 0.9
_DIRECTIONS = ("-x", "+x", "-y", "+y", "-z", "+z")


@dataclass(frozen=True)
class VoxelGrid:
    dx: float
    origin: tuple[float, float, float]
    body_index: np.ndarray  # int, -1 for void
    capacity: np.ndarray  # J/K per cell
    gx: np.ndarray  # W/K, faces between (i, i+1) along x
    gy: np.ndarray
    gz: np.ndarray
    g_conv: np.ndarray  # W/K, summed over a cell's convective faces
    ambient: float
    temperature: np.ndarray
    source: np.ndarray  # W per cell
    body_ids: tuple[str, ...]
    profiles: tuple[PowerProfile, ...]
    probes: tuple[tuple[np.ndarray, ...], ...]  # per body: fancy index of probe cells
    h: float = 0.0  # W/(m^2 K), 0 when insulated

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.body_index.shape

    @property
    def n_cells(self) -> int:
        return int(self.body_index.size)

    @property
    def source_density(self) -> np.ndarray:
        """Volumetric source in W/m^3."""
        return self.source / self.dx**3

    @property
    def active_dims(self) -> int:
        return sum(1 for n in self.shape if n > 1)

    def body_mask(self, body_id: str) -> np.ndarray:
        return self.body_index == self.body_ids.index(body_id)

    def probe_temperatures(self) -> np.ndarray:
        return np.array([self.temperature[p].mean() for p in self.probes])

    def mean_temperatures(self) -> np.ndarray:
        """Capacity-weighted mean temperature of every body."""
        out = np.empty(len(self.body_ids))
        for b in range(len(self.body_ids)):
            m = self.body_index == b
            c = self.capacity[m]
            out[b] = np.dot(c, self.temperature[m]) / c.sum()
        return out

    def energy(self, reference: float = 0.0) -> float:
        """Stored energy relative to a uniform ``reference`` temperature, in J."""
        return float(np.sum(self.capacity * (self.temperature - reference)))

    def exposed_area(self) -> float:
        """Total area of convective faces in m^2."""
        return float(self.g_conv.sum()) / self.h if self.h else 0.0


def _snap(value: float, dx: float, tol: float, what: str) -> int:
    n = value / dx
    r = round(n)
    if abs(n - r) > tol:
        raise GeometryUnresolvable(f"{what} = {value!r} m is not a multiple of dx = {dx!r} m")
    return int(r)


def build_grid(system: SystemConfig, dx: float, snap_tol: float = 1e-3) -> VoxelGrid:
    """Paint the bodies of ``system`` onto a uniform voxel grid.

    Body faces must sit on grid planes to within ``snap_tol * dx`` so that the
    voxelized capacity equals the nominal one. Every body needs at least two
    cells along each axis.
    """
    if not (dx > 0):
        raise ValueError(f"dx must be > 0, got {dx}")
    lo = np.min([b.box.origin for b in system.bodies], axis=0)
    hi = np.max([b.box.upper for b in system.bodies], axis=0)
    shape = tuple(_snap(hi[a] - lo[a], dx, snap_tol, f"domain extent along axis {a}") for a in range(3))

    body_index = np.full(shape, -1, dtype=np.int32)
    kcell = np.zeros(shape)
    capacity = np.zeros(shape)
    slices = []
    for b_idx, body in enumerate(system.bodies):
        start = [_snap(body.box.origin[a] - lo[a], dx, snap_tol, f"body {body.id!r} origin[{a}]") for a in range(3)]
        count = [_snap(body.box.size[a], dx, snap_tol, f"body {body.id!r} size[{a}]") for a in range(3)]
        if min(count) < 2:
            raise GeometryUnresolvable(
                f"body {body.id!r} spans {count} cells; need >= 2 per axis at dx = {dx!r}"
            )
        sl = tuple(slice(s, s + c) for s, c in zip(start, count))
        body_index[sl] = b_idx
        kcell[sl] = body.material.conductivity
        capacity[sl] = body.material.volumetric_heat_capacity * dx**3
        slices.append((sl, start, count))

    def face_g(k1, k2):
        with np.errstate(divide="ignore", invalid="ignore"):
            harmonic = np.where((k1 > 0) & (k2 > 0), 2.0 * k1 * k2 / (k1 + k2), 0.0)
        return harmonic * dx

    gx = face_g(kcell[:-1, :, :], kcell[1:, :, :])
    gy = face_g(kcell[:, :-1, :], kcell[:, 1:, :])
    gz = face_g(kcell[:, :, :-1], kcell[:, :, 1:])

    g_conv = np.zeros(shape)
    h = 0.0
    ambient = system.initial_temperature
    if isinstance(system.boundary, Convection):
        bc = system.boundary
        h, ambient = bc.h, bc.ambient
        allowed = set(bc.faces) if bc.faces is not None else set(_DIRECTIONS)
        solid = body_index >= 0
        padded = np.pad(solid, 1, constant_values=False)
        for axis in range(3):
            for sign, name in ((-1, f"-{'xyz'[axis]}"), (1, f"+{'xyz'[axis]}")):
                if name not in allowed:
                    continue
                nb = np.roll(padded, -sign, axis=axis)[1:-1, 1:-1, 1:-1]
                g_conv += np.where(solid & ~nb, h * dx**2, 0.0)

    probes = []
    for b_idx, (body, (sl, start, count)) in enumerate(zip(system.bodies, slices)):
        per_axis = []
        for a in range(3):
            u = (body.probe[a] - lo[a]) / dx
            r = round(u)
            if abs(u - r) < 1e-9:
                cand = [r - 1, r]
            else:
                cand = [math.floor(u)]
            cand = [c for c in cand if start[a] <= c < start[a] + count[a]]
            per_axis.append(cand)
        cells = [c for c in product(*per_axis) if body_index[c] == b_idx]
        if not cells:
            raise GeometryUnresolvable(f"probe of body {body.id!r} does not fall in its cells")
        idx = tuple(np.array(ax) for ax in zip(*cells))
        probes.append(idx)

    return VoxelGrid(
        dx=float(dx),
        origin=tuple(float(v) for v in lo),
        body_index=body_index,
        capacity=capacity,
        gx=gx,
        gy=gy,
        gz=gz,
        g_conv=g_conv,
        ambient=float(ambient),
        temperature=np.full(shape, float(system.initial_temperature)),
        source=np.zeros(shape),
        body_ids=system.body_ids,
        profiles=tuple(b.power for b in system.bodies),
        probes=tuple(probes),
        h=float(h),
    )


def stable_dt(grid: VoxelGrid) -> float:
    """Largest forward-Euler step, with a 0.9 safety factor.

    Per cell the limit is ``C / (2 * D * G_max)`` where ``G_max`` is the
    largest conductance on any of its faces (conduction or convection).
    """
    g_max = np.where(grid.g_conv > 0, grid.h * grid.dx**2, 0.0)
    for axis, g in enumerate((grid.gx, grid.gy, grid.gz)):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        g_max[tuple(lo)] = np.maximum(g_max[tuple(lo)], g)
        g_max[tuple(hi)] = np.maximum(g_max[tuple(hi)], g)
    d = max(grid.active_dims, 1)
    solid = (grid.capacity > 0) & (g_max > 0)
    if not solid.any():
        return math.inf
    return SAFETY_FACTOR * float(np.min(grid.capacity[solid] / (2.0 * d * g_max[solid])))


@numba.njit(cache=True, nogil=True)
def _euler(temp, inv_c, gx, gy, gz, g_conv, t_amb, q, dt, nsteps):
    nx, ny, nz = temp.shape
    flux = np.empty_like(temp)
    for _ in range(nsteps):
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    flux[i, j, k] = q[i, j, k] + g_conv[i, j, k] * (t_amb - temp[i, j, k])
        for i in range(nx - 1):
            for j in range(ny):
                for k in range(nz):
                    f = gx[i, j, k] * (temp[i + 1, j, k] - temp[i, j, k])
                    flux[i, j, k] += f
                    flux[i + 1, j, k] -= f
        for i in range(nx):
            for j in range(ny - 1):
                for k in range(nz):
                    f = gy[i, j, k] * (temp[i, j + 1, k] - temp[i, j, k])
                    flux[i, j, k] += f
                    flux[i, j + 1, k] -= f
        for i in range(nx):
            for j in range(ny):
                for k in range(nz - 1):
                    f = gz[i, j, k] * (temp[i, j, k + 1] - temp[i, j, k])
                    flux[i, j, k] += f
                    flux[i, j, k + 1] -= f
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    temp[i, j, k] += dt * flux[i, j, k] * inv_c[i, j, k]
    return temp


def _sources(grid: VoxelGrid, t: float) -> np.ndarray:
    q = np.zeros(grid.shape)
    for b_idx, profile in enumerate(grid.profiles):
        watts = power_at(profile, t)
        if watts:
            mask = grid.body_index == b_idx
            q[mask] = watts / np.count_nonzero(mask)
    return q


def _inv_capacity(grid: VoxelGrid) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(grid.capacity > 0, 1.0 / np.where(grid.capacity > 0, grid.capacity, 1.0), 0.0)


def _run(grid: VoxelGrid, q: np.ndarray, dt: float, nsteps: int, inv_c=None) -> np.ndarray:
    if inv_c is None:
        inv_c = _inv_capacity(grid)
    temp = np.ascontiguousarray(grid.temperature, dtype=float).copy()
    return _euler(temp, inv_c, grid.gx, grid.gy, grid.gz, grid.g_conv, grid.ambient, q, dt, nsteps)


def step(grid: VoxelGrid, dt: float, t: float) -> VoxelGrid:
    """One forward-Euler step from time ``t`` with sources evaluated at ``t``."""
    limit = stable_dt(grid)
    if dt > limit * (1 + 1e-12):
        raise StabilityViolation(f"dt = {dt!r} s exceeds stable_dt = {limit!r} s")
    q = _sources(grid, t)
    return replace(grid, temperature=_run(grid, q, dt, 1), source=q)


def advance(grid: VoxelGrid, t_start: float, t_end: float, dt_max: float | None = None) -> VoxelGrid:
    """Integrate from ``t_start`` to ``t_end`` exactly, splitting at power changes.

    Each interval between power changes is covered by equal steps no larger
    than ``dt_max`` (default ``stable_dt``).
    """
    limit = stable_dt(grid)
    if dt_max is None:
        dt_max = limit
    elif dt_max > limit * (1 + 1e-12):
        raise StabilityViolation(f"dt_max = {dt_max!r} s exceeds stable_dt = {limit!r} s")
    breaks = sorted({t for p in grid.profiles for t in p.start_times if t_start < t < t_end})
    inv_c = _inv_capacity(grid)
    edges = [t_start, *breaks, t_end]
    q = grid.source
    temp = grid.temperature
    for a, b in zip(edges[:-1], edges[1:]):
        span = b - a
        if span <= 0:
            continue
        n = max(1, math.ceil(span / dt_max - 1e-9))
        q = _sources(grid, a)
        temp = _euler(
            np.array(temp, dtype=float), inv_c, grid.gx, grid.gy, grid.gz,
            grid.g_conv, grid.ambient, q, span / n, n,
        )
    return replace(grid, temperature=temp, source=q)


def sample_times(duration: float, sample_dt: float) -> np.ndarray:
    n = int(math.floor(duration / sample_dt + 1e-9))
    times = np.arange(n + 1) * sample_dt
    if duration - times[-1] > 1e-9 * max(1.0, duration):
        times = np.append(times, duration)
    return times


def simulate(
    system: SystemConfig,
    duration: float,
    dx: float,
    sample_dt: float,
    quantity: str = "probe",
    grid: VoxelGrid | None = None,
) -> TemperatureTrace:
    """Run the solver and record one temperature per body at each sample time.

    ``quantity`` selects the probe cell temperature (``"probe"``) or the
    capacity-weighted body mean (``"mean"``). Row 0 is ``t = 0`` at the
    initial temperature.
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    if not (sample_dt > 0):
        raise ValueError(f"sample_dt must be > 0, got {sample_dt}")
    if quantity not in ("probe", "mean"):
        raise ValueError(f"quantity must be 'probe' or 'mean', got {quantity!r}")
    if grid is None:
        grid = build_grid(system, dx)
    read = VoxelGrid.probe_temperatures if quantity == "probe" else VoxelGrid.mean_temperatures
    times = sample_times(duration, sample_dt) if duration > 0 else np.array([0.0])
    rows = [read(grid)]
    for a, b in zip(times[:-1], times[1:]):
        grid = advance(grid, float(a), float(b))
        rows.append(read(grid))
    return TemperatureTrace(times, np.array(rows), system.body_ids)
