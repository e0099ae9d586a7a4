import itertools

import numpy as np
import pytest
from dataclasses import replace

from thermrom.cases import convection_block, silver_fr4_pair, twin_blocks
from thermrom.core import (
    FR4,
    SILVER,
    BodySpec,
    Box,
    Convection,
    Insulated,
    Material,
    PowerProfile,
    SystemConfig,
)
from thermrom.errors import GeometryUnresolvable, StabilityViolation
from thermrom.oracle import VoxelGrid, advance, build_grid, simulate, stable_dt, step

UNIT = Material("unit", 1000.0, 1000.0, 1.0)  # alpha = 1e-6


def cube(id_="a", edge=0.02, origin=(0, 0, 0), material=UNIT, power=0.0):
    if not isinstance(power, PowerProfile):
        power = PowerProfile.constant(power)
    return BodySpec(id_, Box(origin, (edge, edge, edge)), material, power)


# -- build_grid ---------------------------------------------------------------

def test_build_grid_single_cube():
    grid = build_grid(SystemConfig((cube(),)), 0.005)
    assert grid.shape == (4, 4, 4)
    assert np.count_nonzero(grid.body_index == 0) == 64
    assert np.all(grid.temperature == 20.0)
    assert np.all(grid.source == 0.0)


def test_build_grid_touching_cubes_share_interface():
    a = cube("a", material=SILVER)
    b = cube("b", origin=(0.02, 0, 0), material=FR4)
    grid = build_grid(SystemConfig((a, b)), 0.005)
    assert grid.shape == (8, 4, 4)
    assert not np.any(grid.body_index < 0)
    k_h = 2 * 429.0 * 0.3 / (429.0 + 0.3)
    np.testing.assert_allclose(grid.gx[3], k_h * 0.005)
    np.testing.assert_allclose(grid.gx[0], 429.0 * 0.005)


def test_build_grid_void_cells_have_no_conductance():
    a = cube("a", edge=0.01)
    b = cube("b", edge=0.01, origin=(0.02, 0, 0))
    grid = build_grid(SystemConfig((a, b)), 0.005)
    assert np.all(grid.body_index[2:4] == -1)
    assert np.all(grid.capacity[2:4] == 0)
    assert np.all(grid.gx[1:4] == 0)


def test_build_grid_misaligned_body():
    b = cube(edge=0.0123)
    with pytest.raises(GeometryUnresolvable):
        build_grid(SystemConfig((b,)), 0.005)


def test_build_grid_needs_two_cells_per_axis():
    b = BodySpec("thin", Box((0, 0, 0), (0.02, 0.02, 0.005)), UNIT)
    with pytest.raises(GeometryUnresolvable, match="2 per axis"):
        build_grid(SystemConfig((b,)), 0.005)


def test_build_grid_source_density_matches_power():
    system = SystemConfig((cube(power=3.0),))
    grid = step(build_grid(system, 0.005), 1e-3, 0.0)
    assert np.sum(grid.source_density * grid.dx**3) == pytest.approx(3.0)


def test_probe_on_cell_boundaries_averages_neighbours():
    grid = build_grid(SystemConfig((cube(edge=0.02),)), 0.005)
    # centre of a 4-cell cube is a vertex shared by 8 cells
    assert len(grid.probes[0][0]) == 8
    odd = BodySpec("o", Box((0, 0, 0), (0.015, 0.015, 0.015)), UNIT)
    grid = build_grid(SystemConfig((odd,)), 0.005)
    assert [a.tolist() for a in grid.probes[0]] == [[1], [1], [1]]


def test_convective_area_of_cube():
    grid = build_grid(convection_block(50.0), 0.001)
    assert grid.exposed_area() == pytest.approx(6 * 0.005**2)
    top_only = replace(convection_block(50.0), boundary=Convection(h=50.0, faces=("+z",)))
    assert build_grid(top_only, 0.001).exposed_area() == pytest.approx(0.005**2)


# -- stable_dt ----------------------------------------------------------------

def test_stable_dt_homogeneous():
    dx = 0.005
    grid = build_grid(SystemConfig((cube(),)), dx)
    assert stable_dt(grid) == pytest.approx(0.9 * dx**2 / (6 * UNIT.diffusivity), rel=1e-12)


def test_stable_dt_quarters_when_dx_halves():
    system = SystemConfig((cube(),))
    assert stable_dt(build_grid(system, 0.0025)) == pytest.approx(stable_dt(build_grid(system, 0.005)) / 4)


def _brute_force_dt(system, dx):
    """Per-cell limit from raw materials, walking every cell and neighbour."""
    lo = np.min([b.box.origin for b in system.bodies], axis=0)
    hi = np.max([b.box.upper for b in system.bodies], axis=0)
    shape = tuple(int(round(v)) for v in (hi - lo) / dx)

    def material_at(idx):
        centre = lo + (np.array(idx) + 0.5) * dx
        for b in system.bodies:
            if b.box.contains(centre):
                return b.material
        return None

    best = np.inf
    for idx in itertools.product(*(range(n) for n in shape)):
        m = material_at(idx)
        if m is None:
            continue
        k_max = 0.0
        for axis, sign in itertools.product(range(3), (-1, 1)):
            nb = list(idx)
            nb[axis] += sign
            if not 0 <= nb[axis] < shape[axis]:
                continue
            mn = material_at(tuple(nb))
            if mn is None:
                continue
            k_max = max(k_max, 2 * m.conductivity * mn.conductivity / (m.conductivity + mn.conductivity))
        if k_max:
            best = min(best, m.density * m.specific_heat * dx**2 / (2 * 3 * k_max))
    return 0.9 * best


def test_stable_dt_mixed_grid_governed_by_silver():
    system = SystemConfig((cube("ag", 0.01, material=SILVER), cube("fr", 0.01, (0.01, 0, 0), material=FR4)))
    dx = 0.0025
    dt = stable_dt(build_grid(system, dx))
    assert dt == pytest.approx(_brute_force_dt(system, dx), rel=1e-12)
    assert dt == pytest.approx(0.9 * dx**2 / (6 * SILVER.diffusivity), rel=1e-12)


# -- step ---------------------------------------------------------------------

def test_step_uniform_no_power_unchanged():
    grid = build_grid(SystemConfig((cube(),)), 0.005)
    out = step(grid, stable_dt(grid), 0.0)
    assert np.array_equal(out.temperature, grid.temperature)


def test_step_insulated_energy_exact():
    system = SystemConfig((cube(power=2.0), cube("b", origin=(0.02, 0, 0), material=FR4)))
    grid = build_grid(system, 0.005)
    dt = stable_dt(grid)
    n = 50
    c_total = system.total_capacitance
    for i in range(n):
        grid = step(grid, dt, i * dt)
    mean_rise = grid.energy(20.0) / c_total
    assert mean_rise == pytest.approx(2.0 * n * dt / c_total, rel=1e-12)


def _rod(t_left, t_right):
    """Hand-built 2-cell rod: C = 2 J/K per cell, face conductance 1 W/K."""
    shape = (2, 1, 1)
    return VoxelGrid(
        dx=1.0,
        origin=(0.0, 0.0, 0.0),
        body_index=np.zeros(shape, dtype=np.int32),
        capacity=np.full(shape, 2.0),
        gx=np.ones((1, 1, 1)),
        gy=np.zeros((2, 0, 1)),
        gz=np.zeros((2, 1, 0)),
        g_conv=np.zeros(shape),
        ambient=0.0,
        temperature=np.array([t_left, t_right], dtype=float).reshape(shape),
        source=np.zeros(shape),
        body_ids=("rod",),
        profiles=(PowerProfile(),),
        probes=((np.array([0]), np.array([0]), np.array([0])),),
    )


def test_step_two_cell_rod_hand_computed():
    grid = _rod(100.0, 0.0)
    # 1-D: dt_max = 0.9 * C / (2 * G) = 0.9 s; flux = G * 100 = 100 W
    assert stable_dt(grid) == pytest.approx(0.9)
    out = step(grid, 0.9, 0.0)
    np.testing.assert_allclose(out.temperature.ravel(), [55.0, 45.0])
    gained = 2.0 * (out.temperature.ravel() - [100.0, 0.0])
    assert gained[0] == pytest.approx(-gained[1])


def test_step_rejects_unstable_dt():
    grid = build_grid(SystemConfig((cube(),)), 0.005)
    with pytest.raises(StabilityViolation):
        step(grid, 1.01 * stable_dt(grid), 0.0)


def test_step_convection_face_exchange():
    system = SystemConfig((cube(edge=0.01),), Convection(h=10.0, ambient=0.0), initial_temperature=20.0)
    grid = build_grid(system, 0.005)
    dt = stable_dt(grid)
    out = step(grid, dt, 0.0)
    # each corner cell has three faces exposed to 0 degC air
    expected = 20.0 - dt * 3 * 10.0 * 0.005**2 * 20.0 / grid.capacity[0, 0, 0]
    np.testing.assert_allclose(out.temperature, expected)


# -- simulate -----------------------------------------------------------------

def test_simulate_zero_power_flat():
    trace = simulate(SystemConfig((cube(),)), 50.0, 0.005, 10.0)
    assert trace.times.tolist() == [0, 10, 20, 30, 40, 50]
    assert np.all(trace.values == 20.0)


def test_simulate_single_body_energy_bookkeeping():
    # C = 1000 * 1000 * 5e-5 = 50 J/K; 1 W for 100 s -> +2 K
    body = BodySpec("a", Box((0, 0, 0), (0.05, 0.01, 0.1)), UNIT, PowerProfile.constant(1.0))
    system = SystemConfig((body,))
    assert system.total_capacitance == pytest.approx(50.0)
    trace = simulate(system, 100.0, 0.005, 10.0)
    assert trace.values[0, 0] == 20.0
    assert trace.values[-1, 0] == pytest.approx(22.0, rel=1e-12)


def test_simulate_zero_duration_returns_initial_row():
    trace = simulate(SystemConfig((cube(power=1.0),)), 0.0, 0.005, 1.0)
    assert trace.times.tolist() == [0.0]
    assert trace.values.tolist() == [[20.0]]


def test_simulate_partial_last_sample():
    trace = simulate(SystemConfig((cube(power=1.0),)), 25.0, 0.005, 10.0)
    assert trace.times.tolist() == [0, 10, 20, 25]


def test_simulate_mean_quantity_matches_energy():
    system = silver_fr4_pair()
    trace = simulate(system, 10.0, 0.0005, 5.0, quantity="mean")
    caps = np.array([b.capacitance for b in system.bodies])
    stored = caps @ (trace.values[-1] - 20.0)
    injected = sum(b.power.energy(10.0) for b in system.bodies)
    assert stored == pytest.approx(injected, rel=1e-9)


# -- invariants ---------------------------------------------------------------

@pytest.mark.parametrize("duration", [3.0, 17.5, 45.0])
def test_energy_conservation_insulated(duration):
    system = silver_fr4_pair()
    grid = advance(build_grid(system, 0.0005), 0.0, duration)
    injected = sum(b.power.energy(duration) for b in system.bodies)
    assert abs(grid.energy(20.0) - injected) / injected < 1e-6


def test_maximum_principle_without_sources():
    system = SystemConfig((cube("a", 0.01, material=SILVER), cube("b", 0.01, (0.01, 0, 0), material=FR4)))
    grid = build_grid(system, 0.0025)
    rng = np.random.default_rng(7)
    grid = replace(grid, temperature=rng.uniform(10.0, 90.0, grid.shape))
    lo, hi = grid.temperature.min(), grid.temperature.max()
    for t_end in (0.01, 0.5, 5.0):
        out = advance(grid, 0.0, t_end)
        assert out.temperature.min() >= lo - 1e-12
        assert out.temperature.max() <= hi + 1e-12


def test_mirror_symmetry():
    grid = advance(build_grid(twin_blocks(), 0.001), 0.0, 2.0)
    t = grid.temperature
    assert np.max(np.abs(t - t[::-1, :, :])) < 1e-9
    assert np.max(np.abs(t - t[:, ::-1, :])) < 1e-9


def test_superposition_of_schedules():
    base = silver_fr4_pair()
    p1 = {"silver": PowerProfile(((0, 0.02), (5, 0.0)))}
    p2 = {"fr4": PowerProfile(((0, 0.0), (3, 0.01)))}
    both = {"silver": p1["silver"], "fr4": p2["fr4"]}
    run = lambda p: simulate(base.with_powers(p), 12.0, 0.0005, 0.5)  # noqa: E731
    a, b, ab = run(p1), run(p2), run(both)
    np.testing.assert_allclose(ab.values, a.values + b.values - 20.0, rtol=0, atol=1e-9)
