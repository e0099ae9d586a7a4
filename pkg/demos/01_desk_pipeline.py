"""Characterize a silver bar bonded to an FR4 tab, then predict an unseen schedule.

The unit-power trials run the voxel solver once per source for 20 s. After
that, any piecewise power schedule is evaluated in closed form. We check the
prediction against a fresh solver run.
"""

import time
from pathlib import Path

import numpy as np

from thermrom import characterize, compare_traces, load_config, predict, simulate
from thermrom.cli import load_schedule

HERE = Path(__file__).parent
DX = 0.0005

system = load_config(HERE / "configs" / "silver_fr4.json")
print("bodies:", ", ".join(f"{b.id} C={b.capacitance:.4g} J/K" for b in system.bodies))

model = characterize(system, t_m=20.0, dx=DX)
print("\nresistance matrix R[body, source] (K/W)")
print(np.array2string(model.R, precision=2))
print("rates k (1/s):", np.array2string(model.k, precision=4))

# an unseen schedule: four power levels on the silver bar, two on the tab
schedule = load_schedule(HERE / "configs" / "schedule.json")
unseen = system.with_powers(schedule)

start = time.perf_counter()
oracle = simulate(unseen, 120.0, DX, 0.5)
oracle_s = time.perf_counter() - start

start = time.perf_counter()
rom = predict(model, schedule, oracle.times)
rom_s = time.perf_counter() - start

print()
print(compare_traces(oracle, rom, oracle_s=oracle_s, rom_s=rom_s).table())

print("\n  t      silver(oracle)  silver(rom)   fr4(oracle)  fr4(rom)")
for t in (10, 30, 50, 70, 100, 120):
    i = int(np.searchsorted(oracle.times, t))
    print(f"{t:4d}   {oracle.values[i, 0]:12.4f} {rom.values[i, 0]:12.4f} "
          f"{oracle.values[i, 1]:12.4f} {rom.values[i, 1]:10.4f}")
