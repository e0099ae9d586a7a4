"""Error metrics between a reference (solver) trace and a model trace."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import IdMismatch, NoOverlap
from .trace import TemperatureTrace

EPS = 1e-9


@dataclass(frozen=True)
class ComparisonReport:
    """Per-body errors; percent error is on the temperature rise above ``t0``."""

    body_ids: tuple[str, ...]
    avg_percent_error: dict[str, float]
    max_abs_error: dict[str, float]
    rmse: dict[str, float]
    t0: float
    n_samples: int
    oracle_s: float | None = None
    rom_s: float | None = None

    @property
    def speedup(self) -> float | None:
        if self.oracle_s is None or not self.rom_s:
            return None
        return self.oracle_s / self.rom_s

    @property
    def worst_percent_error(self) -> float:
        return max(self.avg_percent_error.values())

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["body_ids"] = list(self.body_ids)
        doc["basis"] = "percent error = mean |T_b - T_a| / (|T_a - t0| + eps), rise above t0"
        doc["speedup"] = self.speedup
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self) -> str:
        lines = [
            "errors on temperature rise above T0 = %g degC (%d samples)" % (self.t0, self.n_samples),
            f"{'body':<16}{'avg %':>10}{'max |dT| K':>14}{'rmse K':>12}",
        ]
        for b in self.body_ids:
            lines.append(
                f"{b:<16}{self.avg_percent_error[b]:>10.4f}{self.max_abs_error[b]:>14.6g}{self.rmse[b]:>12.6g}"
            )
        if self.speedup is not None:
            lines.append(f"runtime: oracle {self.oracle_s:.4g} s, rom {self.rom_s:.4g} s, speedup {self.speedup:.1f}x")
        return "\n".join(lines)


def _common_grid(a: TemperatureTrace, b: TemperatureTrace) -> np.ndarray:
    lo = max(a.times[0], b.times[0])
    hi = min(a.times[-1], b.times[-1])
    if hi < lo or (hi == lo and len(a) > 1 and len(b) > 1):
        raise NoOverlap(f"traces do not overlap: [{a.times[0]}, {a.times[-1]}] vs [{b.times[0]}, {b.times[-1]}]")
    tol = 1e-12 * max(1.0, abs(hi))
    in_a = a.times[(a.times >= lo - tol) & (a.times <= hi + tol)]
    in_b = b.times[(b.times >= lo - tol) & (b.times <= hi + tol)]
    grid = in_a if in_a.size <= in_b.size else in_b
    return np.clip(grid, lo, hi)


def compare_traces(
    reference: TemperatureTrace,
    candidate: TemperatureTrace,
    t0: float | None = None,
    eps: float = EPS,
    oracle_s: float | None = None,
    rom_s: float | None = None,
) -> ComparisonReport:
    """Compare ``candidate`` against ``reference`` on their common time range.

    Both traces are linearly interpolated onto the coarser of the two sample
    grids inside the overlap. ``t0`` defaults to the reference's first value
    of each body.
    """
    missing = sorted(set(reference.ids) ^ set(candidate.ids))
    if missing:
        raise IdMismatch(f"traces have different body ids: {missing}")
    times = _common_grid(reference, candidate)
    ra = reference.interpolate(times)
    rb = candidate.interpolate(times)
    avg, mx, rmse = {}, {}, {}
    for b in reference.ids:
        a = ra.series(b)
        c = rb.series(b)
        base = reference.series(b)[0] if t0 is None else t0
        err = np.abs(c - a)
        avg[b] = float(np.mean(err / (np.abs(a - base) + eps)) * 100.0)
        mx[b] = float(err.max())
        rmse[b] = float(np.sqrt(np.mean(err**2)))
    t0_out = float(reference.values[0, 0]) if t0 is None else float(t0)
    return ComparisonReport(reference.ids, avg, mx, rmse, t0_out, int(times.size), oracle_s, rom_s)
