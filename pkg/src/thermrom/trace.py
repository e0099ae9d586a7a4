"""Sampled probe temperature series shared by the solver and the reduced model."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, NoOverlap


@dataclass(frozen=True)
class TemperatureTrace:
    """Temperatures in degC, one column per body, one row per sample time."""

    times: np.ndarray
    values: np.ndarray  # shape (n_times, n_series)
    ids: tuple[str, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape != (times.size, len(self.ids)):
            raise ValueError(
                f"values shape {values.shape} does not match {times.size} times x {len(self.ids)} ids"
            )
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("trace times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __len__(self):
        return self.times.size

    def series(self, body_id: str) -> np.ndarray:
        return self.values[:, self.ids.index(body_id)]

    def __getitem__(self, body_id: str) -> np.ndarray:
        return self.series(body_id)

    def interpolate(self, times) -> "TemperatureTrace":
        times = np.asarray(times, dtype=float)
        lo, hi = self.times[0], self.times[-1]
        if times.size and (times[0] < lo - 1e-12 or times[-1] > hi + 1e-12):
            raise NoOverlap(f"requested times outside [{lo}, {hi}]")
        cols = [np.interp(times, self.times, self.values[:, j]) for j in range(len(self.ids))]
        return TemperatureTrace(times, np.column_stack(cols) if cols else np.empty((times.size, 0)), self.ids)

    def to_csv(self, path: str | Path | None = None) -> str:
        """Write ``time,<id>...`` rows at full (round-trip) precision."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time", *self.ids])
        for t, row in zip(self.times, self.values):
            writer.writerow([repr(float(t)), *(repr(float(v)) for v in row)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "TemperatureTrace":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or not rows[0] or rows[0][0] != "time":
            raise ConfigError(f"{path}: expected a 'time,<id>...' header")
        ids = tuple(rows[0][1:])
        try:
            data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if data.size == 0:
            data = np.empty((0, len(ids) + 1))
        return cls(data[:, 0], data[:, 1:], ids)
