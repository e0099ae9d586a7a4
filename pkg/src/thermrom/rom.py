"""Reduced-order transient thermal model.

Body temperature is split into a system-wide linear curve, whose slope is
total power over total capacitance, plus a per-body exponential deviation::

    T_i(t) = T0 + T_L(t) + sum_j dA_ij * (1 - exp(-k_i * (t - t_j)))

where ``dA_ij`` is the step change at transient ``j`` of the power-weighted
characteristic resistances of body ``i``. Both sums are exact superpositions
of step responses because the underlying heat equation is linear.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .core import PowerProfile, power_at
from .errors import ConfigError, DegenerateInput, IdMismatch
from .trace import TemperatureTrace

__all__ = [
    "CharacterizedModel",
    "LinearMap",
    "slope_schedule",
    "linear_curve",
    "deviation_constant",
    "deviation_piecewise",
    "predict",
    "convection_single_body",
    "convection_resistance",
    "steady_state_model",
    "analytical_resistance",
    "resistance_linear_map",
    "midpoint",
    "capacity_centroid",
]

Profiles = Union[Mapping[str, PowerProfile], Sequence[PowerProfile]]


@dataclass(frozen=True)
class CharacterizedModel:
    """Fitted parameters of one system.

    ``R[i, s]`` is the signed characteristic resistance (K/W) of body ``i``
    for unit power in source ``s``; ``k[i]`` is the time constant (1/s) of
    body ``i``. A NaN in ``k`` falls back to ``1 / (|R| * C_T)`` per source.
    """

    body_ids: tuple[str, ...]
    source_ids: tuple[str, ...]
    T0: float
    C_T: float
    R: np.ndarray
    k: np.ndarray
    t_m: float = 20.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        R = np.array(self.R, dtype=float).reshape(len(self.body_ids), len(self.source_ids))
        k = np.array(self.k, dtype=float).reshape(len(self.body_ids))
        if not np.all(np.isfinite(R)):
            raise ValueError("R entries must be finite")
        if np.any(k[~np.isnan(k)] <= 0):
            raise ValueError(f"time constants must be > 0, got {k}")
        if not (self.C_T > 0):
            raise ValueError(f"C_T must be > 0, got {self.C_T}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "body_ids", tuple(self.body_ids))
        object.__setattr__(self, "source_ids", tuple(self.source_ids))

    def body_index(self, body) -> int:
        if isinstance(body, (int, np.integer)):
            return int(body)
        try:
            return self.body_ids.index(body)
        except ValueError:
            raise IdMismatch(f"unknown body id {body!r}; model has {list(self.body_ids)}") from None

    def rates(self, i: int) -> np.ndarray:
        """Exponential rate applied to each source term of body ``i``."""
        if not np.isnan(self.k[i]):
            return np.full(len(self.source_ids), self.k[i])
        with np.errstate(divide="ignore"):
            r = 1.0 / (np.abs(self.R[i]) * self.C_T)
        # a zero resistance contributes nothing; keep its rate finite
        return np.where(np.isfinite(r), r, 0.0)

    def to_dict(self) -> dict:
        return {
            "body_ids": list(self.body_ids),
            "source_ids": list(self.source_ids),
            "T0": self.T0,
            "C_T": self.C_T,
            "t_m": self.t_m,
            "R": self.R.tolist(),
            "k": [None if np.isnan(v) else float(v) for v in self.k],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CharacterizedModel":
        try:
            return cls(
                body_ids=tuple(doc["body_ids"]),
                source_ids=tuple(doc["source_ids"]),
                T0=float(doc["T0"]),
                C_T=float(doc["C_T"]),
                R=np.array(doc["R"], dtype=float),
                k=np.array([np.nan if v is None else v for v in doc["k"]], dtype=float),
                t_m=float(doc.get("t_m", 20.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"model file missing field {exc.args[0]!r}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "CharacterizedModel":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(doc)


def _ordered_profiles(model: CharacterizedModel, profiles: Profiles) -> list[PowerProfile]:
    if isinstance(profiles, Mapping):
        known = set(model.body_ids) | set(model.source_ids)
        unknown = sorted(s for s in profiles if s not in known)
        if unknown:
            raise IdMismatch(f"schedule ids not in model: {unknown}")
        # non-source bodies may appear only with an all-zero schedule
        uncharacterized = sorted(
            s for s in profiles if s not in model.source_ids and not profiles[s].is_zero
        )
        if uncharacterized:
            raise IdMismatch(f"schedule powers bodies that were never characterized as sources: {uncharacterized}")
        return [profiles.get(s, PowerProfile()) for s in model.source_ids]
    profiles = list(profiles)
    if len(profiles) != len(model.source_ids):
        raise IdMismatch(f"expected {len(model.source_ids)} profiles, got {len(profiles)}")
    return profiles


def _change_table(profiles: Sequence[PowerProfile]) -> tuple[np.ndarray, np.ndarray]:
    """Union of change instants and the power of every source on each segment."""
    starts = sorted({t for p in profiles for t in p.start_times} | {0.0})
    table = np.array([[power_at(p, t) for p in profiles] for t in starts], dtype=float)
    return np.array(starts), table.reshape(len(starts), len(profiles))


def slope_schedule(profiles: Sequence[PowerProfile], C_T: float) -> tuple[np.ndarray, np.ndarray]:
    """Change instants and the linear-curve slope ``P_T / C_T`` after each."""
    starts, table = _change_table(list(profiles))
    return starts, table.sum(axis=1) / C_T


def linear_curve(schedule: tuple[Sequence[float], Sequence[float]], t):
    """Rise of the linear temperature curve above T0 at time(s) ``t``.

    ``schedule`` is ``(start_times, slopes)`` as returned by
    :func:`slope_schedule`; each slope change contributes a ramp from its
    start time onward.
    """
    starts = np.asarray(schedule[0], dtype=float)
    slopes = np.asarray(schedule[1], dtype=float)
    t = np.asarray(t, dtype=float)
    dslope = np.diff(slopes, prepend=0.0)
    lag = t[..., None] - starts
    return np.sum(dslope * np.where(lag > 0, lag, 0.0), axis=-1)


def deviation_constant(model: CharacterizedModel, body, powers: Sequence[float], t):
    """Deviation of ``body`` under constant source powers applied at t = 0."""
    i = model.body_index(body)
    powers = np.asarray(powers, dtype=float)
    if powers.shape != (len(model.source_ids),):
        raise IdMismatch(f"expected {len(model.source_ids)} powers, got {powers.shape}")
    t = np.asarray(t, dtype=float)
    rates = model.rates(i)
    terms = powers * model.R[i] * -np.expm1(-np.multiply.outer(t, rates))
    return terms.sum(axis=-1)


def deviation_piecewise(model: CharacterizedModel, body, profiles: Profiles, t):
    """Deviation of ``body`` under piecewise-constant source schedules."""
    i = model.body_index(body)
    starts, table = _change_table(_ordered_profiles(model, profiles))
    t = np.asarray(t, dtype=float)
    rates = model.rates(i)
    # step change of each source's power at every transient
    dP = np.diff(table, axis=0, prepend=np.zeros((1, table.shape[1])))
    steps = dP * model.R[i]  # (n_changes, n_sources)
    lag = t[..., None] - starts  # (..., n_changes)
    active = lag > 0
    lag = np.where(active, lag, 0.0)
    resp = -np.expm1(-lag[..., None] * rates)  # (..., n_changes, n_sources)
    return np.sum(np.where(active[..., None], steps * resp, 0.0), axis=(-2, -1))


def predict(model: CharacterizedModel, profiles: Profiles, times) -> TemperatureTrace:
    """Probe temperatures of every model body at ``times``."""
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0 or np.any(np.diff(times) <= 0)):
        raise ValueError("times must be sorted, strictly increasing and >= 0")
    ordered = _ordered_profiles(model, profiles)
    base = model.T0 + linear_curve(slope_schedule(ordered, model.C_T), times)
    cols = [base + deviation_piecewise(model, i, ordered, times) for i in range(len(model.body_ids))]
    return TemperatureTrace(times, np.column_stack(cols), model.body_ids)


def convection_resistance(h: float, area: float) -> float:
    """Body-to-fluid resistance ``1 / (h A)`` in K/W."""
    if not (h > 0 and area > 0):
        raise ValueError("h and area must be > 0")
    return 1.0 / (h * area)


def convection_single_body(T0: float, P: float, h: float, area: float, C_T: float, t):
    """Single solid body exchanging heat with a fluid through ``h``.

    Rises as ``P R (1 - exp(-t / (R C_T)))`` with ``R = 1/(h A)`` and
    saturates at ``T0 + P R``.
    """
    if not (C_T > 0):
        raise ValueError("C_T must be > 0")
    R = convection_resistance(h, area)
    return T0 + P * R * -np.expm1(-np.asarray(t, dtype=float) / (R * C_T))


def steady_state_model(T0: float, powers, R_row, k_row, t):
    """Direct exponential model without the linear curve.

    For systems that settle to a steady temperature instead of heating up
    indefinitely, each source contributes ``P R (1 - exp(-k t))``.
    """
    powers = np.asarray(powers, dtype=float)
    R_row = np.asarray(R_row, dtype=float)
    k_row = np.broadcast_to(np.asarray(k_row, dtype=float), R_row.shape)
    t = np.asarray(t, dtype=float)
    return T0 + np.sum(powers * R_row * -np.expm1(-np.multiply.outer(t, k_row)), axis=-1)


def analytical_resistance(x, x_ref, K: float, A_cross: float) -> float:
    """Conduction resistance ``L / (K A)`` from a body centre to a reference point."""
    if not (K > 0 and A_cross > 0):
        raise ValueError("K and A_cross must be > 0")
    L = float(np.linalg.norm(np.atleast_1d(np.asarray(x, float) - np.asarray(x_ref, float))))
    return L / (K * A_cross)


def midpoint(x1, x2) -> np.ndarray:
    """Default reference point: halfway between two body centres."""
    return 0.5 * (np.asarray(x1, dtype=float) + np.asarray(x2, dtype=float))


@dataclass(frozen=True)
class LinearMap:
    m: float
    c: float
    r2: float

    def __call__(self, calculated):
        return self.m * np.asarray(calculated, dtype=float) + self.c


def resistance_linear_map(fitted, calculated) -> LinearMap:
    """Ordinary least-squares line ``fitted = m * calculated + c`` and its r^2."""
    y = np.asarray(fitted, dtype=float)
    x = np.asarray(calculated, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateInput("fitted and calculated must be 1-D and equally long")
    if x.size < 3:
        raise DegenerateInput(f"need >= 3 paired points, got {x.size}")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0 or np.ptp(x) <= 1e-15 * max(1.0, float(np.abs(x).max())):
        raise DegenerateInput("all calculated resistances are equal")
    yc = y - y.mean()
    m = float(xc @ yc) / sxx
    c = float(y.mean() - m * x.mean())
    resid = y - (m * x + c)
    syy = float(yc @ yc)
    r2 = 1.0 - float(resid @ resid) / syy if syy > 0 else 1.0
    return LinearMap(m, c, r2)


def capacity_centroid(bodies) -> np.ndarray:
    """Capacity-weighted mean of body centres.

    An alternative reference point that leans toward the body with the larger
    thermal capacitance.
    """
    caps = np.array([b.capacitance for b in bodies])
    centers = np.array([b.box.center for b in bodies])
    return caps @ centers / caps.sum()
