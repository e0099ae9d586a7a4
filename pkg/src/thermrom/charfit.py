"""Characterization: unit-power trials on the solver and exponential fits.

Each source body is driven alone at unit power for a short horizon ``t_m``.
The deviation of every body from the linear curve is fitted with
``A * (1 - exp(-k t))``; with unit power ``A`` is the characteristic
resistance directly.
"""

from __future__ import annotations

import json
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .core import Convection, PowerProfile, SystemConfig, total_capacitance
from .errors import ConfigError, NoConvergence, NonIdentifiable, NotStationary
from .oracle import build_grid, simulate
from .rom import CharacterizedModel

__all__ = [
    "TrialResult",
    "ExpFit",
    "FitEntry",
    "FitReport",
    "HFit",
    "run_unit_trials",
    "fit_exponential",
    "fit_trials",
    "characterize",
    "resistance_from_trial",
    "fit_h",
    "max_workers",
]

log = logging.getLogger(__name__)

FATOL = 1e-10
MAXITER = 2000
K_DISAGREEMENT = 0.2


def max_workers() -> int:
    """Trial parallelism, capped by ``THERMROM_THREADS`` when set."""
    env = os.environ.get("THERMROM_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, int(env)) if int(env) > 0 else n
        except ValueError:
            log.warning("ignoring non-integer THERMROM_THREADS=%r", env)
    return max(1, n)


@dataclass(frozen=True)
class TrialResult:
    source_id: str
    power: float
    t_m: float
    times: np.ndarray
    body_ids: tuple[str, ...]
    deviation: np.ndarray  # (n_times, n_bodies), temperature minus T0 minus linear curve
    temperature: np.ndarray  # raw probe temperatures, same shape

    def series(self, body_id: str) -> np.ndarray:
        return self.deviation[:, self.body_ids.index(body_id)]

    def to_csv(self) -> str:
        lines = [",".join(["time", *self.body_ids])]
        for t, row in zip(self.times, self.deviation):
            lines.append(",".join([repr(float(t)), *(repr(float(v)) for v in row)]))
        return "\n".join(lines) + "\n"


def _trial_system(system: SystemConfig, source_id: str, power: float) -> SystemConfig:
    return system.with_powers({source_id: PowerProfile.constant(power)})


def _one_trial(system, source_id, t_m, dx, sample_dt, power, c_total) -> TrialResult:
    trial = _trial_system(system, source_id, power)
    trace = simulate(trial, t_m, dx, sample_dt)
    linear = power / c_total * trace.times
    dev = trace.values - system.initial_temperature - linear[:, None]
    return TrialResult(source_id, power, t_m, trace.times, trace.ids, dev, trace.values)


def run_unit_trials(
    system: SystemConfig,
    t_m: float = 20.0,
    dx: float = 0.0005,
    sample_dt: float | None = None,
    power: float = 1.0,
    sources: Sequence[str] | None = None,
    threads: int | None = None,
) -> list[TrialResult]:
    """One solver run per source, that source at ``power`` and the rest at 0.

    Sources default to every body with a nonzero schedule in ``system``.
    Trials run concurrently up to ``threads`` (default :func:`max_workers`).
    """
    if not (t_m > 0):
        raise ValueError(f"t_m must be > 0, got {t_m}")
    sources = tuple(sources) if sources is not None else system.source_ids
    if not sources:
        raise ConfigError("system has no power source to characterize")
    for s in sources:
        system.body(s)
    if sample_dt is None:
        sample_dt = t_m / 200.0
    build_grid(system, dx)  # fail fast on geometry before spawning work
    c_total = total_capacitance(system)
    args = [(system, s, t_m, dx, sample_dt, power, c_total) for s in sources]
    workers = min(threads or max_workers(), len(args))
    log.info("running %d unit trial(s) on %d worker(s)", len(args), workers)
    if workers == 1:
        return [_one_trial(*a) for a in args]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda a: _one_trial(*a), args))


@dataclass(frozen=True)
class ExpFit:
    A: float
    k: float
    sse: float
    rmse: float
    iterations: int
    converged: bool
    identifiable: bool = True


def _nelder_mead(fun, x0, scale_f):
    """Simplex search with one restart from a perturbed simplex on stall."""
    opts = dict(maxiter=MAXITER, xatol=1e-10, fatol=FATOL * scale_f, adaptive=False)
    res = minimize(fun, x0, method="Nelder-Mead", options=opts)
    iterations = int(res.nit)
    if not res.success:
        x = np.asarray(res.x, dtype=float)
        step = np.where(np.abs(x) > 1e-3, 0.05 * x, 0.05)
        simplex = np.vstack([x] + [x + np.eye(x.size)[i] * step[i] for i in range(x.size)])
        res = minimize(fun, x, method="Nelder-Mead", options={**opts, "initial_simplex": simplex})
        iterations += int(res.nit)
    return res, iterations


def fit_exponential(
    times,
    deviation,
    C_T: float | None = None,
    atol: float = 1e-9,
) -> ExpFit:
    """Least-squares fit of ``A * (1 - exp(-k t))`` by simplex search.

    The start point is ``A0 = deviation[-1]`` and ``k0 = 1 / (|A0| C_T)``
    (or ``3 / t_m`` without ``C_T``). The search runs on ``(A / A0,
    log(k / k0))`` so the sign of ``A`` stays free but starts from the sign
    of the final deviation.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(deviation, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and deviation must be 1-D and equally long")
    t_m = float(t[-1])
    A0 = float(y[-1])
    if abs(A0) <= atol:
        warnings.warn(f"final deviation {A0:.3g} K is ~0; nothing to fit", NonIdentifiable, stacklevel=2)
        sse = float(np.sum(y * y))
        return ExpFit(0.0, math.nan, sse, math.sqrt(sse / y.size), 0, True, identifiable=False)
    if y.size < 10:
        warnings.warn(f"only {y.size} samples; fit poorly conditioned", NonIdentifiable, stacklevel=2)
    k0 = 1.0 / (abs(A0) * C_T) if C_T else 3.0 / t_m

    def sse_of(p):
        A = A0 * p[0]
        k = k0 * math.exp(min(p[1], 700.0))
        r = y + A * np.expm1(-k * t)
        return float(r @ r)

    scale = float(y @ y)
    res, iterations = _nelder_mead(sse_of, np.array([1.0, 0.0]), scale)
    if not res.success:
        raise NoConvergence(f"simplex search did not converge after {iterations} iterations")
    A = A0 * float(res.x[0])
    k = k0 * math.exp(float(res.x[1]))
    sse = float(res.fun)
    if k * t_m < 1.0:
        warnings.warn(
            f"fitted time constant 1/k = {1 / k:.3g} s exceeds the {t_m:.3g} s record",
            NonIdentifiable,
            stacklevel=2,
        )
    return ExpFit(A, k, sse, math.sqrt(sse / y.size), iterations, True)


@dataclass(frozen=True)
class FitEntry:
    body: str
    source: str
    A: float
    k: float | None
    sse: float
    rmse: float
    iterations: int
    converged: bool
    identifiable: bool
    endpoint_R: float | None = None


@dataclass
class FitReport:
    entries: list[FitEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(e.converged for e in self.entries)

    def entry(self, body: str, source: str) -> FitEntry:
        for e in self.entries:
            if e.body == body and e.source == source:
                return e
        raise KeyError((body, source))

    def to_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        return {
            "converged": self.converged,
            "entries": [{k: clean(v) for k, v in asdict(e).items()} for e in self.entries],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def fit_trials(system: SystemConfig, trials: Sequence[TrialResult]) -> tuple[CharacterizedModel, FitReport]:
    """Assemble the resistance matrix and per-body rates from fitted trials."""
    trials = sorted(trials, key=lambda tr: system.body_ids.index(tr.source_id))
    body_ids = system.body_ids
    source_ids = tuple(tr.source_id for tr in trials)
    c_total = total_capacitance(system)
    report = FitReport()
    R = np.zeros((len(body_ids), len(source_ids)))
    fits: dict[tuple[int, int], ExpFit] = {}

    for s, tr in enumerate(trials):
        scale = max(1.0, tr.power / c_total * tr.t_m)
        for i, b in enumerate(body_ids):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", NonIdentifiable)
                fit = fit_exponential(tr.times, tr.series(b), C_T=c_total, atol=1e-9 * scale)
            for w in caught:
                report.warnings.append(f"{b} <- {tr.source_id}: {w.message}")
            try:
                endpoint = resistance_from_trial(tr, b, tr.power)
            except NotStationary:
                endpoint = None
            fits[i, s] = fit
            R[i, s] = fit.A / tr.power
            report.entries.append(FitEntry(
                body=b,
                source=tr.source_id,
                A=fit.A,
                k=fit.k if math.isfinite(fit.k) else None,
                sse=fit.sse,
                rmse=fit.rmse,
                iterations=fit.iterations,
                converged=fit.converged,
                identifiable=fit.identifiable,
                endpoint_R=endpoint,
            ))

    k = np.full(len(body_ids), np.nan)
    for i, b in enumerate(body_ids):
        usable = {s: f for (bi, s), f in fits.items() if bi == i and f.identifiable}
        if not usable:
            continue
        if b in source_ids and source_ids.index(b) in usable:
            own = source_ids.index(b)
        else:
            own = max(usable, key=lambda s: abs(usable[s].A))
        k[i] = usable[own].k
        for s, f in usable.items():
            if abs(f.k - k[i]) > K_DISAGREEMENT * k[i]:
                report.warnings.append(
                    f"{b}: k from source {source_ids[s]} ({f.k:.4g}/s) differs from "
                    f"adopted k ({k[i]:.4g}/s) by more than {K_DISAGREEMENT:.0%}"
                )

    t_m = trials[0].t_m if trials else 0.0
    model = CharacterizedModel(
        body_ids=body_ids,
        source_ids=source_ids,
        T0=system.initial_temperature,
        C_T=c_total,
        R=R,
        k=k,
        t_m=t_m,
        metadata={"report": report},
    )
    return model, report


def characterize(
    system: SystemConfig,
    t_m: float = 20.0,
    dx: float = 0.0005,
    sample_dt: float | None = None,
    power: float = 1.0,
    threads: int | None = None,
) -> CharacterizedModel:
    """Run unit trials and fit them; the FitReport rides in ``model.metadata``."""
    trials = run_unit_trials(system, t_m, dx, sample_dt, power, threads=threads)
    model, report = fit_trials(system, trials)
    for w in report.warnings:
        log.warning(w)
    return model


def resistance_from_trial(
    trial: TrialResult,
    body: str,
    P: float | None = None,
    rel_tol: float = 0.05,
    tail: float = 0.1,
) -> float:
    """Endpoint resistance ``deviation(t_m) / P``.

    Raises :class:`NotStationary` when the slope over the last ``tail``
    fraction of the record, extrapolated over ``t_m``, exceeds ``rel_tol``
    of the final deviation.
    """
    P = trial.power if P is None else P
    dev = trial.series(body)
    t = trial.times
    n_tail = max(3, int(math.ceil(tail * t.size)))
    slope = np.polyfit(t[-n_tail:], dev[-n_tail:], 1)[0]
    end = float(dev[-1])
    if abs(slope) * trial.t_m > rel_tol * abs(end) + 1e-12:
        raise NotStationary(
            f"{body}: deviation still moving at {slope:.3g} K/s at t_m = {trial.t_m} s"
        )
    return end / P


@dataclass(frozen=True)
class HFit:
    R_BF: float
    h_est: float
    area: float
    C_T: float
    sse: float
    iterations: int


def fit_h(
    system: SystemConfig,
    P: float = 1.0,
    duration: float = 600.0,
    dx: float = 0.001,
    sample_dt: float | None = None,
    body: str | None = None,
) -> HFit:
    """Recover the convection coefficient of a single solid body.

    Drives ``body`` (default: the first) at constant ``P``, fits the probe
    response to ``T0 + (T_amb - T0 + P R)(1 - exp(-t / (R C_T)))`` for the
    body-to-fluid resistance ``R``, and returns ``h = 1 / (A R)`` with ``A``
    the convective area of the grid.
    """
    if not isinstance(system.boundary, Convection):
        raise ConfigError("fit_h needs a convection boundary")
    body = body or system.bodies[0].id
    trial = _trial_system(system, body, P)
    grid = build_grid(trial, dx)
    area = grid.exposed_area()
    if not area > 0:
        raise ConfigError("no convective faces exposed")
    if sample_dt is None:
        sample_dt = duration / 600.0
    trace = simulate(trial, duration, dx, sample_dt, grid=grid)
    t = trace.times
    y = trace.series(body) - system.initial_temperature
    offset = system.boundary.ambient - system.initial_temperature
    c_total = total_capacitance(system)
    R0 = max(abs(float(y[-1]) - offset) / P, 1e-12)

    def sse_of(p):
        R = R0 * math.exp(p[0])
        r = y + (offset + P * R) * np.expm1(-t / (R * c_total))
        return float(r @ r)

    res, iterations = _nelder_mead(sse_of, np.array([0.0]), float(y @ y))
    if not res.success:
        raise NoConvergence(f"R fit did not converge after {iterations} iterations")
    R = R0 * math.exp(float(res.x[0]))
    return HFit(R, 1.0 / (area * R), area, c_total, float(res.fun), iterations)
