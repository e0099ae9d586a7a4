"""Command-line front end: ``thermrom {simulate,characterize,predict,compare,fit-h}``.

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import charfit
from .compare import compare_traces
from .core import Insulated, config_from_dict, load_config, profile_from_json
from .errors import (
    ConfigError,
    GeometryUnresolvable,
    IdMismatch,
    NoConvergence,
    NoOverlap,
    NotStationary,
    StabilityViolation,
)
from .oracle import sample_times, simulate
from .rom import CharacterizedModel, predict
from .trace import TemperatureTrace

log = logging.getLogger("thermrom")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def cmd_simulate(config_path, duration, dx, sample_dt, out_csv, quantity="probe") -> TemperatureTrace:
    system = load_config(config_path)
    start = time.perf_counter()
    trace = simulate(system, duration, dx, sample_dt, quantity=quantity)
    elapsed = time.perf_counter() - start
    trace.to_csv(out_csv)
    log.info("oracle: %d samples x %d bodies in %.4f s -> %s", len(trace), len(trace.ids), elapsed, out_csv)
    return trace


def cmd_characterize(config_path, t_m, dx, out_model, sample_dt=None) -> CharacterizedModel:
    """Characterize a config; also writes ``<stem>.report.json`` and trial CSVs."""
    system = load_config(config_path)
    if len(system.bodies) == 1 and isinstance(system.boundary, Insulated):
        log.warning("single insulated body: nothing to characterize (deviation is identically zero)")
    if not system.source_ids:
        raise ConfigError(f"{config_path}: no body has a nonzero power schedule")
    start = time.perf_counter()
    trials = charfit.run_unit_trials(system, t_m, dx, sample_dt)
    log.info("ran %d unit trial(s) in %.3f s", len(trials), time.perf_counter() - start)
    model, report = charfit.fit_trials(system, trials)
    for w in report.warnings:
        log.warning(w)
    out_model = Path(out_model)
    model.save(out_model)
    stem = out_model.with_suffix("")
    Path(f"{stem}.report.json").write_text(report.to_json())
    for tr in trials:
        Path(f"{stem}.trial-{tr.source_id}.csv").write_text(tr.to_csv())
    log.info("model %dx%d -> %s", len(model.body_ids), len(model.source_ids), out_model)
    return model


def load_schedule(path) -> dict:
    """Read source schedules: a config file, ``{"profiles": {...}}`` or a bare id map."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(doc, dict) and "bodies" in doc:
        system = config_from_dict(doc)
        return {b.id: b.power for b in system.bodies}
    if isinstance(doc, dict) and "profiles" in doc:
        doc = doc["profiles"]
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object mapping source ids to schedules")
    return {sid: profile_from_json(v, f"profiles.{sid}") for sid, v in doc.items()}


def cmd_predict(model_path, schedule_path, times, out_csv) -> TemperatureTrace:
    model = CharacterizedModel.load(model_path)
    profiles = load_schedule(schedule_path)
    start = time.perf_counter()
    trace = predict(model, profiles, times)
    elapsed = time.perf_counter() - start
    trace.to_csv(out_csv)
    log.info("rom: %d samples x %d bodies in %.6f s -> %s", len(trace), len(trace.ids), elapsed, out_csv)
    return trace


def cmd_compare(trace_a, trace_b, t0=None, out=None, oracle_s=None, rom_s=None):
    a = TemperatureTrace.from_csv(trace_a)
    b = TemperatureTrace.from_csv(trace_b)
    report = compare_traces(a, b, t0=t0, oracle_s=oracle_s, rom_s=rom_s)
    if out:
        Path(out).write_text(report.to_json())
    print(report.table())
    return report


def cmd_fit_h(config_path, duration, dx, power=1.0, out=None, sample_dt=None):
    system = load_config(config_path)
    res = charfit.fit_h(system, power, duration, dx, sample_dt)
    doc = {"R_BF": res.R_BF, "h_est": res.h_est, "area": res.area, "C_T": res.C_T, "sse": res.sse}
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    print(text, end="")
    return res


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermrom", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the finite-difference solver")
    s.add_argument("--config", required=True)
    s.add_argument("--duration", type=float, required=True)
    s.add_argument("--dx", type=float, required=True)
    s.add_argument("--sample-dt", type=float, required=True)
    s.add_argument("--quantity", choices=("probe", "mean"), default="probe")
    s.add_argument("--out", required=True)

    c = sub.add_parser("characterize", help="unit-power trials and exponential fits")
    c.add_argument("--config", required=True)
    c.add_argument("--tm", type=float, default=20.0)
    c.add_argument("--dx", type=float, required=True)
    c.add_argument("--sample-dt", type=float)
    c.add_argument("--out", required=True)

    r = sub.add_parser("predict", help="evaluate a characterized model")
    r.add_argument("--model", required=True)
    r.add_argument("--schedule", required=True)
    r.add_argument("--duration", type=float, required=True)
    r.add_argument("--sample-dt", type=float, required=True)
    r.add_argument("--out", required=True)

    m = sub.add_parser("compare", help="error metrics between two traces")
    m.add_argument("trace_a", help="reference trace (solver)")
    m.add_argument("trace_b", help="candidate trace (model)")
    m.add_argument("--t0", type=float)
    m.add_argument("--oracle-runtime", type=float)
    m.add_argument("--rom-runtime", type=float)
    m.add_argument("--out")

    h = sub.add_parser("fit-h", help="recover a convection coefficient")
    h.add_argument("--config", required=True)
    h.add_argument("--duration", type=float, default=600.0)
    h.add_argument("--dx", type=float, required=True)
    h.add_argument("--sample-dt", type=float)
    h.add_argument("--power", type=float, default=1.0)
    h.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "simulate":
            cmd_simulate(args.config, args.duration, args.dx, args.sample_dt, args.out, args.quantity)
        elif args.command == "characterize":
            cmd_characterize(args.config, args.tm, args.dx, args.out, args.sample_dt)
        elif args.command == "predict":
            times = sample_times(args.duration, args.sample_dt) if args.duration > 0 else np.array([0.0])
            cmd_predict(args.model, args.schedule, times, args.out)
        elif args.command == "compare":
            cmd_compare(args.trace_a, args.trace_b, args.t0, args.out, args.oracle_runtime, args.rom_runtime)
        elif args.command == "fit-h":
            cmd_fit_h(args.config, args.duration, args.dx, args.power, args.out, args.sample_dt)
    except (ConfigError, GeometryUnresolvable, IdMismatch, NoOverlap, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (StabilityViolation, NoConvergence, NotStationary, FloatingPointError) as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
