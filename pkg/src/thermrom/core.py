"""Domain types and the shared lumped arithmetic.

Temperatures are in degrees Celsius, everything else in SI units. All types
are frozen dataclasses; validation happens in ``__post_init__`` so that a
constructed object is always usable by the solver and the reduced model.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "Material",
    "Box",
    "PowerProfile",
    "BodySpec",
    "Insulated",
    "Convection",
    "SystemConfig",
    "thermal_capacitance",
    "total_capacitance",
    "slope_total",
    "power_at",
    "load_config",
    "save_config",
    "config_from_dict",
    "config_to_dict",
    "SILVER",
    "FR4",
    "COPPER",
    "ALUMINIUM",
    "BRASS",
    "CU_BRONZE",
]

FACES = ("-x", "+x", "-y", "+y", "-z", "+z")


@dataclass(frozen=True)
class Material:
    name: str
    density: float  # kg/m^3
    specific_heat: float  # J/(kg K)
    conductivity: float  # W/(m K)

    def __post_init__(self):
        for attr in ("density", "specific_heat", "conductivity"):
            value = getattr(self, attr)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"material {self.name!r}: {attr} must be > 0, got {value}")

    @property
    def volumetric_heat_capacity(self) -> float:
        return self.density * self.specific_heat

    @property
    def diffusivity(self) -> float:
        return self.conductivity / (self.density * self.specific_heat)


SILVER = Material("silver", density=10500.0, specific_heat=235.0, conductivity=429.0)
FR4 = Material("fr4", density=1900.0, specific_heat=1150.0, conductivity=0.3)
COPPER = Material("copper", density=8960.0, specific_heat=385.0, conductivity=401.0)
ALUMINIUM = Material("aluminium", density=2700.0, specific_heat=897.0, conductivity=237.0)
BRASS = Material("brass", density=8530.0, specific_heat=380.0, conductivity=109.0)
CU_BRONZE = Material("cu-bronze", density=8800.0, specific_heat=380.0, conductivity=60.0)


def _vec3(value, name: str) -> tuple[float, float, float]:
    try:
        out = tuple(float(v) for v in value)
    except TypeError as exc:
        raise ConfigError(f"{name}: expected 3 numbers") from exc
    if len(out) != 3:
        raise ConfigError(f"{name}: expected 3 numbers, got {len(out)}")
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class Box:
    """Axis-aligned cuboid given by its minimum corner and edge lengths."""

    origin: tuple[float, float, float]
    size: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "origin", _vec3(self.origin, "box.origin"))
        object.__setattr__(self, "size", _vec3(self.size, "box.size"))
        if any(not (s > 0) for s in self.size):
            raise ConfigError(f"box size components must be > 0, got {self.size}")

    @property
    def upper(self) -> tuple[float, float, float]:
        return tuple(o + s for o, s in zip(self.origin, self.size))  # type: ignore[return-value]

    @property
    def center(self) -> tuple[float, float, float]:
        return tuple(o + 0.5 * s for o, s in zip(self.origin, self.size))  # type: ignore[return-value]

    @property
    def volume(self) -> float:
        return float(np.prod(self.size))

    def contains(self, point, tol: float = 0.0) -> bool:
        return all(o - tol <= p <= u + tol for o, p, u in zip(self.origin, point, self.upper))

    def overlaps(self, other: "Box", tol: float = 1e-12) -> bool:
        """True when the interiors intersect; shared faces do not count."""
        return all(
            min(u1, u2) - max(o1, o2) > tol
            for o1, u1, o2, u2 in zip(self.origin, self.upper, other.origin, other.upper)
        )


@dataclass(frozen=True)
class PowerProfile:
    """Piecewise-constant power schedule.

    ``segments`` is a sequence of ``(start_time, watts)`` pairs. Each segment
    is left-closed and right-open; the last one extends to infinity.
    """

    segments: tuple[tuple[float, float], ...] = ((0.0, 0.0),)

    def __post_init__(self):
        segs = tuple((float(t), float(w)) for t, w in self.segments)
        if not segs:
            raise ConfigError("power profile needs at least one segment")
        if segs[0][0] != 0.0:
            raise ConfigError(f"first segment must start at t=0, got {segs[0][0]}")
        starts = [t for t, _ in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError(f"segment start times must be strictly increasing: {starts}")
        if any(not (w >= 0) or not math.isfinite(w) for _, w in segs):
            raise ConfigError("segment powers must be finite and >= 0")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, watts: float) -> "PowerProfile":
        return cls(((0.0, watts),))

    @property
    def start_times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.segments)

    @property
    def watts(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.segments)

    @property
    def is_zero(self) -> bool:
        return all(w == 0.0 for w in self.watts)

    def scaled(self, factor: float) -> "PowerProfile":
        return PowerProfile(tuple((t, w * factor) for t, w in self.segments))

    def energy(self, t_end: float) -> float:
        """Closed-form integral of the schedule over ``[0, t_end]``."""
        total = 0.0
        bounds = list(self.start_times[1:]) + [math.inf]
        for (t0, w), t1 in zip(self.segments, bounds):
            if t0 >= t_end:
                break
            total += w * (min(t1, t_end) - t0)
        return total


def power_at(profile: PowerProfile, t: float) -> float:
    """Power of the last segment whose start time is ``<= t``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    idx = bisect_right(profile.start_times, t) - 1
    return profile.segments[idx][1]


@dataclass(frozen=True)
class BodySpec:
    id: str
    box: Box
    material: Material
    power: PowerProfile = field(default_factory=PowerProfile)
    probe: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.probe is None:
            object.__setattr__(self, "probe", self.box.center)
        else:
            object.__setattr__(self, "probe", _vec3(self.probe, f"body {self.id}: probe"))
        if not self.box.contains(self.probe, tol=1e-12):
            raise ConfigError(f"body {self.id!r}: probe {self.probe} outside its box")

    @property
    def volume(self) -> float:
        return self.box.volume

    @property
    def capacitance(self) -> float:
        return thermal_capacitance(self)

    def with_power(self, power: PowerProfile) -> "BodySpec":
        return BodySpec(self.id, self.box, self.material, power, self.probe)


@dataclass(frozen=True)
class Insulated:
    """Adiabatic outer walls."""


@dataclass(frozen=True)
class Convection:
    """Robin boundary on exposed solid faces.

    ``faces`` restricts the exchange to the listed outward directions
    (``"-x"``, ``"+z"``, ...); ``None`` means every exposed face.
    """

    h: float
    ambient: float = 20.0
    fluid_capacitance: float = 0.0
    faces: tuple[str, ...] | None = None

    def __post_init__(self):
        if not (self.h > 0):
            raise ConfigError(f"convection h must be > 0, got {self.h}")
        if not (self.fluid_capacitance >= 0):
            raise ConfigError(f"fluid_capacitance must be >= 0, got {self.fluid_capacitance}")
        if self.faces is not None:
            faces = tuple(self.faces)
            bad = [f for f in faces if f not in FACES]
            if bad:
                raise ConfigError(f"unknown convection faces {bad}; expected a subset of {FACES}")
            object.__setattr__(self, "faces", faces)


Boundary = Union[Insulated, Convection]


@dataclass(frozen=True)
class SystemConfig:
    bodies: tuple[BodySpec, ...]
    boundary: Boundary = field(default_factory=Insulated)
    initial_temperature: float = 20.0

    def __post_init__(self):
        bodies = tuple(self.bodies)
        object.__setattr__(self, "bodies", bodies)
        if not bodies:
            raise ConfigError("system needs at least one body")
        ids = [b.id for b in bodies]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate body ids: {ids}")
        for i, a in enumerate(bodies):
            for b in bodies[i + 1:]:
                if a.box.overlaps(b.box):
                    raise ConfigError(f"bodies {a.id!r} and {b.id!r} overlap")

    @property
    def body_ids(self) -> tuple[str, ...]:
        return tuple(b.id for b in self.bodies)

    @property
    def source_ids(self) -> tuple[str, ...]:
        """Bodies carrying a nonzero power segment anywhere in their schedule."""
        return tuple(b.id for b in self.bodies if not b.power.is_zero)

    @property
    def total_capacitance(self) -> float:
        return total_capacitance(self)

    def body(self, body_id: str) -> BodySpec:
        for b in self.bodies:
            if b.id == body_id:
                return b
        raise KeyError(body_id)

    def with_powers(self, powers: dict[str, PowerProfile]) -> "SystemConfig":
        """Copy with the listed bodies' schedules replaced, others zeroed."""
        bodies = tuple(b.with_power(powers.get(b.id, PowerProfile())) for b in self.bodies)
        return SystemConfig(bodies, self.boundary, self.initial_temperature)


def thermal_capacitance(body: BodySpec) -> float:
    """rho * c_p * V of a body, in J/K."""
    return body.material.density * body.material.specific_heat * body.volume


def total_capacitance(system: SystemConfig) -> float:
    """Solid capacitance of all bodies plus any participating fluid."""
    c_total = sum(thermal_capacitance(b) for b in system.bodies)
    if isinstance(system.boundary, Convection):
        c_total += system.boundary.fluid_capacitance
    return c_total


def slope_total(
    bodies: Sequence[BodySpec], at_time: float, fluid_capacitance: float = 0.0
) -> float:
    """Rate of the linear temperature curve, total power over total capacitance."""
    if not bodies:
        raise ValueError("bodies must be nonempty")
    p_total = math.fsum(power_at(b.power, at_time) for b in bodies)
    c_total = math.fsum(thermal_capacitance(b) for b in bodies) + fluid_capacitance
    return p_total / c_total


# -- JSON ---------------------------------------------------------------------


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return doc[key]


def _material_from(value, materials: dict, where: str) -> Material:
    if isinstance(value, str):
        if value not in materials:
            raise ConfigError(f"{where}: unknown material {value!r}")
        return materials[value]
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: material must be a name or an object")
    try:
        return Material(
            name=str(value.get("name", "unnamed")),
            density=float(_require(value, "density", where)),
            specific_heat=float(_require(value, "specific_heat", where)),
            conductivity=float(_require(value, "conductivity", where)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def profile_from_json(value, where: str = "power") -> PowerProfile:
    """Accept a number (constant watts) or a list of ``[start, watts]`` pairs."""
    if isinstance(value, (int, float)):
        return PowerProfile.constant(float(value))
    if isinstance(value, dict):
        value = _require(value, "segments", where)
    try:
        return PowerProfile(tuple((seg[0], seg[1]) for seg in value))
    except (TypeError, IndexError, KeyError) as exc:
        raise ConfigError(f"{where}: expected a list of [start_time, watts] pairs") from exc
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def profile_to_json(profile: PowerProfile) -> list[list[float]]:
    return [[t, w] for t, w in profile.segments]


def config_from_dict(doc: dict) -> SystemConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    materials = {}
    for name, props in (doc.get("materials") or {}).items():
        materials[name] = _material_from({"name": name, **props}, {}, f"materials.{name}")

    bodies = []
    raw_bodies = _require(doc, "bodies", "config")
    if not isinstance(raw_bodies, list):
        raise ConfigError("bodies: expected a list")
    for i, raw in enumerate(raw_bodies):
        where = f"bodies[{i}]"
        if not isinstance(raw, dict):
            raise ConfigError(f"{where}: expected an object")
        try:
            box = Box(_require(raw, "origin", where), _require(raw, "size", where))
            body = BodySpec(
                id=str(_require(raw, "id", where)),
                box=box,
                material=_material_from(_require(raw, "material", where), materials, f"{where}.material"),
                power=profile_from_json(raw.get("power", 0.0), f"{where}.power"),
                probe=raw.get("probe"),
            )
        except ConfigError as exc:
            msg = str(exc)
            raise ConfigError(msg if msg.startswith(where) else f"{where}: {msg}") from exc
        bodies.append(body)

    raw_bc = doc.get("boundary", {"type": "insulated"})
    if isinstance(raw_bc, str):
        raw_bc = {"type": raw_bc}
    kind = str(raw_bc.get("type", "insulated")).lower()
    if kind == "insulated":
        boundary: Boundary = Insulated()
    elif kind == "convection":
        faces = raw_bc.get("faces")
        boundary = Convection(
            h=float(_require(raw_bc, "h", "boundary")),
            ambient=float(raw_bc.get("ambient", doc.get("initial_temperature", 20.0))),
            fluid_capacitance=float(raw_bc.get("fluid_capacitance", 0.0)),
            faces=tuple(faces) if faces is not None else None,
        )
    else:
        raise ConfigError(f"boundary.type: expected 'insulated' or 'convection', got {kind!r}")

    return SystemConfig(tuple(bodies), boundary, float(doc.get("initial_temperature", 20.0)))


def config_to_dict(system: SystemConfig) -> dict:
    bc = system.boundary
    if isinstance(bc, Convection):
        boundary = {
            "type": "convection",
            "h": bc.h,
            "ambient": bc.ambient,
            "fluid_capacitance": bc.fluid_capacitance,
        }
        if bc.faces is not None:
            boundary["faces"] = list(bc.faces)
    else:
        boundary = {"type": "insulated"}
    bodies = []
    for b in system.bodies:
        m = b.material
        bodies.append({
            "id": b.id,
            "origin": list(b.box.origin),
            "size": list(b.box.size),
            "material": {
                "name": m.name,
                "density": m.density,
                "specific_heat": m.specific_heat,
                "conductivity": m.conductivity,
            },
            "power": profile_to_json(b.power),
            "probe": list(b.probe),
        })
    return {
        "initial_temperature": system.initial_temperature,
        "boundary": boundary,
        "bodies": bodies,
    }


def load_config(path: str | Path) -> SystemConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc)


def save_config(system: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(system), indent=2) + "\n")
