"""Transient reduced-order thermal models for multi-body electronics.

A voxel finite-difference solver provides reference temperatures; unit-power
trials on it are fitted to a linear-curve-plus-exponential model that
predicts probe temperatures for arbitrary piecewise-constant power schedules.
"""

from .core import (
    BodySpec,
    Box,
    Convection,
    Insulated,
    Material,
    PowerProfile,
    SystemConfig,
    load_config,
    power_at,
    save_config,
    slope_total,
    thermal_capacitance,
    total_capacitance,
)
from .charfit import characterize, fit_exponential, fit_h, run_unit_trials
from .compare import ComparisonReport, compare_traces
from .oracle import build_grid, simulate, stable_dt, step
from .rom import CharacterizedModel, predict
from .trace import TemperatureTrace

__version__ = "0.1.0"
