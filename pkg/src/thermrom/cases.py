"""Reference desk-scale configurations used by the demos and the acceptance suite."""

from __future__ import annotations

from .core import (
    ALUMINIUM,
    BRASS,
    COPPER,
    CU_BRONZE,
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

DESK_DX = 0.0005  # m
DESK_DURATION = 120.0  # s
CONVECTION_DX = 0.001  # m
CONVECTION_AREA = 0.00015  # m^2, all six faces of a 5 mm cube
TABLE_H = (21.83, 56.19, 235.7)  # W/(m^2 K)


def silver_fr4_pair(T0: float = 20.0) -> SystemConfig:
    """Silver bar face-bonded to an FR4 tab, insulated, three power transients.

    Silver 5 x 1 x 1 mm drives 20 mW, drops to 5 mW at 40 s and rises to 30 mW
    at 80 s; the FR4 tab (1 x 1 x 1 mm) switches on 6 mW at 60 s.
    """
    silver = BodySpec(
        "silver",
        Box((0.0, 0.0, 0.0), (0.005, 0.001, 0.001)),
        SILVER,
        PowerProfile(((0.0, 0.020), (40.0, 0.005), (80.0, 0.030))),
    )
    fr4 = BodySpec(
        "fr4",
        Box((0.005, 0.0, 0.0), (0.001, 0.001, 0.001)),
        FR4,
        PowerProfile(((0.0, 0.0), (60.0, 0.006))),
    )
    return SystemConfig((silver, fr4), Insulated(), T0)


def single_block(
    power: PowerProfile | float = 1.0,
    material: Material = FR4,
    size=(0.004, 0.002, 0.002),
    T0: float = 20.0,
) -> SystemConfig:
    if not isinstance(power, PowerProfile):
        power = PowerProfile.constant(power)
    body = BodySpec("block", Box((0.0, 0.0, 0.0), size), material, power)
    return SystemConfig((body,), Insulated(), T0)


def convection_block(h: float, T0: float = 20.0) -> SystemConfig:
    """5 mm copper-bronze cube, every face exchanging with 20 degC air."""
    body = BodySpec("block", Box((0.0, 0.0, 0.0), (0.005, 0.005, 0.005)), CU_BRONZE, PowerProfile.constant(1.0))
    return SystemConfig((body,), Convection(h=h, ambient=T0, fluid_capacitance=0.0), T0)


# (material, length of body 1, length of body 2, square cross-section edge), metres
RESISTANCE_STUDY = (
    (COPPER, 0.010, 0.010, 0.002),
    (ALUMINIUM, 0.010, 0.006, 0.002),
    (BRASS, 0.008, 0.008, 0.002),
    (SILVER, 0.012, 0.006, 0.003),
    (COPPER, 0.006, 0.012, 0.004),
    (BRASS, 0.012, 0.010, 0.003),
    (ALUMINIUM, 0.014, 0.008, 0.004),
)
RESISTANCE_DX = 0.001


def bar_pair(material: Material, length_1: float, length_2: float, width: float) -> SystemConfig:
    """Two same-material bars in series along x, both sources, insulated."""
    b1 = BodySpec("b1", Box((0.0, 0.0, 0.0), (length_1, width, width)), material, PowerProfile.constant(1.0))
    b2 = BodySpec("b2", Box((length_1, 0.0, 0.0), (length_2, width, width)), material, PowerProfile.constant(1.0))
    return SystemConfig((b1, b2), Insulated(), 20.0)


def twin_blocks(material: Material = COPPER) -> SystemConfig:
    """Mirror-symmetric pair of identical cubes sharing one face."""
    b1 = BodySpec("left", Box((0.0, 0.0, 0.0), (0.004, 0.004, 0.004)), material, PowerProfile.constant(1.0))
    b2 = BodySpec("right", Box((0.004, 0.0, 0.0), (0.004, 0.004, 0.004)), material, PowerProfile.constant(1.0))
    return SystemConfig((b1, b2), Insulated(), 20.0)
