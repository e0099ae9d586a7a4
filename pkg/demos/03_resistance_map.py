"""Fitted characteristic resistances against a simple conduction estimate.

Seven two-bar systems vary material, length and cross-section. The
self-resistance of each bar is compared with L / (K A), measured from the bar
centre to a reference point. The capacity-weighted centroid tracks the fit
better than the plain midpoint, since heat stored in the longer bar pulls the
thermal centre toward it.
"""

from thermrom.cases import RESISTANCE_DX, RESISTANCE_STUDY, bar_pair
from thermrom.charfit import characterize
from thermrom.rom import analytical_resistance, capacity_centroid, midpoint, resistance_linear_map

fitted, by_centroid, by_midpoint = [], [], []
print(f"{'material':<10}{'L1 mm':>7}{'L2 mm':>7}{'w mm':>6}{'R11':>9}{'R22':>9}")
for material, L1, L2, w in RESISTANCE_STUDY:
    system = bar_pair(material, L1, L2, w)
    model = characterize(system, t_m=20.0, dx=RESISTANCE_DX)
    c = capacity_centroid(system.bodies)
    m = midpoint(*(b.box.center for b in system.bodies))
    for i, body in enumerate(system.bodies):
        fitted.append(model.R[i, i])
        by_centroid.append(analytical_resistance(body.box.center, c, material.conductivity, w * w))
        by_midpoint.append(analytical_resistance(body.box.center, m, material.conductivity, w * w))
    print(f"{material.name:<10}{1e3 * L1:7.0f}{1e3 * L2:7.0f}{1e3 * w:6.0f}{model.R[0, 0]:9.3f}{model.R[1, 1]:9.3f}")

for name, calc in (("centroid", by_centroid), ("midpoint", by_midpoint)):
    fit = resistance_linear_map(fitted, calc)
    print(f"\n{name:>9}: R_fit = {fit.m:.3f} R_calc + {fit.c:+.3f}   r^2 = {fit.r2:.4f}")
