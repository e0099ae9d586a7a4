"""Recover a convection coefficient from a transient heating curve.

A copper-bronze cube loses heat through all six faces. The solver result is
fitted to a first-order rise and the coefficient is read back from the
fitted resistance.
"""

from thermrom.cases import CONVECTION_AREA, TABLE_H, convection_block
from thermrom.charfit import fit_h
from thermrom.rom import convection_resistance

print(f"exposed area {CONVECTION_AREA} m^2\n")
print(f"{'imposed h':>10} {'R = 1/hA':>10} {'fitted R':>10} {'fitted h':>10} {'error':>8}")
for h in TABLE_H:
    res = fit_h(convection_block(h), P=1.0, duration=600.0, dx=0.001)
    err = 100 * abs(res.h_est - h) / h
    print(f"{h:10.2f} {convection_resistance(h, CONVECTION_AREA):10.2f} {res.R_BF:10.2f} "
          f"{res.h_est:10.2f} {err:7.2f}%")
