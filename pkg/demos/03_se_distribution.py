"""
Per-user SE with and without mobility
=====================================

Random drops of 100 APs and 20 UEs in a 500 m square.  For each system we
report the 5th percentile (the rate 95% of users get) and the median of the
per-user SE, for a static channel and for f_D*T_s = 0.002 (about 108 km/h at
2 GHz), plus the relative loss of the median.
"""

import numpy as np

from cfaging import ExperimentSpec, SimConfig, sweep_doppler
from cfaging.harness import SYSTEMS

N_DROPS = 100

spec = ExperimentSpec(base=SimConfig(), n_drops=N_DROPS, doppler_sweep=(0.0, 0.002))
_, result = sweep_doppler(spec)

print(f"{N_DROPS} drops, full power")
print(f"{'system':>10}  {'p5 static':>9}  {'p5 aged':>8}  {'med static':>10}  {'med aged':>8}  loss")
for system in SYSTEMS:
    p5 = [result.likely95((system, "full", fd)) for fd in (0.0, 0.002)]
    med = [result.median((system, "full", fd)) for fd in (0.0, 0.002)]
    print(f"{system:>10}  {p5[0]:9.3f}  {p5[1]:8.3f}  {med[0]:10.3f}  {med[1]:8.3f}  "
          f"{100 * (1 - med[1] / med[0]):4.1f}%")

# a coarse text CDF of the aged case
grid = np.linspace(0.0, 3.0, 7)
print()
print("fraction of users below each SE (f_D*T_s = 0.002)")
print(f"{'SE':>10}  " + "  ".join(f"{g:5.1f}" for g in grid))
for system in SYSTEMS:
    s = result.samples[(system, "full", 0.002)]
    print(f"{system:>10}  " + "  ".join(f"{np.mean(s < g):5.2f}" for g in grid))
