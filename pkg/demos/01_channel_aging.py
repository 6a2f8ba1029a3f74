"""
How fast does a channel age?
============================

The correlation between a channel sample and one taken ``n`` instants
later follows J0(2 pi f_D T_s n).  This script prints that correlation over
one 200-sample resource block for a few UE speeds, and shows how the
quality of a channel estimate made right after the pilots decays.
"""

import numpy as np

from cfaging import AgingProfile, SimConfig, velocity_to_normalized_doppler

cfg = SimConfig()
speeds_kmh = [0, 18, 54, 108, 162]
fdts = [velocity_to_normalized_doppler(v / 3.6, cfg.carrier_freq, cfg.sample_time)
        for v in speeds_kmh]

# correlation at a handful of lags
lags = [0, 10, 50, 100, 150, 190]
print("speed km/h  f_D*T_s   " + "  ".join(f"lag {m:>3d}" for m in lags))
for v, fd in zip(speeds_kmh, fdts):
    rho = AgingProfile.from_doppler(fd, cfg.tau_c, K=1).rho[0]
    print(f"{v:10d}  {fd:.5f}   " + "  ".join(f"{rho[m]:7.3f}" for m in lags))

# the usable fraction of the estimate at lag m is rho^2; the rest is aging noise
print()
print("fraction of channel power explained by the post-pilot estimate")
for v, fd in zip(speeds_kmh, fdts):
    rho = AgingProfile.from_doppler(fd, cfg.tau_c, K=1).rho[0]
    usable = rho[: cfg.tau_c - cfg.tau_p] ** 2
    print(f"  {v:4d} km/h: mean over data phase {usable.mean():.3f}, "
          f"worst {usable.min():.3f}")
