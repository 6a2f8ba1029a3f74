"""
95%-likely SE as mobility grows
===============================

Sweeps f_D*T_s from 0 to 0.003 on the same set of drops and prints the
5th-percentile SE of cell-free LSFD and small cells, with full power and
with fractional power control.  Results are also written to CSV.
"""

from pathlib import Path

from cfaging import ExperimentSpec, SimConfig, sweep_doppler
from cfaging.harness import DEFAULT_SWEEP

out = Path("doppler_sweep.csv")
spec = ExperimentSpec(base=SimConfig(), n_drops=100, doppler_sweep=DEFAULT_SWEEP,
                      systems=("CF-LSFD", "SmallCell"), power_modes=("full", "fpc"),
                      output_path=str(out))
rows, _ = sweep_doppler(spec)

table = {(fd, s, m): v for fd, s, m, v in rows}
print(f"{'f_D*T_s':>8}  {'LSFD full':>9}  {'LSFD fpc':>8}  {'SC full':>7}  {'SC fpc':>6}")
for fd in DEFAULT_SWEEP:
    print(f"{fd:8.4f}  {table[fd, 'CF-LSFD', 'full']:9.3f}  {table[fd, 'CF-LSFD', 'fpc']:8.3f}  "
          f"{table[fd, 'SmallCell', 'full']:7.3f}  {table[fd, 'SmallCell', 'fpc']:6.3f}")
print(f"\nsummary written to {out} and {out.with_name(out.stem + '.samples.csv')}")
