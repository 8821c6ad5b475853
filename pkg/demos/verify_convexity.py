"""Numerical convexity scan of the fading-delay objective summand.

The per-queue objective of the ergodic wireless design mixes a PK delay
driven by reciprocal-rate moments with a log reward; its Hessian has no
tractable closed form.  This scan evaluates the moments by quadrature and
the Hessian by central differences over the design box, reporting the
minimum eigenvalue per cell.
"""

import numpy as np

from cscgd.oracles import hessian_psd_scan, make_delay_utility_surface

for antennas in (5, 10):
    surface = make_delay_utility_surface(antennas=antennas)
    result = hessian_psd_scan(
        surface,
        np.linspace(0.1, 15.0, 25),
        np.linspace(14.0, 100.0, 25),
    )
    print(f"K={antennas}: min eigenvalue over the box = {result.global_min:.3e} "
          f"-> PSD verdict {result.is_psd()}")
    path = f"convexity-scan-k{antennas}.csv"
    result.write_csv(path)
    print(f"  heatmap written to {path}")
