"""
Coherence time and the two-electron antibunching dip
====================================================

A 0.2 eV energy spread gives a coherence time of about 2e-14 s. With the
Gaussian lineshape the normalized coincidence rate ``1 - |gamma(tau)|**2``
vanishes at zero delay and recovers within a few coherence times.
"""
import numpy as np

from fermicorr import SpectralModel, antibunching_curve, coherence_time_from_bandwidth
from fermicorr.field_model import half_rise_delay

tc = coherence_time_from_bandwidth(0.2)
print(f"coherence time for 0.2 eV: {tc:.4e} s")

model = SpectralModel(omega0=3e15, coherence_time=tc, group_speed=1e6)
curve = np.array(antibunching_curve(model, -3 * tc, 3 * tc, 13))
for tau, g2 in curve:
    bar = "#" * int(round(40 * g2))
    print(f"{tau / tc:+5.2f} Tc  {g2:6.4f}  {bar}")

print(f"half-rise delay: {half_rise_delay(model):.3e} s")
