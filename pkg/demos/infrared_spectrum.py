"""Soft photons from a collision, with and without the self-consistent shift.

Classically the photon number per unit energy falls like 1/omega so the
total diverges logarithmically.  The shift Delta in the propagator
denominators, found by a damped fixed-point iteration, flattens the
spectrum below omega ~ Delta and the total number converges.
"""

import numpy as np

from dressed.constants import ALPHA
from dressed.infrared import CollisionSpec, angular_spectrum, solve_delta, spectral_knee, total_photon_number

spec = CollisionSpec([0.05, 0.0, 0.0], [0.04, 0.0, 0.0])
sol = solve_delta(spec)
delta = sol.value
print(f"Delta = {delta:.8e} after {sol.iterations} iterations "
      f"= {delta / (ALPHA * 0.05 ** 2):.4f} e^2 m v1^2 (estimate 4/3)")

w = np.geomspace(1e-3, 1e3, 7) * delta
print("\nomega/Delta, S(omega) with shift, S(omega) classical")
for wi, a, b in zip(w / delta, angular_spectrum(spec, w, delta), angular_spectrum(spec, w, 0.0)):
    print(f"  {wi:8.0e}  {a:.4e}  {b:.4e}")

print("\nphoton number between omega_min and m:")
for f in (1e-2, 1e-4, 1e-6):
    print(f"  omega_min = {f:.0e} Delta: with shift {total_photon_number(spec, delta, f * delta):.10e}, "
          f"classical {total_photon_number(spec, 0.0, f * delta):.10e}")

knee = spectral_knee(spec, delta)
print(f"\nomega^3 S(omega) turns over at {knee.ratio_to_delta:.3f} Delta "
      f"(low-frequency exponent {knee.low_exponent:.3f})")
