"""Dirac bispinors and the transition current ubar(p') gamma^mu u(p).

The current between on-shell states is conserved,
(eps(p) - eps(p')) J^0 = (p - p').J, and for a resting electron emitting a
photon of momentum q its time component is m / eps(q/2).
"""

import numpy as np

from dressed.spinor import bispinor_u, current_batch, energy, polarization_basis

q = np.array([0.3, -0.4, 1.2])
j = current_batch(0.5, -q / 2, 0.5, q / 2)
print("current for p = q/2 -> p' = -q/2, spin up:")
print("  J =", np.round(j, 12))
print(f"  J^0 = {j[0].real:.15f},  m/eps(q/2) = {1 / energy(q / 2):.15f}")
print(f"  continuity residual (eps+ - eps-) J^0 - q.J = {abs((energy(q / 2) - energy(-q / 2)) * j[0] - q @ j[1:]):.1e}")

p = np.array([0.2, 0.1, -0.5])
u = bispinor_u(-0.5, p)
print(f"\nu^dagger u = {u.dagger_dot(u).real:.15f},  ubar u = {u.bar_dot(u).real:.15f} = m/eps = {1 / energy(p):.15f}")

basis = polarization_basis(q)
print("\npolarization basis for q (rows alpha = 0..3):")
print(np.round(basis.vectors.real, 6))
print("transverse projections e_alpha . J:", np.round(basis.project(j)[1:3], 12))
