"""Mean fields of the dressed electron.

Smearing over a Compton length turns the Coulomb 1/r into a potential that
is only logarithmic at the origin, makes the field energy finite (e^2 m),
and gives the spin moment a regular vector potential.  A moving charge
sees a retarded two-K0 kernel that reduces to Lienard-Wiechert far away.
"""

import numpy as np

from dressed.constants import ALPHA, CHARGE
from dressed.meanfield import (
    Trajectory,
    lienard_wiechert,
    potential_full_nonrel,
    potential_rest,
    potential_retarded,
    potential_uniform,
    self_energy,
)

print("r, A0(r), Coulomb e/r, ratio")
for r in (1e-4, 1e-2, 0.1, 0.5, 1.0, 5.0, 20.0):
    a0 = potential_rest(r)
    print(f"  {r:8.1e}  {a0:.8e}  {CHARGE / r:.8e}  {a0 * r / CHARGE:.10f}")

se = self_energy()
print(f"\nfield energy {se.numeric:.15e} vs e^2 m = {ALPHA:.15e} (rel err {se.rel_err:.1e})")

r = np.array([0.4, -0.3, 0.8])
print("\nfour-potential of a moving electron, k0 = (0.05, 0, 0) m, at r =", r)
print("  mode sum:     ", potential_uniform(r, 0.0, [0.05, 0.0, 0.0]))
print("  at rest:      ", potential_uniform(r, 0.0, [0.0, 0.0, 0.0]))

traj = Trajectory([0.1, 0.0, 0.0])
print("\nretarded kernel vs Lienard-Wiechert, v = 0.1 along x, field point on y:")
for y in (0.5, 2.0, 10.0, 50.0):
    a = potential_retarded([0.0, y, 0.0], 0.0, traj)[0]
    lw = lienard_wiechert([0.0, y, 0.0], 0.0, traj)[0]
    print(f"  y = {y:5.1f}: {a:.8e} vs {lw:.8e}  ratio {a / lw:.6f}")

slow = Trajectory([0.05, 0.0, 0.0])
full = potential_full_nonrel([0.0, 0.0, 2.0], 0.0, slow)
ret = potential_retarded([0.0, 0.0, 2.0], 0.0, slow)[0]
print(f"\nwavenumber representation at r = 2/m, v = 0.05: {full.value:.8e} vs retarded kernel {ret:.8e}")
