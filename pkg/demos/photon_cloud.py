"""The coherent photon cloud carried by a slowly moving wave packet.

Each photon mode is a coherent state whose amplitude Q grows and oscillates
as the stationary-phase current drives it.  Summing |Q|^2 over modes gives
the cloud's photon number, energy and momentum; the momentum loss is fed
back into the current until it is self-consistent.
"""

import numpy as np

from dressed.coherent import (
    ModeGrid,
    PhotonMode,
    WavePacket,
    amplitude_Q,
    cloud_summary,
    f_gaussian,
    f_stationary,
    solve_self_consistent,
    stationary_current,
)
from dressed.constants import ALPHA

packet = WavePacket(width=50.0, k0=[0.0, 0.0, 0.0])
q = np.array([0.0, 0.0, 1.0])
print("stationary-phase current vs packet-averaged current at q = (0, 0, m):")
print("  f_stationary:", np.round(f_stationary(q, 0.0, packet), 10))
print("  f_gaussian:  ", np.round(f_gaussian(q, 0.0, packet), 10))

mode = PhotonMode(0, q)
f = stationary_current(q, packet)
print("\nscalar-mode amplitude at rest; |Q|^2 oscillates as 2(1 - cos wt)/w^2:")
for t in (0.5, 1.0, np.pi, 2 * np.pi):
    a = amplitude_Q(mode, t, f)
    print(f"  t = {t:6.3f}: |Q|^2 = {abs(a.Q) ** 2:.6e}, chi = {a.chi: .6e}")

grid = ModeGrid(q_max=20.0)
s = cloud_summary(packet, 1.0, grid=grid)
print("\ncloud of a resting packet at t = 1:")
print(f"  transverse photons N = {s.n_photons:.6e}, delta k = {s.delta_k}")
print(f"  per polarization N = {s.per_alpha_n}")
print(f"  scalar-mode long-time energy {s.per_alpha_e_average[0]:.6e} = "
      f"{s.per_alpha_e_average[0] / ALPHA:.3f} e^2 m at q_max = {grid.q_max}")
print(f"  UV shell [q_max, 2 q_max] / total = {s.uv_tail:.2f}  (transverse sums grow with the cutoff)")

small = ModeGrid(q_max=4.0, n_theta=12, n_phi=16)
steps = solve_self_consistent(WavePacket(50.0, [0.01, 0.0, 0.0]), [0.5, 1.0, 2.0], grid=small)
print("\nself-consistent momentum loss for k0 = (0.01, 0, 0) m (q_max = 4):")
for st in steps:
    print(f"  t = {st.t:4.1f}: delta k = {st.delta_k[0]:.6e} along x after {st.iterations} iterations, "
          f"contraction {st.contraction_ratios[-1] if st.contraction_ratios else 0:.1e}")
