"""A scalar photon mode with [b, b+] = -1 on a truncated Fock space.

The metric diag(+1, -1, +1, ...) makes B+ the adjoint of B.  Coherent states
need the prefactor exp(+|Q|^2/2) and satisfy B|Q) = -Q|Q).  A driven mode is
evolved both in closed form and by RK4; the two agree including the phase.
"""

import numpy as np

from dressed.gbfock import build_space, displaced_vacuum, evolve_forced, invariant_report

space = build_space(64)
print("H0 = -omega B+B on |0>..|5>:", np.diag(space.hamiltonian)[:6])

q0 = 0.6 + 0.3j
state = displaced_vacuum(space, q0)
c = state.coefficients
print(f"\nD(Q0)|vac> for Q0 = {q0}:")
print("  first coefficients:", np.round(c[:5], 8))
print(f"  |B c + Q0 c| / |c| = {np.linalg.norm(space.annihilation @ c + q0 * c) / np.linalg.norm(c):.1e}")
print(f"  eta-norm = {state.eta_norm:.15f}, Euclidean norm = {state.aux_norm:.6f}")
print("  residuals:", invariant_report(64, q0))

ev = evolve_forced(space, lambda s: 0.4 * np.exp(-s * s) * (1 + 0.5j * s), -1.0, 2.0, 600)
print(f"\nforced mode: Q0 = {ev.q0:.10f}, phase = {ev.phase:.10f} (half of it: {ev.phase_half:.10f})")
print(f"  <closed|eta|stepped> = {ev.overlap:.14f}")
wrong = np.vdot(np.exp(-1j * ev.phase_half) * ev.closed.coefficients, space.metric * ev.stepped.coefficients)
print(f"  with the half phase instead: {wrong:.10f}")
