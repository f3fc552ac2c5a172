"""The MacDonald function K0 and the integrator behind every potential.

K0 is evaluated by its power series near the origin and by a continued
fraction beyond x = 2; both are compared with scipy here.  The adaptive
Gauss-Kronrod integrator then reproduces int_0^inf K0^2 = pi^2/4 and an
oscillatory Fourier-type integral summed over half-periods.
"""

import math

import numpy as np
from scipy import special

from dressed.specfun import QuadratureSpec, bessel_k0, integrate, k0_cumulative, k0_square_integral

x = np.array([1e-6, 0.1, 1.0, 2.0, 5.0, 20.0, 100.0])
print("x, K0(x), relative difference to scipy.special.k0")
for xi, k in zip(x, bessel_k0(x)):
    print(f"  {xi:8.2g}  {k: .15e}  {abs(k / special.k0(xi) - 1):.1e}")

print("\nint_0^X K0 tends to pi/2:")
for X in (1.0, 10.0, 40.0):
    print(f"  X = {X:5.1f}: {k0_cumulative(X):.15f}   pi/2 - value = {math.pi / 2 - k0_cumulative(X):.3e}")

res = k0_square_integral()
print(f"\nint_0^inf K0^2 = {res.value:.15f}  (pi^2/4 = {math.pi ** 2 / 4:.15f}), "
      f"{res.subdivisions_used} subdivisions")

# int_0^inf sin(x)/x dx = pi/2 by half-period splitting and Euler summation
osc = integrate(lambda t: np.sinc(np.asarray(t) / np.pi), 0.0, np.inf,
                QuadratureSpec(abs_tol=1e-14, rel_tol=1e-12), period=2 * np.pi)
print(f"int_0^inf sin(x)/x dx = {osc.value:.14f}  (error {abs(osc.value - math.pi / 2):.1e})")
