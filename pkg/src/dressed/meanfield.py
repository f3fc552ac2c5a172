"""Mean electromagnetic potentials of the dressed electron.

The photon cloud replaces the point-charge Coulomb field by potentials
smeared over a Compton length through the MacDonald function K0:

* resting charge: A0(r) = (2e / pi r) int_0^{2mr} K0,
* spin magnetic moment: A = grad Phi x (e/m) s with Phi = A0 / e,
* uniform motion: momentum-space mode sum, evaluated as the exact rest
  pieces plus a numerically integrated remainder,
* slowly moving charge: a retarded single-time integral with a two-K0
  kernel, which collapses to the Lienard-Wiechert potential for m r >> 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import spherical_jn

from .constants import CHARGE
from .specfun import QuadratureResult, QuadratureSpec, bessel_k0, integrate, k0_cumulative
from .spinor import current_diagonal_batch, energy

# non-relativistic evaluators refuse faster motion
NONREL_SPEED = 0.3


@dataclass(frozen=True)
class RadialProfile:
    r: np.ndarray
    values: np.ndarray
    quantity: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)
        if r.shape != v.shape:
            raise ValueError("r and values must have the same shape")
        if r.size and (np.any(r <= 0) or np.any(np.diff(r) <= 0)):
            raise ValueError("radii must be positive and strictly ascending")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Straight-line mean trajectory r0(t) = origin + velocity t."""

    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        v = np.asarray(self.velocity, dtype=float).reshape(3)
        o = np.asarray(self.origin, dtype=float).reshape(3)
        object.__setattr__(self, "velocity", v)
        object.__setattr__(self, "origin", o)
        if not np.linalg.norm(v) < 1:
            raise ValueError("|velocity| must be below the speed of light")

    @property
    def kind(self) -> str:
        return "rest" if not np.any(self.velocity) else "uniform"

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    def position(self, t):
        return self.origin + self.velocity * t


def _require_nonrel(traj: Trajectory):
    if traj.speed >= NONREL_SPEED:
        raise ValueError(f"speed {traj.speed} outside the non-relativistic guard |v| < {NONREL_SPEED}")


def _positive_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radius must be positive")
    return r


def _smeared_inverse_r(r, mass):
    return 2.0 / (np.pi * r) * k0_cumulative(2.0 * mass * r)


def moment_form_factor(r, mass=1.0):
    """Phi(r) = (2 / pi r) int_0^{2 m r} K0(x) dx; tends to 1/r for m r >> 1."""
    return _smeared_inverse_r(_positive_radius(r), mass)


def form_factor_derivative(r, mass=1.0):
    """dPhi/dr = (4m / pi r) K0(2 m r) - Phi(r) / r."""
    r = _positive_radius(r)
    return 4.0 * mass / (np.pi * r) * bessel_k0(2.0 * mass * r) - _smeared_inverse_r(r, mass) / r


def potential_rest(r, mass=1.0, charge=CHARGE):
    """Scalar potential of the resting dressed charge, e Phi(r).

    Logarithmic at the origin, Coulomb (e / r) beyond a few Compton lengths.
    """
    return charge * _smeared_inverse_r(_positive_radius(r), mass)


def rest_potential_profile(r_min, r_max, points, mass=1.0, charge=CHARGE) -> RadialProfile:
    """Log-spaced samples of :func:`potential_rest` on ``[r_min, r_max]``."""
    if not (0 < r_min < r_max) or points < 1:
        raise ValueError("need 0 < r_min < r_max and points >= 1")
    r = np.geomspace(r_min, r_max, points) if points > 1 else np.array([float(r_min)])
    return RadialProfile(r, potential_rest(r, mass, charge), "a0",
                         {"mass": mass, "charge": charge, "spacing": "geometric"})


@dataclass(frozen=True)
class SelfEnergy:
    numeric: float
    analytic: float
    rel_err: float
    quadrature: QuadratureResult


def self_energy(mass=1.0, charge=CHARGE) -> SelfEnergy:
    """Electrostatic field energy of the dressed charge.

    Integrates (8/pi^2)(e m)^2 K0(2 m r)^2 over r numerically and compares
    with the closed form e^2 m.
    """
    if charge == 0:
        zero = QuadratureResult(0.0, 0.0, 0, True)
        return SelfEnergy(0.0, 0.0, 0.0, zero)
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-12, mapping="semi_infinite_exp")
    res = integrate(lambda r: bessel_k0(2.0 * mass * r) ** 2, 0.0, np.inf, spec,
                    points=(0.5 / mass,))
    if not res.converged:
        raise ArithmeticError(f"self-energy quadrature failed: {res}")
    numeric = 8.0 / math.pi ** 2 * (charge * mass) ** 2 * res.value
    analytic = charge ** 2 * mass
    return SelfEnergy(float(numeric), analytic, abs(numeric / analytic - 1.0), res)


def vector_potential_moment(r, spin=(0.0, 0.0, 0.5), mass=1.0, charge=CHARGE):
    """Vector potential grad Phi x mu of the spin magnetic moment mu = (e/m) s.

    ``r`` may be (3,) or (N, 3).
    """
    r = np.asarray(r, dtype=float)
    dist = np.linalg.norm(r, axis=-1)
    if np.any(dist == 0):
        raise ValueError("vector potential undefined at r = 0")
    mu = charge / mass * np.asarray(spin, dtype=float)
    grad = (form_factor_derivative(dist, mass) / dist)[..., None] * r
    return np.cross(grad, mu)


# ---------------------------------------------------------------------------
# uniform motion: full mode sum
# ---------------------------------------------------------------------------

def _legendre_table(x, l_max):
    p = np.empty((l_max + 1,) + x.shape)
    p[0] = 1.0
    if l_max:
        p[1] = x
    for l in range(1, l_max):
        p[l + 1] = ((2 * l + 1) * x * p[l] - l * p[l - 1]) / (l + 1)
    return p


def potential_uniform(r, t, k0, spin=0.5, mass=1.0, charge=CHARGE, *, n_theta=32, n_phi=64,
                      l_max=24, rel_tol=1e-11):
    """Four-potential of a uniformly moving dressed electron from the mode sum.

    The sum over photon wavevectors of
    ``2e Re[g_q^2 J^mu(q) exp(i(q.r - W t)) / (|q| - W)]`` with
    ``J = ubar(k0 - q/2) gamma^mu u(k0 + q/2)`` and ``W = eps_+ - eps_-`` is
    split into its exact ``k0 = 0`` part, which is
    ``(potential_rest, vector_potential_moment)``, and a remainder that is
    integrated numerically: angles by a product Gauss-Legendre/trapezoid
    grid combined with the plane-wave Legendre expansion, the radius by
    half-period summation with Euler acceleration.

    Since |W| < |q| for every q the denominator never vanishes.

    Parameters
    ----------
    r : array_like, shape (3,)
    t : float
    k0 : array_like, shape (3,)
        Electron momentum, |k0| <= 0.3 m.
    spin : {0.5, -0.5}
        Spin projection on z.

    Returns
    -------
    ndarray, shape (4,)
    """
    r = np.asarray(r, dtype=float).reshape(3)
    k0 = np.asarray(k0, dtype=float).reshape(3)
    R = float(np.linalg.norm(r))
    if R == 0:
        raise ValueError("field point must differ from the origin")
    if np.linalg.norm(k0) > NONREL_SPEED * mass:
        raise ValueError(f"|k0| exceeds the non-relativistic guard {NONREL_SPEED} m")
    s_vec = np.array([0.0, 0.0, spin])
    out = np.empty(4)
    out[0] = potential_rest(R, mass, charge)
    out[1:] = vector_potential_moment(r, s_vec, mass, charge)
    if charge == 0 or not np.any(k0):
        return out
    remainder = _uniform_remainder(r, t, k0, spin, mass, n_theta, n_phi, l_max, rel_tol)
    return out + 2.0 * charge * remainder.value.real


def _uniform_remainder(r, t, k0, spin, mass, n_theta, n_phi, l_max, rel_tol):
    R = float(np.linalg.norm(r))
    rhat = r / R
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(1 - mu ** 2)
    n = np.stack([np.outer(sin_t, np.cos(phi)), np.outer(sin_t, np.sin(phi)),
                  np.outer(mu, np.ones(n_phi))], axis=-1).reshape(-1, 3)
    w = np.outer(wmu, np.full(n_phi, 2 * np.pi / n_phi)).reshape(-1)
    # weighted Legendre kernel (2l+1) i^l P_l(n.rhat) w
    ls = np.arange(l_max + 1)
    kernel = _legendre_table(n @ rhat, l_max) * w * ((2 * ls + 1) * 1j ** ls)[:, None]

    def integrand(qs):
        qs = np.asarray(qs, dtype=float)
        res = np.zeros((qs.size, 4), dtype=complex)
        pos = qs > 0
        if not np.any(pos):
            return res
        q = qs[pos]
        qv = q[:, None, None] * n[None]
        lo, hi = k0 - 0.5 * qv, k0 + 0.5 * qv
        j = current_diagonal_batch(spin, lo, hi, mass)
        omega_e = energy(hi, mass) - energy(lo, mass)
        j_rest = current_diagonal_batch(spin, -0.5 * qv, 0.5 * qv, mass)
        qq = q[:, None]
        d = (2 * np.pi / qq)[..., None] * (
            j * (np.exp(-1j * omega_e * t) / (qq - omega_e))[..., None] - j_rest / qq[..., None])
        # a_l(q) for each component, then the radial Bessel weights
        a = np.einsum("la,nam->nlm", kernel, d)
        jl = spherical_jn(ls[None, :], (q * R)[:, None])
        res[pos] = np.einsum("nl,nlm->nm", jl, a) * (q ** 2 / (2 * np.pi) ** 3)[:, None]
        return res

    spec = QuadratureSpec(abs_tol=1e-16, rel_tol=rel_tol)
    return integrate(integrand, 0.0, np.inf, spec, period=2 * np.pi / R)


def lorentz_residual(r, t, k0, spin=0.5, mass=1.0, charge=CHARGE, h=1e-3, **kwargs):
    """Finite-difference d_t A^0 + div A of :func:`potential_uniform`.

    Returns ``(residual, scale)`` where ``scale`` is |d_t A^0| + |div A|
    so that ``residual / scale`` is a relative violation.
    """
    r = np.asarray(r, dtype=float).reshape(3)

    def a(rr, tt):
        return potential_uniform(rr, tt, k0, spin, mass, charge, **kwargs)

    dt = (a(r, t + h)[0] - a(r, t - h)[0]) / (2 * h)
    div = 0.0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        div += (a(r + e, t)[1 + i] - a(r - e, t)[1 + i]) / (2 * h)
    return float(dt + div), float(abs(dt) + abs(div))


# ---------------------------------------------------------------------------
# slow motion: retarded kernel, Lienard-Wiechert, and the k-space form
# ---------------------------------------------------------------------------

def _retarded_root(d, v):
    # tau with |d + v tau| = tau, tau > 0
    dv = float(d @ v)
    d2 = float(d @ d)
    gamma2 = 1.0 - float(v @ v)
    return (dv + math.sqrt(dv * dv + gamma2 * d2)) / gamma2


def potential_retarded(r, t, traj: Trajectory, mass=1.0, charge=CHARGE, rel_tol=1e-11):
    """Four-potential from the retarded two-K0 kernel.

    ``A^mu = (2/pi) e m int_0^inf dtau u^mu / R(tau)
    [K0(2m|tau - R(tau)|) - K0(2m(tau + R(tau)))]`` with
    ``R(tau) = |r - r0(t - tau)|`` and ``u = (1, v)``.  The tau range is cut
    at the light-cone root tau = R(tau), where the first K0 is
    logarithmically singular.
    """
    _require_nonrel(traj)
    r = np.asarray(r, dtype=float).reshape(3)
    v = traj.velocity
    d = r - traj.position(t)
    if np.linalg.norm(d) == 0:
        raise ValueError("field point coincides with the current charge position")
    if charge == 0:
        return np.zeros(4)
    m2 = 2.0 * mass

    def kernel(tau):
        tau = np.asarray(tau, dtype=float)
        sep = d[None, :] + tau[:, None] * v[None, :]
        R = np.linalg.norm(sep, axis=-1)
        gap = np.abs(tau - R)
        near = np.where(gap > 0, bessel_k0(np.where(gap > 0, m2 * gap, 1.0)), 0.0)
        return (near - bessel_k0(m2 * (tau + R))) / R

    tau_star = _retarded_root(d, v)
    width = 20.0 / m2
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=rel_tol, mapping="semi_infinite_exp")
    cuts = [c for c in (tau_star - width, tau_star, tau_star + width) if c > 0]
    total = integrate(kernel, 0.0, np.inf, spec, points=cuts)
    if not total.converged:
        raise ArithmeticError(f"retarded-kernel quadrature did not converge: {total}")
    a0 = 2.0 / math.pi * charge * mass * total.value
    return np.concatenate(([a0], a0 * v))


def lienard_wiechert(r, t, traj: Trajectory, charge=CHARGE):
    """Retarded potential of a point charge in uniform motion.

    ``A^0 = e / sqrt(R^2 - |v x R|^2)`` with R measured from the present
    position, ``A_vec = v A^0``.
    """
    r = np.asarray(r, dtype=float).reshape(3)
    d = r - traj.position(t)
    if np.linalg.norm(d) == 0:
        raise ValueError("field point coincides with the charge position")
    v = traj.velocity
    a0 = charge / math.sqrt(float(d @ d) - float(np.cross(v, d) @ np.cross(v, d)))
    return np.concatenate(([a0], a0 * v))


def potential_full_nonrel(r, t, traj: Trajectory, mass=1.0, charge=CHARGE, rel_tol=1e-4,
                          max_subdivisions=4000) -> QuadratureResult:
    """Scalar potential of a slow charge from its photon-wavenumber representation.

    The inner tau integral against the two K0 terms is taken over the whole
    line, where it is elementary:
    ``int cos(k tau)[K0(2m|s - tau - R|) - K0(2m|s - tau + R|)] dtau
    = 2 pi sin(k s) sin(k R) / sqrt(k^2 + 4 m^2)``.
    What remains is

        A0 = (4 e m / pi) int_0^inf dk / sqrt(k^2 + 4m^2)
             int_0^inf ds sin(k s) sin(k R_k) / R_k,

    with ``R_k = |r - c_k r0(t - s)|`` and ``c_k = m / eps(k/2)``.  Both
    integrals oscillate; the inner one is summed over half-periods in
    ``sigma = k s`` with Euler acceleration, the outer one likewise with
    period ``2 pi / |r - c_k r0(t)|`` at k = 0.  Coarse tolerance by default.

    Returns
    -------
    QuadratureResult
        ``converged`` is False when the subdivision budget ran out; the
        value is then a partial estimate with its error bar.
    """
    _require_nonrel(traj)
    r = np.asarray(r, dtype=float).reshape(3)
    if np.linalg.norm(r - traj.position(t)) == 0:
        raise ValueError("field point coincides with the current charge position")
    if charge == 0:
        return QuadratureResult(0.0, 0.0, 0, True)
    v = traj.velocity
    x_t = traj.position(t)
    inner_spec = QuadratureSpec(abs_tol=1e-300, rel_tol=0.1 * rel_tol, max_subdivisions=max_subdivisions)
    outer_spec = QuadratureSpec(abs_tol=1e-300, rel_tol=rel_tol, max_subdivisions=max_subdivisions)
    diagnostics = {"inner_failures": 0, "evaluations": 0}

    def inner(ks):
        ks = np.asarray(ks, dtype=float)
        c = mass / np.sqrt(mass ** 2 + 0.25 * ks ** 2)
        base = r[None, :] - c[:, None] * x_t[None, :]

        def f(sigma):
            sigma = np.asarray(sigma, dtype=float)
            # s = sigma / k; R_k(t - s) = |base + c v s|
            safe = np.where(ks > 0, ks, 1.0)
            s = sigma[:, None] / safe[None, :]
            sep = base[None, :, :] + (c[None, :] * s)[..., None] * v[None, None, :]
            R = np.linalg.norm(sep, axis=-1)
            ratio = np.where(ks[None, :] > 0, np.sin(ks[None, :] * R) / (safe[None, :] * R), 1.0)
            return np.sin(sigma)[:, None] * ratio

        res = integrate(f, 0.0, np.inf, inner_spec, period=2 * np.pi)
        diagnostics["evaluations"] += res.subdivisions_used
        if not res.converged:
            diagnostics["inner_failures"] += 1
        return np.asarray(res.value) / np.sqrt(ks ** 2 + 4 * mass ** 2)

    R0 = float(np.linalg.norm(r - x_t))
    outer = integrate(inner, 0.0, np.inf, outer_spec, period=2 * np.pi / R0)
    value = 4.0 * charge * mass / math.pi * outer.value
    err = 4.0 * abs(charge) * mass / math.pi * outer.error_estimate
    ok = outer.converged and diagnostics["inner_failures"] == 0
    return QuadratureResult(float(value), float(err), outer.subdivisions_used + diagnostics["evaluations"], bool(ok))
