"""Soft-photon emission in a collision with a self-consistent energy shift.

A charge whose velocity jumps from v1 to v2 radiates

    n_alpha(q) = e^2 g_q^2 |e_alpha.v2/(w - q.v2 + D) - e_alpha.v1/(w - q.v1 + D)|^2

photons per mode.  With D = 0 this is the classical 1/w^3 spectrum whose
photon number diverges logarithmically; the radiation-reaction shift D > 0
cuts it off below w ~ D.  D itself solves a fixed-point equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ALPHA
from .specfun import QuadratureSpec, integrate
from .spinor import polarization_batch

NONREL_SPEED = 0.3
# |v1 - v2| <= this fraction of |v1|
VELOCITY_JUMP_GUARD = 0.2


class ValidityError(ValueError):
    pass


class DeltaConvergenceError(ArithmeticError):
    def __init__(self, message, trace):
        self.trace = trace
        super().__init__(message)


@dataclass(frozen=True)
class CollisionSpec:
    """Velocities before (``v1``) and after (``v2``) the collision, mass and e^2."""

    v1: np.ndarray
    v2: np.ndarray
    mass: float = 1.0
    alpha: float = ALPHA

    def __post_init__(self):
        v1 = np.asarray(self.v1, dtype=float).reshape(3)
        v2 = np.asarray(self.v2, dtype=float).reshape(3)
        object.__setattr__(self, "v1", v1)
        object.__setattr__(self, "v2", v2)
        if not (self.mass > 0 and self.alpha >= 0):
            raise ValueError("mass must be positive and alpha non-negative")
        s1, s2 = np.linalg.norm(v1), np.linalg.norm(v2)
        if s1 >= 1 or s2 >= 1:
            raise ValidityError("velocities must be below the speed of light")
        jump = np.linalg.norm(v1 - v2)
        if jump > VELOCITY_JUMP_GUARD * s1 * (1 + 1e-12):
            raise ValidityError(
                f"|v1 - v2| = {jump:.3g} exceeds {VELOCITY_JUMP_GUARD} |v1|; the soft-photon formula needs a small jump"
            )

    @property
    def momentum(self):
        """Relativistic momentum m v1 / sqrt(1 - v1^2) before the collision."""
        return self.mass * self.v1 / math.sqrt(1.0 - float(self.v1 @ self.v1))


@dataclass(frozen=True)
class SpectrumSample:
    omega: float
    direction: np.ndarray
    alpha: int
    n: float


@dataclass(frozen=True)
class DeltaSolution:
    value: float
    first_iterate: float
    seed: float
    trace: list = field(default_factory=list)
    iterations: int = 0


_MU, _WMU = np.polynomial.legendre.leggauss(48)


def delta_functional(spec: CollisionSpec, delta: float, q_max: float = np.inf, rel_tol=1e-13) -> float:
    """Right-hand side F(delta) of the shift equation delta = F(delta).

    ``F = 2 e^2 int d^3q/(2 pi)^3 (2 pi / q) (p0^2 - (q.p0)^2/q^2)
    / (eps_- eps_+ (q - eps_+ + eps_- + delta))`` with
    ``eps_pm = sqrt(m^2 + (p0 +- q/2)^2)``.  Axial symmetry about p0 reduces
    it to a radial integral of a Gauss-Legendre sum over cos(theta).
    """
    p0 = float(np.linalg.norm(spec.momentum))
    if p0 == 0 or spec.alpha == 0:
        return 0.0
    m2 = spec.mass ** 2

    def radial(qs):
        q = np.asarray(qs, dtype=float)[:, None]
        base = m2 + p0 * p0 + 0.25 * q * q
        ep = np.sqrt(base + p0 * q * _MU)
        em = np.sqrt(base - p0 * q * _MU)
        val = p0 * p0 * (1 - _MU ** 2) / (em * ep * (q - ep + em + delta))
        return q[:, 0] * (val @ _WMU)

    # delta sets the infrared scale, m the ultraviolet one
    lo = max(delta, 1e-12 * spec.mass)
    points = list(np.geomspace(lo, 4.0 * spec.mass, 1 + int(math.ceil(math.log10(4.0 * spec.mass / lo)))))
    points = [p for p in points if p < q_max]
    res = integrate(radial, 0.0, q_max, QuadratureSpec(abs_tol=1e-300, rel_tol=rel_tol), points=points)
    if not res.converged:
        raise ArithmeticError(f"shift integral did not converge: {res}")
    # 2 e^2 (2 pi)(2 pi) / (2 pi)^3 = e^2 / pi
    return spec.alpha / math.pi * res.value


def solve_delta(spec: CollisionSpec, damping=0.5, rel_tol=1e-10, max_iter=200) -> DeltaSolution:
    """Damped fixed-point iteration for the shift, seeded at (4/3) e^2 m v1^2.

    ``delta <- (1 - damping) delta + damping F(delta)`` until successive
    iterates agree to ``rel_tol``.  The trace of iterates is kept.
    """
    if np.linalg.norm(spec.v1) >= NONREL_SPEED:
        raise ValidityError(f"|v1| must be below {NONREL_SPEED} for the shift equation")
    seed = 4.0 / 3.0 * spec.alpha * spec.mass * float(spec.v1 @ spec.v1)
    delta = seed
    trace = [delta]
    first = None
    for it in range(1, max_iter + 1):
        f = delta_functional(spec, delta)
        if first is None:
            first = f
        new = (1 - damping) * delta + damping * f
        trace.append(new)
        if abs(new - delta) <= rel_tol * abs(new):
            return DeltaSolution(new, first, seed, trace, it)
        delta = new
    raise DeltaConvergenceError(f"shift iteration did not converge in {max_iter} steps", trace)


def delta_shift(spec: CollisionSpec, **kwargs) -> float:
    """Self-consistent infrared shift Delta (units of m); see :func:`solve_delta`."""
    return solve_delta(spec, **kwargs).value


def _amplitude_vector(spec, qv, omega, delta):
    # X = v2/(w - q.v2 + D) - v1/(w - q.v1 + D), shape (N, 3)
    d1 = omega - qv @ spec.v1 + delta
    d2 = omega - qv @ spec.v2 + delta
    if np.any(d1 == 0) or np.any(d2 == 0):
        raise ValueError("classical pole w = q.v hit with zero shift")
    return spec.v2[None, :] / d2[:, None] - spec.v1[None, :] / d1[:, None]


def photon_spectrum(spec: CollisionSpec, omega, direction, delta):
    """Photon numbers (n1, n2) of the two transverse modes at ``omega * direction``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    n = np.asarray(direction, dtype=float).reshape(3)
    n = n / np.linalg.norm(n)
    qv = (omega * n)[None, :]
    x = _amplitude_vector(spec, qv, np.array([omega]), delta)[0]
    basis = polarization_batch(qv)[0]
    g2 = 2 * math.pi / omega
    return tuple(float(spec.alpha * g2 * abs(basis[a, 1:] @ x) ** 2) for a in (1, 2))


@dataclass(frozen=True)
class _Sphere:
    n: np.ndarray
    w: np.ndarray


def _sphere(n_theta=48, n_phi=64):
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1 - mu ** 2)
    n = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)), np.outer(mu, np.ones(n_phi))], -1)
    return _Sphere(n.reshape(-1, 3), np.outer(wmu, np.full(n_phi, 2 * np.pi / n_phi)).reshape(-1))


def angular_spectrum(spec: CollisionSpec, omega, delta, n_theta=48, n_phi=64):
    """Sum over both transverse modes of n integrated over photon directions.

    Uses |e_1.X|^2 + |e_2.X|^2 = |X|^2 - |n.X|^2, so no basis is built.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    sph = _sphere(n_theta, n_phi)
    out = np.empty(omega.size)
    for i, w in enumerate(omega):
        qv = w * sph.n
        x = _amplitude_vector(spec, qv, w, delta)
        perp = np.sum(x * x, axis=-1) - np.sum(x * sph.n, axis=-1) ** 2
        out[i] = spec.alpha * 2 * math.pi / w * (perp @ sph.w)
    return out


def total_photon_number(spec: CollisionSpec, delta, omega_min, omega_max=1.0, rel_tol=1e-10):
    """Photons radiated with energy in ``[omega_min, omega_max]``.

    ``N = int d^3q/(2 pi)^3 sum_alpha n``, integrated in log(omega).
    """
    if not 0 < omega_min < omega_max:
        raise ValueError("need 0 < omega_min < omega_max")
    sph = _sphere()

    def integrand(u):
        w = np.exp(np.asarray(u, dtype=float))
        vals = np.empty(w.size)
        for i, wi in enumerate(w):
            x = _amplitude_vector(spec, wi * sph.n, wi, delta)
            perp = np.sum(x * x, axis=-1) - np.sum(x * sph.n, axis=-1) ** 2
            vals[i] = spec.alpha * 2 * math.pi * wi * wi * (perp @ sph.w)
        return vals / (2 * math.pi) ** 3

    lo, hi = math.log(omega_min), math.log(omega_max)
    pts = []
    if delta > 0:
        pts = [u for u in np.log(delta) + np.arange(-6.0, 7.0, 2.0) if lo < u < hi]
    res = integrate(integrand, lo, hi, QuadratureSpec(abs_tol=1e-300, rel_tol=rel_tol), points=pts)
    if not res.converged:
        raise ArithmeticError(f"photon-number quadrature did not converge: {res}")
    return float(res.value)


@dataclass(frozen=True)
class Knee:
    omega: float
    plateau: float
    low_coefficient: float
    low_exponent: float
    ratio_to_delta: float


def spectral_knee(spec: CollisionSpec, delta, decades=1.0) -> Knee:
    """Crossover of omega^3 S(omega) from ~omega^2 (below delta) to a plateau.

    ``S`` is :func:`angular_spectrum`.  Power laws are fitted two to three
    decades on either side of ``delta`` and intersected.
    """
    if not delta > 0:
        raise ValueError("knee needs a positive shift")
    lo = delta * np.geomspace(1e-3, 1e-3 * 10 ** decades, 6)
    hi = delta * np.geomspace(1e2, 1e2 * 10 ** decades, 6)
    y_lo = lo ** 3 * angular_spectrum(spec, lo, delta)
    y_hi = hi ** 3 * angular_spectrum(spec, hi, delta)
    slope, icpt = np.polyfit(np.log(lo), np.log(y_lo), 1)
    plateau = float(np.exp(np.mean(np.log(y_hi))))
    coef = float(np.exp(icpt))
    omega = (plateau / coef) ** (1.0 / slope)
    return Knee(float(omega), plateau, coef, float(slope), float(omega / delta))


def spectrum_samples(spec: CollisionSpec, omegas, directions, delta):
    """Tabulate :func:`photon_spectrum` as :class:`SpectrumSample` records."""
    rows = []
    for w in omegas:
        for d in directions:
            d = np.asarray(d, dtype=float) / np.linalg.norm(d)
            n1, n2 = photon_spectrum(spec, w, d, delta)
            rows.append(SpectrumSample(float(w), d, 1, n1))
            rows.append(SpectrumSample(float(w), d, 2, n2))
    return rows
