"""Zeroth-order coherent photon cloud of a free electron.

The electron enters only through a c-number current amplitude f^mu(q, t).
Each photon mode (alpha, q) is then a forced oscillator whose coherent
amplitude is

    Q(t) = -i g_q int_0^t e*_alpha . f(q, t') exp(i omega t') dt',

with phase chi(t) = int_0^t Im(conj(dQ/dt) Q) dt'.  Mode sums are converted
to integrals over d^3q / (2 pi)^3 (unit normalisation volume).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .constants import CHARGE
from .specfun import QuadratureSpec, integrate
from .spinor import basis_project, current_diagonal_batch, energy, polarization_basis, polarization_batch

# Packet widths below this many Compton lengths trigger a warning.
MIN_WIDTH_COMPTON = 5.0

CONVENTIONS = {
    "transverse": np.array([0.0, 1.0, 1.0, 0.0]),
    "all_positive": np.array([1.0, 1.0, 1.0, 1.0]),
    "metric": np.array([-1.0, 1.0, 1.0, 1.0]),
}


class PacketValidityWarning(UserWarning):
    pass


class QuadratureError(ArithmeticError):
    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (worst residual {residual:.3g})")


class SelfConsistencyError(ArithmeticError):
    def __init__(self, message, history):
        self.history = history
        super().__init__(message)


@dataclass(frozen=True)
class WavePacket:
    """Gaussian one-electron state: width ``width`` (1/m), centre ``k0``, spin ``spin``."""

    width: float
    k0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    spin: float = 0.5
    mass: float = 1.0

    def __post_init__(self):
        k0 = np.asarray(self.k0, dtype=float).reshape(3)
        object.__setattr__(self, "k0", k0)
        if not self.width > 0:
            raise ValueError("packet width must be positive")
        if not np.all(np.isfinite(k0)):
            raise ValueError("k0 must be finite")
        if self.spin not in (0.5, -0.5):
            raise ValueError("spin must be +1/2 or -1/2")
        if not self.valid:
            warnings.warn(
                f"packet width {self.width} is below {MIN_WIDTH_COMPTON} Compton lengths",
                PacketValidityWarning,
                stacklevel=2,
            )

    @property
    def valid(self) -> bool:
        return self.width * self.mass >= MIN_WIDTH_COMPTON


@dataclass(frozen=True)
class PhotonMode:
    alpha: int
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(3)
        object.__setattr__(self, "q", q)
        if self.alpha not in (0, 1, 2, 3):
            raise ValueError("alpha must be 0..3")
        if not self.omega > 0:
            raise ValueError("photon mode needs |q| > 0")

    @property
    def omega(self) -> float:
        return float(np.linalg.norm(self.q))

    @property
    def coupling(self) -> float:
        return math.sqrt(2.0 * math.pi / self.omega)


@dataclass(frozen=True)
class CoherentAmplitude:
    mode: PhotonMode
    t: float
    Q: complex
    chi: float
    chi_residual: float = 0.0


@dataclass(frozen=True)
class StationaryCurrent:
    """Current amplitude whose time dependence is the single phase exp(-i frequency t)."""

    amplitude: np.ndarray
    frequency: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.multiply.outer(np.exp(-1j * self.frequency * t), self.amplitude)


def _pm(packet, delta_k):
    dk = np.zeros(3) if delta_k is None else np.asarray(delta_k, dtype=float)
    return packet.k0 - dk


def _stationary_batch(q, p_m, spin, mass, charge):
    # amplitude (N, 4) at t = 0 and frequency eps_+ - eps_- (N,)
    lo, hi = p_m - 0.5 * q, p_m + 0.5 * q
    amp = charge * current_diagonal_batch(spin, lo, hi, mass)
    return amp, energy(hi, mass) - energy(lo, mass)


def stationary_current(q, packet: WavePacket, delta_k=None, charge=CHARGE) -> StationaryCurrent:
    """Stationary-phase current for wavevector ``q`` as a callable of time."""
    q = np.asarray(q, dtype=float).reshape(3)
    amp, freq = _stationary_batch(q, _pm(packet, delta_k), packet.spin, packet.mass, charge)
    return StationaryCurrent(amp, float(freq))


def f_stationary(q, t, packet: WavePacket, delta_k=None, charge=CHARGE):
    """Stationary-phase current amplitude f^mu(q, t).

    Parameters
    ----------
    q : array_like, shape (3,)
        Photon wavevector.
    t : float
        Time since the packet was prepared.
    packet : WavePacket
    delta_k : array_like, optional
        Momentum already carried off by the cloud; the current is evaluated
        at ``p_m = k0 - delta_k``.
    charge : float

    Returns
    -------
    ndarray, shape (4,), complex
        Contravariant components; obeys
        ``(eps_+ - eps_-) f^0 = q . f_vec``.
    """
    return stationary_current(q, packet, delta_k, charge)(t)


def gaussian_normalization_ratio(width: float) -> float:
    """f^0(q -> 0)/e produced by the literal prefactor (2 pi width^2)^(3/2).

    The momentum sum becomes int d^3p/(2 pi)^3, so the Gaussian
    exp(-2 width^2 p^2) integrates to (pi / 2 width^2)^(3/2)/(2 pi)^3; the
    product is width-independent and equals 1/8.  :func:`f_gaussian`
    rescales to the charge-conserving value 1.
    """
    return (2 * math.pi * width ** 2) ** 1.5 * (math.pi / (2 * width ** 2)) ** 1.5 / (2 * math.pi) ** 3


def _gauss_average(q, t, p_m, packet, charge, nodes):
    y, w = np.polynomial.hermite.hermgauss(nodes)
    w = w / w.sum()
    # weight exp(-2 width^2 x^2) -> exp(-y^2) with x = y / (sqrt(2) width)
    x = y / (math.sqrt(2.0) * packet.width)
    grid = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    weight = np.einsum("i,j,k->ijk", w, w, w).reshape(-1)
    amp, freq = _stationary_batch(q, p_m + grid, packet.spin, packet.mass, charge)
    return np.einsum("n,nm->m", weight * np.exp(-1j * freq * t), amp)


def f_gaussian(q, t, packet: WavePacket, delta_k=None, charge=CHARGE, nodes=12, rtol=1e-9):
    """Packet-averaged current amplitude by tensor Gauss-Hermite quadrature.

    The Gaussian weight exp(-2 width^2 (p - p_m)^2) is normalised to unit
    mass so that f^0(q -> 0) = e (see :func:`gaussian_normalization_ratio`).
    The rule with ``nodes`` points per axis is compared against one with
    ``nodes - 4``; disagreement beyond ``rtol`` raises :class:`QuadratureError`.
    """
    q = np.asarray(q, dtype=float).reshape(3)
    p_m = _pm(packet, delta_k)
    fine = _gauss_average(q, t, p_m, packet, charge, nodes)
    coarse = _gauss_average(q, t, p_m, packet, charge, nodes - 4)
    scale = max(float(np.max(np.abs(fine))), abs(charge) * 1e-300, 1e-300)
    residual = float(np.max(np.abs(fine - coarse))) / scale
    if residual > rtol:
        raise QuadratureError("Gauss-Hermite packet average not converged", residual)
    return fine


def _projection(mode: PhotonMode, basis, f0):
    basis = basis if basis is not None else polarization_basis(mode.q)
    return complex(basis_project(basis.vectors, f0)[mode.alpha])


def _phase_integral(nu, tau):
    # (exp(i nu tau) - 1) / (i nu), finite at nu = 0
    return tau * np.exp(0.5j * nu * tau) * np.sinc(nu * tau / (2 * np.pi))


def _closed_form(g, c, nu, t0, t):
    tau = t - t0
    Q = -1j * g * c * np.exp(1j * nu * t0) * _phase_integral(nu, tau)
    x = nu * tau
    if abs(x) < 1e-3:
        # tau - sin(x)/nu expanded: avoids cancellation near resonance
        bracket = tau ** 3 * nu * (1 / 6 - x * x / 120 + x ** 4 / 5040)
    else:
        bracket = (tau - math.sin(x) / nu) / nu
    chi = -(g * g) * abs(c) ** 2 * bracket
    return complex(Q), float(chi)


def amplitude_Q(mode: PhotonMode, t: float, f: Callable, basis=None, *, t0=0.0, method="auto",
                rtol=1e-12) -> CoherentAmplitude:
    """Coherent amplitude Q and phase chi of one photon mode on ``[t0, t]``.

    Parameters
    ----------
    mode : PhotonMode
    t : float
    f : callable
        Current amplitude, ``f(t) -> (4,)`` complex.  A
        :class:`StationaryCurrent` is integrated in closed form unless
        ``method="quadrature"``.
    basis : PolarizationBasis, optional
        Defaults to ``polarization_basis(mode.q)``.
    t0 : float
        Start of the interval (the cloud is empty at ``t0``).
    method : {"auto", "quadrature"}
    """
    g = mode.coupling
    omega = mode.omega
    if t == t0:
        return CoherentAmplitude(mode, t, 0j, 0.0)

    if isinstance(f, StationaryCurrent) and method == "auto":
        c = _projection(mode, basis, f.amplitude)
        nu = omega - f.frequency
        Q, chi = _closed_form(g, c, nu, t0, t)
        return CoherentAmplitude(mode, t, Q, chi)

    basis = basis if basis is not None else polarization_basis(mode.q)

    def qdot(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        c = basis_project(basis.vectors, np.asarray(f(s)).reshape(s.size, 4))[:, mode.alpha]
        return -1j * g * c * np.exp(1j * omega * s)

    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=rtol)
    res = integrate(qdot, t0, t, spec)
    Q = complex(res.value)

    def rhs(s, y):
        qd = qdot(s)[0]
        q = y[0] + 1j * y[1]
        dchi = -0.5j * (np.conj(qd) * q - np.conj(q) * qd)
        return [qd.real, qd.imag, dchi.real, dchi.imag]

    sol = solve_ivp(rhs, (t0, t), [0.0, 0.0, 0.0, 0.0], method="DOP853", rtol=rtol, atol=1e-15)
    if not sol.success:
        raise QuadratureError(f"phase integration failed: {sol.message}", float("nan"))
    chi = sol.y[2, -1]
    return CoherentAmplitude(mode, t, Q, float(chi), float(sol.y[3, -1]))


# ---------------------------------------------------------------------------
# cloud observables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeGrid:
    """Spherical mode grid: Gauss-Legendre in cos(theta), trapezoid in phi, adaptive radius."""

    q_max: float = 20.0
    n_theta: int = 32
    n_phi: int = 64
    rel_tol: float = 1e-8
    abs_tol: float = 1e-15
    rotation: float = 0.0
    convention: str = "transverse"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown polarization convention {self.convention!r}")
        if not (self.q_max > 0 and self.n_theta > 0 and self.n_phi > 0):
            raise ValueError("grid parameters must be positive")


@dataclass(frozen=True)
class CloudSummary:
    """Photon-cloud observables at one time.

    ``per_alpha_*`` arrays are indexed by polarization alpha = 0..3 and
    hold the raw (+1 weighted) contributions; the headline fields use the
    weights of ``convention``.
    """

    t: float
    convention: str
    delta_k: np.ndarray
    delta_e: float
    n_photons: float
    e_cloud: float
    e_cloud_average: float
    per_alpha_n: np.ndarray
    per_alpha_k: np.ndarray
    per_alpha_e: np.ndarray
    per_alpha_e_average: np.ndarray
    q_max: float
    uv_converged: bool
    uv_tail: float
    quadrature_converged: bool

    def total(self, quantity: str, convention: str | None = None):
        """Polarization sum of ``n``, ``k``, ``e`` or ``e_average`` under a convention."""
        w = CONVENTIONS[convention or self.convention]
        arr = {"n": self.per_alpha_n, "k": self.per_alpha_k, "e": self.per_alpha_e,
               "e_average": self.per_alpha_e_average}[quantity]
        return np.tensordot(w, arr, axes=(0, 0))


class _AngularGrid:
    def __init__(self, grid: ModeGrid):
        mu, wmu = np.polynomial.legendre.leggauss(grid.n_theta)
        phi = 2 * np.pi * np.arange(grid.n_phi) / grid.n_phi
        mu_g, phi_g = np.meshgrid(mu, phi, indexing="ij")
        s = np.sqrt(1 - mu_g ** 2)
        self.n = np.stack([s * np.cos(phi_g), s * np.sin(phi_g), mu_g], axis=-1).reshape(-1, 3)
        self.w = (wmu[:, None] * np.full(grid.n_phi, 2 * np.pi / grid.n_phi)).reshape(-1)
        self.basis = polarization_batch(self.n, grid.rotation)


def _cloud_density(qs, t, p_m, packet, charge, ang):
    # per radial node: [alpha, (n, kx, ky, kz, e, e_avg)] already angle-integrated
    qs = np.asarray(qs, dtype=float)
    out = np.zeros((qs.size, 4, 6))
    pos = qs > 0
    if not np.any(pos):
        return out.reshape(qs.size, -1)
    qv = qs[pos, None, None] * ang.n[None]
    amp, freq = _stationary_batch(qv.reshape(-1, 3), p_m, packet.spin, packet.mass, charge)
    nang = ang.n.shape[0]
    amp = amp.reshape(-1, nang, 4)
    freq = freq.reshape(-1, nang)
    # real basis with e_0 = (1, 0, 0, 0): e*.f = f^0 for alpha = 0, -e_vec.f_vec otherwise
    c = np.empty_like(amp)
    c[..., 0] = amp[..., 0]
    for a in (1, 2, 3):
        e = ang.basis[:, a, 1:]
        c[..., a] = -(amp[..., 1] * e[:, 0] + amp[..., 2] * e[:, 1] + amp[..., 3] * e[:, 2])
    q = qs[pos, None]
    nu = q - freq
    g2 = 2 * np.pi / q
    # |Q|^2 = g^2 |c|^2 |(exp(i nu t) - 1)/nu|^2 and its long-time mean 2 g^2 |c|^2 / nu^2
    phase = (t * np.sinc(nu * t / (2 * np.pi))) ** 2
    base = g2[..., None] * np.abs(c) ** 2
    occ = base * phase[..., None]
    occ_avg = base * (2.0 / nu ** 2)[..., None]
    measure = ang.w * (q ** 2) / (2 * np.pi) ** 3  # (nq, nang)
    res = np.empty((qs[pos].size, 4, 6))
    weighted = measure[..., None] * occ
    res[..., 0] = weighted.sum(axis=1)
    res[..., 1:4] = np.matmul(np.swapaxes(weighted, 1, 2), ang.n) * q[..., None]
    res[..., 4] = res[..., 0] * q
    res[..., 5] = (measure[..., None] * occ_avg).sum(axis=1) * q
    out[pos] = res
    return out.reshape(qs.size, -1)


def cloud_summary(packet: WavePacket, t: float, delta_k=None, grid: ModeGrid | None = None,
                  charge=CHARGE) -> CloudSummary:
    """Photon number, momentum loss and energy of the cloud at time ``t``.

    The current is the stationary-phase amplitude at ``p_m = k0 - delta_k``.
    The radial integral runs to ``grid.q_max``; the shell
    ``[q_max, 2 q_max]`` is integrated as a UV check and the result is
    flagged (not raised) when it exceeds ``grid.rel_tol`` of the total in
    the chosen convention.
    """
    grid = grid or ModeGrid()
    p_m = _pm(packet, delta_k)
    ang = _AngularGrid(grid)
    spec = QuadratureSpec(abs_tol=grid.abs_tol, rel_tol=grid.rel_tol)

    def density(qs):
        return _cloud_density(qs, t, p_m, packet, charge, ang)

    if t == 0 or charge == 0:
        body = np.zeros((4, 6))
        tail = np.zeros((4, 6))
        converged = True
    else:
        main = integrate(density, 0.0, grid.q_max, spec)
        extra = integrate(density, grid.q_max, 2 * grid.q_max, spec)
        body = np.asarray(main.value).reshape(4, 6)
        tail = np.asarray(extra.value).reshape(4, 6)
        converged = main.converged and extra.converged

    w = CONVENTIONS[grid.convention]
    total = np.tensordot(w, body, axes=(0, 0))
    shell = np.tensordot(w, tail, axes=(0, 0))
    ratios = [abs(shell[i]) / abs(total[i]) for i in (0, 4) if total[i] != 0]
    uv_tail = float(max(ratios, default=0.0))
    return CloudSummary(
        t=float(t),
        convention=grid.convention,
        delta_k=total[1:4].copy(),
        delta_e=float(total[4]),
        n_photons=float(total[0]),
        e_cloud=float(total[4]),
        e_cloud_average=float(total[5]),
        per_alpha_n=body[:, 0].copy(),
        per_alpha_k=body[:, 1:4].copy(),
        per_alpha_e=body[:, 4].copy(),
        per_alpha_e_average=body[:, 5].copy(),
        q_max=grid.q_max,
        uv_converged=bool(uv_tail <= grid.rel_tol),
        uv_tail=uv_tail,
        quadrature_converged=bool(converged),
    )


@dataclass(frozen=True)
class SelfConsistentStep:
    t: float
    delta_k: np.ndarray
    p_m: np.ndarray
    iterations: int
    history: list
    contraction_ratios: list
    summary: CloudSummary
    packet: WavePacket
    charge: float

    def current(self, q) -> StationaryCurrent:
        """Dressed current snapshot at this time for wavevector ``q``."""
        return stationary_current(q, self.packet, self.delta_k, self.charge)


def solve_self_consistent(packet: WavePacket, t_grid, grid: ModeGrid | None = None, charge=CHARGE,
                          tol=1e-8, max_iter=100):
    """Fixed-point iteration for the momentum loss at each time in ``t_grid``.

    Starting from ``delta_k = 0`` the current is rebuilt at
    ``p_m = k0 - delta_k`` and the cloud re-summed until successive
    momentum losses differ by less than ``tol`` (units of m).

    Returns
    -------
    list of SelfConsistentStep
    """
    t_grid = [float(t) for t in t_grid]
    if any(b < a for a, b in zip(t_grid, t_grid[1:])) or (t_grid and t_grid[0] < 0):
        raise ValueError("t_grid must be ascending and non-negative")
    tol = tol * packet.mass
    steps = []
    for t in t_grid:
        dk = np.zeros(3)
        history = [dk]
        ratios = []
        summary = None
        for it in range(1, max_iter + 1):
            summary = cloud_summary(packet, t, dk, grid, charge)
            new = summary.delta_k
            step = float(np.linalg.norm(new - dk))
            history.append(new)
            if len(history) >= 3:
                prev = float(np.linalg.norm(history[-2] - history[-3]))
                ratios.append(step / prev if prev > 0 else 0.0)
            dk = new
            if step < tol:
                break
        else:
            raise SelfConsistencyError(f"no convergence at t={t} after {max_iter} iterations", history)
        steps.append(SelfConsistentStep(t, dk, packet.k0 - dk, it, history, ratios, summary, packet, charge))
    return steps
