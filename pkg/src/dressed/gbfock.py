"""Single scalar-photon mode with an indefinite metric, on a truncated Fock space.

Scalar photons obey [b, b+] = -1.  On the number basis |n> this is realised
by B|n> = -sqrt(n)|n-1>, B+|n> = sqrt(n+1)|n+1> together with the metric
eta = diag((-1)^n); B+ is then the eta-adjoint of B.  Coherent states
D(Q)|vac> carry the prefactor exp(+|Q|^2/2) and are eigenvectors of B with
eigenvalue -Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.special import gammaln

from .specfun import QuadratureSpec, integrate

# |Q|^2 <= N * GUARD keeps the Poisson tail negligible
TRUNCATION_GUARD = 0.25


class TruncationError(ValueError):
    pass


class StepCountError(ArithmeticError):
    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (step-doubling residual {residual:.3g})")


@dataclass(frozen=True)
class TruncatedFockSpace:
    dim: int
    annihilation: np.ndarray
    creation: np.ndarray
    metric: np.ndarray
    omega: float
    hamiltonian: np.ndarray

    def eta_inner(self, u, v) -> complex:
        """Indefinite inner product <u|eta|v>."""
        return complex(np.vdot(u, self.metric * v))

    def commutator(self):
        return self.annihilation @ self.creation - self.creation @ self.annihilation


@dataclass(frozen=True)
class FockVector:
    coefficients: np.ndarray
    metric: np.ndarray

    @property
    def eta_norm(self) -> float:
        return float(np.real(np.vdot(self.coefficients, self.metric * self.coefficients)))

    @property
    def aux_norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    @property
    def tail_mass(self) -> float:
        return float(abs(self.coefficients[-1]) ** 2)


def build_space(dim: int, omega: float = 1.0) -> TruncatedFockSpace:
    """Truncated scalar-photon space of dimension ``dim`` with H0 = -omega B+ B."""
    if dim < 4:
        raise ValueError("truncation dimension must be at least 4")
    root = np.sqrt(np.arange(1, dim, dtype=float))
    b = np.diag(-root, k=1)
    bd = np.diag(root, k=-1)
    metric = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    return TruncatedFockSpace(dim, b, bd, metric, float(omega), -omega * bd @ b)


def _check_guard(space, q0):
    if abs(q0) ** 2 > TRUNCATION_GUARD * space.dim:
        raise TruncationError(
            f"|Q0|^2 = {abs(q0) ** 2:.3g} exceeds {TRUNCATION_GUARD} * N = {TRUNCATION_GUARD * space.dim}"
        )


def displacement(space: TruncatedFockSpace, q0: complex) -> np.ndarray:
    """Matrix exp(Q0 B+ - Q0* B) on the truncated space."""
    return expm(q0 * space.creation - np.conj(q0) * space.annihilation)


def displaced_vacuum(space: TruncatedFockSpace, q0: complex) -> FockVector:
    """Coherent state D(Q0)|vac>, by matrix exponentiation."""
    _check_guard(space, q0)
    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1.0
    if q0 == 0:
        return FockVector(vac, space.metric)
    return FockVector(displacement(space, q0) @ vac, space.metric)


def coherent_coefficients(dim: int, q0: complex) -> np.ndarray:
    """Series coefficients exp(|Q0|^2/2) Q0^n / sqrt(n!) of the coherent state."""
    n = np.arange(dim)
    q0 = complex(q0)
    if q0 == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    logmag = 0.5 * abs(q0) ** 2 + n * math.log(abs(q0)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(q0))


@dataclass(frozen=True)
class ForcedEvolution:
    """Closed-form and stepped solutions of the driven scalar mode.

    ``phase`` multiplies D(Q0(t))|vac> in the closed form and equals
    int Im(conj(dQ0/dt) Q0) dt; ``phase_half`` is half of it.
    ``overlap`` is <closed|eta|stepped>.
    """

    closed: FockVector
    stepped: FockVector
    q0: complex
    phase: float
    phase_half: float
    overlap: complex
    aux_residual: float
    step_error: float


def _drive_amplitude(alpha, omega, t0, t):
    def qdot(s):
        s = np.asarray(s, dtype=float)
        return -1j * np.asarray(alpha(s), dtype=complex) * np.exp(1j * omega * s)

    if t == t0:
        return 0j, 0.0
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-13)
    q0 = complex(integrate(qdot, t0, t, spec).value)

    def rhs(s, y):
        qd = complex(qdot(np.array([s]))[0])
        q = y[0] + 1j * y[1]
        return [qd.real, qd.imag, (np.conj(qd) * q).imag]

    sol = solve_ivp(rhs, (t0, t), [0.0, 0.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-15)
    return q0, float(sol.y[2, -1])


def _rk4(space, alpha, omega, t0, t, steps, keep=False):
    b, bd = space.annihilation, space.creation
    h = (t - t0) / steps
    psi = np.zeros(space.dim, dtype=complex)
    psi[0] = 1.0

    def rhs(s, y):
        a = complex(np.asarray(alpha(np.array([s])), dtype=complex).reshape(-1)[0])
        ph = np.exp(1j * omega * s)
        return -1j * (a * ph * (bd @ y) + np.conj(a * ph) * (b @ y))

    path = [psi.copy()] if keep else None
    s = t0
    for _ in range(steps):
        k1 = rhs(s, psi)
        k2 = rhs(s + h / 2, psi + h / 2 * k1)
        k3 = rhs(s + h / 2, psi + h / 2 * k2)
        k4 = rhs(s + h, psi + h * k3)
        psi = psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s = t0 + h * (_ + 1)
        if keep:
            path.append(psi.copy())
    return (psi, np.array(path)) if keep else psi


def evolve_forced(space: TruncatedFockSpace, alpha: Callable, t0: float, t: float, steps: int = 400,
                  tol: float = 1e-9) -> ForcedEvolution:
    """Driven scalar mode in the interaction picture.

    Solves ``i d/dt |s> = [alpha(s) e^{i omega s} B+ + conj(.) B] |s>`` from
    the vacuum at ``t0`` twice: in closed form as
    ``exp(i phase) D(Q0(t))|vac>`` with ``Q0(t) = -i int alpha e^{i omega s} ds``,
    and by classical RK4 with ``steps`` steps.  Step doubling estimates the
    stepping error; above ``tol`` :class:`StepCountError` is raised.

    Parameters
    ----------
    alpha : callable
        Vectorised drive amplitude ``alpha(s)``.
    """
    if steps < 2:
        raise ValueError("need at least two steps")
    omega = space.omega
    q0, phase = _drive_amplitude(alpha, omega, t0, t)
    _check_guard(space, q0)
    closed = np.exp(1j * phase) * displaced_vacuum(space, q0).coefficients
    fine = _rk4(space, alpha, omega, t0, t, steps)
    coarse = _rk4(space, alpha, omega, t0, t, steps // 2)
    step_error = float(np.linalg.norm(fine - coarse)) / 15.0 / max(np.linalg.norm(fine), 1e-300)
    if step_error > tol:
        raise StepCountError(f"{steps} RK4 steps are too few", step_error)
    overlap = complex(np.vdot(closed, space.metric * fine))
    aux = float(np.linalg.norm(closed - fine) / np.linalg.norm(closed))
    return ForcedEvolution(FockVector(closed, space.metric), FockVector(fine, space.metric), q0,
                           phase, 0.5 * phase, overlap, aux, step_error)


def schrodinger_residual(space: TruncatedFockSpace, alpha: Callable, t0: float, t: float,
                         steps: int = 2000) -> float:
    """Largest relative residual of the interaction-picture equation on the RK4 path.

    The time derivative is taken by central differences of the stepped
    states; the result is per unit time.
    """
    omega = space.omega
    _, path = _rk4(space, alpha, omega, t0, t, steps, keep=True)
    h = (t - t0) / steps
    s = t0 + h * np.arange(1, steps)
    a = np.asarray(alpha(s), dtype=complex) * np.exp(1j * omega * s)
    deriv = 1j * (path[2:] - path[:-2]) / (2 * h)
    ham = a[:, None] * (path[1:-1] @ space.creation.T) + np.conj(a)[:, None] * (path[1:-1] @ space.annihilation.T)
    res = np.linalg.norm(deriv - ham, axis=1) / np.linalg.norm(path[1:-1], axis=1)
    return float(np.max(res))


@dataclass(frozen=True)
class GBCheck:
    dim: int
    q0: complex
    commutator_residual: float
    eta_adjoint_residual: float
    eigen_residual: float
    eta_norm_error: float
    series_residual: float
    tail_mass: float


def invariant_report(dim: int, q0: complex) -> GBCheck:
    """Residuals of the scalar-photon algebra and coherent-state identities."""
    space = build_space(dim)
    comm = space.commutator()
    inner = comm[: dim - 1, : dim - 1] + np.eye(dim - 1)
    adj = space.metric[:, None] * space.creation * space.metric[None, :] - space.annihilation.conj().T
    state = displaced_vacuum(space, q0)
    c = state.coefficients
    eigen = np.linalg.norm(space.annihilation @ c + q0 * c) / np.linalg.norm(c)
    series = np.linalg.norm(c - coherent_coefficients(dim, q0)) / np.linalg.norm(c)
    return GBCheck(dim, complex(q0), float(np.max(np.abs(inner))), float(np.max(np.abs(adj))),
                   float(eigen), abs(state.eta_norm - 1.0), float(series), state.tail_mass)
