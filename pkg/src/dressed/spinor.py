"""Dirac bispinors, current matrix elements and photon polarization bases.

Conventions: standard (Dirac) representation of the gamma matrices, spin
quantized along z, metric signature (+, -, -, -), units with the electron
mass as the default ``mass=1``.  Three- and four-vectors are plain numpy
arrays of shape ``(3,)`` and ``(4,)``; batched routines take a leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
METRIC_WEIGHTS = np.array([1.0, -1.0, -1.0, -1.0])

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

GAMMA = np.array(
    [np.block([[_I2, _Z2], [_Z2, -_I2]])]
    + [np.block([[_Z2, s], [-s, _Z2]]) for s in PAULI]
)

# transverse pair falls back to n x x-hat when n is this close to z
_TIE_BREAK = 1e-8


def energy(p, mass=1.0):
    """Relativistic energy sqrt(m^2 + p^2); ``p`` may carry a leading batch axis."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(mass * mass + p[..., 0] ** 2 + p[..., 1] ** 2 + p[..., 2] ** 2)


def minkowski_dot(a, b):
    """a^mu g_{mu nu} b^nu (no complex conjugation)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def pauli_spinor(spin):
    """Unit two-spinor with projection ``spin`` (+1/2 or -1/2) on z."""
    if spin == 0.5:
        return np.array([1.0, 0.0], dtype=complex)
    if spin == -0.5:
        return np.array([0.0, 1.0], dtype=complex)
    raise ValueError(f"spin must be +1/2 or -1/2, got {spin!r}")


def _sigma_dot(p, w):
    # (p . sigma) w for p of shape (..., 3) and w of shape (2,)
    p = np.asarray(p, dtype=float)
    px, py, pz = p[..., 0], p[..., 1], p[..., 2]
    return np.stack((pz * w[0] + (px - 1j * py) * w[1],
                     (px + 1j * py) * w[0] - pz * w[1]), axis=-1)


def _sigma_sandwich(a, b):
    # a^dagger sigma_k b for two-spinor batches (..., 2); returns (..., 3)
    ca = np.conj(a)
    x = ca[..., 0] * b[..., 1] + ca[..., 1] * b[..., 0]
    y = 1j * (ca[..., 1] * b[..., 0] - ca[..., 0] * b[..., 1])
    z = ca[..., 0] * b[..., 0] - ca[..., 1] * b[..., 1]
    return np.stack((x, y, z), axis=-1)


@dataclass(frozen=True)
class Bispinor:
    components: np.ndarray
    spin: float
    momentum: np.ndarray
    energy: float

    def dagger_dot(self, other: "Bispinor") -> complex:
        return complex(np.vdot(self.components, other.components))

    def bar_dot(self, other: "Bispinor") -> complex:
        return complex(np.vdot(self.components, GAMMA[0] @ other.components))


def u_batch(spin, p, mass=1.0):
    """Positive-energy bispinors for momenta ``p`` of shape (N, 3); returns (N, 4)."""
    p = np.asarray(p, dtype=float)
    w = pauli_spinor(spin)
    eps = energy(p, mass)
    # sqrt(eps - m) n_p = p / sqrt(eps + m) avoids 0/0 at p = 0
    upper = np.sqrt(eps + mass)[..., None] * w
    lower = _sigma_dot(p, w) / np.sqrt(eps + mass)[..., None]
    return np.concatenate((upper, lower), axis=-1) / np.sqrt(2.0 * eps)[..., None]


def bispinor_u(spin, p, mass=1.0) -> Bispinor:
    """Electron bispinor u normalised to u^dagger u = 1."""
    p = np.asarray(p, dtype=float).reshape(3)
    return Bispinor(u_batch(spin, p, mass), spin, p, float(energy(p, mass)))


def _charge_conjugate(components):
    # C ubar^T = i gamma^2 u^*
    return 1j * GAMMA[2] @ np.conj(components)


def bispinor_v(spin, p, mass=1.0) -> Bispinor:
    """Positron bispinor v for spin projection ``spin``.

    Obtained from the electron bispinor of opposite spin by charge
    conjugation, which yields the block form
    ``(sqrt(eps-m) (n.sigma) w' ; sqrt(eps+m) w') / sqrt(2 eps)``
    with ``w' = -i sigma_2 w*_{-spin}``, a unit spinor of projection ``spin``.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    u = u_batch(-spin, p, mass)
    return Bispinor(_charge_conjugate(u), spin, p, float(energy(p, mass)))


def v_block_form(spin, p, mass=1.0):
    """The positron bispinor written out directly in block form."""
    p = np.asarray(p, dtype=float).reshape(3)
    eps = float(energy(p, mass))
    w_prime = -1j * PAULI[1] @ np.conj(pauli_spinor(-spin))
    upper = _sigma_dot(p, w_prime) / np.sqrt(eps + mass)
    lower = np.sqrt(eps + mass) * w_prime
    return np.concatenate((upper, lower)) / np.sqrt(2.0 * eps)


def current_batch(spin_out, p_out, spin_in, p_in, mass=1.0):
    """ubar(spin_out, p_out) gamma^mu u(spin_in, p_in) for batches of momenta.

    Returns an array of shape (N, 4), contravariant index last.
    """
    uo = u_batch(spin_out, p_out, mass)
    ui = u_batch(spin_in, p_in, mass)
    j0 = np.sum(np.conj(uo) * ui, axis=-1)
    jv = _sigma_sandwich(uo[..., :2], ui[..., 2:]) + _sigma_sandwich(uo[..., 2:], ui[..., :2])
    return np.concatenate((j0[..., None], jv), axis=-1)


def current_element(spin_out, p_out, spin_in, p_in, mu, mass=1.0) -> complex:
    """Single matrix element ubar_{spin_out, p_out} gamma^mu u_{spin_in, p_in}."""
    j = current_batch(spin_out, np.asarray(p_out, float), spin_in, np.asarray(p_in, float), mass)
    return complex(j[mu])


def current_vector(spin_out, p_out, spin_in, p_in, mass=1.0):
    """All four components of the current matrix element."""
    return current_batch(spin_out, np.asarray(p_out, float), spin_in, np.asarray(p_in, float), mass)


def current_diagonal_batch(spin, p_out, p_in, mass=1.0):
    """Spin-diagonal current ubar(spin, p_out) gamma^mu u(spin, p_in) in closed form.

    Uses (a.sigma)(b.sigma) = a.b + i sigma.(a x b) with <sigma> = 2 spin z,
    so no bispinors are built.  Agrees with :func:`current_batch`.
    """
    a = np.asarray(p_out, dtype=float)
    b = np.asarray(p_in, dtype=float)
    if spin not in (0.5, -0.5):
        raise ValueError(f"spin must be +1/2 or -1/2, got {spin!r}")
    s = 2.0 * spin
    ea = energy(a, mass) + mass
    eb = energy(b, mass) + mass
    norm = 1.0 / np.sqrt(4.0 * (ea - mass) * (eb - mass) * ea * eb)
    ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    cross_z = ax * by - ay * bx
    j0 = (ea * eb + ax * bx + ay * by + az * bz + 1j * s * cross_z) * norm
    # b + i b x S and a - i a x S with S = (0, 0, s)
    jx = (ea * (bx + 1j * s * by) + eb * (ax - 1j * s * ay)) * norm
    jy = (ea * (by - 1j * s * bx) + eb * (ay + 1j * s * ax)) * norm
    jz = (ea * bz + eb * az) * norm
    return np.stack((j0, jx, jy, jz), axis=-1)


@dataclass(frozen=True)
class PolarizationBasis:
    """Four polarization 4-vectors for one photon wavevector.

    ``vectors[alpha]`` is e^mu_alpha; alpha = 0 time-like, 1 and 2
    transverse, 3 longitudinal.
    """

    q: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray = METRIC_WEIGHTS

    def project(self, f):
        """Covariant projections e*^mu_alpha f_mu for every alpha."""
        return basis_project(self.vectors, f)


def polarization_batch(q, rotation=0.0):
    """Polarization 4-vectors for wavevectors ``q`` of shape (N, 3).

    Returns an (N, 4, 4) real array indexed [n, alpha, mu].  ``rotation``
    rotates the transverse pair about n_q by that angle (radians).
    """
    q = np.asarray(q, dtype=float)
    shape = q.shape[:-1]
    q = q.reshape(-1, 3)
    norm = np.linalg.norm(q, axis=-1)
    if np.any(norm == 0):
        raise ValueError("polarization basis undefined for q = 0")
    n = q / norm[..., None]
    e1 = np.cross(n, [0.0, 0.0, 1.0])
    s = np.linalg.norm(e1, axis=-1)
    fallback = s < _TIE_BREAK
    if np.any(fallback):
        e1[fallback] = np.cross(n[fallback], [1.0, 0.0, 0.0])
        s[fallback] = np.linalg.norm(e1[fallback], axis=-1)
    e1 = e1 / s[..., None]
    e2 = np.cross(n, e1)
    if rotation:
        c, sn = np.cos(rotation), np.sin(rotation)
        e1, e2 = c * e1 + sn * e2, -sn * e1 + c * e2
    out = np.zeros((q.shape[0], 4, 4))
    out[:, 0, 0] = 1.0
    out[:, 1, 1:] = e1
    out[:, 2, 1:] = e2
    out[:, 3, 1:] = n
    return out.reshape(shape + (4, 4))


def polarization_basis(q, rotation=0.0) -> PolarizationBasis:
    q = np.asarray(q, dtype=float).reshape(3)
    return PolarizationBasis(q, polarization_batch(q, rotation))


def basis_project(vectors, f):
    """e*^mu_alpha g_{mu nu} f^nu for bases (..., 4, 4) and currents (..., 4)."""
    lowered = np.asarray(f) * METRIC_WEIGHTS
    vectors = np.asarray(vectors)
    if np.iscomplexobj(vectors):
        vectors = np.conj(vectors)
    return np.sum(vectors * lowered[..., None, :], axis=-1)
