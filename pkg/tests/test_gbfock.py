import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dressed.gbfock import (
    StepCountError,
    TruncationError,
    build_space,
    coherent_coefficients,
    displaced_vacuum,
    evolve_forced,
    invariant_report,
    schrodinger_residual,
)

small_q = st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0, 1), st.floats(-math.pi, math.pi))


def test_commutator_small_space_exact():
    sp = build_space(4)
    comm = sp.commutator()
    # sqrt(n)**2 rounds, so exactness holds to one ulp of n
    assert np.max(np.abs(comm[:3, :3] + np.eye(3))) <= 4 * np.finfo(float).eps


def test_eta_adjoint_and_eta_squared():
    sp = build_space(10)
    eta = np.diag(sp.metric)
    assert np.array_equal(eta @ eta, np.eye(10))
    assert np.array_equal(eta @ sp.creation @ eta, sp.annihilation.conj().T)


def test_hamiltonian_spectrum():
    # -omega B+B acts as +omega n because B+B|n> = -n|n>
    sp = build_space(12, omega=1.7)
    assert np.allclose(np.diag(sp.hamiltonian), 1.7 * np.arange(12), atol=1e-13)
    assert np.count_nonzero(sp.hamiltonian - np.diag(np.diag(sp.hamiltonian))) == 0


def test_minimum_dimension():
    with pytest.raises(ValueError):
        build_space(3)


def test_zero_displacement_is_vacuum():
    c = displaced_vacuum(build_space(8), 0).coefficients
    assert np.array_equal(c, np.eye(8)[0])


def test_truncation_guard():
    sp = build_space(16)
    displaced_vacuum(sp, 2.0)
    with pytest.raises(TruncationError):
        displaced_vacuum(sp, 2.01)


def test_series_ratio():
    q0 = 0.5
    c = displaced_vacuum(build_space(64), q0).coefficients
    n = np.arange(8)
    expected = q0 ** n / np.sqrt([math.factorial(k) for k in n])
    assert np.allclose(c[:8] / c[0], expected, rtol=1e-12, atol=0)
    assert abs(c[0] - math.exp(q0 ** 2 / 2)) < 1e-12


def test_eigen_residual_fixed():
    r = invariant_report(64, 0.5)
    assert r.eigen_residual < 1e-10


@settings(max_examples=40, deadline=None)
@given(q0=small_q)
def test_eigenvalue_law(q0):
    r = invariant_report(64, q0)
    assert r.eigen_residual < 1e-8
    assert r.eta_norm_error < 1e-10
    assert r.series_residual < 1e-10
    assert r.tail_mass < 1e-12


@settings(max_examples=20, deadline=None)
@given(q0=small_q)
def test_eta_norm_from_series(q0):
    c = coherent_coefficients(64, q0)
    eta = np.where(np.arange(64) % 2 == 0, 1.0, -1.0)
    assert abs(np.vdot(c, eta * c) - 1) < 1e-10


def test_zero_drive():
    sp = build_space(16)
    ev = evolve_forced(sp, lambda s: np.zeros_like(s), 0.0, 1.0, 20)
    assert ev.q0 == 0 and ev.phase == 0
    assert np.allclose(ev.stepped.coefficients, np.eye(16)[0], atol=0)


def test_constant_drive_amplitude_closed_form():
    c, t0, t = 0.3 - 0.1j, 0.2, 1.2
    ev = evolve_forced(build_space(64), lambda s: c + 0 * s, t0, t, 400)
    expected = -1j * c * (cmath.exp(1j * t) - cmath.exp(1j * t0)) / 1j
    assert abs(ev.q0 - expected) < 1e-14
    assert abs(ev.overlap - 1) < 1e-8
    assert ev.aux_residual < 1e-8


def _phase_oracle(alpha, omega, t0, t):
    def q(s):
        re = quad(lambda u: (-1j * alpha(u) * cmath.exp(1j * omega * u)).real, t0, s, epsabs=1e-14, epsrel=1e-13)[0]
        im = quad(lambda u: (-1j * alpha(u) * cmath.exp(1j * omega * u)).imag, t0, s, epsabs=1e-14, epsrel=1e-13)[0]
        return re + 1j * im

    def integrand(s):
        qd = -1j * alpha(s) * cmath.exp(1j * omega * s)
        return (qd.conjugate() * q(s)).imag

    return quad(integrand, t0, t, epsabs=1e-14, epsrel=1e-13)[0]


PROFILES = {
    "constant": lambda s: 0.3 + 0 * s,
    "cosine": lambda s: 0.5 * np.cos(2 * s),
    "chirped": lambda s: 0.4 * np.exp(-s * s) * (1 + 0.5j * s),
}


@pytest.mark.parametrize("name", PROFILES)
def test_phase_against_nested_quadrature(name):
    alpha = PROFILES[name]
    ev = evolve_forced(build_space(32), alpha, 0.0, 1.0, 200)
    oracle = _phase_oracle(lambda s: complex(alpha(np.array([s]))[0]), 1.0, 0.0, 1.0)
    assert abs(ev.phase - oracle) < 1e-10
    assert abs(ev.phase_half - oracle / 2) < 1e-10


@pytest.mark.parametrize("name", PROFILES)
def test_closed_form_matches_stepping(name):
    ev = evolve_forced(build_space(64), PROFILES[name], -0.5, 1.0, 400)
    assert abs(ev.overlap - 1) < 1e-8
    assert ev.aux_residual < 1e-8


def test_half_phase_does_not_reproduce_stepping():
    ev = evolve_forced(build_space(64), PROFILES["constant"], 0.0, 3.0, 800)
    wrong = np.exp(-0.5j * ev.phase) * ev.closed.coefficients
    right = ev.closed.coefficients
    eta = ev.closed.metric
    assert abs(np.vdot(right, eta * ev.stepped.coefficients) - 1) < 1e-8
    assert abs(np.vdot(wrong, eta * ev.stepped.coefficients) - 1) > 1e-3


def test_too_few_steps():
    with pytest.raises(StepCountError) as err:
        evolve_forced(build_space(64), lambda s: 2.0 + 0 * s, 0.0, 2.0, 4, tol=1e-10)
    assert err.value.residual > 1e-10


@pytest.mark.parametrize("name", PROFILES)
def test_schrodinger_residual(name):
    assert schrodinger_residual(build_space(32), PROFILES[name], 0.0, 1.0, 2000) < 1e-6
