import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dressed.constants import ALPHA
from dressed.infrared import (
    CollisionSpec,
    DeltaConvergenceError,
    ValidityError,
    angular_spectrum,
    delta_functional,
    delta_shift,
    photon_spectrum,
    solve_delta,
    spectral_knee,
    spectrum_samples,
    total_photon_number,
)
from dressed.spinor import polarization_basis

SPEC = CollisionSpec([0.05, 0, 0], [0.04, 0, 0])


@pytest.fixture(scope="module")
def delta():
    return delta_shift(SPEC)


def test_guards():
    with pytest.raises(ValidityError):
        CollisionSpec([0.05, 0, 0], [0.0, 0, 0])
    with pytest.raises(ValidityError):
        CollisionSpec([1.0, 0, 0], [0.95, 0, 0])
    with pytest.raises(ValidityError):
        solve_delta(CollisionSpec([0.4, 0, 0], [0.35, 0, 0]))
    with pytest.raises(ValueError):
        photon_spectrum(SPEC, 0.0, [0, 0, 1], 1e-5)
    with pytest.raises(ValueError):
        photon_spectrum(SPEC, 1e-3, [0, 0, 1], -1.0)


def test_resting_charge_has_no_shift():
    spec = CollisionSpec([0, 0, 0], [0, 0, 0])
    assert delta_shift(spec) == 0.0


def test_shift_scaling():
    v = np.array([0.02, 0.035, 0.05, 0.07, 0.1])
    d = np.array([delta_shift(CollisionSpec([s, 0, 0], [0.9 * s, 0, 0])) for s in v])
    slope = np.polyfit(np.log(v), np.log(d), 1)[0]
    assert abs(slope - 2) < 0.05
    coef = d / (ALPHA * v ** 2)
    assert np.all((coef > 2 / 3) & (coef < 8 / 3))


def test_shift_trace_and_first_iterate():
    sol = solve_delta(SPEC)
    assert sol.seed == pytest.approx(4 / 3 * ALPHA * 0.05 ** 2, rel=1e-15)
    assert sol.trace[0] == sol.seed and sol.trace[-1] == sol.value
    assert abs(delta_functional(SPEC, sol.value) / sol.value - 1) < 1e-9
    assert sol.first_iterate == delta_functional(SPEC, sol.seed)


def test_shift_iteration_budget():
    with pytest.raises(DeltaConvergenceError) as err:
        solve_delta(SPEC, max_iter=2)
    assert len(err.value.trace) == 3


def test_shift_needs_no_uv_cutoff(delta):
    # integrand tail ~ 1/q^2 after the q measure: the remainder beyond Q is ~1/Q
    big = 1e9
    a = delta_functional(SPEC, delta, q_max=big)
    b = delta_functional(SPEC, delta, q_max=2 * big)
    assert abs(b / a - 1) < 1e-8
    assert abs(delta_functional(SPEC, delta) / b - 1) < 1e-8


def test_equal_velocities_emit_nothing():
    spec = CollisionSpec([0.05, 0.01, 0], [0.05, 0.01, 0])
    assert photon_spectrum(spec, 1e-3, [0.3, 0.4, 0.5], 1e-5) == (0.0, 0.0)
    assert total_photon_number(spec, 1e-5, 1e-7) == 0.0


def test_soft_limit(delta):
    omega = 1e-6 * delta
    rng = np.random.default_rng(2)
    for _ in range(4):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        basis = polarization_basis(omega * n).vectors
        dv = SPEC.v2 - SPEC.v1
        limit = [2 * math.pi * ALPHA / omega * abs(basis[a, 1:] @ dv) ** 2 / delta ** 2 for a in (1, 2)]
        got = photon_spectrum(SPEC, omega, n, delta)
        for g, l in zip(got, limit):
            if l > 1e-3 * max(limit):
                assert abs(g / l - 1) < 1e-3


def test_classical_slope():
    w = np.geomspace(1e-4, 1e-2, 9)
    s = angular_spectrum(SPEC, w, 0.0)
    slope = np.polyfit(np.log(w), np.log(s), 1)[0]
    assert abs(slope + 3) < 0.03


@settings(max_examples=40, deadline=None)
@given(w=st.floats(1e-7, 1.0), d=st.floats(0.0, 1e-3),
       n=st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda x: np.linalg.norm(x) > 0.1))
def test_positivity_and_swap_symmetry(w, d, n):
    a = photon_spectrum(SPEC, w, n, d)
    assert all(x >= 0 and math.isfinite(x) for x in a)
    fwd = CollisionSpec([0.05, 0, 0], [0.048, 0.008, 0])
    b = photon_spectrum(fwd, w, n, d)
    spec_rev = CollisionSpec(fwd.v2, fwd.v1)
    c = photon_spectrum(spec_rev, w, n, d)
    assert c == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_ir_finite_with_shift(delta):
    n = [total_photon_number(SPEC, delta, f * delta) for f in (1e-2, 1e-4, 1e-6)]
    d1, d2 = n[1] - n[0], n[2] - n[1]
    assert d1 > 0 and d2 > 0
    assert d2 < 1e-2 * d1


def test_ir_log_growth_without_shift(delta):
    w = np.array([1e-2, 1e-4, 1e-6]) * delta
    n = np.array([total_photon_number(SPEC, 0.0, x) for x in w])
    design = np.stack([np.ones(3), np.log(1 / w)], -1)
    coef, *_ = np.linalg.lstsq(design, n, rcond=None)
    assert np.max(np.abs(design @ coef - n) / n) < 2e-2
    assert coef[1] > 0


def test_number_monotone_in_upper_limit(delta):
    vals = [total_photon_number(SPEC, delta, 1e-3 * delta, w) for w in (1e-5, 1e-3, 1e-1, 1.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_knee_location(delta):
    knee = spectral_knee(SPEC, delta)
    assert 1 / 3 < knee.ratio_to_delta < 3
    assert abs(knee.low_exponent - 2) < 0.05


def test_samples_table(delta):
    rows = spectrum_samples(SPEC, [1e-4, 1e-3], [[0, 0, 1], [0, 1, 1]], delta)
    assert len(rows) == 8
    assert {r.alpha for r in rows} == {1, 2}
    assert all(r.n >= 0 for r in rows)
