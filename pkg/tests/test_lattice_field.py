import json
import math

import numpy as np
import pytest

from config import config
from modules import lattice_field
from modules.errors import CalibrationError, LatticeError, LatticeInstabilityError, MasslessZeroModeError
from modules.fock_numeric import interior_mask
from modules.lattice_field import (
    LatticeSpec,
    LatticeState,
    calibrate_c,
    coherent_amplitudes,
    dispersion,
    encode_lattice_state,
    equal_time_commutator,
    field_expectations,
    field_operators,
    fourier_amplitudes,
    functional_commutator_check,
    inverse_amplitudes,
    lattice_energy,
    lattice_space,
    leapfrog_evolve,
    leapfrog_step_bound,
    leapfrog_trajectory,
    measure_frequency,
    momentum_grid,
    observable_rows,
    positive_frequency_eigenvalue,
    reference_c,
    sample_lattice_states,
    state_from_dict,
    state_to_dict,
)
from modules.poly_dsl import parse_poly


@pytest.fixture(scope="module")
def spec():
    return LatticeSpec(d=1, M=3, dx=1.0, masses=(1.0,))


@pytest.fixture(scope="module")
def space(spec):
    return lattice_space(spec, 10)


@pytest.fixture(scope="module")
def ops(spec, space):
    return field_operators(spec, space)


def _single_mode(spec, q, amplitude=0.05):
    p = momentum_grid(spec)[q]
    phi = amplitude * np.cos(spec.positions @ p)[None, :]
    return LatticeState(phi, np.zeros_like(phi))


def test_lattice_geometry(spec):
    np.testing.assert_allclose(momentum_grid(spec)[:, 0], [-2 * math.pi / 3, 0.0, 2 * math.pi / 3])
    assert spec.mode_count == 3
    assert spec.fock_mode(1, 2) == 3
    assert spec.site_variable("pi", 1, 0) == ("pi", 1)
    np.testing.assert_allclose(dispersion(spec).w[0], np.sqrt(1.0 + momentum_grid(spec)[:, 0] ** 2))


def test_mode_budget_and_dimension_are_validated():
    assert LatticeSpec(3, 3, 1.0, (1.0,)).sites == 27
    with pytest.raises(LatticeError):
        LatticeSpec(2, 4, 1.0, (1.0, 1.0))
    with pytest.raises(LatticeError):
        LatticeSpec(4, 2, 1.0, (1.0,))


def test_fourier_round_trip_and_parseval(rng):
    spec = LatticeSpec(d=2, M=3, dx=0.5, masses=(1.0, 2.0))
    state = LatticeState(rng.normal(size=(2, 9)), rng.normal(size=(2, 9)))
    amps = fourier_amplitudes(spec, state)
    back = inverse_amplitudes(spec, amps)
    np.testing.assert_allclose(back.phi, state.phi, atol=1e-12)
    np.testing.assert_allclose(back.pi, state.pi, atol=1e-12)
    lhs = np.sum(np.abs(amps.theta) ** 2) * spec.cell_volume
    rhs = np.sum(state.phi ** 2) * spec.dx ** spec.d
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_massless_zero_mode_is_refused():
    spec = LatticeSpec(d=1, M=3, dx=1.0, masses=(0.0,))
    state = LatticeState(np.full((1, 3), 0.1), np.zeros((1, 3)))
    with pytest.raises(MasslessZeroModeError):
        coherent_amplitudes(spec, state, reference_c(spec))


def test_calibration_recovers_reference_constant(spec, space, ops):
    samples = sample_lattice_states(spec, np.random.default_rng(5), 4)
    result = calibrate_c(spec, space, samples, ops)
    assert result.residual <= 1e-6
    assert result.deviation <= 1e-8
    assert result.c == pytest.approx(reference_c(spec), rel=1e-8)


def test_calibration_needs_enough_samples(spec, space, ops):
    with pytest.raises(CalibrationError):
        calibrate_c(spec, space, sample_lattice_states(spec, np.random.default_rng(1), 2), ops)


def test_calibration_needs_enough_momenta(spec, space, ops):
    flat = [LatticeState(np.full((1, 3), a), np.full((1, 3), -a)) for a in (0.1, 0.2, 0.3)]
    with pytest.raises(CalibrationError):
        calibrate_c(spec, space, flat, ops)


def test_calibration_residual_above_tolerance_is_refused(spec, space, ops, monkeypatch):
    monkeypatch.setattr(config, "CALIBRATION_TOL", 1e-30)
    with pytest.raises(CalibrationError, match="residual"):
        calibrate_c(spec, space, sample_lattice_states(spec, np.random.default_rng(5), 4), ops)


def test_calibration_far_from_reference_is_refused(spec, space, ops, monkeypatch):
    doubled = 2.0 * reference_c(spec)
    monkeypatch.setattr(lattice_field, "reference_c", lambda s: doubled)
    with pytest.raises(CalibrationError, match="deviates"):
        calibrate_c(spec, space, sample_lattice_states(spec, np.random.default_rng(5), 4), ops)


def test_trace_identity_and_positive_frequency(spec, space, ops):
    c = reference_c(spec)
    state = sample_lattice_states(spec, np.random.default_rng(9), 1)[0]
    vector = encode_lattice_state(spec, space, state, c)
    phi, pi = field_expectations(ops, vector)
    np.testing.assert_allclose(phi, state.phi, atol=1e-8)
    np.testing.assert_allclose(pi, state.pi, atol=1e-8)
    for x in range(spec.sites):
        lam = positive_frequency_eigenvalue(spec, state, c, 1, x)
        applied = ops.matrix("phi_plus", 1, x) @ vector.entries
        assert np.linalg.norm(applied - lam * vector.entries) <= 1e-6
        assert lam.real == pytest.approx(0.5 * state.phi[0, x], abs=1e-10)


def test_equal_time_commutator(spec, space, ops):
    mask = interior_mask(space, 1)
    identity = np.eye(int(mask.sum()))
    same = equal_time_commutator(ops, 1, 0, 1, 0)
    other = equal_time_commutator(ops, 1, 0, 1, 2)
    np.testing.assert_allclose(same[np.ix_(mask, mask)], 0.5j * identity, atol=1e-12)
    np.testing.assert_allclose(other[np.ix_(mask, mask)], 0.0, atol=1e-12)


def test_field_commutator_with_polynomial_functional(spec, space, ops):
    f = parse_poly("phi1^2*pi2 + 0.5*pi1^3 + phi3*pi3", spec.mode_count)
    result = functional_commutator_check(spec, space, f, 1, 1, ops)
    assert result["symbolic"] <= 1e-12
    assert result["interior"] <= 1e-10


def test_leapfrog_reproduces_dispersion(spec):
    q = 2
    omega = float(dispersion(spec).w[0, q])
    dt = 0.005
    steps = int(math.ceil(10.5 * 2 * math.pi / omega / dt))
    times, states, _ = leapfrog_trajectory(spec, None, _single_mode(spec, q), dt, steps)
    measured = measure_frequency(times, np.array([s.phi[0, 0] for s in states]))
    assert abs(measured - omega) <= 1e-4


def test_leapfrog_is_time_reversible(spec, rng):
    f = parse_poly("0.1*phi1^4 + 0.1*phi2^4 + 0.1*phi3^4")
    start = LatticeState(rng.uniform(-0.3, 0.3, (1, 3)), rng.uniform(-0.3, 0.3, (1, 3)))
    forward = leapfrog_evolve(spec, f, start, 0.01, 200)
    back = leapfrog_evolve(spec, f, forward, 0.01, 200, backward=True)
    np.testing.assert_allclose(back.phi, start.phi, atol=1e-10)
    np.testing.assert_allclose(back.pi, start.pi, atol=1e-10)


def test_leapfrog_energy_error_is_second_order(spec):
    state = _single_mode(spec, 2, 0.2)
    drifts = []
    for dt in (0.02, 0.01):
        _, _, energies = leapfrog_trajectory(spec, None, state, dt, int(round(5.0 / dt)))
        drifts.append(np.max(np.abs(energies - energies[0])))
    assert 3.0 < drifts[0] / drifts[1] < 5.0
    assert lattice_energy(spec, state) > 0


def test_unstable_step_is_refused(spec):
    with pytest.raises(LatticeInstabilityError):
        leapfrog_trajectory(spec, None, _single_mode(spec, 2), 1.5, 10)


def test_step_bound_follows_the_largest_frequency(spec):
    w_max = math.sqrt(1.0 + (2.0 * math.pi / 3.0) ** 2)
    assert leapfrog_step_bound(spec) == pytest.approx(2.0 / w_max)
    with pytest.raises(LatticeInstabilityError):
        leapfrog_trajectory(spec, None, _single_mode(spec, 2), 0.95, 10)
    leapfrog_trajectory(spec, None, _single_mode(spec, 2), 0.8, 10)


def test_measure_frequency():
    t = np.linspace(0.0, 10.0, 10001)
    assert measure_frequency(t, np.cos(3.0 * t + 0.1)) == pytest.approx(3.0, abs=1e-5)
    with pytest.raises(LatticeError):
        measure_frequency(t[:100], np.cos(3.0 * t[:100] + 0.1))


def test_state_json_round_trip(spec, rng):
    state = sample_lattice_states(spec, rng, 1)[0]
    loaded_spec, loaded = state_from_dict(json.loads(json.dumps(state_to_dict(spec, state))))
    assert loaded_spec == spec
    np.testing.assert_array_equal(loaded.phi, state.phi)
    np.testing.assert_array_equal(loaded.pi, state.pi)


def test_malformed_state_is_rejected(spec, rng):
    data = state_to_dict(spec, sample_lattice_states(spec, rng, 1)[0])
    with pytest.raises(LatticeError):
        state_from_dict({k: v for k, v in data.items() if k != "phi"})
    with pytest.raises(LatticeError):
        state_from_dict({**data, "fields": 2})


def test_observable_rows(spec):
    times, states, _ = leapfrog_trajectory(spec, None, _single_mode(spec, 2), 0.01, 4, record_every=2)
    header, rows = observable_rows(spec, times, states)
    assert header == ["t", "j", "x", "phi", "pi"]
    assert len(rows) == len(times) * spec.sites == 9
