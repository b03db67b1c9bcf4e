import numpy as np
import pytest

from modules.classical_dynamics import (
    HamiltonianSystem,
    classical_expectation,
    energy_drift,
    evolve_ensemble,
    hamilton_vector_field,
    integrate,
    poisson_bracket,
    time_derivative_poly,
)
from modules.errors import IntegrationError
from modules.fock_numeric import PhasePoint
from modules.poly_dsl import parse_poly


def test_harmonic_oscillator_matches_closed_form(harmonic):
    sys = HamiltonianSystem.from_hamiltonian(harmonic)
    start = PhasePoint([0.6], [0.2])
    traj = integrate(sys, start, 0.01, 200)
    t = traj.times
    np.testing.assert_allclose(traj.phi[:, 0], 0.6 * np.cos(t) + 0.2 * np.sin(t), atol=1e-8)
    np.testing.assert_allclose(traj.pi[:, 0], 0.2 * np.cos(t) - 0.6 * np.sin(t), atol=1e-8)


def test_vector_field_follows_hamilton_equations(quartic):
    sys = HamiltonianSystem.from_hamiltonian(quartic)
    phidot, pidot = hamilton_vector_field(sys, PhasePoint([0.5], [-0.3]))
    assert phidot[0] == pytest.approx(-0.3)
    assert pidot[0] == pytest.approx(-(0.5 + 0.4 * 0.5 ** 3))


def test_rk4_is_fourth_order(quartic):
    sys = HamiltonianSystem.from_hamiltonian(quartic)
    start = PhasePoint([0.8], [0.1])
    reference = integrate(sys, start, 0.0025, 400).final
    errors = []
    for dt, steps in ((0.1, 10), (0.05, 20)):
        final = integrate(sys, start, dt, steps).final
        errors.append(np.hypot(final.phi[0] - reference.phi[0], final.pi[0] - reference.pi[0]))
    ratio = errors[0] / errors[1]
    assert 8.0 < ratio < 32.0


def test_backward_integration_retraces_forward_run(quartic):
    sys = HamiltonianSystem.from_hamiltonian(quartic)
    start = PhasePoint([0.7], [-0.4])
    forward = integrate(sys, start, 0.01, 100)
    back = integrate(sys, forward.final, 0.01, 100, backward=True)
    assert back.backward
    np.testing.assert_allclose(back.final.phi, start.phi, atol=1e-8)
    np.testing.assert_allclose(back.final.pi, start.pi, atol=1e-8)


def test_energy_drift_is_small(quartic):
    sys = HamiltonianSystem.from_hamiltonian(quartic)
    traj = integrate(sys, PhasePoint([0.8], [0.1]), 0.01, 1000)
    assert energy_drift(sys, traj) <= 1e-6


def test_ensemble_evolution_matches_pointwise(harmonic, two_point_ensemble):
    sys = HamiltonianSystem.from_hamiltonian(harmonic)
    evolved = evolve_ensemble(sys, two_point_ensemble, 0.01, 50)
    for before, after in zip(two_point_ensemble.points, evolved.points):
        single = integrate(sys, before, 0.01, 50).final
        np.testing.assert_allclose(after.phi, single.phi, atol=1e-14)
        np.testing.assert_allclose(after.pi, single.pi, atol=1e-14)
    np.testing.assert_array_equal(evolved.weights, two_point_ensemble.weights)


def test_classical_expectation(harmonic, two_point_ensemble):
    assert classical_expectation(two_point_ensemble, harmonic) == pytest.approx(0.185)


def test_poisson_bracket_and_time_derivatives(harmonic):
    phi, pi = parse_poly("phi1"), parse_poly("pi1")
    assert poisson_bracket(phi, pi) == 1.0
    assert time_derivative_poly(phi, harmonic) == pi
    assert time_derivative_poly(phi, harmonic, order=2) == parse_poly("-phi1")


def test_trajectory_rows_header(harmonic):
    sys = HamiltonianSystem.from_hamiltonian(harmonic)
    header, rows = integrate(sys, PhasePoint([0.1], [0.0]), 0.1, 3).rows()
    assert header == ["t", "phi1", "pi1"]
    assert len(rows) == 4


def test_invalid_step_is_rejected(harmonic):
    sys = HamiltonianSystem.from_hamiltonian(harmonic)
    with pytest.raises(IntegrationError):
        integrate(sys, PhasePoint([0.1], [0.0]), 0.0, 10)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_reports_step():
    sys = HamiltonianSystem.from_hamiltonian(parse_poly("0.5*pi1^2 - phi1^4"))
    with pytest.raises(IntegrationError) as excinfo:
        integrate(sys, PhasePoint([2.0], [0.0]), 0.1, 1000)
    assert excinfo.value.step > 0
