import numpy as np
import pytest

from modules import equivalence
from modules.equivalence import (
    EquivalenceConfig,
    HeisenbergPropagator,
    compare_trajectories,
    derivative_match,
    heisenberg_generator,
    instantaneous_identity_check,
    propagate_operator,
)
from modules.errors import NonHermitianGeneratorError, TailBoundError
from modules.fock_numeric import FockSpace, density_matrix, expectation, realize
from modules.operator_algebra import phi_op, pi_op


def test_harmonic_generator_is_half_number_operator(harmonic):
    space = FockSpace(1, 10)
    Hn = heisenberg_generator(space, harmonic)
    np.testing.assert_allclose(Hn, np.diag(0.5 * np.arange(11)), atol=1e-12)


def test_quarter_period_maps_phi_to_pi(harmonic):
    space = FockSpace(1, 12)
    Hn = heisenberg_generator(space, harmonic)
    Phi = realize(space, phi_op(1, 1))
    Pi = realize(space, pi_op(1, 1))
    np.testing.assert_allclose(propagate_operator(space, Phi, Hn, np.pi / 2), Pi, atol=1e-10)


def test_non_hermitian_generator_is_rejected():
    with pytest.raises(NonHermitianGeneratorError):
        HeisenbergPropagator(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_expectation_series_matches_direct_propagation(quartic, space_1x30, two_point_ensemble):
    Hn = heisenberg_generator(space_1x30, quartic)
    propagator = HeisenbergPropagator(Hn)
    rho = density_matrix(space_1x30, two_point_ensemble)
    Phi = realize(space_1x30, phi_op(1, 1))
    series = propagator.expectation_series(rho.entries, Phi, [0.0, 0.3, 0.7])
    for t, value in zip([0.0, 0.3, 0.7], series):
        direct = expectation(rho, propagator.operator(Phi, t))
        assert value == pytest.approx(direct, abs=1e-12)


def test_instantaneous_identity_for_quartic(quartic, space_1x30, two_point_ensemble):
    result = instantaneous_identity_check(space_1x30, two_point_ensemble, quartic, 1)
    assert result["max"] <= 1e-7


def test_derivative_match_orders(quartic, space_1x30, two_point_ensemble):
    result = derivative_match(space_1x30, two_point_ensemble, quartic, 1, 3)
    assert result["asserted_orders"] == [0, 1, 2]
    for order in result["asserted_orders"]:
        assert result["residuals"][order] <= 1e-6
    assert len(result["residuals"]) == 4


def test_harmonic_comparison_closes_gap(harmonic, two_point_ensemble):
    cfg = EquivalenceConfig(H=harmonic, ensemble=two_point_ensemble, cutoff=30, dt=0.01, t_max=2.0, sample_every=10)
    report = compare_trajectories(cfg)
    assert report.quadratic
    assert report.truncated_at is None
    assert report.max_gap <= 1e-5
    assert report.cross_check <= 1e-10
    assert max(r["residual"] for r in report.identity_residuals) <= 1e-7
    header, rows = report.rows()
    assert header[:4] == ["t", "classical_phi1", "quantum_phi1", "gap_phi1"]
    assert len(rows) == len(report.times) == 21


def test_quartic_comparison_reports_gap_without_asserting(quartic, two_point_ensemble):
    cfg = EquivalenceConfig(H=quartic, ensemble=two_point_ensemble, cutoff=30, dt=0.01, t_max=1.0, sample_every=10)
    report = compare_trajectories(cfg)
    assert not report.quadratic
    assert np.isfinite(report.max_gap)
    data = report.to_dict()
    assert set(data["gaps"]) == {"phi1", "pi1", "max"}
    assert data["metadata"]["cutoff"] == 30


def test_boundary_over_budget_at_start_is_refused(harmonic, two_point_ensemble, monkeypatch):
    monkeypatch.setattr(equivalence, "_boundary_mask", lambda space: np.ones(space.dimension, dtype=bool))
    cfg = EquivalenceConfig(H=harmonic, ensemble=two_point_ensemble, cutoff=30, dt=0.01, t_max=0.5, sample_every=10)
    with pytest.raises(TailBoundError) as excinfo:
        compare_trajectories(cfg)
    assert excinfo.value.bound > 0.5


@pytest.mark.slow
def test_harmonic_comparison_over_long_window(harmonic, two_point_ensemble):
    cfg = EquivalenceConfig(H=harmonic, ensemble=two_point_ensemble, cutoff=40)
    assert compare_trajectories(cfg).max_gap <= 1e-5
