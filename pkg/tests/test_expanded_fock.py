import math

import numpy as np
import pytest

from config import config
from modules.classical_dynamics import hamilton_vector_field
from modules.errors import DegenerateSystemError, DomainError, NonEquilibriumError, ZeroNormStateError
from modules.expanded_fock import (
    SecondOrderSystem,
    antihermitian_residual,
    apply_classical_function,
    block_conjugation_residuals,
    build_Hv,
    build_Hz,
    classify_energy_operator,
    conjugation_residuals,
    encode_v,
    encode_z,
    energy_operator_poly,
    equilibrium_gain_check,
    evolve_z,
    expanded_space,
    find_equilibrium,
    gain_operators,
    phi_vector_op,
    probe_point,
    realize_reified,
    reification_X,
    second_order_system,
)
from modules.fock_numeric import PhasePoint, interior_mask, realize
from modules.operator_algebra import OperatorPoly, a, b, b_dag, phi_op
from modules.poly_dsl import parse_poly

TOL = config.GUARD_TOL


@pytest.fixture(scope="module")
def double_well():
    return SecondOrderSystem.create([1.0], parse_poly("-0.75*phi1^2 + 0.25*phi1^4"))


@pytest.fixture(scope="module")
def space():
    return expanded_space(1, 24)


@pytest.fixture(scope="module")
def gains(space, double_well):
    return gain_operators(space, double_well, "v"), gain_operators(space, double_well, "z")


@pytest.fixture(scope="module")
def energy_mask(space, double_well):
    return interior_mask(space, max(double_well.energy_poly().degree, 2) + 1)


def test_expanded_space_layout(space):
    assert space.families == ("A", "B")
    assert space.dimension == 25 ** 2
    assert space.describe()["cutoffs"] == {"A": 24, "B": 24}


def test_single_register_conjugation():
    residuals = block_conjugation_residuals(24)
    assert max(residuals.values()) <= TOL


def test_full_space_conjugation(space):
    X = reification_X(space)
    assert max(conjugation_residuals(space, X).values()) <= TOL


def test_z_encoding_at_origin_and_ground_component(space):
    origin = encode_z(space, PhasePoint([0.0], [0.0]))
    assert origin.entries[0].real == pytest.approx(math.sqrt(2.0), abs=1e-12)
    z = encode_z(space, PhasePoint([0.5], [0.3]))
    assert z.entries[0].real == pytest.approx(math.sqrt(2.0) * math.exp(-0.5 * (0.25 + 0.09)), abs=1e-8)


def test_annihilator_functions_act_as_multiplication(space):
    point = PhasePoint([0.4], [-0.2])
    v = encode_v(space, point)
    result = apply_classical_function(space, parse_poly("phi1^2*phidot1"), v)
    mask = interior_mask(space, 3)
    np.testing.assert_allclose(result.entries[mask], 0.16 * -0.2 * v.entries[mask], atol=1e-12)


def test_pi_has_no_annihilator_realization(space):
    v = encode_v(space, PhasePoint([0.1], [0.1]))
    with pytest.raises(DomainError):
        apply_classical_function(space, parse_poly("pi1"), v)


def test_z_generator_is_antihermitian_and_preserves_norm(space, double_well, gains):
    _, gains_z = gains
    mask = interior_mask(space, 5)
    assert antihermitian_residual(gains_z.total, mask) <= 1e-8
    z0 = encode_z(space, probe_point(double_well))
    norms = [z.norm() for z in evolve_z(gains_z.total, z0, [0.0, 2.5, 5.0])]
    assert max(abs(n - norms[0]) for n in norms) / norms[0] <= 1e-8


def test_energy_operators_reproduce_classical_energy(space, double_well, energy_mask):
    Hv = build_Hv(space, double_well)
    Hz = build_Hz(space, double_well)
    for point in (PhasePoint([0.5], [0.3]), PhasePoint([-0.4], [0.6])):
        expected = double_well.classical_energy(point)
        on_v = classify_energy_operator(Hv, [encode_v(space, point)], mask=energy_mask)
        on_z = classify_energy_operator(Hz, [encode_z(space, point)], mask=energy_mask)
        assert on_v["verdict"] == on_z["verdict"] == "lambda_type"
        assert on_v["energies"][0] == pytest.approx(expected, abs=TOL)
        assert on_z["energies"][0] == pytest.approx(expected, abs=TOL)


def test_superposition_of_equal_energies_stays_an_eigenvector(space, double_well, energy_mask):
    first = PhasePoint([0.5], [0.3])
    target = double_well.classical_energy(first)
    base = double_well.classical_energy(PhasePoint([0.3], [0.0]))
    second = PhasePoint([0.3], [math.sqrt(2.0 * (target - base))])
    assert double_well.classical_energy(second) == pytest.approx(target, abs=1e-14)

    Hv = build_Hv(space, double_well)
    mixed = 0.5 * (encode_v(space, first).entries + encode_v(space, second).entries)
    verdict = classify_energy_operator(Hv, [mixed], mask=energy_mask)
    assert verdict["verdict"] == "lambda_type"
    assert verdict["energies"][0] == pytest.approx(target, abs=TOL)


def test_superposition_of_unequal_energies_is_not_an_eigenvector(space, double_well, energy_mask):
    Hv = build_Hv(space, double_well)
    mixed = 0.5 * (encode_v(space, PhasePoint([0.5], [0.3])).entries
                   + encode_v(space, PhasePoint([-0.4], [0.6])).entries)
    verdict = classify_energy_operator(Hv, [mixed], mask=energy_mask)
    assert verdict["lambda_residuals"][0] >= 10 * TOL
    assert verdict["verdict"] == "q_type"


def test_equilibrium_is_stationary(space, double_well, gains):
    phi_star = find_equilibrium(double_well, [1.0])
    np.testing.assert_allclose(phi_star, [math.sqrt(0.5)], atol=1e-10)
    result = equilibrium_gain_check(space, double_well, PhasePoint(phi_star, [0.0]), *gains)
    assert result["v"] <= TOL
    assert result["z"] <= TOL


def test_non_equilibrium_point_is_rejected(space, double_well, gains):
    with pytest.raises(NonEquilibriumError):
        equilibrium_gain_check(space, double_well, PhasePoint([0.2], [0.0]), *gains)


def test_degenerate_curvature_is_rejected():
    system = SecondOrderSystem.create([1.0], parse_poly("-0.5*phi1^2"))
    with pytest.raises(DegenerateSystemError):
        find_equilibrium(system, [0.5])


def test_invalid_systems_are_rejected():
    with pytest.raises(DomainError):
        SecondOrderSystem.create([-1.0])
    with pytest.raises(DomainError):
        SecondOrderSystem.create([1.0], parse_poly("pi1^2"))


def test_lagrangian_and_energy_share_the_kinetic_term(double_well):
    total = double_well.lagrangian() + double_well.energy_poly()
    assert total == parse_poly("phidot1^2")


def test_zero_norm_state_cannot_be_classified():
    with pytest.raises(ZeroNormStateError):
        classify_energy_operator(np.eye(4), [np.zeros(4)])


def test_second_order_system_without_interaction_is_harmonic():
    sys = second_order_system([1.0])
    assert sys.H == parse_poly("0.5*pi1^2 + 0.5*phi1^2")


def test_second_order_system_acceleration(double_well):
    sys = second_order_system([1.0], parse_poly("0.25*phi1^4"))
    phidot, pidot = hamilton_vector_field(sys, PhasePoint([0.5], [0.3]))
    assert phidot[0] == pytest.approx(0.3)
    assert pidot[0] == pytest.approx(-0.5 - 0.125)
    np.testing.assert_allclose(double_well.acceleration([0.5]), [-0.5 + 0.75 - 0.125])


def test_phi_vector_op(space):
    unit = SecondOrderSystem.create([1.0])
    Phi = phi_vector_op(space, unit, 1)
    np.testing.assert_array_equal(Phi, Phi.conj().T)
    np.testing.assert_allclose(Phi, np.sqrt(2.0) * realize(space, phi_op(1, 1)), atol=1e-14)
    number_b = realize(space, OperatorPoly({(b_dag(1), b(1)): 1.0}, 1))
    np.testing.assert_allclose(Phi @ number_b - number_b @ Phi, 0.0, atol=1e-12)
    with pytest.raises(DomainError):
        phi_vector_op(space, unit, 2)


def test_hz_positions_are_scaled_phi_vector_ops(space, double_well):
    stiff = SecondOrderSystem.create([2.0])
    x = math.sqrt(2.0) * phi_vector_op(space, stiff, 1)
    np.testing.assert_allclose(x, realize_reified(space, OperatorPoly.from_generator(a(1), 1)), atol=1e-12)
    Hz = build_Hz(space, double_well)
    np.testing.assert_allclose(Hz, realize_reified(space, energy_operator_poly(double_well)), atol=1e-10)
