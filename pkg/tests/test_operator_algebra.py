import numpy as np
import pytest

from config import config
from modules.errors import (
    DegreeOverflowError,
    DomainError,
    ModeIndexError,
    NonFiniteCoefficientError,
)
from modules.fock_numeric import FockSpace, interior_mask, realize, realize_word, restrict
from modules.operator_algebra import (
    ClassicalPoly,
    OperatorPoly,
    a,
    a_dag,
    annihilator_poly,
    arith,
    b,
    b_dag,
    check_bracket_identity,
    commutator,
    normal_order,
    phi_op,
    pi_op,
    quantize_canonical,
    quantize_normal,
    random_classical_poly,
    wick_colon,
)
from modules.poly_dsl import parse_poly

TOL = config.SYMBOLIC_ZERO_TOL
GENERATORS = (a(1), a_dag(1), a(2), a_dag(2))


def _random_words(rng, max_length, count=3):
    words = {}
    for _ in range(count):
        length = int(rng.integers(0, max_length + 1))
        word = tuple(GENERATORS[int(i)] for i in rng.integers(0, len(GENERATORS), length))
        words[word] = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return words


def _random_operator(rng, max_length):
    return OperatorPoly(_random_words(rng, max_length), 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_canonical_commutation_relations(n):
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            expected = OperatorPoly.constant(0.5j if j == k else 0.0, n)
            assert (commutator(phi_op(j, n), pi_op(k, n)) - expected).is_zero(TOL)
            assert commutator(phi_op(j, n), phi_op(k, n)).is_zero(TOL)
            assert commutator(pi_op(j, n), pi_op(k, n)).is_zero(TOL)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_power_rule(m):
    Phi, Pi = phi_op(1, 1), pi_op(1, 1)
    residual = commutator(Phi ** m, Pi) - Phi ** (m - 1) * (0.5j * m)
    assert residual.is_zero(TOL)


def test_annihilator_creator_product_is_normal_ordered():
    p = OperatorPoly({(a(1), a_dag(1)): 1.0}, 1)
    assert p == OperatorPoly({(a_dag(1), a(1)): 1.0, (): 1.0}, 1, ordered=True)


def test_families_commute():
    p = OperatorPoly({(b(1), a_dag(1)): 1.0, (a(1), b_dag(1)): 1.0}, 1)
    assert p == OperatorPoly({(a_dag(1), b(1)): 1.0, (b_dag(1), a(1)): 1.0}, 1, ordered=True)
    assert commutator(OperatorPoly.from_generator(b(1)), OperatorPoly.from_generator(a_dag(1))).is_zero()


def test_normal_order_is_idempotent():
    raw = {(a(1), a(2), a_dag(1), a_dag(2)): 2.0}
    once = normal_order(raw, 2)
    assert normal_order(once) == once


def test_canonical_and_normal_quantization_differ_by_contraction():
    f = parse_poly("phi1^2")
    diff = quantize_canonical(f) - quantize_normal(f)
    assert (diff - OperatorPoly.constant(0.25, 1)).is_zero(TOL)


def test_normal_quantization_of_real_polynomial_is_hermitian(rng):
    for _ in range(5):
        f = random_classical_poly(rng, 2, 4)
        assert quantize_normal(f, mode_count=2).is_hermitian()


def test_wick_colon_drops_all_contractions():
    Phi = phi_op(1, 1)
    colon = wick_colon([Phi, Phi, Phi, Phi])
    assert colon.degree == 4
    assert colon.homogeneous_part(0).is_zero()
    assert colon.homogeneous_part(2).is_zero()


@pytest.mark.parametrize("side", ["phi", "pi"])
def test_bracket_identities_for_random_polynomials(rng, side):
    for _ in range(100):
        f = random_classical_poly(rng, 2, 4)
        for j in (1, 2):
            assert check_bracket_identity(f, j, side).is_zero(TOL)


@pytest.mark.parametrize("seed", range(5))
def test_commutator_is_antisymmetric_and_bilinear(seed):
    rng = np.random.default_rng([20240607, seed])
    p, q, r = (_random_operator(rng, 3) for _ in range(3))
    s = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
    assert (commutator(p, q) + commutator(q, p)).is_zero(TOL)
    assert (commutator(p * s + r, q) - (commutator(p, q) * s + commutator(r, q))).is_zero(TOL)
    assert (commutator(p, q * s + r) - (commutator(p, q) * s + commutator(p, r))).is_zero(TOL)


@pytest.mark.parametrize("seed", range(5))
def test_commutator_satisfies_jacobi_identity(seed):
    rng = np.random.default_rng([20240607, seed])
    p, q, r = (_random_operator(rng, 2) for _ in range(3))
    jacobi = commutator(p, commutator(q, r)) + commutator(q, commutator(r, p)) + commutator(r, commutator(p, q))
    assert jacobi.is_zero(TOL)


@pytest.mark.parametrize("seed", range(5))
def test_normal_ordering_preserves_interior_matrix(seed):
    rng = np.random.default_rng([20240607, seed])
    space = FockSpace(2, 6)
    raw = _random_words(rng, 3)
    direct = sum(coef * realize_word(space, word) for word, coef in raw.items())
    ordered = realize(space, normal_order(raw, 2))
    mask = interior_mask(space, 3)
    np.testing.assert_allclose(restrict(ordered, mask), restrict(direct, mask), atol=1e-12)


def test_arith_dispatch():
    p, q = phi_op(1, 1), pi_op(1, 1)
    assert arith("add", p, q) == p + q
    assert arith("scale", 2.0, p) == p * 2.0
    assert arith("multiply", p, q) == p * q
    assert arith("adjoint", q) == q
    with pytest.raises(Exception):
        arith("divide", p, q)


def test_degree_overflow_is_rejected():
    with pytest.raises(DegreeOverflowError):
        OperatorPoly({(a(1),) * (config.MAX_DEGREE + 1): 1.0}, 1)


def test_mode_out_of_range_is_rejected():
    with pytest.raises(ModeIndexError):
        phi_op(3, 2)
    with pytest.raises(ModeIndexError):
        OperatorPoly({(a(2),): 1.0}, 1)


def test_non_finite_coefficient_is_rejected():
    with pytest.raises(NonFiniteCoefficientError):
        OperatorPoly({(a(1),): float("nan")}, 1)


def test_annihilator_poly_maps_phidot_to_b():
    f = parse_poly("phi1^2*phidot1 + 3")
    op = annihilator_poly(f, 1)
    assert op == OperatorPoly({(a(1), a(1), b(1)): 1.0, (): 3.0}, 1, ordered=True)


def test_annihilator_poly_rejects_pi():
    with pytest.raises(DomainError):
        annihilator_poly(parse_poly("pi1"), 1)


def test_quantization_rejects_phidot():
    with pytest.raises(DomainError):
        quantize_normal(parse_poly("phidot1^2"))


def test_classical_poly_partial_derivative_and_vectorized_evaluate():
    f = parse_poly("phi1^3*pi2 - 2*phi2")
    df = f.partial_derivative("phi1")
    assert df == parse_poly("3*phi1^2*pi2", 2)
    phi = np.array([[1.0, 2.0], [0.5, -1.0]])
    pi = np.array([[0.0, 0.0], [2.0, 3.0]])
    np.testing.assert_allclose(f.evaluate(phi, pi), [1.0, 26.0])


def test_classical_coefficients_must_be_real():
    with pytest.raises(DomainError):
        ClassicalPoly({((("phi", 1), 1),): 1j})
