import numpy as np
import pytest

from modules.errors import ExponentOverflowError, PolySyntaxError, UnknownVariableError
from modules.operator_algebra import random_classical_poly
from modules.poly_dsl import format_poly, parse_poly


def test_evaluate_harmonic_energy():
    f = parse_poly("0.5*pi1^2 + 0.5*phi1^2")
    assert f.evaluate(phi=np.array([1.0]), pi=np.array([2.0])) == pytest.approx(2.5)


def test_canonical_text_orders_variables():
    assert parse_poly("pi1 + phi1").to_text() == "1*phi1 + 1*pi1"


def test_leading_minus_and_merging():
    f = parse_poly("-phi1^2 + 3*phi1^2 - 0.5")
    assert f == parse_poly("2*phi1^2 - 0.5")
    assert format_poly(f) == "-0.5 + 2*phi1^2"


def test_whitespace_and_newlines_are_ignored():
    assert parse_poly("0.25 * phi1 ^ 4\n  + phidot2") == parse_poly("0.25*phi1^4+phidot2")


def test_scientific_notation_coefficient():
    f = parse_poly("1e-3*phi1*pi1")
    assert f.max_abs_coefficient() == pytest.approx(1e-3)


def test_declared_mode_count():
    assert parse_poly("phi1", 3).mode_count == 3
    assert parse_poly("phi2*pi4").mode_count == 4


def test_round_trip_of_random_polynomials(rng):
    for _ in range(10):
        f = random_classical_poly(rng, 3, 5, kinds=("phi", "phidot", "pi"))
        assert parse_poly(format_poly(f), f.mode_count) == f


def test_syntax_error_reports_position():
    with pytest.raises(PolySyntaxError) as excinfo:
        parse_poly("0.5*phi1 +* pi1")
    assert excinfo.value.line == 1
    assert excinfo.value.column >= 1


def test_syntax_error_on_second_line():
    with pytest.raises(PolySyntaxError) as excinfo:
        parse_poly("phi1\n + )")
    assert excinfo.value.line == 2


def test_unknown_variable():
    with pytest.raises(UnknownVariableError):
        parse_poly("0.5*psi1^2")


def test_exponent_overflow():
    with pytest.raises(ExponentOverflowError):
        parse_poly("phi1^17")
