from fractions import Fraction

import pytest

from dgda.coeff_rings import Poly
from dgda.dga_core import AlgElem, Dga
from dgda.expr import ExprError, label_map, parse_elem
from dgda.graded_modules import named


@pytest.fixture
def X():
    a, u, s = named("a", 0, 0), named("u", 1, 1), named("phi*", 1, 2)
    return Dga(1, [a, u, s], {}, var_names=["t"])


def test_arithmetic(X):
    a = X.gen(X.generator("a"))
    t = AlgElem.poly(Poly.var(0, 1))
    assert parse_elem("2*a^2 - 1/2*t*a + 3", X) == X.mul(a, a).scale(2) - (t * a).scale(Fraction(1, 2)) + X.const(3)


def test_decoration_and_braces(X):
    s = X.generator("phi*")
    assert parse_elem("{phi*}[2]", X) == X.gen(s, (2,))
    assert parse_elem("a[1]", X) == X.gen(X.generator("a"), (1,))


def test_odd_square_is_zero(X):
    assert not parse_elem("u*u", X)
    # a is even, so the cross terms cancel
    a = X.gen(X.generator("a"))
    assert parse_elem("(u + a)*(u - a)", X) == X.mul(a, a).scale(-1)


@pytest.mark.parametrize("bad", ["a +", "b", "a[1,2]", "2/0", "a^x", "a $ u", "(a", "a)"])
def test_errors(X, bad):
    with pytest.raises(ExprError):
        parse_elem(bad, X)


def test_integer_input(X):
    assert parse_elem(3, X) == X.const(3)


def test_label_map_duplicates():
    X = Dga(0, [named("a", 0, 0), named("a", 1, 1)], {})
    with pytest.raises(ExprError):
        label_map(X)
