import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flrwc import expr as ex
from flrwc.errors import ExpressionSyntaxError, UnknownIdentifier


def test_precedence_and_associativity():
    assert ex.evaluate(ex.parse("2+3*t^2"), 2.0) == pytest.approx(14.0)
    assert ex.evaluate(ex.parse("2^3^2"), 1.0) == pytest.approx(512.0)
    assert ex.evaluate(ex.parse("-t^2"), 3.0) == pytest.approx(-9.0)
    assert ex.evaluate(ex.parse("8/4/2"), 1.0) == pytest.approx(1.0)
    assert ex.evaluate(ex.parse("t-1-1"), 5.0) == pytest.approx(3.0)


def test_functions_and_numbers():
    e = ex.parse("sqrt(t)*log(t)+exp(0)+asinh(sin(0))+cos(0)+1.5e-1")
    assert ex.evaluate(e, 4.0) == pytest.approx(2 * np.log(4) + 2.15)


@pytest.mark.parametrize(
    "source, offset",
    [("t^^2", 2), ("t+", 2), ("(t", 2), ("t)", 1), ("", 0), ("2 t", 2), ("sqrt t", 5)],
)
def test_syntax_errors_report_offset(source, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        ex.parse(source)
    assert info.value.offset == offset
    assert info.value.expected


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as info:
        ex.parse("t*tan(t)")
    assert info.value.name == "tan"
    assert info.value.offset == 2


def _trees():
    leaves = st.one_of(
        st.just(ex.T),
        st.floats(0.0, 10.0, allow_nan=False).map(ex.Num),
    )

    def extend(children):
        binary = st.sampled_from([ex.Add, ex.Sub, ex.Mul, ex.Div, ex.Pow])
        return st.one_of(
            st.builds(lambda c, l, r: c(l, r), binary, children, children),
            children.map(ex.Neg),
            st.builds(ex.Func, st.sampled_from(ex.FUNCTIONS), children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(_trees())
def test_print_parse_round_trip(tree):
    assert ex.parse(ex.to_string(tree)) == tree


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_negative_literals_round_trip_by_value(v):
    e = ex.Mul(ex.Num(v), ex.T)
    back = ex.parse(ex.to_string(e))
    assert ex.evaluate(back, 2.0) == pytest.approx(2.0 * v)


@pytest.mark.parametrize(
    "source",
    ["t^(1/3)", "sqrt(t)*(1+t)", "t^0.5*log(1/t)^(-0.25)", "sin(t)/t", "exp(-t)*asinh(t)", "t^t", "-t/(1+t^2)"],
)
def test_derivative_matches_finite_difference(source):
    e = ex.parse(source)
    d1 = ex.differentiate(e)
    d2 = ex.differentiate(d1)
    for t in (0.2, 0.5, 0.8):
        h = 1e-4 * t
        f = lambda x: float(ex.evaluate(e, x))
        fd1 = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
        fd2 = (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (12 * h * h)
        assert float(ex.evaluate(d1, t)) == pytest.approx(fd1, rel=1e-8, abs=1e-9)
        assert float(ex.evaluate(d2, t)) == pytest.approx(fd2, rel=1e-5, abs=1e-6)


def test_depends_on_t():
    assert ex.depends_on_t(ex.parse("1+sqrt(t)"))
    assert not ex.depends_on_t(ex.parse("2^3"))
