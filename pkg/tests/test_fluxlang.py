import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from twoflux.fluxlang import (
    BinOp,
    Call,
    FluxDomainError,
    FluxExpr,
    FluxSyntaxError,
    Neg,
    Num,
    Pow,
    Var,
    parse,
)


class TestParse:
    def test_variable(self):
        assert parse("u").root == Var()

    def test_example_rational_flux(self):
        # (1+2*u^2)/(1+u^2), standard precedence
        expected = BinOp(
            "/",
            BinOp("+", Num(1.0), BinOp("*", Num(2.0), Pow(Var(), 2.0))),
            BinOp("+", Num(1.0), Pow(Var(), 2.0)),
        )
        assert parse("(1+2*u^2)/(1+u^2)").root == expected

    def test_sqrt_flux(self):
        expected = BinOp(
            "+",
            Call("sqrt", BinOp("+", Pow(Var(), 2.0), Num(1.0))),
            Num(1.0),
        )
        assert parse("sqrt(u^2+1)+1").root == expected

    def test_dangling_caret_reports_offset(self):
        with pytest.raises(FluxSyntaxError) as err:
            parse("u^")
        assert err.value.offset == 2

    def test_non_literal_exponent_rejected(self):
        with pytest.raises(FluxSyntaxError, match="numeric literal"):
            parse("u^u")
        with pytest.raises(FluxSyntaxError, match="numeric literal"):
            parse("u^(2)")

    def test_signed_exponent(self):
        assert parse("u^-2").root == Pow(Var(), -2.0)

    def test_unknown_identifier(self):
        with pytest.raises(FluxSyntaxError, match="unknown identifier"):
            parse("v+1")

    def test_unknown_function(self):
        with pytest.raises(FluxSyntaxError, match="unknown function"):
            parse("sin(u)")

    def test_no_implicit_multiplication(self):
        with pytest.raises(FluxSyntaxError):
            parse("2u")

    def test_empty(self):
        with pytest.raises(FluxSyntaxError):
            parse("   ")

    def test_left_associativity(self):
        assert parse("1-2-3").root == BinOp("-", BinOp("-", Num(1.0), Num(2.0)), Num(3.0))
        assert parse("8/4/2").root == BinOp("/", BinOp("/", Num(8.0), Num(4.0)), Num(2.0))

    def test_unary_minus_binds_looser_than_power(self):
        assert parse("-u^2").root == Neg(Pow(Var(), 2.0))

    def test_whitespace_insignificant(self):
        assert parse(" 1 + 2 * u ^ 2 ").root == parse("1+2*u^2").root


class TestEval:
    def test_example_one_left_flux(self):
        f = parse("(1+2*u^2)/(1+u^2)")
        assert f.eval(1.0) == pytest.approx(1.5, abs=0.0)

    def test_example_two_left_flux(self):
        f = parse("sqrt(u^2+1)+1")
        assert f.eval(1.0) == pytest.approx(1.0 + math.sqrt(2.0), abs=1e-15)

    def test_identity(self):
        assert parse("u").eval(0.0) == 0.0

    def test_division_by_zero(self):
        with pytest.raises(FluxDomainError, match="division by zero"):
            parse("1/u").eval(0.0)

    def test_log_domain(self):
        with pytest.raises(FluxDomainError, match="log"):
            parse("log(u)").eval(-1.0)

    def test_zero_to_negative_power(self):
        with pytest.raises(FluxDomainError, match="negative power"):
            parse("u^-1").eval(0.0)

    def test_domain_error_carries_subexpression(self):
        with pytest.raises(FluxDomainError) as err:
            parse("1+log(u-2)").eval(1.0)
        assert "log" in err.value.expr_text

    def test_eval_is_pure(self):
        f = parse("sqrt(u^2+1)*exp(u/10)-log(u^2+2)")
        values = {f.eval(0.731) for _ in range(10)}
        assert len(values) == 1


class TestEvalD:
    def test_example_one_derivative(self):
        f = parse("(1+2*u^2)/(1+u^2)")
        v, d = f.eval_d(1.0)
        assert v == f.eval(1.0)
        assert d == pytest.approx(0.5, abs=1e-15)  # 2u/(1+u^2)^2 at u=1

    def test_identity_derivative(self):
        for u in (-3.0, 0.0, 7.25):
            assert parse("u").eval_d(u) == (u, 1.0)

    def test_example_two_derivative(self):
        v, d = parse("sqrt(u^2+1)+1").eval_d(1.0)
        assert v == pytest.approx(1.0 + math.sqrt(2.0), abs=1e-15)
        assert d == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)  # u/sqrt(u^2+1)

    def test_abs_derivative_at_kink_is_zero(self):
        assert parse("abs(u)").eval_d(0.0) == (0.0, 0.0)

    def test_abs_derivative_off_kink(self):
        assert parse("abs(u)").eval_d(-2.0) == (2.0, -1.0)

    def test_value_component_matches_eval_bitwise(self):
        f = parse("exp(u/(u^2+1))*sqrt(u^2+0.5)-u^3/(abs(u)+1)")
        for u in [-2.7, -0.3, 0.0, 0.9, 4.2]:
            assert f.eval_d(u)[0] == f.eval(u)


def _random_expression(rng: random.Random, depth: int) -> str:
    """Random expression text that is smooth and domain-safe on [-3, 3]."""
    if depth == 0:
        return rng.choice(["u", f"{rng.uniform(0.5, 2.5):.3f}", f"{rng.uniform(0.2, 1.5):.3f}*u"])
    a = _random_expression(rng, depth - 1)
    b = _random_expression(rng, depth - 1)
    pick = rng.randrange(7)
    if pick == 0:
        return f"({a})+({b})"
    if pick == 1:
        return f"({a})-({b})"
    if pick == 2:
        return f"({a})*({b})"
    if pick == 3:
        return f"({a})/(({b})^2+1)"
    if pick == 4:
        return f"sqrt(({a})^2+1)"
    if pick == 5:
        return f"log(({a})^2+2)"
    return f"exp(({a})/(({a})^2+4))"


def test_derivative_against_central_differences():
    # 1000 random (expression, u) pairs; oracle: central finite difference.
    rng = random.Random(1319)
    h = 1e-6
    for _ in range(1000):
        f = parse(_random_expression(rng, rng.randrange(1, 4)))
        u = rng.uniform(-3.0, 3.0)
        _, d = f.eval_d(u)
        fd = (f.eval(u + h) - f.eval(u - h)) / (2.0 * h)
        assert abs(d - fd) <= 1e-6 * (1.0 + abs(d))


_numbers = st.floats(min_value=0.0, max_value=10.0, allow_nan=False, allow_infinity=False).map(
    lambda v: round(v, 3)
)
_atoms = st.one_of(st.just(Var()), st.builds(Num, _numbers))


def _compound(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/"]), children, children),
        st.builds(Pow, children, st.sampled_from([2.0, 3.0, 0.5, -1.0, 1.5])),
        st.builds(Call, st.sampled_from(["sqrt", "exp", "log", "abs"]), children),
    )


@settings(max_examples=300, deadline=None)
@given(st.recursive(_atoms, _compound, max_leaves=25))
def test_print_parse_roundtrip(root):
    expr = FluxExpr(root)
    assert parse(expr.text()).root == root


@settings(max_examples=100, deadline=None)
@given(st.recursive(_atoms, _compound, max_leaves=25))
def test_canonical_form_is_stable(root):
    text = FluxExpr(root).text()
    assert parse(text).text() == text
