import random
from fractions import Fraction
from math import gcd

import pytest

from pfaffcycle.errors import ContextMismatch, ParseError
from pfaffcycle.poly import (
    AtLeastTruncation,
    MultiPoly,
    TruncatedSeries,
    VarContext,
    point,
    poly_parse,
    poly_to_string,
    series_compose,
    series_order,
)

XY = VarContext.make(["x", "y"])
XE = VarContext.make(["x"], with_e=True)


def P(text, ctx=XY):
    return poly_parse(text, ctx)


class TestParse:
    def test_direct_reading(self):
        p = P("x^2 - 1/2*y")
        assert p.terms == {(2, 0): Fraction(1), (0, 1): Fraction(-1, 2)}

    def test_binomial(self):
        p = P("(x+y)^2")
        assert p.terms == {(2, 0): Fraction(1), (1, 1): Fraction(2), (0, 2): Fraction(1)}

    def test_cancellation(self):
        assert P("x - x").is_zero()

    def test_unknown_variable(self):
        with pytest.raises(ParseError):
            P("x + z")

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            P("x + ")
        assert err.value.position == 4

    def test_parse_print_parse_identity(self):
        rng = random.Random(7)
        for _ in range(40):
            p = _random_poly(rng, XY, 3)
            assert poly_parse(poly_to_string(p), XY) == p

    def test_rational_literal(self):
        assert P("3/4").constant_term() == Fraction(3, 4)

    def test_unary_minus(self):
        assert P("-x^2") == -P("x^2")


class TestRingOps:
    def test_additive_inverse(self):
        assert (P("x") + (-P("x"))).is_zero()

    def test_difference_of_squares(self):
        assert P("x+1") * P("x-1") == P("x^2-1")

    def test_pow_coefficient(self):
        # oracle: expand (x+y)^3 by repeated multiplication
        expected = P("x+y") * P("x+y") * P("x+y")
        cubed = P("x+y") ** 3
        assert cubed == expected
        assert cubed.terms[(1, 2)] == 3

    def test_context_mismatch(self):
        with pytest.raises(ContextMismatch):
            P("x") + poly_parse("x", XE)

    def test_ring_axioms_randomized(self):
        rng = random.Random(2024)
        for _ in range(25):
            a = _random_poly(rng, XY, 2)
            b = _random_poly(rng, XY, 2)
            c = _random_poly(rng, XY, 2)
            assert (a + b) + c == a + (b + c)
            assert a + b == b + a
            assert (a * b) * c == a * (b * c)
            assert a * b == b * a
            assert a * (b + c) == a * b + a * c

    def test_coefficients_stay_reduced(self):
        rng = random.Random(5)
        for _ in range(25):
            a = _random_poly(rng, XY, 2)
            b = _random_poly(rng, XY, 2)
            for coeff in (a * b + a).terms.values():
                assert gcd(coeff.numerator, coeff.denominator) == 1
                assert coeff.denominator > 0


class TestDiffEvalDegree:
    def test_power_rule(self):
        assert P("x^2*y").diff(0) == P("2*x*y")

    def test_smoothing_term_derivative(self):
        # d/de (f - c*e^N) with f = x, N = 3, c = 5
        f = poly_parse("x - 5*e^3", XE)
        assert f.diff(XE.e_index) == poly_parse("-15*e^2", XE)

    def test_constant_derivative(self):
        assert P("7").diff(0).is_zero()

    def test_eval(self):
        assert P("x^2+y").eval(point([2, 1])) == 5
        assert MultiPoly.zero(XY).eval(point([3, 9])) == 0
        one_var = VarContext.make(["x"])
        q = poly_parse("(x-1)*(x-2)", one_var)
        assert q.eval(point([1])) == 0

    def test_total_degree(self):
        assert P("x^2*y + y").total_degree() == 3
        assert P("4").total_degree() == 0
        assert MultiPoly.zero(XY).total_degree() == -1

    def test_degree_multiplicative(self):
        rng = random.Random(11)
        for _ in range(25):
            a = _random_poly(rng, XY, 3)
            b = _random_poly(rng, XY, 3)
            if a.is_zero() or b.is_zero():
                continue
            assert (a * b).total_degree() == a.total_degree() + b.total_degree()

    def test_x_degree_ignores_e(self):
        f = poly_parse("x^2*e^5 + x", XE)
        assert f.total_degree() == 7
        assert f.x_degree() == 2

    def test_shift(self):
        q = P("x^2 + y")
        shifted = q.shift(point([1, 2]))
        assert shifted == P("(x+1)^2 + y + 2")


class TestSeries:
    U = VarContext.make(["u"])

    def series(self, text, order):
        return TruncatedSeries(poly_parse(text, self.U), order)

    def test_compose_exp_leaf(self):
        # substitute x -> u, y -> 1 + u + u^2/2 into y - 1 - x at order 3
        graph = {"x": self.series("u", 3), "y": self.series("1 + u + 1/2*u^2", 3)}
        composed = series_compose(P("y - 1 - x"), graph)
        assert composed == self.series("1/2*u^2", 3)

    def test_compose_identity(self):
        graph = {"x": self.series("u", 4)}
        x_only = VarContext.make(["x"])
        assert series_compose(poly_parse("x", x_only), graph) == self.series("u", 4)

    def test_compose_truncates(self):
        graph = {"x": self.series("u", 4), "y": self.series("u^2", 4)}
        composed = series_compose(P("x^2 + y^2"), graph)
        assert composed == self.series("u^2", 4)  # u^4 dropped

    def test_compose_is_ring_morphism_mod_truncation(self):
        rng = random.Random(3)
        for _ in range(15):
            p = _random_poly(rng, XY, 2)
            q = _random_poly(rng, XY, 2)
            graph = {
                "x": TruncatedSeries(_random_poly(rng, self.U, 3), 5),
                "y": TruncatedSeries(_random_poly(rng, self.U, 3), 5),
            }
            lhs = series_compose(p * q, graph)
            rhs = series_compose(p, graph) * series_compose(q, graph)
            assert lhs == rhs

    def test_series_order(self):
        assert series_order(self.series("1/2*u^2 + u^3", 5)) == 2
        assert series_order(TruncatedSeries.zero(self.U, 5)) == AtLeastTruncation(5)
        assert series_order(self.series("3 + u", 5)) == 0


def _random_poly(rng, ctx, deg):
    terms = {}
    for _ in range(rng.randint(0, 6)):
        exponent = tuple(rng.randint(0, deg) for _ in range(ctx.arity))
        if sum(exponent) > deg:
            continue
        terms[exponent] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return MultiPoly(ctx, terms)
