import random
from fractions import Fraction

import pytest

from pfaffcycle.errors import NonIntegrable, ShapeMismatch, SingularVectorField
from pfaffcycle.forms import OneForm, d_of
from pfaffcycle.groebner import PolySystem
from pfaffcycle.localmult import local_multiplicity
from pfaffcycle.oracles import (
    VectorField,
    kernel_vector_field,
    leaf_intersection_multiplicity,
    leaf_series,
    lie_multiplicity,
    milnor_number,
)
from pfaffcycle.poly import (
    MultiPoly,
    TruncatedSeries,
    VarContext,
    point,
    poly_parse,
    series_compose,
    series_order,
)

XY = VarContext.make(["x", "y"])
XYZ = VarContext.make(["x", "y", "z"])
ORIGIN = point([0, 0])


def P(text, ctx=XY):
    return poly_parse(text, ctx)


def form(ctx, *texts):
    return OneForm.from_strings(ctx, texts)


class TestKernelField:
    def test_planar_example(self):
        xi = kernel_vector_field([form(XY, "-y", "1")])
        assert [str(c) for c in xi.components] == ["1", "y"]

    def test_minor_signs(self):
        xi = kernel_vector_field([form(XY, "1", "0")])
        assert [str(c) for c in xi.components] == ["0", "-1"]

    def test_coordinate_kernel(self):
        xi = kernel_vector_field([form(XYZ, "1", "0", "0"), form(XYZ, "0", "1", "0")])
        assert [str(c) for c in xi.components] == ["0", "0", "1"]

    def test_annihilates_forms_randomized(self):
        rng = random.Random(6)
        for _ in range(10):
            omegas = [
                OneForm(XYZ, [_random_poly(rng, XYZ, 2) for _ in range(3)])
                for _ in range(2)
            ]
            xi = kernel_vector_field(omegas)
            for w in omegas:
                pairing = MultiPoly.zero(XYZ)
                for c, comp in zip(w.coeffs, xi.components):
                    pairing = pairing + c * comp
                assert pairing.is_zero()


class TestLieMultiplicity:
    def test_straight_trajectory(self):
        xi = VectorField.parse(XY, ["1", "0"])
        assert lie_multiplicity(xi, P("x^3 + y"), ORIGIN).value == 3

    def test_nonvanishing_is_order_zero(self):
        xi = VectorField.parse(XY, ["1", "0"])
        assert lie_multiplicity(xi, P("1 + x"), ORIGIN).value == 0

    def test_parabolic_trajectory(self):
        xi = VectorField.parse(XY, ["1", "2*x"])
        assert lie_multiplicity(xi, P("y"), ORIGIN).value == 2

    def test_singular_point_rejected(self):
        xi = VectorField.parse(XY, ["x", "y"])
        with pytest.raises(SingularVectorField):
            lie_multiplicity(xi, P("x"), ORIGIN)

    def test_invariant_curve_is_infinite(self):
        # trajectory of (1, 2x) through 0 is y = x^2, contained in {P = 0}
        xi = VectorField.parse(XY, ["1", "2*x"])
        result = lie_multiplicity(xi, P("y - x^2"), ORIGIN)
        assert result.kind == "infinite"

    def test_scaling_invariance(self):
        rng = random.Random(13)
        xi = VectorField.parse(XY, ["1", "2*x"])
        scaled = VectorField(XY, tuple(c.scale(3) for c in xi.components))
        unit = P("1 + x + y")
        for _ in range(5):
            q = _random_poly(rng, XY, 2)
            if q.eval(ORIGIN) == 0:
                q = q + MultiPoly.const(XY, 1)
            target = P("y") * q
            a = lie_multiplicity(xi, target, ORIGIN)
            b = lie_multiplicity(scaled, target, ORIGIN)
            c = lie_multiplicity(xi, target * unit, ORIGIN)
            assert a.value == b.value == c.value


class TestLeafSeries:
    def test_exponential_leaf(self):
        chart = leaf_series([form(XY, "-y", "1")], point([0, 1]), 4)
        u = chart.uctx
        expected = TruncatedSeries(
            poly_parse("1 + u1 + 1/2*u1^2 + 1/6*u1^3", u), 4
        )
        assert chart.dependent["y"] == expected

    def test_exact_level_set(self):
        chart = leaf_series([d_of(P("y - x^2"))], ORIGIN, 4)
        assert chart.dependent["y"] == TruncatedSeries(
            poly_parse("u1^2", chart.uctx), 4
        )

    def test_constant_leaf(self):
        chart = leaf_series([form(XY, "0", "1")], ORIGIN, 4)
        assert chart.dependent["y"].is_zero()

    def test_contact_form_rejected(self):
        with pytest.raises(NonIntegrable):
            leaf_series([form(XYZ, "z", "1", "0")], point([0, 0, 0]), 4)

    def test_order_guard(self):
        with pytest.raises(ShapeMismatch):
            leaf_series([form(XY, "-y", "1")], point([0, 1]), 1)

    def test_residual_vanishes_to_truncation(self):
        rng = random.Random(44)
        for _ in range(5):
            F = _random_poly(rng, XYZ, 3)
            base = point([0, 0, 0])
            w = d_of(F)
            if all(v == 0 for v in w.eval(base)):
                continue
            chart = leaf_series([w], base, 5)
            graph = chart.graph()
            # direct residual: pull back F itself; it must be constant
            pulled = series_compose(F, graph)
            shifted = pulled - TruncatedSeries.const(
                chart.uctx, F.eval(base), chart.order
            )
            order = series_order(shifted)
            assert not isinstance(order, int) or order >= chart.order - 1


class TestLeafIntersection:
    def test_classic_chain_order_two(self):
        result = leaf_intersection_multiplicity(
            [P("y - 1 - x")], [form(XY, "-y", "1")], point([0, 1]), 8
        )
        assert result.value == 2

    def test_deformed_classic_chain(self):
        f = poly_parse("y - 1 - x - e", VarContext.make(["x", "y"], with_e=True))
        result = leaf_intersection_multiplicity(
            [f], [form(XY, "-y", "1")], point([0, 1]), 8
        )
        assert result.value == 2

    def test_exact_mode_cross_identity(self):
        F = P("y - x^2")
        result = leaf_intersection_multiplicity([P("y")], [d_of(F)], ORIGIN, 8)
        dual = local_multiplicity(PolySystem(XY, [P("y"), F]), ORIGIN, 16)
        assert result.value == dual.value == 2

    def test_nonvanishing_point(self):
        result = leaf_intersection_multiplicity(
            [P("y - 1 - x")], [form(XY, "-y", "1")], point([1, 0]), 6
        )
        assert result.value == 0

    def test_lie_agreement_on_kernel_leaves(self):
        rng = random.Random(91)
        for _ in range(8):
            w = OneForm(XY, [_random_poly(rng, XY, 2) for _ in range(2)])
            p = point([rng.randint(-2, 2), rng.randint(-2, 2)])
            if all(v == 0 for v in w.eval(p)):
                continue
            f = _random_poly(rng, XY, 2)
            f = f - MultiPoly.const(XY, f.eval(p))
            xi = kernel_vector_field([w])
            if xi.is_singular_at(p):
                continue
            lie = lie_multiplicity(xi, f, p, cap=12)
            if not lie.is_finite:
                continue
            leaf = leaf_intersection_multiplicity([f], [w], p, 10, cap=12)
            assert leaf.value == lie.value


class TestMilnorNumber:
    def test_quadratic(self):
        assert milnor_number(P("x^2 + y^2"), ORIGIN).value == 1

    def test_cusp(self):
        assert milnor_number(P("x^3 + y^2"), ORIGIN).value == 2

    def test_nonisolated_flags(self):
        result = milnor_number(P("x^2*y"), ORIGIN, cap=6)
        assert result.kind in ("infinite", "cap_exceeded")

    def test_regular_point(self):
        assert milnor_number(P("x + y^2"), ORIGIN).value == 0


def _random_poly(rng, ctx, deg):
    terms = {}
    for _ in range(rng.randint(1, 6)):
        exponent = tuple(rng.randint(0, deg) for _ in range(ctx.arity))
        if sum(exponent) > deg:
            continue
        terms[exponent] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return MultiPoly(ctx, terms)
