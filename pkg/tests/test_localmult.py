import random
from fractions import Fraction

import pytest

from pfaffcycle.errors import ShapeMismatch, UnderdeterminedSystem
from pfaffcycle.groebner import PolySystem, staircase_count
from pfaffcycle.localmult import (
    MultResult,
    deformation_multiplicity,
    exact_rank,
    local_multiplicity,
)
from pfaffcycle.poly import MultiPoly, VarContext, point, poly_parse

XY = VarContext.make(["x", "y"])
XE = VarContext.make(["x"], with_e=True)
ORIGIN = point([0, 0])


def S(ctx, *texts):
    return PolySystem.parse(ctx, texts)


def mult(sys, p, cap=24):
    return local_multiplicity(sys, p, cap)


class TestExactRank:
    def test_known_ranks(self):
        one = Fraction(1)
        assert exact_rank([[one, one], [one, one]]) == 1
        assert exact_rank([[one, Fraction(0)], [Fraction(0), one]]) == 2
        assert exact_rank([]) == 0

    def test_matches_row_reduction_randomized(self):
        rng = random.Random(77)
        for _ in range(20):
            rows = rng.randint(1, 5)
            cols = rng.randint(1, 5)
            m = [
                [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(cols)]
                for _ in range(rows)
            ]
            assert exact_rank([r[:] for r in m]) == _rank_fraction_gauss(m)


class TestLocalMultiplicity:
    def test_simple_zero(self):
        assert mult(S(XY, "x", "y"), ORIGIN).value == 1

    def test_monomial_staircase(self):
        result = mult(S(XY, "x^2", "y^3"), ORIGIN)
        assert result.value == 6
        assert result.value == staircase_count(S(XY, "x^2", "y^3"))

    def test_transverse_point(self):
        assert mult(S(XY, "x^2 - 1", "y - 1"), point([1, 1])).value == 1

    def test_dual_space_order_four(self):
        result = mult(S(XY, "x^2 + y^3", "y^2"), ORIGIN)
        assert result.value == 4
        assert result.value == staircase_count(S(XY, "x^2 + y^3", "y^2"))

    def test_nonvanishing_is_zero(self):
        assert mult(S(XY, "x - 1", "y"), ORIGIN).value == 0

    def test_underdetermined_rejected(self):
        with pytest.raises(UnderdeterminedSystem):
            mult(S(XY, "x^2 + y^2 - 2"), point([1, 1]))

    def test_cap_on_positive_dimensional(self):
        # gradient of x^2*y vanishes on the whole y-axis
        result = mult(S(XY, "2*x*y", "x^2"), ORIGIN, cap=6)
        assert result.kind == "cap_exceeded"
        assert result.cap == 6

    def test_zero_system_is_infinite(self):
        result = local_multiplicity(
            PolySystem(XY, [MultiPoly.zero(XY), MultiPoly.zero(XY)]), ORIGIN, 8
        )
        assert result.kind == "infinite"

    def test_cap_must_be_positive(self):
        with pytest.raises(ShapeMismatch):
            mult(S(XY, "x", "y"), ORIGIN, cap=0)

    def test_monomial_products_randomized(self):
        rng = random.Random(41)
        for _ in range(10):
            a, b = rng.randint(1, 4), rng.randint(1, 4)
            sys = S(XY, f"x^{a}", f"y^{b}")
            assert mult(sys, ORIGIN, cap=2 * (a + b)).value == a * b

    def test_unimodular_combination_invariance(self):
        rng = random.Random(19)
        sys = S(XY, "x^2 + y^3", "y^2")
        base = mult(sys, ORIGIN).value
        for _ in range(5):
            c = Fraction(rng.randint(-3, 3))
            f, g = sys.polys
            mixed = PolySystem(XY, [f + g.scale(c), g])  # det 1 row operation
            assert mult(mixed, ORIGIN).value == base

    def test_translation_equivariance(self):
        rng = random.Random(8)
        for _ in range(5):
            px = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
            py = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
            p = (px, py)
            f = poly_parse("x^2 + y^3", XY).shift((-px, -py))
            g = poly_parse("y^2", XY).shift((-px, -py))
            moved = PolySystem(XY, [f, g])
            assert mult(moved, p).value == 4


class TestDeformationMultiplicity:
    def test_double_point_merging(self):
        assert deformation_multiplicity(S(XE, "x^2 - e"), point([0]), 16).value == 2

    def test_single_point(self):
        assert deformation_multiplicity(S(XE, "x - e"), point([0]), 16).value == 1

    def test_two_lines(self):
        assert deformation_multiplicity(S(XE, "x^2 - e^2"), point([0]), 16).value == 2

    def test_univariate_order_conservation(self):
        for m in range(1, 6):
            sys = S(XE, f"x^{m} - e")
            assert deformation_multiplicity(sys, point([0]), 16).value == m

    def test_requires_square_shape(self):
        with pytest.raises(ShapeMismatch):
            deformation_multiplicity(
                PolySystem(XE, [poly_parse("x - e", XE), poly_parse("x", XE)]),
                point([0]),
                8,
            )

    def test_away_from_limit_zero(self):
        assert deformation_multiplicity(S(XE, "x^2 - e"), point([5]), 8).value == 0


class TestMultResult:
    def test_serialization(self):
        assert MultResult.finite(3, 2, 24).as_json() == {
            "value": 3,
            "stabilized_at": 2,
            "cap": 24,
        }
        assert MultResult.infinite(24).as_json()["value"] == "infinite"
        assert MultResult.cap_exceeded(8).as_json()["value"] == "cap_exceeded"


def _rank_fraction_gauss(m):
    m = [row[:] for row in m]
    rank = 0
    cols = len(m[0]) if m else 0
    for col in range(cols):
        pivot = None
        for r in range(rank, len(m)):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][col]
        for r in range(rank + 1, len(m)):
            factor = m[r][col] / pv
            if factor:
                m[r] = [a - factor * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank
