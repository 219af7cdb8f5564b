"""Local intersection multiplicity via Macaulay dual spaces.

For a square (or overdetermined) polynomial system vanishing at a
rational point p, the dimension of the local dual space -- functionals
sum c_a d^a/a! annihilating every multiple of the system at p -- equals
the intersection multiplicity when p is an isolated solution.  Working
order by order, the truncated dual dimension is the corank of a Macaulay
matrix whose entry at (row (i, b), column a) is the coefficient of
x^(a-b) in the i-th generator shifted to the origin.  Dimensions that
agree at two consecutive orders have stabilized, which certifies the
multiplicity; dimensions still growing at the configured cap yield an
explicit CapExceeded result instead of nontermination.

Everything is exact: ranks come from fraction-free integer elimination,
so no tolerance appears anywhere in the multiplicity pipeline.

The deformation multiplicity of a family f(x, e) at p counts the
isolated solutions of the fiber e = eps converging to p as eps -> 0,
with multiplicity.  By conservation of intersection numbers this is the
local multiplicity of the square system (f, e) at (p, 0), which is how
it is computed here.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .errors import ShapeMismatch, UnderdeterminedSystem
from .groebner import PolySystem
from .poly import MultiPoly, PointQ, VarContext, rat

FINITE = "finite"
INFINITE = "infinite"
CAP_EXCEEDED = "cap_exceeded"

DEFAULT_CAP = 64


@dataclass(frozen=True)
class MultResult:
    """A local or deformation multiplicity with its certificate data."""

    kind: str
    value: int | None
    stabilized_at: int | None
    cap: int

    @staticmethod
    def finite(value: int, stabilized_at: int, cap: int) -> "MultResult":
        return MultResult(FINITE, value, stabilized_at, cap)

    @staticmethod
    def infinite(cap: int) -> "MultResult":
        return MultResult(INFINITE, None, None, cap)

    @staticmethod
    def cap_exceeded(cap: int) -> "MultResult":
        return MultResult(CAP_EXCEEDED, None, None, cap)

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    def as_json(self) -> dict:
        return {
            "value": self.value if self.is_finite else self.kind,
            "stabilized_at": self.stabilized_at,
            "cap": self.cap,
        }

    def __str__(self):
        return str(self.value) if self.is_finite else self.kind


def exact_rank(rows: list[list[Fraction]]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    matrix: list[list[int]] = []
    for row in rows:
        denom = lcm(*[c.denominator for c in row]) if row else 1
        matrix.append([int(c * denom) for c in row])
    if not matrix or not matrix[0]:
        return 0
    n_rows, n_cols = len(matrix), len(matrix[0])
    rank = 0
    prev_pivot = 1
    for col in range(n_cols):
        pivot_row = None
        for r in range(rank, n_rows):
            if matrix[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        matrix[rank], matrix[pivot_row] = matrix[pivot_row], matrix[rank]
        pivot = matrix[rank][col]
        for r in range(rank + 1, n_rows):
            factor = matrix[r][col]
            row_r = matrix[r]
            row_p = matrix[rank]
            # full Bareiss update keeps every entry an exact minor, so the
            # integer division below is always exact
            for c in range(col, n_cols):
                row_r[c] = (row_r[c] * pivot - factor * row_p[c]) // prev_pivot
        prev_pivot = pivot
        rank += 1
        if rank == n_rows:
            break
    return rank


def _monomials_upto(n_vars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for total in range(degree + 1):
        for cut in itertools.combinations(range(total + n_vars - 1), n_vars - 1):
            exponent = []
            prev = -1
            for c in cut:
                exponent.append(c - prev - 1)
                prev = c
            exponent.append(total + n_vars - 1 - prev - 1)
            out.append(tuple(exponent))
    return out


def _dual_dimension(shifted: list[MultiPoly], n_vars: int, order: int) -> int:
    cols = _monomials_upto(n_vars, order)
    col_index = {m: i for i, m in enumerate(cols)}
    rows: list[list[Fraction]] = []
    betas = _monomials_upto(n_vars, order - 1) if order >= 1 else []
    zero = Fraction(0)
    for g in shifted:
        for beta in betas:
            row = [zero] * len(cols)
            hit = False
            for exponent, coeff in g.terms.items():
                alpha = tuple(a + b for a, b in zip(exponent, beta))
                idx = col_index.get(alpha)
                if idx is not None:
                    row[idx] = coeff
                    hit = True
            if hit:
                rows.append(row)
    return len(cols) - exact_rank(rows)


def _line_probe(shifted: list[MultiPoly], n_vars: int) -> bool:
    """True when the system vanishes identically along two independent
    random lines through the origin -- a certificate that the point is
    not isolated."""
    rng = random.Random("localmult-line-probe")
    for _ in range(2):
        direction = [Fraction(rng.randint(1, 97), rng.randint(1, 13)) for _ in range(n_vars)]
        for g in shifted:
            # restrict to t -> t * direction: all coefficients must cancel
            restricted: dict[int, Fraction] = {}
            for exponent, coeff in g.terms.items():
                value = coeff
                for d, k in zip(direction, exponent):
                    if k:
                        value *= d**k
                total = sum(exponent)
                restricted[total] = restricted.get(total, Fraction(0)) + value
            if any(v != 0 for v in restricted.values()):
                return False
    return True


def local_multiplicity(
    sys: PolySystem, p: PointQ, cap: int = DEFAULT_CAP
) -> MultResult:
    """Intersection multiplicity of the system at p.

    The system must have at least as many equations as variables;
    slicing underdetermined systems is the caller's responsibility.
    Returns 0 immediately when some equation does not vanish at p.
    """
    if cap < 1:
        raise ShapeMismatch("cap must be at least 1")
    n_vars = sys.ctx.arity
    if len(sys.polys) < n_vars:
        raise UnderdeterminedSystem(
            f"{len(sys.polys)} equations in {n_vars} variables; append slices first"
        )
    p = tuple(rat(c) for c in p)
    if len(p) != n_vars:
        raise ShapeMismatch("point length does not match context")
    for f in sys.polys:
        if f.eval(p) != 0:
            return MultResult.finite(0, 0, cap)
    shifted = [f.shift(p) for f in sys.polys if not f.is_zero()]
    if not shifted:
        return MultResult.infinite(cap)
    if _line_probe(shifted, n_vars):
        return MultResult.infinite(cap)
    previous = 1  # order 0: the evaluation functional alone
    for order in range(1, cap + 1):
        current = _dual_dimension(shifted, n_vars, order)
        if current == previous:
            return MultResult.finite(current, order, cap)
        previous = current
    return MultResult.cap_exceeded(cap)


def deformation_multiplicity(
    family: PolySystem, p: PointQ, cap: int = DEFAULT_CAP
) -> MultResult:
    """Number of isolated eps-fiber solutions converging to p, counted
    with multiplicity: the local multiplicity of (family, e) at (p, 0)."""
    ctx = family.ctx
    if not ctx.has_e:
        raise ShapeMismatch("deformation multiplicity needs the variable e")
    n = ctx.arity - 1
    if len(family.polys) != n:
        raise ShapeMismatch(
            f"family must be square after adjoining e: {len(family.polys)} equations "
            f"for {n} x-variables"
        )
    p = tuple(rat(c) for c in p)
    if len(p) != n:
        raise ShapeMismatch("point lives in x-space")
    e_poly = MultiPoly.var(ctx, ctx.e_index)
    square = PolySystem(ctx, list(family.polys) + [e_poly])
    return local_multiplicity(square, p + (Fraction(0),), cap)
