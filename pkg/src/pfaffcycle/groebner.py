"""A minimal Buchberger engine over exact rationals.

Desk-scale by design: computations carry an explicit S-pair budget and
raise :class:`BudgetExceeded` instead of grinding on.  Reduced bases are
canonical (monic, inter-reduced, sorted), so identical inputs always
produce identical output.  Used for ideal saturation (flat parts of
families), emptiness tests, elimination, and sampling rational points
on low-degree components.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import BudgetExceeded, ContextMismatch, ShapeMismatch
from .poly import E_NAME, Exponent, MultiPoly, VarContext

DEFAULT_BUDGET = 4000


@dataclass(frozen=True)
class MonomialOrder:
    """grevlex, lex, or block(split): the first ``split`` variables form
    a dominant elimination block, graded-reverse-lex inside each block."""

    kind: str = "grevlex"
    split: int = 0

    def key(self, exponent: Exponent):
        if self.kind == "grevlex":
            return _grevlex_key(exponent)
        if self.kind == "lex":
            return tuple(exponent)
        if self.kind == "block":
            head, tail = exponent[: self.split], exponent[self.split :]
            return (_grevlex_key(head), _grevlex_key(tail))
        raise ShapeMismatch(f"unknown monomial order {self.kind!r}")


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


def _grevlex_key(exponent: Exponent):
    return (sum(exponent), tuple(-k for k in reversed(exponent)))


class PolySystem:
    """A list of polynomials sharing one context (possibly empty)."""

    __slots__ = ("ctx", "polys")

    def __init__(self, ctx: VarContext, polys):
        polys = tuple(polys)
        for p in polys:
            if p.ctx != ctx:
                raise ContextMismatch("system polynomials must share the context")
        self.ctx = ctx
        self.polys = polys

    def __iter__(self):
        return iter(self.polys)

    def __len__(self):
        return len(self.polys)

    def __eq__(self, other):
        return (
            isinstance(other, PolySystem)
            and self.ctx == other.ctx
            and self.polys == other.polys
        )

    def __hash__(self):
        return hash((self.ctx, self.polys))

    def __repr__(self):
        return f"PolySystem({[str(p) for p in self.polys]})"

    @staticmethod
    def parse(ctx: VarContext, texts) -> "PolySystem":
        from .poly import poly_parse

        return PolySystem(ctx, [poly_parse(t, ctx) for t in texts])


def leading(p: MultiPoly, order: MonomialOrder) -> tuple[Exponent, Fraction]:
    exponent = max(p.terms, key=order.key)
    return exponent, p.terms[exponent]


def _divides(a: Exponent, b: Exponent) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _monomial_mul(p: MultiPoly, exponent: Exponent, coeff: Fraction) -> MultiPoly:
    return MultiPoly(
        p.ctx,
        {
            tuple(x + y for x, y in zip(e, exponent)): c * coeff
            for e, c in p.terms.items()
        },
    )


def normal_form(p: MultiPoly, basis, order: MonomialOrder) -> MultiPoly:
    """Full reduction of p modulo the basis (leading and tail terms)."""
    remainder = MultiPoly.zero(p.ctx)
    work = p
    leads = [leading(g, order) for g in basis]
    while not work.is_zero():
        lm, lc = leading(work, order)
        reduced = False
        for g, (glm, glc) in zip(basis, leads):
            if _divides(glm, lm):
                shift = tuple(a - b for a, b in zip(lm, glm))
                work = work - _monomial_mul(g, shift, lc / glc)
                reduced = True
                break
        if not reduced:
            remainder = remainder + MultiPoly(p.ctx, {lm: lc})
            work = work - MultiPoly(p.ctx, {lm: lc})
    return remainder


def _s_poly(f: MultiPoly, g: MultiPoly, order: MonomialOrder) -> MultiPoly:
    flm, flc = leading(f, order)
    glm, glc = leading(g, order)
    lcm = tuple(max(a, b) for a, b in zip(flm, glm))
    fm = _monomial_mul(f, tuple(a - b for a, b in zip(lcm, flm)), 1 / flc)
    gm = _monomial_mul(g, tuple(a - b for a, b in zip(lcm, glm)), 1 / glc)
    return fm - gm


def buchberger(
    sys: PolySystem, order: MonomialOrder = GREVLEX, budget: int = DEFAULT_BUDGET
) -> PolySystem:
    """Reduced Groebner basis; deterministic for a fixed input.

    ``budget`` limits the number of S-pairs processed.
    """
    if budget <= 0:
        raise ShapeMismatch("budget must be positive")
    basis = [p for p in sys.polys if not p.is_zero()]
    # canonical starting order keeps runs reproducible
    basis.sort(key=lambda p: sorted(map(order.key, p.terms)))
    pairs = set(combinations(range(len(basis)), 2))
    processed = 0
    while pairs:
        def lcm_key(pair):
            i, j = pair
            a = leading(basis[i], order)[0]
            b = leading(basis[j], order)[0]
            return (order.key(tuple(max(x, y) for x, y in zip(a, b))), pair)

        pair = min(pairs, key=lcm_key)
        pairs.discard(pair)
        processed += 1
        if processed > budget:
            raise BudgetExceeded(budget, processed)
        i, j = pair
        a = leading(basis[i], order)[0]
        b = leading(basis[j], order)[0]
        if all(x == 0 or y == 0 for x, y in zip(a, b)):
            continue  # coprime leading monomials reduce to zero
        s = normal_form(_s_poly(basis[i], basis[j], order), basis, order)
        if s.is_zero():
            continue
        basis.append(s)
        new = len(basis) - 1
        pairs.update((k, new) for k in range(new))
    return _reduce_basis(basis, sys.ctx, order)


def _reduce_basis(basis, ctx, order) -> PolySystem:
    if not basis:
        return PolySystem(ctx, [])
    # minimalize: drop generators whose leading monomial another divides
    leads = [leading(g, order)[0] for g in basis]
    keep = []
    for i, lm in enumerate(leads):
        if any(
            j != i and _divides(leads[j], lm) and (leads[j] != lm or j < i)
            for j in range(len(basis))
        ):
            continue
        keep.append(i)
    minimal = [basis[i] for i in keep]
    # inter-reduce tails and normalize
    reduced = []
    for i, g in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        r = normal_form(g, others, order) if others else g
        if not r.is_zero():
            lc = leading(r, order)[1]
            reduced.append(r.scale(1 / lc))
    reduced.sort(key=lambda p: order.key(leading(p, order)[0]), reverse=True)
    return PolySystem(ctx, reduced)


def is_unit_ideal(sys: PolySystem, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff the reduced basis is {1} (empty variety over C)."""
    basis = buchberger(sys, GREVLEX, budget)
    return len(basis) == 1 and basis.polys[0].is_constant()


def eliminate_first(
    sys: PolySystem, count: int, budget: int = DEFAULT_BUDGET
) -> PolySystem:
    """Generators of the ideal with the first ``count`` variables
    eliminated, expressed over the reduced context."""
    order = MonomialOrder("block", count)
    basis = buchberger(sys, order, budget)
    names = sys.ctx.names[count:]
    small = VarContext(names, sys.ctx.has_e)
    kept = []
    for p in basis:
        if all(all(k == 0 for k in e[:count]) for e in p.terms):
            kept.append(
                MultiPoly(small, {e[count:]: c for e, c in p.terms.items()})
            )
    return PolySystem(small, kept)


def saturate_by(
    sys: PolySystem, h: MultiPoly, budget: int = DEFAULT_BUDGET
) -> PolySystem:
    """Generators of (I : h^infinity) via the Rabinowitsch trick."""
    if h.is_zero():
        raise ShapeMismatch("cannot saturate by the zero polynomial")
    if h.ctx != sys.ctx:
        raise ContextMismatch("saturation element must share the system context")
    tag = "t_"
    while tag in sys.ctx.names:
        tag += "_"
    ext = VarContext((tag,) + sys.ctx.names, sys.ctx.has_e)
    t = MultiPoly.var(ext, 0)
    gens = [p.lift(ext) for p in sys.polys]
    gens.append(t * h.lift(ext) - MultiPoly.const(ext, 1))
    return eliminate_first(PolySystem(ext, gens), 1, budget)


def flat_part(family: PolySystem, budget: int = DEFAULT_BUDGET) -> PolySystem:
    """Saturate by e: kill the components supported in the zero fiber so
    that every remaining component projects dominantly on the e-line."""
    if not family.ctx.has_e:
        raise ContextMismatch("flat part needs the deformation variable e")
    e_poly = MultiPoly.var(family.ctx, family.ctx.e_index)
    return saturate_by(family, e_poly, budget)


def ideal_member(
    p: MultiPoly, sys: PolySystem, budget: int = DEFAULT_BUDGET
) -> bool:
    basis = buchberger(sys, GREVLEX, budget)
    if not len(basis):
        return p.is_zero()
    return normal_form(p, list(basis), GREVLEX).is_zero()


def staircase_count(sys: PolySystem, budget: int = DEFAULT_BUDGET) -> int | None:
    """Number of standard monomials of a zero-dimensional ideal, i.e. the
    total intersection count over C with multiplicity.  None when the
    staircase is infinite (positive-dimensional ideal)."""
    basis = buchberger(sys, GREVLEX, budget)
    if not len(basis):
        return None
    leads = [leading(g, GREVLEX)[0] for g in basis]
    n = sys.ctx.arity
    bounds = [None] * n
    for lm in leads:
        support = [i for i, k in enumerate(lm) if k > 0]
        if len(support) == 1:
            i = support[0]
            if bounds[i] is None or lm[i] < bounds[i]:
                bounds[i] = lm[i]
    if any(b is None for b in bounds):
        return None
    count = 0
    stack = [(0, (0,) * n)]
    while stack:
        i, exponent = stack.pop()
        if i == n:
            if not any(_divides(lm, exponent) for lm in leads):
                count += 1
            continue
        for k in range(bounds[i]):
            new = list(exponent)
            new[i] = k
            stack.append((i + 1, tuple(new)))
    return count


def _rational_roots(coeffs: list[Fraction]) -> list[Fraction]:
    """All rational roots of a univariate polynomial given low-to-high."""
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        return []
    roots = []
    if coeffs[0] == 0:
        roots.append(Fraction(0))
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
    if len(coeffs) <= 1:
        return roots
    from math import lcm

    denom = lcm(*[c.denominator for c in coeffs])
    ints = [int(c * denom) for c in coeffs]
    a0, an = abs(ints[0]), abs(ints[-1])

    def divisors(m):
        out = []
        d = 1
        while d * d <= m:
            if m % d == 0:
                out.append(d)
                out.append(m // d)
            d += 1
        return sorted(set(out))

    for p in divisors(a0):
        for q in divisors(an):
            for candidate in (Fraction(p, q), Fraction(-p, q)):
                value = Fraction(0)
                for c in reversed(ints):
                    value = value * candidate + c
                if value == 0 and candidate not in roots:
                    roots.append(candidate)
    roots.sort()
    return roots


def rational_solutions(
    sys: PolySystem, budget: int = DEFAULT_BUDGET, limit: int = 64
) -> list[tuple[Fraction, ...]] | None:
    """Exact rational points of a zero-dimensional system.

    Works by lex elimination and back-substitution, keeping only exact
    rational branches.  Returns None when the structure does not permit
    the triangular walk (no univariate generator in the last variable).
    """
    n = sys.ctx.arity
    if n == 0:
        return [()] if all(p.is_zero() for p in sys.polys) else []
    basis = buchberger(sys, LEX, budget)
    gens = list(basis)
    if not gens:
        return None  # whole space: not zero-dimensional
    if len(basis) == 1 and basis.polys[0].is_constant():
        return []
    last = n - 1
    univariate = None
    for p in gens:
        if all(all(k == 0 for k in e[:last]) for e in p.terms):
            univariate = p
            break
    if univariate is None:
        return None
    degree = univariate.degree_in(last)
    coeffs = [Fraction(0)] * (degree + 1)
    for e, c in univariate.terms.items():
        coeffs[e[last]] += c
    solutions: list[tuple[Fraction, ...]] = []
    for root in _rational_roots(list(coeffs)):
        reduced = [p.specialize(last, root) for p in gens]
        reduced = [p for p in reduced if not p.is_zero()]
        sub = PolySystem(VarContext(sys.ctx.names[:last], False), reduced)
        tail = rational_solutions(sub, budget, limit)
        if tail is None:
            continue
        for partial in tail:
            solutions.append(partial + (root,))
            if len(solutions) >= limit:
                return solutions
    return solutions
