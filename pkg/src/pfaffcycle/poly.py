"""Exact sparse multivariate polynomials over the rationals.

A polynomial is a dictionary mapping exponent tuples to nonzero
``fractions.Fraction`` coefficients.  One exponent entry per variable of
the owning :class:`VarContext`; the deformation variable ``e``, when
present, is always the last variable of the context.

  x^2*y - 1/2*e   over (x, y | e)  ->  {(2, 1, 0): 1, (0, 0, 1): -1/2}

The zero polynomial stores no terms.  All values are immutable by
convention: operations return fresh objects and never mutate their
arguments, so values can be shared freely between concurrent workers.

Printing uses a fixed graded-lexicographic term order so that equal
polynomials always print identically and parse-print-parse is the
identity on canonical forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ContextMismatch, ParseError

Exponent = tuple[int, ...]
PointQ = tuple[Fraction, ...]

E_NAME = "e"


def rat(value) -> Fraction:
    """Coerce ints, strings like ``"3/4"`` and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


def point(values: Iterable) -> PointQ:
    return tuple(rat(v) for v in values)


@dataclass(frozen=True)
class VarContext:
    """Ordered variable names, with ``e`` flagged when it is present."""

    names: tuple[str, ...]
    has_e: bool = False

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ContextMismatch(f"duplicate variable names in {self.names}")
        if self.has_e and self.names[-1] != E_NAME:
            raise ContextMismatch("deformation variable e must be last")
        if not self.has_e and E_NAME in self.names:
            raise ContextMismatch("name 'e' is reserved for the deformation variable")

    @staticmethod
    def make(names: Iterable[str], with_e: bool = False) -> "VarContext":
        names = tuple(names)
        if with_e:
            names = names + (E_NAME,)
        return VarContext(names, with_e)

    @property
    def arity(self) -> int:
        return len(self.names)

    @property
    def x_names(self) -> tuple[str, ...]:
        return self.names[:-1] if self.has_e else self.names

    @property
    def e_index(self) -> int:
        if not self.has_e:
            raise ContextMismatch("context has no deformation variable")
        return len(self.names) - 1

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ContextMismatch(f"unknown variable {name!r} in context {self.names}")

    def with_e(self) -> "VarContext":
        return self if self.has_e else VarContext(self.names + (E_NAME,), True)

    def drop_e(self) -> "VarContext":
        return VarContext(self.names[:-1], False) if self.has_e else self


def _grlex_key(exponent: Exponent):
    # Graded lex, used descending for printing: degree first, then lex.
    return (sum(exponent), exponent)


class MultiPoly:
    """Sparse exact polynomial attached to a :class:`VarContext`."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: VarContext, terms: Mapping[Exponent, Fraction]):
        clean: dict[Exponent, Fraction] = {}
        arity = ctx.arity
        for exponent, coeff in terms.items():
            if len(exponent) != arity:
                raise ContextMismatch(
                    f"exponent {exponent} has length {len(exponent)}, expected {arity}"
                )
            coeff = rat(coeff)
            if coeff != 0:
                clean[tuple(exponent)] = coeff
        self.ctx = ctx
        self.terms = clean

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero(ctx: VarContext) -> "MultiPoly":
        return MultiPoly(ctx, {})

    @staticmethod
    def const(ctx: VarContext, value) -> "MultiPoly":
        return MultiPoly(ctx, {(0,) * ctx.arity: rat(value)})

    @staticmethod
    def var(ctx: VarContext, index: int) -> "MultiPoly":
        exponent = [0] * ctx.arity
        exponent[index] = 1
        return MultiPoly(ctx, {tuple(exponent): Fraction(1)})

    @staticmethod
    def named(ctx: VarContext, name: str) -> "MultiPoly":
        return MultiPoly.var(ctx, ctx.index(name))

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(exp) == 0 for exp in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.ctx.arity, Fraction(0))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.ctx == other.ctx
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    def _check(self, other: "MultiPoly"):
        if self.ctx != other.ctx:
            raise ContextMismatch(
                f"contexts differ: {self.ctx.names} vs {other.ctx.names}"
            )

    # -- ring operations ----------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        terms = dict(self.terms)
        for exponent, coeff in other.terms.items():
            acc = terms.get(exponent, Fraction(0)) + coeff
            if acc == 0:
                terms.pop(exponent, None)
            else:
                terms[exponent] = acc
        return MultiPoly(self.ctx, terms)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.ctx, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        terms: dict[Exponent, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                key = tuple(a + b for a, b in zip(ea, eb))
                acc = terms.get(key, Fraction(0)) + ca * cb
                if acc == 0:
                    terms.pop(key, None)
                else:
                    terms[key] = acc
        return MultiPoly(self.ctx, terms)

    def scale(self, value) -> "MultiPoly":
        value = rat(value)
        if value == 0:
            return MultiPoly.zero(self.ctx)
        return MultiPoly(self.ctx, {e: c * value for e, c in self.terms.items()})

    def __pow__(self, exponent: int) -> "MultiPoly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = MultiPoly.const(self.ctx, 1)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus and evaluation ---------------------------------------

    def diff(self, var: int) -> "MultiPoly":
        """Formal partial derivative with respect to variable ``var``."""
        if var < 0 or var >= self.ctx.arity:
            raise ContextMismatch(f"variable index {var} out of range")
        terms: dict[Exponent, Fraction] = {}
        for exponent, coeff in self.terms.items():
            k = exponent[var]
            if k == 0:
                continue
            new = list(exponent)
            new[var] = k - 1
            key = tuple(new)
            acc = terms.get(key, Fraction(0)) + coeff * k
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
        return MultiPoly(self.ctx, terms)

    def eval(self, at: PointQ) -> Fraction:
        if len(at) != self.ctx.arity:
            raise ContextMismatch(
                f"point has {len(at)} coordinates, context needs {self.ctx.arity}"
            )
        total = Fraction(0)
        for exponent, coeff in self.terms.items():
            value = coeff
            for base, k in zip(at, exponent):
                if k:
                    value *= rat(base) ** k
            total += value
        return total

    def total_degree(self) -> int:
        """Maximal total degree; the zero polynomial reports -1."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def x_degree(self) -> int:
        """Total degree counting x-exponents only (e treated as a constant).

        This is the degree of every fiber e = const of the polynomial and
        the quantity Bezout bookkeeping needs for flat limits.
        """
        if not self.terms:
            return -1
        if not self.ctx.has_e:
            return self.total_degree()
        return max(sum(e[:-1]) for e in self.terms)

    def degree_in(self, var: int) -> int:
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    # -- structural maps ------------------------------------------------

    def lift(self, ctx: VarContext) -> "MultiPoly":
        """Reinterpret in a larger context containing all current names."""
        if ctx == self.ctx:
            return self
        positions = [ctx.index(name) for name in self.ctx.names]
        terms: dict[Exponent, Fraction] = {}
        for exponent, coeff in self.terms.items():
            new = [0] * ctx.arity
            for pos, k in zip(positions, exponent):
                new[pos] = k
            terms[tuple(new)] = coeff
        return MultiPoly(ctx, terms)

    def set_e_zero(self) -> "MultiPoly":
        """Specialize e = 0 and drop it from the context."""
        if not self.ctx.has_e:
            return self
        ctx = self.ctx.drop_e()
        terms: dict[Exponent, Fraction] = {}
        for exponent, coeff in self.terms.items():
            if exponent[-1] == 0:
                terms[exponent[:-1]] = coeff
        return MultiPoly(ctx, terms)

    def specialize(self, var: int, value) -> "MultiPoly":
        """Substitute a rational for one variable and drop it from the
        context (the e-flag is preserved only if e survives)."""
        value = rat(value)
        names = self.ctx.names[:var] + self.ctx.names[var + 1 :]
        ctx = VarContext(names, self.ctx.has_e and self.ctx.names[var] != E_NAME)
        terms: dict[Exponent, Fraction] = {}
        for exponent, coeff in self.terms.items():
            k = exponent[var]
            scaled = coeff * value**k if k else coeff
            if scaled == 0:
                continue
            key = exponent[:var] + exponent[var + 1 :]
            acc = terms.get(key, Fraction(0)) + scaled
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
        return MultiPoly(ctx, terms)

    def shift(self, offset: PointQ) -> "MultiPoly":
        """Substitute x -> x + offset (exact translation of coordinates)."""
        if len(offset) != self.ctx.arity:
            raise ContextMismatch("offset length does not match context")
        vars_plus = [
            MultiPoly.var(self.ctx, i) + MultiPoly.const(self.ctx, rat(c))
            if rat(c) != 0
            else MultiPoly.var(self.ctx, i)
            for i, c in enumerate(offset)
        ]
        return self.substitute(vars_plus)

    def substitute(self, images: list["MultiPoly"]) -> "MultiPoly":
        """Replace variable i by images[i]; images share one context."""
        if len(images) != self.ctx.arity:
            raise ContextMismatch("need one substitution image per variable")
        target = images[0].ctx if images else self.ctx
        result = MultiPoly.zero(target)
        # cache powers per variable to avoid repeated multiplication
        powers: list[list[MultiPoly]] = [[MultiPoly.const(target, 1)] for _ in images]
        for exponent in sorted(self.terms, key=_grlex_key):
            coeff = self.terms[exponent]
            term = MultiPoly.const(target, coeff)
            for i, k in enumerate(exponent):
                while len(powers[i]) <= k:
                    powers[i].append(powers[i][-1] * images[i])
                if k:
                    term = term * powers[i][k]
            result = result + term
        return result

    # -- printing --------------------------------------------------------

    def __str__(self) -> str:
        return poly_to_string(self)

    def __repr__(self) -> str:
        return f"MultiPoly({poly_to_string(self)!r}, vars={self.ctx.names})"


def poly_to_string(p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    chunks: list[str] = []
    for exponent in sorted(p.terms, key=_grlex_key, reverse=True):
        coeff = p.terms[exponent]
        factors = []
        for name, k in zip(p.ctx.names, exponent):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        mag = abs(coeff)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        sign = "-" if coeff < 0 else "+"
        chunks.append((sign, body))
    first_sign, first_body = chunks[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in chunks[1:]:
        out += f" {sign} {body}"
    return out


# -- parser ---------------------------------------------------------------

_TOKEN_OPS = set("+-*^()")


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOKEN_OPS:
            tokens.append((c, c, i))
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # a rational literal a/b is a single number token
            if j < n and text[j] == "/":
                k = j + 1
                while k < n and text[k].isdigit():
                    k += 1
                if k == j + 1:
                    raise ParseError("expected digits after '/'", j + 1)
                tokens.append(("num", Fraction(int(text[i:j]), int(text[j + 1 : k])), i))
                i = k
            else:
                tokens.append(("num", Fraction(int(text[i:j])), i))
                i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, tokens, ctx: VarContext):
        self.tokens = tokens
        self.pos = 0
        self.ctx = ctx

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str):
        token = self.take()
        if token[0] != kind:
            raise ParseError(f"expected {kind!r}, found {token[0]!r}", token[2])
        return token

    def parse_expr(self) -> MultiPoly:
        value = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.parse_term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def parse_term(self) -> MultiPoly:
        value = self.parse_factor()
        while self.peek()[0] == "*":
            self.take()
            value = value * self.parse_factor()
        return value

    def parse_factor(self) -> MultiPoly:
        if self.peek()[0] == "-":
            self.take()
            return -self.parse_factor()
        return self.parse_power()

    def parse_power(self) -> MultiPoly:
        base = self.parse_atom()
        if self.peek()[0] == "^":
            self.take()
            kind, value, pos = self.take()
            if kind != "num" or value.denominator != 1 or value < 0:
                raise ParseError("exponent must be a non-negative integer", pos)
            return base ** int(value)
        return base

    def parse_atom(self) -> MultiPoly:
        kind, value, pos = self.take()
        if kind == "num":
            return MultiPoly.const(self.ctx, value)
        if kind == "name":
            try:
                return MultiPoly.named(self.ctx, value)
            except ContextMismatch:
                raise ParseError(f"unknown variable {value!r}", pos)
        if kind == "(":
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {kind!r}", pos)


def poly_parse(text: str, ctx: VarContext) -> MultiPoly:
    """Parse ``text`` over ``ctx``.  Grammar: + - * ^, parentheses,
    integer and a/b rational literals, variable names from the context."""
    parser = _Parser(_tokenize(text), ctx)
    value = parser.parse_expr()
    parser.expect("end")
    return value


# -- truncated power series ------------------------------------------------


class TruncatedSeries:
    """A polynomial holding only terms of total degree < ``order``.

    Used for germs of integral manifolds written as graphs over leaf
    parameters: the series remembers nothing at or beyond its truncation
    order, and arithmetic re-truncates so the invariant is preserved.
    """

    __slots__ = ("poly", "order")

    def __init__(self, poly: MultiPoly, order: int):
        if order < 1:
            raise ValueError("truncation order must be >= 1")
        terms = {e: c for e, c in poly.terms.items() if sum(e) < order}
        self.poly = MultiPoly(poly.ctx, terms)
        self.order = order

    @property
    def ctx(self) -> VarContext:
        return self.poly.ctx

    @staticmethod
    def zero(ctx: VarContext, order: int) -> "TruncatedSeries":
        return TruncatedSeries(MultiPoly.zero(ctx), order)

    @staticmethod
    def const(ctx: VarContext, value, order: int) -> "TruncatedSeries":
        return TruncatedSeries(MultiPoly.const(ctx, value), order)

    @staticmethod
    def var(ctx: VarContext, index: int, order: int) -> "TruncatedSeries":
        return TruncatedSeries(MultiPoly.var(ctx, index), order)

    def _check(self, other: "TruncatedSeries"):
        if self.ctx != other.ctx or self.order != other.order:
            raise ContextMismatch("series contexts or truncation orders differ")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.poly + other.poly, self.order)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.poly - other.poly, self.order)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(-self.poly, self.order)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.poly * other.poly, self.order)

    def scale(self, value) -> "TruncatedSeries":
        return TruncatedSeries(self.poly.scale(value), self.order)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruncatedSeries)
            and self.order == other.order
            and self.poly == other.poly
        )

    def __hash__(self):
        return hash((self.poly, self.order))

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def __str__(self) -> str:
        return f"{self.poly} + O(deg {self.order})"

    __repr__ = __str__


@dataclass(frozen=True)
class AtLeastTruncation:
    """Order marker for a series with no visible terms: everything below
    the truncation order vanished, so the true order is >= ``order``."""

    order: int


def series_order(series: TruncatedSeries) -> int | AtLeastTruncation:
    """Minimal total degree carrying a nonzero coefficient."""
    if series.is_zero():
        return AtLeastTruncation(series.order)
    return min(sum(e) for e in series.poly.terms)


def series_compose(
    p: MultiPoly, graph: Mapping[str, TruncatedSeries]
) -> TruncatedSeries:
    """Substitute a series for every variable of ``p`` and truncate.

    All series must share one context and truncation order; every
    variable of ``p``'s context must be mapped.
    """
    if not graph:
        raise ContextMismatch("empty substitution graph")
    some = next(iter(graph.values()))
    ctx, order = some.ctx, some.order
    images: list[TruncatedSeries] = []
    for name in p.ctx.names:
        if name not in graph:
            raise ContextMismatch(f"variable {name!r} has no series image")
        series = graph[name]
        if series.ctx != ctx or series.order != order:
            raise ContextMismatch("series images disagree on context or order")
        images.append(series)
    result = TruncatedSeries.zero(ctx, order)
    powers: list[list[TruncatedSeries]] = [
        [TruncatedSeries.const(ctx, 1, order)] for _ in images
    ]
    for exponent in sorted(p.terms, key=_grlex_key):
        term = TruncatedSeries.const(ctx, p.terms[exponent], order)
        for i, k in enumerate(exponent):
            while len(powers[i]) <= k:
                powers[i].append(powers[i][-1] * images[i])
            if k:
                term = term * powers[i][k]
        result = result + term
    return result
