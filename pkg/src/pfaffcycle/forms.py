"""Exterior algebra with polynomial coefficients.

One-forms are coefficient tuples over a :class:`VarContext`; higher-rank
forms map strictly increasing index tuples to polynomial coefficients.
Only the pieces the cycle construction needs are implemented: the
differential of a function, wedge products, the coefficient of the
volume form, the Rolle-step polynomial g, and the Frobenius chain test
certifying integrability of a Pfaffian system.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ContextMismatch, RankMismatch, ShapeMismatch
from .poly import MultiPoly, PointQ, VarContext, rat


class OneForm:
    """sum_i coeffs[i] * d(names[i]), with one coefficient per variable."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: VarContext, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != ctx.arity:
            raise ContextMismatch(
                f"one-form needs {ctx.arity} coefficients, got {len(coeffs)}"
            )
        for c in coeffs:
            if c.ctx != ctx:
                raise ContextMismatch("coefficient context differs from form context")
        self.ctx = ctx
        self.coeffs = coeffs

    @staticmethod
    def from_strings(ctx: VarContext, texts) -> "OneForm":
        from .poly import poly_parse

        return OneForm(ctx, [poly_parse(t, ctx) for t in texts])

    @staticmethod
    def constant(ctx: VarContext, values) -> "OneForm":
        return OneForm(ctx, [MultiPoly.const(ctx, rat(v)) for v in values])

    @staticmethod
    def basis(ctx: VarContext, index: int) -> "OneForm":
        coeffs = [MultiPoly.zero(ctx) for _ in range(ctx.arity)]
        coeffs[index] = MultiPoly.const(ctx, 1)
        return OneForm(ctx, coeffs)

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def eval(self, at: PointQ) -> tuple[Fraction, ...]:
        return tuple(c.eval(at) for c in self.coeffs)

    def lift(self, ctx: VarContext) -> "OneForm":
        """Embed into a larger context; new variables get coefficient 0."""
        if ctx == self.ctx:
            return self
        coeffs = [MultiPoly.zero(ctx) for _ in range(ctx.arity)]
        for name, c in zip(self.ctx.names, self.coeffs):
            coeffs[ctx.index(name)] = c.lift(ctx)
        return OneForm(ctx, coeffs)

    def __add__(self, other: "OneForm") -> "OneForm":
        if self.ctx != other.ctx:
            raise ContextMismatch("one-form contexts differ")
        return OneForm(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def scale(self, value) -> "OneForm":
        return OneForm(self.ctx, [c.scale(value) for c in self.coeffs])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OneForm)
            and self.ctx == other.ctx
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.ctx, self.coeffs))

    def __repr__(self):
        parts = [f"({c})*d{n}" for n, c in zip(self.ctx.names, self.coeffs)]
        return " + ".join(parts)


class ExteriorForm:
    """Rank-r form: strictly increasing r-tuples of variable indices to
    polynomial coefficients.  Rank above the arity is legal and simply
    has no terms (the zero form of that rank)."""

    __slots__ = ("ctx", "rank", "terms")

    def __init__(self, ctx: VarContext, rank: int, terms):
        clean: dict[tuple[int, ...], MultiPoly] = {}
        for subset, coeff in terms.items():
            subset = tuple(subset)
            if len(subset) != rank or list(subset) != sorted(set(subset)):
                raise ShapeMismatch(f"index tuple {subset} is not an increasing {rank}-subset")
            if subset and subset[-1] >= ctx.arity:
                raise ShapeMismatch(f"index {subset[-1]} out of range for arity {ctx.arity}")
            if coeff.ctx != ctx:
                raise ContextMismatch("coefficient context differs from form context")
            if not coeff.is_zero():
                clean[subset] = coeff
        self.ctx = ctx
        self.rank = rank
        self.terms = clean

    @staticmethod
    def zero(ctx: VarContext, rank: int) -> "ExteriorForm":
        return ExteriorForm(ctx, rank, {})

    @staticmethod
    def from_one_form(w: OneForm) -> "ExteriorForm":
        return ExteriorForm(
            w.ctx, 1, {(i,): c for i, c in enumerate(w.coeffs) if not c.is_zero()}
        )

    @staticmethod
    def scalar(ctx: VarContext, value) -> "ExteriorForm":
        return ExteriorForm(ctx, 0, {(): MultiPoly.const(ctx, value)})

    @property
    def is_overflow(self) -> bool:
        return self.rank > self.ctx.arity

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "ExteriorForm") -> "ExteriorForm":
        if self.ctx != other.ctx or self.rank != other.rank:
            raise ShapeMismatch("cannot add forms of different rank or context")
        terms = dict(self.terms)
        for subset, coeff in other.terms.items():
            acc = terms.get(subset)
            total = coeff if acc is None else acc + coeff
            if total.is_zero():
                terms.pop(subset, None)
            else:
                terms[subset] = total
        return ExteriorForm(self.ctx, self.rank, terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExteriorForm)
            and self.ctx == other.ctx
            and self.rank == other.rank
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ctx, self.rank, frozenset(self.terms)))

    def eval(self, at: PointQ) -> dict[tuple[int, ...], Fraction]:
        return {s: c.eval(at) for s, c in self.terms.items()}

    def __repr__(self):
        if not self.terms:
            return f"0 (rank {self.rank})"
        names = self.ctx.names
        parts = []
        for subset in sorted(self.terms):
            basis = "^".join(f"d{names[i]}" for i in subset)
            parts.append(f"({self.terms[subset]}) {basis}")
        return " + ".join(parts)


def _merge_signed(a: tuple[int, ...], b: tuple[int, ...]):
    """Merge two disjoint increasing tuples; returns (merged, sign)."""
    merged = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            merged.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining entries of a
            if (len(a) - i) % 2 == 1:
                sign = -sign
            merged.append(b[j])
            j += 1
    merged.extend(a[i:])
    merged.extend(b[j:])
    return tuple(merged), sign


def _as_exterior(form) -> ExteriorForm:
    if isinstance(form, OneForm):
        return ExteriorForm.from_one_form(form)
    if isinstance(form, ExteriorForm):
        return form
    raise ShapeMismatch(f"not a differential form: {form!r}")


def wedge(forms) -> ExteriorForm:
    """Wedge product of one-forms and exterior forms, left to right.

    A product whose total rank exceeds the arity is the zero form of
    that rank (flagged via ``is_overflow``), not an error; the Frobenius
    chain test relies on this in low dimension.
    """
    forms = [_as_exterior(f) for f in forms]
    if not forms:
        raise ShapeMismatch("wedge of an empty list is undefined")
    ctx = forms[0].ctx
    for f in forms[1:]:
        if f.ctx != ctx:
            raise ContextMismatch("wedge factors live in different contexts")
    total_rank = sum(f.rank for f in forms)
    if total_rank > ctx.arity:
        return ExteriorForm.zero(ctx, total_rank)
    result = forms[0]
    for f in forms[1:]:
        terms: dict[tuple[int, ...], MultiPoly] = {}
        for sa, ca in result.terms.items():
            for sb, cb in f.terms.items():
                if set(sa) & set(sb):
                    continue
                merged, sign = _merge_signed(sa, sb)
                coeff = ca * cb
                if sign < 0:
                    coeff = -coeff
                acc = terms.get(merged)
                total = coeff if acc is None else acc + coeff
                if total.is_zero():
                    terms.pop(merged, None)
                else:
                    terms[merged] = total
        result = ExteriorForm(ctx, result.rank + f.rank, terms)
    return result


def d_of(f: MultiPoly) -> OneForm:
    """Differential of f: coefficients are the partials, including d/de
    when the deformation variable is present."""
    return OneForm(f.ctx, [f.diff(i) for i in range(f.ctx.arity)])


def d_of_form(w: OneForm) -> ExteriorForm:
    """Exterior derivative of a one-form (a rank-2 form)."""
    ctx = w.ctx
    terms: dict[tuple[int, ...], MultiPoly] = {}
    for j, coeff in enumerate(w.coeffs):
        for i in range(ctx.arity):
            if i == j:
                continue
            part = coeff.diff(i)
            if part.is_zero():
                continue
            subset = (i, j) if i < j else (j, i)
            signed = part if i < j else -part
            acc = terms.get(subset)
            total = signed if acc is None else acc + signed
            if total.is_zero():
                terms.pop(subset, None)
            else:
                terms[subset] = total
    return ExteriorForm(ctx, 2, terms)


def form_degree(w: OneForm) -> int:
    """Maximal total degree over the coefficients (zero form: -1)."""
    return max(c.total_degree() for c in w.coeffs)


def top_coefficient(w: ExteriorForm) -> MultiPoly:
    """Coefficient of the volume basis element; rank must equal arity."""
    if w.rank != w.ctx.arity:
        raise RankMismatch(
            f"rank {w.rank} form has no volume coefficient in arity {w.ctx.arity}"
        )
    return w.terms.get(tuple(range(w.ctx.arity)), MultiPoly.zero(w.ctx))


def g_form(ftilde, omegas, dHs, dHj: OneForm, c: Fraction) -> MultiPoly:
    """Rolle-step polynomial: the volume coefficient of

        /\\ d(ftilde)  /\\ omegas  /\\ dHs  ^  (de + c*e*dHj)

    over the (x, e) context shared by ``ftilde``.  ``omegas`` are the
    still-active system forms, ``dHs`` the constant forms already spent
    by earlier steps, and ``dHj`` the fresh generic constant form.
    """
    if not ftilde and not omegas and not dHs:
        raise ShapeMismatch("g-form needs at least one wedge factor besides de")
    ectx = (ftilde[0].ctx if ftilde else omegas[0].ctx.with_e()).with_e()
    if not ectx.has_e:
        raise ContextMismatch("g-form lives over an (x, e) context")
    n = ectx.arity - 1
    count = len(ftilde) + len(omegas) + len(dHs) + 1
    if count != n + 1:
        raise ShapeMismatch(
            f"{count} wedge factors for arity {n + 1}; need exactly n + 1"
        )
    for dh in list(dHs) + [dHj]:
        if not dh.is_constant():
            raise ShapeMismatch("dH factors must be constant one-forms")
    if dHj.ctx.has_e:
        raise ShapeMismatch("dHj must be a form on the x-variables only")
    factors = [d_of(f.lift(ectx)) for f in ftilde]
    factors += [w.lift(ectx) for w in omegas]
    factors += [dh.lift(ectx) for dh in dHs]
    # de + c*e*dHj
    e_poly = MultiPoly.var(ectx, ectx.e_index)
    corr_coeffs = [
        coeff.lift(ectx) * e_poly.scale(c) for coeff in dHj.coeffs
    ]
    coeffs = corr_coeffs + [MultiPoly.const(ectx, 1)]
    factors.append(OneForm(ectx, coeffs))
    return top_coefficient(wedge(factors))


def integrability_check(omegas, p: PointQ) -> dict:
    """Certify a Pfaffian chain at p.

    nonvanishing: the wedge of all forms is nonzero at p.
    frobenius_chain: d(omega_i) ^ omega_1 ^ ... ^ omega_i vanishes
    identically for every i -- a sufficient symbolic condition for the
    chain of integral manifolds to exist.
    """
    omegas = list(omegas)
    if not omegas:
        return {"nonvanishing": True, "frobenius_chain": True}
    ctx = omegas[0].ctx
    if ctx.has_e:
        raise ContextMismatch("integrability is checked on x-space forms")
    top = wedge(omegas)
    nonvanishing = any(v != 0 for v in top.eval(p).values())
    chain = True
    for i in range(len(omegas)):
        test = wedge([d_of_form(omegas[i])] + omegas[: i + 1])
        if not test.is_zero():
            chain = False
            break
    return {"nonvanishing": nonvanishing, "frobenius_chain": chain}
