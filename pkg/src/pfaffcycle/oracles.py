"""Independent brute-force oracles for the quantities cycles bound.

Nothing here touches the cycle construction: leaf germs are grown
degree by degree from the Pfaffian equations themselves, Lie orders
come from iterated derivations, and Milnor numbers from the dual space
of the gradient ideal.  The test suites compare these against the
cycle evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ContextMismatch,
    NonIntegrable,
    ShapeMismatch,
    SingularVectorField,
    TruncationUnstable,
)
from .forms import OneForm, integrability_check
from .groebner import PolySystem
from .localmult import (
    DEFAULT_CAP,
    MultResult,
    deformation_multiplicity,
    local_multiplicity,
)
from .localmult import exact_rank
from .poly import (
    AtLeastTruncation,
    MultiPoly,
    PointQ,
    TruncatedSeries,
    VarContext,
    rat,
    series_compose,
    series_order,
)


@dataclass(frozen=True)
class VectorField:
    """Polynomial vector field xi = sum xi_i d/dx_i on x-space."""

    ctx: VarContext
    components: tuple[MultiPoly, ...]

    def __post_init__(self):
        if self.ctx.has_e:
            raise ContextMismatch("vector fields live on the x-variables")
        if len(self.components) != self.ctx.arity:
            raise ShapeMismatch("one component per variable")

    @staticmethod
    def parse(ctx: VarContext, texts) -> "VectorField":
        from .poly import poly_parse

        return VectorField(ctx, tuple(poly_parse(t, ctx) for t in texts))

    @property
    def degree(self) -> int:
        return max(c.total_degree() for c in self.components)

    def apply(self, f: MultiPoly) -> MultiPoly:
        """Lie derivative xi(f)."""
        out = MultiPoly.zero(f.ctx)
        for i, comp in enumerate(self.components):
            out = out + comp.lift(f.ctx) * f.diff(f.ctx.index(self.ctx.names[i]))
        return out

    def eval(self, p: PointQ):
        return tuple(c.eval(p) for c in self.components)

    def is_singular_at(self, p: PointQ) -> bool:
        return all(v == 0 for v in self.eval(p))


def _det(matrix: list[list[MultiPoly]], ctx: VarContext) -> MultiPoly:
    if not matrix:
        return MultiPoly.const(ctx, 1)
    if len(matrix) == 1:
        return matrix[0][0]
    out = MultiPoly.zero(ctx)
    for col in range(len(matrix)):
        entry = matrix[0][col]
        if entry.is_zero():
            continue
        minor = [row[:col] + row[col + 1 :] for row in matrix[1:]]
        term = entry * _det(minor, ctx)
        out = out + (term if col % 2 == 0 else -term)
    return out


def kernel_vector_field(omegas) -> VectorField:
    """The generalized cross product spanning the common kernel of n - 1
    one-forms: xi_i = (-1)^(i+1) * (minor with column i removed)."""
    omegas = list(omegas)
    if not omegas:
        raise ShapeMismatch("need n - 1 one-forms")
    ctx = omegas[0].ctx
    n = ctx.arity
    if len(omegas) != n - 1:
        raise ShapeMismatch(f"need {n - 1} forms in {n} variables")
    rows = [list(w.coeffs) for w in omegas]
    components = []
    for i in range(n):
        minor = [row[:i] + row[i + 1 :] for row in rows]
        value = _det(minor, ctx)
        components.append(value if i % 2 == 0 else -value)
    field = VectorField(ctx, tuple(components))
    return field


def lie_multiplicity(
    xi: VectorField, P: MultiPoly, p: PointQ, cap: int = DEFAULT_CAP
) -> MultResult:
    """Vanishing order of P along the trajectory of xi through p:
    the least m with (xi^m P)(p) != 0.

    Identically vanishing derivations certify an infinite order; a chain
    of zeros that merely outlasts the cap reports cap_exceeded.  A
    singular point of xi raises :class:`SingularVectorField` (the
    convention at such points is order infinity; harnesses record it).
    """
    p = tuple(rat(c) for c in p)
    if xi.is_singular_at(p):
        raise SingularVectorField(f"vector field vanishes at {p}")
    current = P.lift(xi.ctx) if P.ctx != xi.ctx else P
    for m in range(cap + 1):
        if current.is_zero():
            return MultResult.infinite(cap)
        if current.eval(p) != 0:
            return MultResult.finite(m, m, cap)
        current = xi.apply(current)
    return MultResult.cap_exceeded(cap)


@dataclass(frozen=True)
class LeafChart:
    """The terminal germ of an integrable chain written as a graph.

    ``dependent`` maps k of the coordinates to series in the n - k leaf
    parameters u1..u_{n-k}; the remaining coordinates are p_i + u_j.
    Constant terms reproduce the base point, and the pullback of every
    system form vanishes through degree order - 2.
    """

    base: PointQ
    xctx: VarContext
    uctx: VarContext
    independent: tuple[int, ...]
    dependent: dict[str, TruncatedSeries]
    order: int

    def graph(self) -> dict[str, TruncatedSeries]:
        """Series image of every x-coordinate in the leaf parameters."""
        out = dict(self.dependent)
        for slot, idx in enumerate(self.independent):
            series = TruncatedSeries.var(self.uctx, slot, self.order) + \
                TruncatedSeries.const(self.uctx, self.base[idx], self.order)
            out[self.xctx.names[idx]] = series
        return out


def _solve_square(a_rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(a_rows)
    m = [row[:] + [r] for row, r in zip(a_rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise NonIntegrable("singular coefficient matrix in leaf solve")
        m[col], m[pivot] = m[pivot], m[col]
        pv = m[col][col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col] / pv
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _homogeneous_part(poly: MultiPoly, degree: int) -> MultiPoly:
    return MultiPoly(
        poly.ctx, {e: c for e, c in poly.terms.items() if sum(e) == degree}
    )


def leaf_series(omegas, p: PointQ, order: int) -> LeafChart:
    """Grow the terminal integral germ of the chain through p as a graph,
    solving the pulled-back Pfaffian equations degree by degree."""
    omegas = list(omegas)
    if order < 2:
        raise ShapeMismatch("leaf order must be at least 2")
    if not omegas:
        raise ShapeMismatch("leaf of an empty system is the ambient space")
    xctx = omegas[0].ctx
    n, k = xctx.arity, len(omegas)
    p = tuple(rat(c) for c in p)
    report = integrability_check(omegas, p)
    if not report["frobenius_chain"]:
        raise NonIntegrable("Frobenius chain condition fails identically")
    if not report["nonvanishing"]:
        raise NonIntegrable("form wedge vanishes at the base point")
    coeff_at_p = [[c.eval(p) for c in w.coeffs] for w in omegas]
    # dependent variables: the last k columns that carry full rank
    dependent: list[int] = []
    for col in range(n - 1, -1, -1):
        candidate = dependent + [col]
        rows = [[coeff_at_p[i][c] for c in candidate] for i in range(k)]
        if exact_rank(rows) == len(candidate):
            dependent = candidate
        if len(dependent) == k:
            break
    if len(dependent) != k:
        raise NonIntegrable("could not choose independent leaf coordinates")
    dependent = sorted(dependent)
    independent = [i for i in range(n) if i not in dependent]
    uctx = VarContext.make([f"u{i + 1}" for i in range(n - k)])
    a_matrix = [[coeff_at_p[i][j] for j in dependent] for i in range(k)]

    s: dict[int, MultiPoly] = {j: MultiPoly.zero(uctx) for j in dependent}

    def x_map() -> dict[str, TruncatedSeries]:
        graph = {}
        for slot, idx in enumerate(independent):
            graph[xctx.names[idx]] = TruncatedSeries(
                MultiPoly.var(uctx, slot) + MultiPoly.const(uctx, p[idx]), order
            )
        for idx in dependent:
            graph[xctx.names[idx]] = TruncatedSeries(
                s[idx] + MultiPoly.const(uctx, p[idx]), order
            )
        return graph

    def residuals(graph) -> list[list[TruncatedSeries]]:
        # coefficient of du_l in the pullback of omega_i
        pulled = [
            [series_compose(c, graph) for c in w.coeffs] for w in omegas
        ]
        ds = {
            j: [TruncatedSeries(s[j].diff(l), order) for l in range(n - k)]
            for j in dependent
        }
        out = []
        for i in range(k):
            row = []
            for l in range(n - k):
                acc = pulled[i][independent[l]]
                for j in dependent:
                    acc = acc + pulled[i][j] * ds[j][l]
                row.append(acc)
            out.append(row)
        return out

    for degree in range(1, order - 1 + 1):
        res = residuals(x_map())
        needs = False
        columns = []
        for l in range(n - k):
            rhs = [
                -_homogeneous_part(res[i][l].poly, degree - 1) for i in range(k)
            ]
            columns.append(rhs)
            needs = needs or any(not r.is_zero() for r in rhs)
        if not needs:
            continue
        # gradient of the degree-`degree` correction, one solve per parameter
        grads: list[list[MultiPoly]] = []
        for l in range(n - k):
            constants = columns[l]
            # solve A w = rhs monomial by monomial to stay exact
            monos = sorted({e for r in constants for e in r.terms})
            w_cols = [MultiPoly.zero(uctx) for _ in range(k)]
            for mono in monos:
                rhs_vec = [r.terms.get(mono, Fraction(0)) for r in constants]
                sol = _solve_square(a_matrix, rhs_vec)
                for idx in range(k):
                    if sol[idx] != 0:
                        w_cols[idx] = w_cols[idx] + MultiPoly(uctx, {mono: sol[idx]})
            grads.append(w_cols)
        for slot, j in enumerate(dependent):
            sigma = MultiPoly.zero(uctx)
            for l in range(n - k):
                sigma = sigma + MultiPoly.var(uctx, l) * grads[l][slot]
            s[j] = s[j] + sigma.scale(Fraction(1, degree))

    chart = LeafChart(
        base=p,
        xctx=xctx,
        uctx=uctx,
        independent=tuple(independent),
        dependent={
            xctx.names[j]: TruncatedSeries(s[j] + MultiPoly.const(uctx, p[j]), order)
            for j in dependent
        },
        order=order,
    )
    # certify: every pullback coefficient vanishes through degree order - 2
    final = residuals(chart.graph())
    for row in final:
        for series in row:
            o = series_order(series)
            if not isinstance(o, AtLeastTruncation) and o < order - 1:
                raise NonIntegrable(
                    "pullback residual survives: system is not integrable at p"
                )
    return chart


def leaf_intersection_multiplicity(
    funcs,
    omegas,
    p: PointQ,
    order: int,
    cap: int = DEFAULT_CAP,
) -> MultResult:
    """Deformation count of {f = 0} on the leaf through p.

    Pulls the functions back through the leaf chart and counts in the
    leaf parameters; the computation is repeated at truncation order + 2
    and must agree, otherwise :class:`TruncationUnstable` is raised.
    """
    funcs = list(funcs)
    omegas = list(omegas)
    xctx = omegas[0].ctx if omegas else funcs[0].ctx.drop_e()
    n, k = xctx.arity, len(omegas)
    if len(funcs) != n - k:
        raise ShapeMismatch(f"need n - k = {n - k} functions, got {len(funcs)}")
    p = tuple(rat(c) for c in p)
    ectx = xctx.with_e()
    lifted = [f.lift(ectx) for f in funcs]
    if any(f.eval(p + (Fraction(0),)) != 0 for f in lifted):
        return MultResult.finite(0, 0, cap)

    def run(at_order: int) -> MultResult:
        uectx = VarContext.make([f"u{i + 1}" for i in range(n - k)], with_e=True)
        if k:
            chart = leaf_series(omegas, p, at_order)
            graph = {
                name: TruncatedSeries(series.poly.lift(uectx), at_order)
                for name, series in chart.graph().items()
            }
        else:
            graph = {
                name: TruncatedSeries(
                    MultiPoly.var(uectx, i) + MultiPoly.const(uectx, p[i]), at_order
                )
                for i, name in enumerate(xctx.names)
            }
        graph["e"] = TruncatedSeries.var(uectx, uectx.e_index, at_order)
        pulled = [series_compose(f, graph).poly for f in lifted]
        return deformation_multiplicity(
            PolySystem(uectx, pulled), tuple(Fraction(0) for _ in range(n - k)), cap
        )

    first = run(order)
    second = run(order + 2)
    if first != second:
        raise TruncationUnstable(
            f"orders {order} and {order + 2} disagree: {first} vs {second}"
        )
    return first


def milnor_number(P: MultiPoly, p: PointQ, cap: int = DEFAULT_CAP) -> MultResult:
    """Dual-space multiplicity of the gradient ideal at p (0 when p is
    not a critical point)."""
    ctx = P.ctx
    if ctx.has_e:
        raise ContextMismatch("Milnor numbers are computed on x-space polynomials")
    grads = [P.diff(i) for i in range(ctx.arity)]
    p = tuple(rat(c) for c in p)
    if any(g.eval(p) != 0 for g in grads):
        return MultResult.finite(0, 0, cap)
    return local_multiplicity(PolySystem(ctx, grads), p, cap)
