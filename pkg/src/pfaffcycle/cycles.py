"""Construction and evaluation of multiplicity cycles.

The cycle attached to functions f_1..f_{n-k} and an integrable Pfaffian
system w_1..w_k is built recursively.  A node holding n - k' functions
and k' one-forms first smooths its functions (f -> f - c_i e^N with
fresh generic constants per node), emits the flat limit of the smoothed
system as a dimension-k' component, and then spawns one child per
j = 1..k': the child appends the Rolle-step polynomial g_j to the
functions and trades the last j system forms for j - 1 fresh constant
forms dH.  Component count therefore obeys a(k) = 1 + k * a(k-1).

A component's local multiplicity at p is never computed as a limit
scheme.  It is the deformation count of its system cut by dim-many
generic affine slices through p, i.e. a dual-space computation on
(system, slices, e) at (p, 0), which agrees with the flat-limit cycle
multiplicity by conservation of intersection numbers.  Non-generic
slices can only overestimate, so each component takes the minimum over
``slice_trials`` independent slice draws.

Degree bookkeeping is by fiber degree: each equation contributes its
degree in the x-variables alone (e is the parameter of the family, so
the smoothing term never inflates the Bezout products).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetExceeded, DegeneratePack, NonIntegrable, ShapeMismatch
from .forms import OneForm, g_form, integrability_check
from .groebner import (
    DEFAULT_BUDGET,
    PolySystem,
    ideal_member,
    rational_solutions,
    saturate_by,
)
from .localmult import (
    DEFAULT_CAP,
    MultResult,
    deformation_multiplicity,
    exact_rank,
)
from .poly import MultiPoly, PointQ, VarContext, rat
from .seeds import draw_rational, stream

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeParams:
    """Genericity data consumed by one recursion node."""

    c_def: tuple[Fraction, ...]
    dHs: tuple[OneForm, ...]
    c_rolle: Fraction


class ParamPack:
    """All genericity choices of a build, derived from one seed.

    Node data is materialized lazily and cached so a pack can be
    serialized with exactly the draws a construction used.  ``N`` may be
    left unset; builds then use 2 + (max total degree of the input).
    The ``zero_deform`` flag produces degenerate c_i = 0 packs and
    exists only for tests.
    """

    def __init__(
        self,
        seed: int,
        N: int | None = None,
        slice_trials: int = 3,
        zero_deform: bool = False,
    ):
        if N is not None and N < 1:
            raise DegeneratePack("smoothing exponent N must be >= 1")
        if slice_trials < 1:
            raise DegeneratePack("slice_trials must be >= 1")
        self.seed = seed
        self.N = N
        self.slice_trials = slice_trials
        self.zero_deform = zero_deform
        self.nodes: dict[tuple[int, ...], NodeParams] = {}

    def node(
        self, trace: tuple[int, ...], n_funcs: int, n_forms: int, xctx: VarContext
    ) -> NodeParams:
        cached = self.nodes.get(trace)
        if cached is not None:
            if len(cached.c_def) != n_funcs or len(cached.dHs) != n_forms:
                raise DegeneratePack(
                    "pack reused across builds of different shape; derive a fresh seed"
                )
            return cached
        rng = stream(self.seed, "node", trace)
        if self.zero_deform:
            c_def = tuple(Fraction(0) for _ in range(n_funcs))
        else:
            c_def = tuple(draw_rational(rng) for _ in range(n_funcs))
        dHs = []
        for attempt in range(32):
            candidate = [
                OneForm.constant(xctx, [draw_rational(rng) for _ in range(xctx.arity)])
                for _ in range(n_forms)
            ]
            rows = [[c.constant_term() for c in h.coeffs] for h in candidate]
            if exact_rank(rows) == n_forms:
                dHs = candidate
                break
        else:
            raise DegeneratePack("could not draw independent dH forms")
        c_rolle = draw_rational(rng)
        params = NodeParams(c_def, tuple(dHs), c_rolle)
        self.nodes[trace] = params
        return params

    def slices(
        self, trace: tuple[int, ...], trial: int, xctx: VarContext, p: PointQ, count: int
    ) -> list[MultiPoly]:
        """``count`` independent affine-linear forms through p, in x only."""
        if count == 0:
            return []
        rng = stream(self.seed, "slice", trace, trial)
        n = xctx.arity
        for attempt in range(32):
            rows = [[draw_rational(rng) for _ in range(n)] for _ in range(count)]
            if exact_rank([row[:] for row in rows]) == count:
                out = []
                for row in rows:
                    terms = {}
                    const = Fraction(0)
                    for i, a in enumerate(row):
                        exponent = [0] * n
                        exponent[i] = 1
                        terms[tuple(exponent)] = a
                        const -= a * rat(p[i])
                    if const != 0:
                        terms[(0,) * n] = const
                    out.append(MultiPoly(xctx, terms))
                return out
        raise DegeneratePack("could not draw independent slices")

    def as_json(self) -> dict:
        nodes = {}
        for trace, params in sorted(self.nodes.items()):
            key = "/".join(map(str, trace)) or "root"
            nodes[key] = {
                "c_def": [str(c) for c in params.c_def],
                "dH": [[str(c.constant_term()) for c in h.coeffs] for h in params.dHs],
                "c_rolle": str(params.c_rolle),
            }
        data = {
            "seed": self.seed,
            "N": self.N,
            "slice_trials": self.slice_trials,
            "nodes": nodes,
        }
        if self.zero_deform:
            data["zero_deform"] = True
        return data


@dataclass(frozen=True)
class CycleComponent:
    """One summand: a defining system over (x, e), its dimension, the
    recursion path that produced it, and its (always 1) coefficient."""

    system: PolySystem
    dim: int
    trace: tuple[int, ...]
    coefficient: int = 1

    def bezout_degree(self) -> int:
        product = 1
        for f in self.system.polys:
            product *= max(f.x_degree(), 0)
        return product


@dataclass(frozen=True)
class MultiplicityCycle:
    components: tuple[CycleComponent, ...]
    ctx: VarContext  # the shared (x, e) context
    degree_profile: dict[int, int] = field(compare=False, default_factory=dict)

    def __post_init__(self):
        profile: dict[int, int] = {}
        n = self.ctx.arity - 1
        for comp in self.components:
            codim = n - comp.dim
            profile[codim] = profile.get(codim, 0) + comp.coefficient * comp.bezout_degree()
        object.__setattr__(self, "degree_profile", profile)

    def as_json(self) -> dict:
        return {
            "components": [
                {
                    "system": [str(f) for f in comp.system.polys],
                    "dim": comp.dim,
                    "trace": list(comp.trace),
                    "coefficient": comp.coefficient,
                }
                for comp in self.components
            ],
            "degree_profile": {str(c): d for c, d in sorted(self.degree_profile.items())},
        }


def smoothing_deform(funcs, c_list, N: int):
    """f_i -> f_i - c_i e^N over the e-adjoined context."""
    if len(funcs) != len(c_list):
        raise ShapeMismatch("one deformation constant per function")
    if N < 1:
        raise ShapeMismatch("smoothing exponent must be >= 1")
    if not funcs:
        return []
    ectx = funcs[0].ctx.with_e()
    e_pow = MultiPoly.var(ectx, ectx.e_index) ** N
    out = []
    for f, c in zip(funcs, c_list):
        out.append(f.lift(ectx) - e_pow.scale(rat(c)))
    return out


def _effective_n(pack: ParamPack, funcs) -> int:
    if pack.N is not None:
        return pack.N
    top = max((f.total_degree() for f in funcs), default=0)
    return max(top, 0) + 2


def build_cycle(
    funcs,
    omegas,
    pack: ParamPack,
    exact_mode: bool = False,
    n_override: int | None = None,
) -> MultiplicityCycle:
    """The multiplicity cycle of (f_1..f_{n-k}; w_1..w_k).

    ``funcs`` may live over x or over (x, e) (families are allowed);
    ``omegas`` are one-forms on x-space.  Unless ``exact_mode`` is set,
    the Frobenius chain condition is verified symbolically and failures
    raise :class:`NonIntegrable`.
    """
    omegas = list(omegas)
    funcs = list(funcs)
    if funcs:
        xctx = funcs[0].ctx.drop_e()
    elif omegas:
        xctx = omegas[0].ctx
    else:
        raise ShapeMismatch("nothing to build a cycle from")
    n = xctx.arity
    k = len(omegas)
    if len(funcs) != n - k:
        raise ShapeMismatch(f"need n - k = {n - k} functions, got {len(funcs)}")
    for w in omegas:
        if w.ctx != xctx:
            raise ShapeMismatch("forms must live on the x-variables")
    if omegas and not exact_mode:
        origin = tuple(Fraction(0) for _ in range(n))
        report = integrability_check(omegas, origin)
        if not report["frobenius_chain"]:
            raise NonIntegrable(
                "Frobenius chain condition fails; pass exact_mode for dF systems"
            )
    ectx = xctx.with_e()
    lifted = [f.lift(ectx) for f in funcs]
    N = n_override if n_override is not None else _effective_n(pack, lifted)
    components: list[CycleComponent] = []
    _build_node(lifted, omegas, (), pack, N, xctx, ectx, components)
    return MultiplicityCycle(tuple(components), ectx)


def _build_node(funcs, forms, trace, pack, N, xctx, ectx, out):
    k = len(forms)
    params = pack.node(trace, len(funcs), k, xctx)
    smoothed = smoothing_deform(funcs, params.c_def, N)
    out.append(CycleComponent(PolySystem(ectx, smoothed), k, trace))
    for j in range(1, k + 1):
        g = g_form(
            smoothed,
            forms[: k - j + 1],
            list(params.dHs[: j - 1]),
            params.dHs[j - 1],
            params.c_rolle,
        )
        child_funcs = smoothed + [g]
        child_forms = list(params.dHs[: j - 1]) + forms[: k - j]
        _build_node(child_funcs, child_forms, trace + (j,), pack, N, xctx, ectx, out)


def cycle_degree_profile(cycle: MultiplicityCycle) -> dict[int, int]:
    """Bezout upper bounds per codimension (fiber degrees)."""
    return dict(cycle.degree_profile)


def cycle_mult_at(
    cycle: MultiplicityCycle,
    p: PointQ,
    pack: ParamPack,
    cap: int = DEFAULT_CAP,
    details: list | None = None,
) -> MultResult:
    """Sum over components of the sliced deformation multiplicity at p.

    Each component is evaluated with ``pack.slice_trials`` independent
    slice draws and the minimum finite value is kept; components with no
    finite evaluation make the whole result non-finite (infinite wins
    over cap_exceeded when both occur).
    """
    xctx = cycle.ctx.drop_e()
    p = tuple(rat(c) for c in p)
    total = 0
    worst: str | None = None
    for comp in cycle.components:
        best: MultResult | None = None
        trial_records = []
        trials = pack.slice_trials if comp.dim > 0 else 1
        for trial in range(trials):
            slices = pack.slices(comp.trace, trial, xctx, p, comp.dim)
            family = PolySystem(
                cycle.ctx, list(comp.system.polys) + [s.lift(cycle.ctx) for s in slices]
            )
            result = deformation_multiplicity(family, p, cap)
            trial_records.append(
                {"slices": [str(s) for s in slices], "result": result.as_json()}
            )
            if result.is_finite and (best is None or result.value < best.value):
                best = result
        if details is not None:
            details.append(
                {
                    "trace": list(comp.trace),
                    "dim": comp.dim,
                    "trials": trial_records,
                    "value": best.as_json() if best else trial_records[-1]["result"],
                }
            )
        if best is None:
            kind = trial_records[-1]["result"]["value"]
            worst = "infinite" if (worst == "infinite" or kind == "infinite") else str(kind)
        else:
            total += comp.coefficient * best.value
    if worst is not None:
        return (
            MultResult.infinite(cap)
            if worst == "infinite"
            else MultResult.cap_exceeded(cap)
        )
    return MultResult.finite(total, 0, cap)


def degree_bound(n: int, k: int, j: int, betas, alphas) -> int:
    """Closed-form bound for the codimension n - j part of the cycle:
    (k!/j!) 2^{(k-j)(k-j-1)/2} beta_1..beta_{n-k} S^{k-j} with S the sum
    of all degrees."""
    if not (0 <= j <= k <= n):
        raise ShapeMismatch("need 0 <= j <= k <= n")
    if len(betas) != n - k or len(alphas) != k:
        raise ShapeMismatch("degree lists must have lengths n - k and k")
    s = sum(betas) + sum(alphas)
    value = math.factorial(k) // math.factorial(j)
    value *= 2 ** ((k - j) * (k - j - 1) // 2)
    for b in betas:
        value *= b
    return value * s ** (k - j)


def simple_constant(n: int, k: int, j: int) -> int:
    """C_{n,k,j} = (k!/j!) 2^{(k-j)(k-j-1)/2} n^{k-j}."""
    if not (0 <= j <= k <= n):
        raise ShapeMismatch("need 0 <= j <= k <= n")
    return (
        math.factorial(k)
        // math.factorial(j)
        * 2 ** ((k - j) * (k - j - 1) // 2)
        * n ** (k - j)
    )


def degree_bound_simple(n: int, k: int, j: int, d: int) -> int:
    """C_{n,k,j} d^{n-j} for inputs of degree at most d."""
    return simple_constant(n, k, j) * d ** (n - j)


def general_cycle(
    funcs,
    omegas,
    pack: ParamPack,
    exact_mode: bool = False,
    draws: list | None = None,
) -> MultiplicityCycle:
    """Cycle for a general (not necessarily complete) intersection:
    replace m >= n - k equations by n - k generic linear combinations."""
    funcs = list(funcs)
    omegas = list(omegas)
    if not funcs:
        raise ShapeMismatch("general_cycle needs at least one equation")
    xctx = funcs[0].ctx.drop_e()
    n, k, m = xctx.arity, len(omegas), len(funcs)
    if m < n - k:
        raise ShapeMismatch(f"{m} equations cannot span n - k = {n - k} combinations")
    if m == n - k:
        combos = funcs
        matrix = None
    else:
        rng = stream(pack.seed, "lambda", n, k, m)
        for attempt in range(32):
            matrix = [[draw_rational(rng) for _ in range(m)] for _ in range(n - k)]
            if exact_rank([row[:] for row in matrix]) == n - k:
                break
        else:
            raise DegeneratePack("could not draw a full-rank combination matrix")
        ctx = funcs[0].ctx
        lifted = [f.lift(ctx) for f in funcs]
        combos = []
        for row in matrix:
            acc = MultiPoly.zero(ctx)
            for coeff, f in zip(row, lifted):
                acc = acc + f.scale(coeff)
            combos.append(acc)
    if draws is not None:
        draws.append(
            {
                "lambda": "identity"
                if matrix is None
                else [[str(c) for c in row] for row in matrix]
            }
        )
    return build_cycle(combos, omegas, pack, exact_mode)


def formula_bounds(n: int, k: int, betas, alphas) -> dict[int, int]:
    """Closed-form degree bounds per codimension, j = 0..k."""
    return {n - j: degree_bound(n, k, j, betas, alphas) for j in range(k + 1)}


def _default_oracle_order(n: int, k: int, max_degree: int, cap: int) -> int:
    expected = min(cap, degree_bound_simple(n, k, 0, max(1, max_degree)))
    return 2 * expected + 2


def verify_bound(
    funcs,
    omegas,
    points,
    pack: ParamPack,
    cap: int = DEFAULT_CAP,
    exact_potentials=None,
    order: int | None = None,
) -> dict:
    """Check the central inequality chain at each point.

    Per point: the leaf oracle (cross-checked against the dual-space
    oracle when potentials F_i with w_i = dF_i are supplied), the cycle
    multiplicity, and the verdict oracle <= cycle bound.  The degree
    profile is compared against the closed-form bounds once per build.
    Reports embed the full pack so any run can be reproduced.
    """
    from .forms import d_of
    from .localmult import local_multiplicity
    from .oracles import leaf_intersection_multiplicity

    funcs = list(funcs)
    omegas = list(omegas)
    exact_mode = exact_potentials is not None
    if exact_mode:
        omegas = [d_of(F) for F in exact_potentials]
    xctx = funcs[0].ctx.drop_e() if funcs else omegas[0].ctx
    n, k = xctx.arity, len(omegas)
    betas = [max(f.x_degree(), 0) for f in funcs]
    alphas = [max(max(c.total_degree() for c in w.coeffs), 0) for w in omegas]
    cycle = build_cycle(funcs, omegas, pack, exact_mode=exact_mode)
    profile = cycle_degree_profile(cycle)
    bounds = formula_bounds(n, k, betas, alphas)
    profile_ok = all(
        profile.get(codim, 0) <= bound for codim, bound in bounds.items()
    )
    oracle_order = (
        order
        if order is not None
        else _default_oracle_order(n, k, max(betas + alphas, default=1), cap)
    )
    rows = []
    all_pass = profile_ok
    for raw in points:
        p = tuple(rat(c) for c in raw)
        row: dict = {"point": [str(c) for c in p]}
        integ = integrability_check(omegas, p) if omegas else {
            "nonvanishing": True,
            "frobenius_chain": True,
        }
        row["integrable_at_point"] = integ["nonvanishing"] and (
            exact_mode or integ["frobenius_chain"]
        )
        if not row["integrable_at_point"]:
            row["oracle"] = "skipped"
            row["chain_holds"] = None
            rows.append(row)
            continue
        oracle = leaf_intersection_multiplicity(funcs, omegas, p, oracle_order, cap)
        row["oracle"] = oracle.as_json()
        if exact_mode:
            ectx = xctx.with_e()
            shifted = [
                F.lift(ectx) - MultiPoly.const(ectx, F.eval(p))
                for F in exact_potentials
            ]
            sys = PolySystem(ectx, [f.lift(ectx) for f in funcs] + shifted + [
                MultiPoly.var(ectx, ectx.e_index)
            ])
            dual = local_multiplicity(sys, p + (Fraction(0),), cap)
            row["cross_oracle"] = dual.as_json()
            row["oracles_agree"] = (
                oracle.is_finite == dual.is_finite
                and (not oracle.is_finite or oracle.value == dual.value)
            )
            all_pass = all_pass and row["oracles_agree"]
        details: list = []
        bound = cycle_mult_at(cycle, p, pack, cap, details)
        row["bound"] = bound.as_json()
        row["components"] = details
        if not oracle.is_finite:
            row["chain_holds"] = None  # excluded: oracle not finite
        elif not bound.is_finite:
            row["chain_holds"] = True  # non-finite bound dominates trivially
        else:
            row["chain_holds"] = oracle.value <= bound.value
            all_pass = all_pass and row["chain_holds"]
        rows.append(row)
    return {
        "n": n,
        "k": k,
        "betas": betas,
        "alphas": alphas,
        "pack": pack.as_json(),
        "cycle": cycle.as_json(),
        "degree_profile": {str(c): v for c, v in sorted(profile.items())},
        "formula_bounds": {str(c): v for c, v in sorted(bounds.items())},
        "profile_within_formula": profile_ok,
        "points": rows,
        "all_pass": all_pass,
    }


def _component_contains_divisor(
    comp: CycleComponent, H: MultiPoly, seed, budget: int
) -> bool:
    """Does H vanish identically on the flat limit of the component?

    Samples exact rational points of the limit fiber first (20 points,
    all on {H = 0}, certify containment; any point off it refutes).  If
    rational points are scarce, falls back to ideal membership of H in
    the saturated system plus the fiber equation.
    """
    ectx = comp.system.ctx
    try:
        saturated = saturate_by(
            comp.system, MultiPoly.var(ectx, ectx.e_index), budget
        )
    except BudgetExceeded:
        saturated = comp.system
    fiber = [g.set_e_zero() for g in saturated.polys]
    fiber = [g for g in fiber if not g.is_zero()]
    xctx = ectx.drop_e()
    if any(g.is_constant() for g in fiber):
        return False  # empty limit: nothing for H to contain
    points: set = set()
    rng = stream(seed, "star", comp.trace)
    for attempt in range(12):
        gens = list(fiber)
        for _ in range(comp.dim):
            coeffs = [draw_rational(rng) for _ in range(xctx.arity)]
            shiftc = draw_rational(rng)
            terms = {}
            for i, a in enumerate(coeffs):
                exponent = [0] * xctx.arity
                exponent[i] = 1
                terms[tuple(exponent)] = a
            terms[(0,) * xctx.arity] = shiftc
            gens.append(MultiPoly(xctx, terms))
        try:
            found = rational_solutions(PolySystem(xctx, gens), budget, limit=20)
        except BudgetExceeded:
            found = None
        if found:
            for q in found:
                if H.eval(q) != 0:
                    return False
                points.add(q)
        if len(points) >= 20:
            return True
        if comp.dim == 0:
            break  # no slices to vary; resampling cannot find more points
    # membership of H in (saturated ideal) + (e) certifies vanishing on the fiber
    e_poly = MultiPoly.var(ectx, ectx.e_index)
    fiber_ideal = PolySystem(ectx, list(saturated.polys) + [e_poly])
    try:
        return ideal_member(H.lift(ectx), fiber_ideal, budget)
    except BudgetExceeded:
        return False


def star_intersect(
    cycle: MultiplicityCycle,
    H: MultiPoly,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> MultiplicityCycle:
    """The cycle Gamma * H: components on which H vanishes identically
    are kept unchanged; every other component gains H as an equation and
    loses a dimension.  A 0-dimensional component off H has empty proper
    intersection and is dropped with a warning."""
    if H.is_zero():
        raise ShapeMismatch("star intersection needs a nonzero divisor")
    ectx = cycle.ctx
    H_lift = H.lift(ectx)
    out = []
    for comp in cycle.components:
        if _component_contains_divisor(comp, H, seed, budget):
            out.append(comp)
            continue
        if comp.dim == 0:
            log.warning(
                "star_intersect: dropping 0-dimensional component %s off the divisor",
                comp.trace,
            )
            continue
        out.append(
            CycleComponent(
                PolySystem(ectx, list(comp.system.polys) + [H_lift]),
                comp.dim - 1,
                comp.trace,
                comp.coefficient,
            )
        )
    return MultiplicityCycle(tuple(out), ectx)
