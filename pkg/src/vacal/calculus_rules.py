"""Executable subdifferential and coderivative calculus rules.

Every rule computes two sets independently: the left-hand side by direct
materialization of the composite object (marginal functions, sums,
compositions, preimages are built exactly and then differentiated), and the
right-hand side from the rule's formula.  The result is a :class:`RuleReport`
recording the qualification condition, the relation the rule claims, the
relation actually observed and a verdict.

Convex rules claim equality when their qualification condition holds; if it
fails they still claim that the formula's set is contained in the true
subdifferential.  Nonconvex (Clarke) rules claim ``lhs ⊆ rhs`` when their
hypotheses hold and make no claim otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .mappings import (
    HOLDS,
    PolyMapping,
    build_composition_graph,
    build_restriction,
    build_sum_graph,
    clarke_coderivative,
    composition_hint,
    image,
    inner_semicontinuity_hint,
    kernel,
    preimage_set,
    single_valued,
)
from .normal_cones import (
    clarke_normal_union,
    clarke_singular_subdifferential,
    clarke_subdifferential,
    clarke_tangent_cone,
    is_lower_regular,
    limiting_normal_union,
)
from .pl_functions import (
    INF,
    ConvexPL,
    ModelingError,
    cell_sum_all,
    compose_scalar,
    compose_vector,
    convex_from_epigraph,
    build_inf_convolution_value,
    epigraph,
    eval_pl,
    inf_convolution_epigraph,
    piece,
    pullback,
    singular_subdifferential_convex,
    subdifferential_convex,
    to_cells,
)
from .polyhedra import (
    PolyUnion,
    Polyhedron,
    UnboundedError,
    affine_preimage,
    as_union,
    intersect,
    linear_image,
    linear_preimage,
    minimize,
    minkowski_sum,
    normal_cone_convex,
    project,
    relint_point,
    section,
    union_subset,
)
from .rational import as_matrix, is_zero, transpose, vec, zeros

CONFIRMED = "confirmed"
SKIPPED = "qc-violated-skip"
REFUTED = "REFUTED"
WITHHELD = "withheld"

EQUALITY = "equality"
INCLUSION = "inclusion"  # lhs ⊆ rhs
REVERSE = "reverse-inclusion"  # rhs ⊆ lhs
NO_CLAIM = "none"

SATISFIED, VIOLATED, NOT_APPLICABLE = "satisfied", "violated", "not-applicable"


class PreconditionError(ValueError):
    """The instance does not meet the rule's standing assumptions."""


@dataclass(frozen=True, eq=False)
class RuleReport:
    rule_id: str
    lhs: PolyUnion
    rhs: PolyUnion
    qc_status: str
    qc_witness: Optional[tuple]
    relation_claimed: str
    observed: str
    verdict: str
    witness: Optional[tuple]
    assumptions: tuple = ()
    auxiliary: dict = field(default_factory=dict)

    @property
    def refuted(self) -> bool:
        return self.verdict == REFUTED


def compare(lhs, rhs) -> tuple[str, Optional[tuple], Optional[tuple]]:
    """Observed relation plus witnesses in ``lhs∖rhs`` and ``rhs∖lhs``."""
    sub, w1 = union_subset(lhs, rhs)
    sup, w2 = union_subset(rhs, lhs)
    if sub and sup:
        obs = "equal"
    elif sub:
        obs = "strict-subset"
    elif sup:
        obs = "strict-superset"
    else:
        obs = "incomparable"
    return obs, w1, w2


def _holds(claim: str, obs: str) -> bool:
    if claim == EQUALITY:
        return obs == "equal"
    if claim == INCLUSION:
        return obs in ("equal", "strict-subset")
    if claim == REVERSE:
        return obs in ("equal", "strict-superset")
    return True


def make_report(
    rule_id: str,
    lhs,
    rhs,
    *,
    qc: tuple[str, Optional[tuple]],
    claim: str,
    skip_claim: str = NO_CLAIM,
    withheld: bool = False,
    assumptions: Sequence[str] = (),
    auxiliary: Optional[dict] = None,
) -> RuleReport:
    """Compare both sides and settle the verdict.

    ``claim`` applies when the qualification condition is satisfied (or not
    applicable); ``skip_claim`` is what is still asserted when it is violated.
    """
    lhs, rhs = as_union(lhs), as_union(rhs)
    obs, w1, w2 = compare(lhs, rhs)
    status, qw = qc
    active = skip_claim if status == VIOLATED else claim
    if withheld:
        verdict, active = WITHHELD, NO_CLAIM
    elif _holds(active, obs):
        verdict = SKIPPED if status == VIOLATED else CONFIRMED
    else:
        verdict = REFUTED
    witness = None
    if verdict == REFUTED:
        witness = w2 if active == REVERSE or (active == EQUALITY and w1 is None) else w1
    elif obs != "equal":
        witness = w1 if w1 is not None else w2
    return RuleReport(
        rule_id=rule_id,
        lhs=lhs,
        rhs=rhs,
        qc_status=status,
        qc_witness=qw,
        relation_claimed=active,
        observed=obs,
        verdict=verdict,
        witness=witness,
        assumptions=tuple(assumptions),
        auxiliary=dict(auxiliary or {}),
    )


# ---------------------------------------------------------------------------
# small exact helpers


def _neg(p: Polyhedron) -> Polyhedron:
    return linear_image(p, [[-1 if i == j else 0 for j in range(p.dim)] for i in range(p.dim)])


def _nonzero_generator(c: Polyhedron) -> Optional[tuple]:
    for g in c.vertices + c.rays + c.lineality:
        if not is_zero(g):
            return g
    return None


def trivial_meet(a: Polyhedron, b: Polyhedron) -> tuple[str, Optional[tuple]]:
    """Status of ``a ∩ b = {0}`` for two cones, with a nonzero witness when it fails."""
    c = intersect(a, b)
    w = _nonzero_generator(c)
    return (SATISFIED, None) if w is None else (VIOLATED, w)


def _sel(cols: Sequence[int], total: int) -> list[list[int]]:
    return [[1 if j == c else 0 for j in range(total)] for c in cols]


def _pull(p: Polyhedron, rows: Sequence[Sequence], const=None) -> Polyhedron:
    return affine_preimage(p, rows, const)


def _minkowski(ps: Sequence[Polyhedron]) -> Polyhedron:
    out = ps[0]
    for p in ps[1:]:
        out = minkowski_sum(out, p)
    return out


def _product_of(ps: Sequence[Polyhedron]) -> Polyhedron:
    tot = sum(p.dim for p in ps)
    out = Polyhedron.full(tot)
    off = 0
    for p in ps:
        out = intersect(out, _pull(p, _sel(range(off, off + p.dim), tot)))
        off += p.dim
    return out


def _full_domain(f: ConvexPL) -> bool:
    return f.domain == Polyhedron.full(f.dim)


# ---------------------------------------------------------------------------
# marginal functions


@dataclass(frozen=True, eq=False)
class OptValueInstance:
    """``μ(x) = inf {φ(x, y) : y ∈ F(x)}`` with a reference pair ``(x̄, ȳ)``."""

    F: PolyMapping
    phi: ConvexPL
    x: tuple
    y: tuple

    def __post_init__(self):
        if not self.F.convex_graph:
            raise PreconditionError("the constraint mapping must have a convex graph")
        if self.phi.dim != self.F.dim_in + self.F.dim_out:
            raise PreconditionError("φ must live on the product space")
        object.__setattr__(self, "x", vec(self.x))
        object.__setattr__(self, "y", vec(self.y))

    @property
    def n(self) -> int:
        return self.F.dim_in

    @property
    def m(self) -> int:
        return self.F.dim_out

    def lifted_epigraph(self) -> Polyhedron:
        """``{(x, y, t) : (x, y) ∈ gph F, t ≥ φ(x, y)}``."""
        n, m = self.n, self.m
        g = self.F.graph.parts[0]
        return intersect(epigraph(self.phi), _pull(g, _sel(range(n + m), n + m + 1)))


def marginal_value(inst: OptValueInstance, x):
    """Exact ``μ(x)``: ``INF`` on an empty image, :class:`UnboundedError` at ``-inf``."""
    x = vec(x)
    fiber = section(inst.lifted_epigraph(), {i: xi for i, xi in enumerate(x)})
    obj = zeros(inst.m) + (Fraction(1),)
    res = minimize(fiber, obj)
    return INF if res is None else res[0]


def materialize_marginal(inst: OptValueInstance) -> ConvexPL:
    """μ as a max-form function, by projecting the lifted epigraph onto ``(x, t)``."""
    n, m = inst.n, inst.m
    e = project(inst.lifted_epigraph(), list(range(n)) + [n + m])
    if e.is_empty():
        raise PreconditionError("μ is identically +inf")
    return convex_from_epigraph(e)


def check_solution(inst: OptValueInstance) -> Fraction:
    """Verify ``ȳ ∈ F(x̄)`` attains ``μ(x̄)``; returns ``μ(x̄)``."""
    if not image(inst.F, inst.x).contains(inst.y):
        raise PreconditionError("ȳ is not in F(x̄)")
    mu = marginal_value(inst, inst.x)
    val = eval_pl(inst.phi, inst.x + inst.y)
    if val == INF or val != mu:
        raise PreconditionError(f"ȳ is not a minimizer: φ(x̄, ȳ) = {val}, μ(x̄) = {mu}")
    return mu


def _grid(center, radius, k):
    pts = [()]
    for c in center:
        axis = [c - radius + Fraction(2 * radius * i, k - 1) for i in range(k)]
        pts = [p + (a,) for p in pts for a in axis]
    return pts


def marginal_convexity_check(inst: OptValueInstance, radius=2, points_per_axis=5) -> bool:
    """Midpoint convexity of μ on a rational grid around x̄."""
    pts = _grid(inst.x, Fraction(radius), points_per_axis)
    vals = {p: marginal_value(inst, p) for p in pts}
    for i, a in enumerate(pts):
        for b in pts[i + 1 :]:
            if vals[a] == INF or vals[b] == INF:
                continue
            mid = tuple((u + v) / 2 for u, v in zip(a, b))
            if marginal_value(inst, mid) > (vals[a] + vals[b]) / 2:
                return False
    return True


def optimal_value_rhs(inst: OptValueInstance) -> Polyhedron:
    """``⋃ {u + D*F(x̄, ȳ)(v) : (u, v) ∈ ∂φ(x̄, ȳ)}`` as a projection of a lifted polyhedron."""
    n, m = inst.n, inst.m
    point = inst.x + inst.y
    sphi = subdifferential_convex(inst.phi, point)
    ngph = normal_cone_convex(inst.F.graph.parts[0], point)
    tot = 2 * n + m  # (u, v, w)
    lifted = _pull(sphi, _sel(range(n + m), tot))
    # (w, -v) ∈ N((x̄, ȳ); gph F)
    rows = _sel(range(n + m, tot), tot) + [[-r for r in row] for row in _sel(range(n, n + m), tot)]
    lifted = intersect(lifted, _pull(ngph, rows))
    out = [[1 if j in (i, n + m + i) else 0 for j in range(tot)] for i in range(n)]
    return linear_image(lifted, out)


def optimal_value_qc(inst: OptValueInstance) -> tuple[str, Optional[tuple]]:
    point = inst.x + inst.y
    sing = singular_subdifferential_convex(inst.phi, point)
    ngph = normal_cone_convex(inst.F.graph.parts[0], point)
    return trivial_meet(sing, _neg(ngph))


def optimal_value_subdifferential(inst: OptValueInstance, rule_id: str = "optimal-value") -> RuleReport:
    check_solution(inst)
    mu = materialize_marginal(inst)
    lhs = subdifferential_convex(mu, inst.x)
    rhs = optimal_value_rhs(inst)
    return make_report(
        rule_id,
        lhs,
        rhs,
        qc=optimal_value_qc(inst),
        claim=EQUALITY,
        skip_claim=REVERSE,
        assumptions=("finite-dimensional normal compactness",),
    )


# ---------------------------------------------------------------------------
# convex chain rules


def chain_rule_scalar(f: ConvexPL, outer: ConvexPL, x) -> RuleReport:
    """``∂(φ∘f)(x̄) = ⋃ {λ ∂f(x̄) : λ ∈ ∂φ(f(x̄))}`` for nondecreasing convex φ."""
    x = vec(x)
    if outer.dim != 1:
        raise PreconditionError("outer function must be univariate")
    if not _full_domain(f):
        raise PreconditionError("inner function must be finite everywhere")
    comp = compose_scalar(outer, f)  # checks monotonicity
    fx = eval_pl(f, x)
    if eval_pl(outer, (fx,)) == INF:
        raise PreconditionError("x̄ is outside the domain of the composition")
    sphi = subdifferential_convex(outer, (fx,))
    nepi = normal_cone_convex(epigraph(f), x + (fx,))
    n = f.dim
    # variables (x*, λ): λ ∈ ∂φ(ȳ), (x*, -λ) ∈ N((x̄, f(x̄)); epi f)
    lifted = intersect(
        _pull(sphi, _sel([n], n + 1)),
        _pull(nepi, _sel(range(n), n + 1) + [[0] * n + [-1]]),
    )
    rhs = project(lifted, list(range(n)))
    lhs = subdifferential_convex(comp, x)
    sing = singular_subdifferential_convex(outer, (fx,))
    if sing.is_zero_cone():
        qc = (SATISFIED, None)
    elif not subdifferential_convex(f, x).contains(zeros(n)):
        qc = (SATISFIED, None)
    else:
        qc = (VIOLATED, _nonzero_generator(sing))
    return make_report("chain-scalar", lhs, rhs, qc=qc, claim=EQUALITY, skip_claim=REVERSE)


def chain_rule_vector(fs: Sequence[ConvexPL], g: ConvexPL, x, *, rule_id: str = "chain-vector") -> RuleReport:
    """``∂(g∘h)(x̄) = {Σ λ_i x_i* : λ ∈ ∂g(h(x̄)), x_i* ∈ ∂f_i(x̄)}`` for monotone convex g."""
    x = vec(x)
    k = len(fs)
    if g.dim != k:
        raise PreconditionError("outer dimension must equal the number of inner functions")
    if not all(_full_domain(f) for f in fs):
        raise PreconditionError("inner functions must be finite everywhere")
    comp = compose_vector(g, fs)
    n = fs[0].dim
    hx = tuple(eval_pl(f, x) for f in fs)
    if eval_pl(g, hx) == INF:
        raise PreconditionError("x̄ is outside the domain of the composition")
    sg = subdifferential_convex(g, hx)
    neps = [normal_cone_convex(epigraph(f), x + (v,)) for f, v in zip(fs, hx)]

    def lifted_terms(lam_set: Polyhedron) -> Polyhedron:
        # variables (λ_1..λ_k, w_1..w_k); (w_i, -λ_i) ∈ N((x̄, f_i(x̄)); epi f_i)
        tot = k + k * n
        out = _pull(lam_set, _sel(range(k), tot))
        for i, ne in enumerate(neps):
            w = _sel(range(k + i * n, k + (i + 1) * n), tot)
            lam = [[-1 if j == i else 0 for j in range(tot)]]
            out = intersect(out, _pull(ne, w + lam))
        return out

    tot = k + k * n
    summed = [[1 if j >= k and (j - k) % n == i else 0 for j in range(tot)] for i in range(n)]
    rhs = linear_image(lifted_terms(sg), summed)
    lhs = subdifferential_convex(comp, x)

    # no nonzero sum of singular subgradients of the inner functions cancels
    sings = [singular_subdifferential_convex(f, x) for f in fs]
    cancel = intersect(_product_of(sings), Polyhedron.from_h(k * n, (), [(r, 0) for r in _sum_rows(k, n)]))
    qc6 = trivial_meet(cancel, Polyhedron.full(k * n))
    # no nonzero singular multiplier of g is annihilated by subgradients of the f_i
    lam_cone = lifted_terms(singular_subdifferential_convex(g, hx))
    zero_sum = intersect(lam_cone, Polyhedron.from_h(tot, (), [(r, 0) for r in summed]))
    lam_proj = project(zero_sum, list(range(k)))
    qc_g = trivial_meet(lam_proj, Polyhedron.full(k))
    qc = qc6 if qc6[0] == VIOLATED else qc_g
    return make_report(rule_id, lhs, rhs, qc=qc, claim=EQUALITY, skip_claim=REVERSE)


def convex_sum_rule(fs: Sequence[ConvexPL], x) -> RuleReport:
    """``∂(f_1 + … + f_k)(x̄) = ∂f_1(x̄) + … + ∂f_k(x̄)`` via the outer map ``Σ y_i``."""
    k = len(fs)
    g = ConvexPL.make(k, [piece([1] * k, 0)])
    return chain_rule_vector(fs, g, x, rule_id="sum")


def convex_max_rule(fs: Sequence[ConvexPL], x) -> RuleReport:
    """Subdifferential of ``max(f_1, …, f_k)`` via the outer map ``max y_i``."""
    k = len(fs)
    g = ConvexPL.make(k, [piece([1 if j == i else 0 for j in range(k)], 0) for i in range(k)])
    return chain_rule_vector(fs, g, x, rule_id="max")


def _sum_rows(k: int, n: int) -> list[list[int]]:
    return [[1 if j % n == i else 0 for j in range(k * n)] for i in range(n)]


def constrained_marginal_rule(phi: ConvexPL, K: Polyhedron, x, y) -> RuleReport:
    """``∂μ(x̄) = {u : (u, v) ∈ ∂φ(x̄, ȳ), -v ∈ N(ȳ; K)}`` for ``μ(x) = inf_{y∈K} φ(x, y)``.

    The sign on ``v`` is the one forced by the coderivative of a constant
    mapping; the variant with ``+v`` is reported under ``auxiliary``.
    """
    from .mappings import build_constant

    x, y = vec(x), vec(y)
    n, m = len(x), K.dim
    inst = OptValueInstance(build_constant(n, K), phi, x, y)
    check_solution(inst)
    lhs = subdifferential_convex(materialize_marginal(inst), x)
    sphi = subdifferential_convex(phi, x + y)
    nk = normal_cone_convex(K, y)

    def formula(cone_v: Polyhedron) -> Polyhedron:
        lifted = intersect(sphi, _pull(cone_v, _sel(range(n, n + m), n + m)))
        return project(lifted, list(range(n)))

    rhs = formula(_neg(nk))
    printed = formula(nk)
    sing = singular_subdifferential_convex(phi, x + y)
    v_cone = section(sing, {i: 0 for i in range(n)})
    qc = trivial_meet(v_cone, _neg(nk))
    aux = {"plus-sign-variant": printed, "plus-sign-variant-equal": compare(lhs, printed)[0] == "equal"}
    return make_report("constrained-marginal", lhs, rhs, qc=qc, claim=EQUALITY, skip_claim=REVERSE, auxiliary=aux)


def affine_preimage_rule(phi: ConvexPL, A, b, x, y) -> RuleReport:
    """``∂μ(x̄) = (Aᵀ)⁻¹(∂φ(ȳ))`` for ``μ(x) = inf {φ(y) : Ay + b = x}``."""
    from .mappings import PolyMapping

    A, b, x, y = as_matrix(A), vec(b), vec(x), vec(y)
    n, m = len(A), len(A[0])
    if phi.dim != m:
        raise PreconditionError("φ must live on the domain of the affine map")
    # gph of x ↦ {y : Ay + b = x}
    eqs = [(tuple(Fraction(1 if j == i else 0) for j in range(n)) + tuple(-a for a in A[i]), b[i]) for i in range(n)]
    F = PolyMapping(n, m, PolyUnion.of(Polyhedron.from_h(n + m, (), eqs)), ("affine-inverse", A, b))
    lifted_phi = ConvexPL(
        tuple(type(p)(zeros(n) + p.gradient, p.offset) for p in phi.pieces),
        _pull(phi.domain, _sel(range(n, n + m), n + m)),
    )
    inst = OptValueInstance(F, lifted_phi, x, y)
    if image(F, x).is_empty():
        raise PreconditionError("the fiber over x̄ is empty (μ(x̄) = +inf)")
    check_solution(inst)
    lhs = subdifferential_convex(materialize_marginal(inst), x)
    rhs = linear_preimage(subdifferential_convex(phi, y), transpose(A))
    return make_report(
        "affine-preimage",
        lhs,
        rhs,
        qc=(NOT_APPLICABLE, None),
        claim=EQUALITY,
        assumptions=("qualification automatic for affine constraints",),
    )


def inf_convolution_rule(f1: ConvexPL, f2: ConvexPL, x) -> RuleReport:
    """``∂(f1 ⊕ f2)(x̄) = ∂f1(x̄1) ∩ ∂f2(x̄2)`` at an exact minimizing split."""
    x = vec(x)
    val, split = build_inf_convolution_value(f1, f2, x)  # raises UnboundedError
    if split is None:
        raise PreconditionError("x̄ is outside the domain of the infimal convolution")
    x1, x2 = split
    conv = convex_from_epigraph(inf_convolution_epigraph(f1, f2))
    if eval_pl(conv, x) != val:
        raise ModelingError("materialized convolution disagrees with the LP value")
    lhs = subdifferential_convex(conv, x)
    rhs = intersect(subdifferential_convex(f1, x1), subdifferential_convex(f2, x2))
    return make_report(
        "inf-convolution",
        lhs,
        rhs,
        qc=(NOT_APPLICABLE, None),
        claim=EQUALITY,
        auxiliary={"split": (x1, x2), "value": val},
    )


# ---------------------------------------------------------------------------
# Clarke calculus


def _hint_gate(status: str, reason: str, override: bool) -> tuple[bool, list[str]]:
    notes = [f"inner semicontinuity: {status} ({reason})"]
    if status == HOLDS:
        return False, notes
    if override:
        notes.append("assume-inner-semicontinuous")
        return False, notes
    return True, notes


def clarke_coderivative_sum_rule(
    F1: PolyMapping, F2: PolyMapping, x, y, y1, y2, ystar, *, assume_inner_semicontinuous: bool = False
) -> RuleReport:
    """``D*_C(F1 + F2)(x̄, ȳ)(y*) ⊆ D*_C F1(x̄, ȳ1)(y*) + D*_C F2(x̄, ȳ2)(y*)``."""
    x, y, y1, y2, ystar = map(vec, (x, y, y1, y2, ystar))
    status, reason = inner_semicontinuity_hint(F1, F2, x, y, y1, y2)
    if status == "fails":
        raise PreconditionError(reason)
    withheld, notes = _hint_gate(status, reason, assume_inner_semicontinuous)
    lhs = clarke_coderivative(build_sum_graph(F1, F2), x, y, ystar)
    rhs = minkowski_sum(clarke_coderivative(F1, x, y1, ystar), clarke_coderivative(F2, x, y2, ystar))
    zero = zeros(len(ystar))
    qc = trivial_meet(clarke_coderivative(F1, x, y1, zero), _neg(clarke_coderivative(F2, x, y2, zero)))
    return make_report("coderivative-sum", lhs, rhs, qc=qc, claim=INCLUSION, withheld=withheld, assumptions=notes)


def clarke_restriction_rule(F: PolyMapping, omega, x, y, ystar) -> RuleReport:
    """``D*_C(F + Δ(·; Ω))(x̄, ȳ)(y*) ⊆ D*_C F(x̄, ȳ)(y*) + N_C(x̄; Ω)``."""
    x, y, ystar = map(vec, (x, y, ystar))
    omega = as_union(omega)
    if not omega.contains(x) or not F.graph.contains(x + y):
        raise PreconditionError("(x̄, ȳ) must lie on the graph with x̄ ∈ Ω")
    lhs = clarke_coderivative(build_restriction(F, omega), x, y, ystar)
    nc = clarke_normal_union(omega, x)
    rhs = minkowski_sum(clarke_coderivative(F, x, y, ystar), nc)
    qc = trivial_meet(clarke_coderivative(F, x, y, zeros(len(ystar))), _neg(nc))
    return make_report(
        "restriction",
        lhs,
        rhs,
        qc=qc,
        claim=INCLUSION,
        assumptions=("inner semicontinuity: holds (solution map is single-valued)",),
    )


def pairwise_intersection(a, b) -> PolyUnion:
    a, b = as_union(a), as_union(b)
    return PolyUnion(a.dim, tuple(intersect(p, q) for p in a.parts for q in b.parts))


def qc_normal(omega1, omega2, x) -> tuple[str, Optional[tuple]]:
    """``N_C(x̄; Ω1) ∩ (-N_C(x̄; Ω2)) = {0}``."""
    return trivial_meet(clarke_normal_union(omega1, x), _neg(clarke_normal_union(omega2, x)))


def qc_tangent(omega1, omega2, x) -> tuple[str, Optional[tuple]]:
    """``T(x̄; Ω1) ∩ int T(x̄; Ω2) ≠ ∅``; the witness is a direction in that set."""
    t1, t2 = clarke_tangent_cone(omega1, x), clarke_tangent_cone(omega2, x)
    if not t2.is_full_dimensional():
        return VIOLATED, None
    # a full-dimensional cone has no equalities in canonical form
    v = relint_point(t1.dim, t1.ineqs, t1.eqs, t2.ineqs)
    return (SATISFIED, v) if v is not None else (VIOLATED, None)


def clarke_intersection_rule(omega1, omega2, x) -> RuleReport:
    """``N_C(x̄; Ω1 ∩ Ω2) ⊆ N_C(x̄; Ω1) + N_C(x̄; Ω2)``."""
    x = vec(x)
    omega1, omega2 = as_union(omega1), as_union(omega2)
    if not (omega1.contains(x) and omega2.contains(x)):
        raise PreconditionError("x̄ must lie in both sets")
    lhs = clarke_normal_union(pairwise_intersection(omega1, omega2), x)
    rhs = minkowski_sum(clarke_normal_union(omega1, x), clarke_normal_union(omega2, x))
    qn = qc_normal(omega1, omega2, x)
    qt = qc_tangent(omega1, omega2, x)
    aux = {
        "qc-tangent": qt[0],
        "tangent-implies-normal": qt[0] != SATISFIED or qn[0] == SATISFIED,
    }
    return make_report("intersection", lhs, rhs, qc=qn, claim=INCLUSION, auxiliary=aux)


def clarke_subdifferential_sum_rule(phis: Sequence, x, *, singular: bool = False) -> RuleReport:
    """Clarke sum rule for (singular) subdifferentials; equality under lower regularity."""
    x = vec(x)
    phis = [to_cells(p) for p in phis]
    if any(eval_pl(p, x) == INF for p in phis):
        raise PreconditionError("every summand must be finite at x̄")
    total = cell_sum_all(phis)
    sub = clarke_singular_subdifferential if singular else clarke_subdifferential
    lhs = sub(total, x)
    rhs = _minkowski([sub(p, x) for p in phis])
    n, k = len(x), len(phis)
    sings = [clarke_singular_subdifferential(p, x) for p in phis]
    cancel = intersect(_product_of(sings), Polyhedron.from_h(k * n, (), [(r, 0) for r in _sum_rows(k, n)]))
    qc = trivial_meet(cancel, Polyhedron.full(k * n))
    regular = all(is_lower_regular(p, x) for p in phis)
    claim = EQUALITY if regular and not singular else INCLUSION
    notes = ["lower regular summands" if regular else "some summand is not lower regular"]
    return make_report(
        "subdifferential-sum-singular" if singular else "subdifferential-sum",
        lhs,
        rhs,
        qc=qc,
        claim=claim,
        assumptions=notes,
    )


def composed_coderivative(G: PolyMapping, F: PolyMapping, x, y, z, zstar) -> Polyhedron:
    """``D*_C G(x̄, ȳ) ∘ D*_C F(ȳ, z̄)(z*)`` as a projection over the intermediate ``y*``."""
    n, m = G.dim_in, G.dim_out
    nf = clarke_normal_union(F.graph, y + z)
    ng = clarke_normal_union(G.graph, x + y)
    tot = n + m  # (x*, y*)
    # (y*, -z*) ∈ N_C(gph F): rows pick y*, then a constant -z*
    rows_f = _sel(range(n, tot), tot) + [[0] * tot for _ in zstar]
    const_f = zeros(m) + tuple(-v for v in zstar)
    rows_g = _sel(range(n), tot) + [[-r for r in row] for row in _sel(range(n, tot), tot)]
    lifted = intersect(_pull(nf, rows_f, const_f), _pull(ng, rows_g))
    return project(lifted, list(range(n)))


def clarke_chain_rule(
    G: PolyMapping, F: PolyMapping, x, y, z, zstar, *, assume_inner_semicontinuous: bool = False
) -> RuleReport:
    """``D*_C(F∘G)(x̄, z̄)(z*) ⊆ D*_C G(x̄, ȳ) ∘ D*_C F(ȳ, z̄)(z*)``."""
    x, y, z, zstar = map(vec, (x, y, z, zstar))
    status, reason = composition_hint(G, F, x, y, z)
    if status == "fails":
        raise PreconditionError(reason)
    withheld, notes = _hint_gate(status, reason, assume_inner_semicontinuous)
    lhs = clarke_coderivative(build_composition_graph(G, F), x, z, zstar)
    rhs = composed_coderivative(G, F, x, y, z, zstar)
    qc = trivial_meet(clarke_coderivative(F, y, z, zeros(len(zstar))), kernel(G, x, y))
    return make_report("coderivative-chain", lhs, rhs, qc=qc, claim=INCLUSION, withheld=withheld, assumptions=notes)


def clarke_preimage_rule(F: PolyMapping, omega, x, y, *, assume_inner_semicontinuous: bool = False) -> RuleReport:
    """``N_C(x̄; F⁻¹(Ω)) ⊆ D*_C F(x̄, ȳ)(N_C(ȳ; Ω))``.

    The variant with the limiting cone of Ω inside the coderivative is
    evaluated too and reported under ``auxiliary``; it is not asserted
    because it fails for nonconvex Ω (e.g. F the identity and Ω a cross).
    """
    x, y = vec(x), vec(y)
    omega = as_union(omega)
    if not (F.graph.contains(x + y) and omega.contains(y)):
        raise PreconditionError("need (x̄, ȳ) ∈ gph F and ȳ ∈ Ω")
    if single_valued(F):
        status, reason = HOLDS, "mapping is single-valued affine on its domain"
    else:
        status, reason = "unknown", "no certificate"
    withheld, notes = _hint_gate(status, reason, assume_inner_semicontinuous)
    n, m = F.dim_in, F.dim_out
    lhs = clarke_normal_union(preimage_set(F, omega), x)
    ng = clarke_normal_union(F.graph, x + y)
    rows_g = _sel(range(n), n + m) + [[-r for r in row] for row in _sel(range(n, n + m), n + m)]

    def through(cone_y: Polyhedron) -> Polyhedron:
        # {x* : (x*, -y*) ∈ N_C(gph F) for some y* ∈ cone_y}
        lifted = intersect(_pull(ng, rows_g), _pull(cone_y, _sel(range(n, n + m), n + m)))
        return project(lifted, list(range(n)))

    rhs = through(clarke_normal_union(omega, y))
    limiting_variant = PolyUnion(n, tuple(through(c) for c in limiting_normal_union(omega, y).parts))
    lim_ok, lim_w = union_subset(lhs, limiting_variant)
    qc = trivial_meet(clarke_normal_union(omega, y), kernel(F, x, y))
    aux = {
        "limiting-argument-rhs": limiting_variant,
        "limiting-argument-inclusion": lim_ok,
        "limiting-argument-witness": lim_w,
    }
    return make_report("preimage", lhs, rhs, qc=qc, claim=INCLUSION, withheld=withheld, assumptions=notes, auxiliary=aux)


def clarke_smooth_chain_rule(g, A, b, x, *, singular: bool = False) -> RuleReport:
    """``∂_C(g∘F)(x̄) ⊆ Aᵀ ∂_C g(Ax̄ + b)`` for ``F(x) = Ax + b``; equality when g is lower regular."""
    A, b, x = as_matrix(A), vec(b), vec(x)
    g = to_cells(g)
    ybar = tuple(sum((r[j] * x[j] for j in range(len(x))), Fraction(0)) + bi for r, bi in zip(A, b))
    if eval_pl(g, ybar) == INF:
        raise PreconditionError("F(x̄) must lie in the domain of g")
    f = pullback(g, A, b)
    sub = clarke_singular_subdifferential if singular else clarke_subdifferential
    lhs = sub(f, x)
    At = transpose(A)
    rhs = linear_image(sub(g, ybar), At)
    ker_adj = Polyhedron.from_h(len(A), (), [(row, 0) for row in At])
    qc = trivial_meet(clarke_singular_subdifferential(g, ybar), ker_adj)
    regular = is_lower_regular(g, ybar)
    claim = EQUALITY if regular and not singular else INCLUSION
    notes = ["outer function lower regular" if regular else "outer function not lower regular"]
    return make_report(
        "affine-chain-singular" if singular else "affine-chain", lhs, rhs, qc=qc, claim=claim, assumptions=notes
    )
