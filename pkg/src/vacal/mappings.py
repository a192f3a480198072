"""Set-valued mappings with polyhedral graphs and their coderivatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .normal_cones import clarke_normal_union, limiting_normal_union
from .pl_functions import epigraph_union, eval_pl
from .polyhedra import (
    PolyUnion,
    Polyhedron,
    affine_preimage,
    as_union,
    intersect,
    linear_image,
    project,
    section,
)
from .rational import as_matrix, nullspace, rref, vec

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"


@dataclass(frozen=True, eq=False)
class PolyMapping:
    """``F: R^dim_in ⇒ R^dim_out`` given by its graph in ``R^(dim_in + dim_out)``."""

    dim_in: int
    dim_out: int
    graph: PolyUnion
    # provenance used by the inner-semicontinuity certificates, e.g. ("epi", f)
    source: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        g = as_union(self.graph)
        if g.dim != self.dim_in + self.dim_out:
            raise ValueError("graph dimension must equal dim_in + dim_out")
        object.__setattr__(self, "graph", g)

    @property
    def convex_graph(self) -> bool:
        return len(self.graph.parts) == 1

    def __call__(self, x) -> PolyUnion:
        return image(self, x)


def _fix_first(p: Polyhedron, x, n: int) -> Polyhedron:
    return section(p, {i: xi for i, xi in enumerate(x)})


def _fix_last(p: Polyhedron, y, n: int) -> Polyhedron:
    return section(p, {n + i: yi for i, yi in enumerate(y)})


def image(F: PolyMapping, x) -> PolyUnion:
    x = vec(x)
    if len(x) != F.dim_in:
        raise ValueError("point dimension mismatch")
    return PolyUnion(F.dim_out, tuple(_fix_first(p, x, F.dim_in) for p in F.graph.parts))


def domain(F: PolyMapping) -> PolyUnion:
    keep = list(range(F.dim_in))
    return PolyUnion(F.dim_in, tuple(project(p, keep) for p in F.graph.parts))


def coderivative(F: PolyMapping, x, y, ystar) -> PolyUnion:
    """Limiting coderivative; the empty set when ``(x, y)`` is off the graph."""
    x, y, ystar = vec(x), vec(y), vec(ystar)
    n = limiting_normal_union(F.graph, x + y)
    neg = tuple(-v for v in ystar)
    return PolyUnion(F.dim_in, tuple(_fix_last(c, neg, F.dim_in) for c in n.parts))


def clarke_coderivative(F: PolyMapping, x, y, ystar) -> Polyhedron:
    x, y, ystar = vec(x), vec(y), vec(ystar)
    n = clarke_normal_union(F.graph, x + y)
    if n.is_empty():
        return Polyhedron.empty(F.dim_in)
    return _fix_last(n, tuple(-v for v in ystar), F.dim_in)


def kernel(F: PolyMapping, x, y) -> Polyhedron:
    """``{y* : 0 ∈ D*_C F(x, y)(y*)}``."""
    x, y = vec(x), vec(y)
    n = clarke_normal_union(F.graph, x + y)
    if n.is_empty():
        return Polyhedron.empty(F.dim_out)
    s = _fix_first(n, (Fraction(0),) * F.dim_in, F.dim_in)
    m = F.dim_out
    return linear_image(s, [[-1 if i == j else 0 for j in range(m)] for i in range(m)])


# ---------------------------------------------------------------------------
# constructors


def _selector(cols: Sequence[int], total: int) -> list[list[int]]:
    return [[1 if j == c else 0 for j in range(total)] for c in cols]


def _embed(p: Polyhedron, cols: Sequence[int], total: int) -> Polyhedron:
    """``{w in R^total : w[cols] in p}``."""
    return affine_preimage(p, _selector(cols, total))


def build_constant(dim_in: int, K: Polyhedron) -> PolyMapping:
    g = _embed(K, range(dim_in, dim_in + K.dim), dim_in + K.dim)
    return PolyMapping(dim_in, K.dim, PolyUnion.of(g), ("constant", K))


def build_affine(A, b) -> PolyMapping:
    A, b = as_matrix(A), vec(b)
    m, n = len(A), len(A[0])
    eqs = [(tuple(-a for a in A[i]) + tuple(Fraction(1 if j == i else 0) for j in range(m)), b[i]) for i in range(m)]
    return PolyMapping(n, m, PolyUnion.of(Polyhedron.from_h(n + m, (), eqs)), ("affine", A, b))


def build_epi(f) -> PolyMapping:
    """``x ↦ [f(x), ∞)``; its graph is the epigraph of ``f``."""
    return PolyMapping(f.dim, 1, epigraph_union(f), ("epi", f))


def build_indicator_mapping(omega, dim_out: int) -> PolyMapping:
    """``x ↦ {0}`` on ``omega`` and the empty set elsewhere."""
    omega = as_union(omega)
    n = omega.dim
    zero_rows = [(tuple(Fraction(1 if j == n + i else 0) for j in range(n + dim_out)), Fraction(0)) for i in range(dim_out)]
    zero = Polyhedron.from_h(n + dim_out, (), zero_rows)
    parts = tuple(intersect(_embed(p, range(n), n + dim_out), zero) for p in omega.parts)
    return PolyMapping(n, dim_out, PolyUnion(n + dim_out, parts), ("indicator", omega))


def build_sum_graph(F1: PolyMapping, F2: PolyMapping) -> PolyMapping:
    if (F1.dim_in, F1.dim_out) != (F2.dim_in, F2.dim_out):
        raise ValueError("summands must share their spaces")
    n, m = F1.dim_in, F1.dim_out
    tot = n + 2 * m
    xs = list(range(n))
    M = [[1 if j == i else 0 for j in range(tot)] for i in range(n)]
    M += [[1 if j in (n + i, n + m + i) else 0 for j in range(tot)] for i in range(m)]
    parts = []
    for p1 in F1.graph.parts:
        a = _embed(p1, xs + list(range(n, n + m)), tot)
        for p2 in F2.graph.parts:
            lifted = intersect(a, _embed(p2, xs + list(range(n + m, tot)), tot))
            if not lifted.is_empty():
                parts.append(linear_image(lifted, M))
    return PolyMapping(n, m, PolyUnion(n + m, tuple(parts)), ("sum", F1, F2))


def build_composition_graph(G: PolyMapping, F: PolyMapping) -> PolyMapping:
    """Graph of ``x ↦ F(G(x))`` for ``G: X ⇒ Y`` and ``F: Y ⇒ Z``."""
    if G.dim_out != F.dim_in:
        raise ValueError("inner output must match outer input")
    n, m, k = G.dim_in, G.dim_out, F.dim_out
    tot = n + m + k
    parts = []
    for pg in G.graph.parts:
        a = _embed(pg, range(n + m), tot)
        for pf in F.graph.parts:
            lifted = intersect(a, _embed(pf, range(n, tot), tot))
            if not lifted.is_empty():
                parts.append(project(lifted, list(range(n)) + list(range(n + m, tot))))
    return PolyMapping(n, k, PolyUnion(n + k, tuple(parts)), ("composition", G, F))


def build_restriction(F: PolyMapping, omega) -> PolyMapping:
    """``x ↦ F(x) + Δ(x; Ω)``: the graph restricted to ``Ω × Y``."""
    omega = as_union(omega)
    n, tot = F.dim_in, F.dim_in + F.dim_out
    parts = [
        intersect(p, _embed(o, range(n), tot)) for p in F.graph.parts for o in omega.parts
    ]
    return PolyMapping(n, F.dim_out, PolyUnion(tot, tuple(parts)), ("restriction", F, omega))


def preimage_set(F: PolyMapping, omega) -> PolyUnion:
    """``F⁻¹(Ω) = {x : F(x) ∩ Ω ≠ ∅}``."""
    omega = as_union(omega)
    n, tot = F.dim_in, F.dim_in + F.dim_out
    parts = []
    for p in F.graph.parts:
        for o in omega.parts:
            lifted = intersect(p, _embed(o, range(n, tot), tot))
            if not lifted.is_empty():
                parts.append(project(lifted, list(range(n))))
    return PolyUnion(n, tuple(parts))


# ---------------------------------------------------------------------------
# the solution map of a sum and inner semicontinuity certificates


def s_map(F1: PolyMapping, F2: PolyMapping, x, y) -> PolyUnion:
    """``{(y1, y2) : y1 ∈ F1(x), y2 ∈ F2(x), y1 + y2 = y}``."""
    x, y = vec(x), vec(y)
    m = F1.dim_out
    sums = [
        (tuple(Fraction(1 if j in (i, m + i) else 0) for j in range(2 * m)), y[i]) for i in range(m)
    ]
    fiber = Polyhedron.from_h(2 * m, (), sums)
    parts = []
    for a in image(F1, x).parts:
        for b in image(F2, x).parts:
            prod = intersect(_embed(a, range(m), 2 * m), _embed(b, range(m, 2 * m), 2 * m))
            parts.append(intersect(prod, fiber))
    return PolyUnion(2 * m, tuple(parts))


def determines(p: Polyhedron, given: Sequence[int], target: Sequence[int]) -> bool:
    """Whether the coordinates ``target`` of points of ``p`` are determined by ``given``."""
    if p.is_empty():
        return True
    V = p.vertices
    dirs = [tuple(a - b for a, b in zip(v, V[0])) for v in V[1:]] + list(p.rays) + list(p.lineality)
    if not dirs:
        return True
    # a direction of the affine hull with zero `given` part must vanish on `target`
    R, _ = rref(dirs, p.dim)
    ker = nullspace([[R[k][i] for k in range(len(R))] for i in given], len(R))
    for c in ker:
        d = [sum((c[k] * R[k][j] for k in range(len(R))), Fraction(0)) for j in range(p.dim)]
        if any(d[j] != 0 for j in target):
            return False
    return True


def single_valued(F: PolyMapping) -> bool:
    """Convex graph on which the output is an affine function of the input."""
    if not F.convex_graph:
        return False
    n = F.dim_in
    return determines(F.graph.parts[0], range(n), range(n, n + F.dim_out))


def _continuous_epi(F: PolyMapping) -> bool:
    return F.source is not None and F.source[0] == "epi"


def inner_semicontinuity_hint(F1: PolyMapping, F2: PolyMapping, x, y, y1, y2) -> tuple[str, str]:
    """Tri-state certificate for inner semicontinuity of the sum's solution map.

    Returns ``(status, reason)``; "holds" is only returned with a
    constructive selection argument, "fails" when ``(y1, y2)`` is not even a
    solution, "unknown" otherwise.
    """
    x, y, y1, y2 = vec(x), vec(y), vec(y1), vec(y2)
    if not s_map(F1, F2, x, y).contains(y1 + y2):
        return FAILS, "(y1, y2) is not in S(x, y)"
    if _continuous_epi(F1) and _continuous_epi(F2):
        f1, f2 = F1.source[1], F2.source[1]
        if (eval_pl(f1, x),) == y1 and (eval_pl(f2, x),) == y2:
            return HOLDS, "epigraphical summands at their function values"
    if single_valued(F2):
        return HOLDS, "second summand is single-valued affine on its domain"
    if single_valued(F1):
        return HOLDS, "first summand is single-valued affine on its domain"
    return UNKNOWN, "no certificate"


def composition_hint(G: PolyMapping, F: PolyMapping, x, y, z) -> tuple[str, str]:
    """Certificate for inner semicontinuity of ``(x, z) ↦ G(x) ∩ F⁻¹(z)``."""
    x, y, z = vec(x), vec(y), vec(z)
    if not (G.graph.contains(x + y) and F.graph.contains(y + z)):
        return FAILS, "y is not in G(x) ∩ F⁻¹(z)"
    if single_valued(G):
        return HOLDS, "inner mapping is single-valued affine on its domain"
    if F.convex_graph and determines(F.graph.parts[0], range(F.dim_in, F.dim_in + F.dim_out), range(F.dim_in)):
        return HOLDS, "outer mapping has a single-valued affine inverse"
    return UNKNOWN, "no certificate"
