"""Piecewise-linear extended-real-valued functions.

Two representations are used.  :class:`ConvexPL` is a max of affine pieces
restricted to a polyhedral domain (convex by construction).  :class:`CellPL`
is a cell complex: polyhedral cells each carrying an affine piece, with the
pieces agreeing wherever cells meet.  Outside the domain both take the value
``INF``.

The indicator of a set is 0 on the set and ``+inf`` off it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Sequence

from .polyhedra import (
    PolyUnion,
    Polyhedron,
    UnboundedError,
    affine_preimage,
    cone,
    intersect,
    linear_image,
    minimize,
    minkowski_sum,
    normal_cone_convex,
    section,
    tangent_cone_convex,
    union_subset,
)
from .rational import dot, is_zero, q, vec, zeros

INF = float("inf")


class ModelingError(ValueError):
    """Inconsistent function data (e.g. cell pieces that disagree on overlaps)."""


@dataclass(frozen=True)
class AffinePiece:
    gradient: tuple
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "gradient", vec(self.gradient))
        object.__setattr__(self, "offset", q(self.offset))

    @property
    def dim(self) -> int:
        return len(self.gradient)

    def __call__(self, x) -> Fraction:
        return dot(self.gradient, x) + self.offset

    def __add__(self, other: "AffinePiece") -> "AffinePiece":
        return AffinePiece(
            tuple(a + b for a, b in zip(self.gradient, other.gradient)),
            self.offset + other.offset,
        )


def piece(gradient, offset=0) -> AffinePiece:
    return AffinePiece(tuple(gradient), offset)


@dataclass(frozen=True)
class ConvexPL:
    """``f(x) = max_i <a_i, x> + b_i`` on ``domain``, ``+inf`` elsewhere."""

    pieces: tuple
    domain: Polyhedron

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ModelingError("a ConvexPL needs at least one affine piece")
        if any(p.dim != self.domain.dim for p in pieces):
            raise ModelingError("piece dimension does not match the domain")
        if self.domain.is_empty():
            raise ModelingError("a ConvexPL needs a nonempty domain")
        # dedupe, keep a stable order
        seen, uniq = set(), []
        for p in pieces:
            k = (p.gradient, p.offset)
            if k not in seen:
                seen.add(k)
                uniq.append(p)
        object.__setattr__(self, "pieces", tuple(uniq))

    @classmethod
    def make(cls, dim: int, pieces, domain: Polyhedron | None = None) -> "ConvexPL":
        dom = domain if domain is not None else Polyhedron.full(dim)
        return cls(tuple(p if isinstance(p, AffinePiece) else piece(*p) for p in pieces), dom)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, x):
        return eval_pl(self, x)

    def active(self, x) -> list[AffinePiece]:
        x = vec(x)
        vals = [p(x) for p in self.pieces]
        m = max(vals)
        return [p for p, v in zip(self.pieces, vals) if v == m]


@dataclass(frozen=True)
class CellPL:
    """Cell-complex PL function; ``+inf`` off the union of cells."""

    cells: tuple  # of (Polyhedron, AffinePiece)

    def __post_init__(self):
        cells = tuple((c, p) for c, p in self.cells if not c.is_empty())
        if not cells:
            raise ModelingError("a CellPL needs at least one nonempty cell")
        d = cells[0][0].dim
        for c, p in cells:
            if c.dim != d or p.dim != d:
                raise ModelingError("cell or piece dimension mismatch")
        object.__setattr__(self, "cells", cells)
        _check_continuity(cells)

    @property
    def dim(self) -> int:
        return self.cells[0][0].dim

    def __call__(self, x):
        return eval_pl(self, x)

    def domain(self) -> PolyUnion:
        return PolyUnion(self.dim, tuple(c for c, _ in self.cells))

    def active_cells(self, x) -> list:
        x = vec(x)
        return [(c, p) for c, p in self.cells if c.contains(x)]

    def is_full_domain(self) -> bool:
        return covers_space(self.domain())


def _check_continuity(cells) -> None:
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            (c1, p1), (c2, p2) = cells[i], cells[j]
            common = intersect(c1, c2)
            if common.is_empty():
                continue
            for v in common.vertices:
                if p1(v) != p2(v):
                    raise ModelingError(f"pieces {i} and {j} disagree at {v}")
            g = tuple(a - b for a, b in zip(p1.gradient, p2.gradient))
            for r in common.rays + common.lineality:
                if dot(g, r) != 0:
                    raise ModelingError(f"pieces {i} and {j} disagree along {r}")


def covers_space(u: PolyUnion) -> bool:
    """Whether a union of closed polyhedra is the whole space."""
    return union_subset(Polyhedron.full(u.dim), u)[0]


def indicator(p: Polyhedron) -> ConvexPL:
    return ConvexPL((AffinePiece(zeros(p.dim), 0),), p)


def indicator_union(u: PolyUnion) -> CellPL:
    return CellPL(tuple((c, AffinePiece(zeros(u.dim), 0)) for c in u.parts))


def eval_pl(f, x):
    x = vec(x)
    if len(x) != f.dim:
        raise ValueError("point dimension mismatch")
    if isinstance(f, ConvexPL):
        if not f.domain.contains(x):
            return INF
        return max(p(x) for p in f.pieces)
    for c, p in f.cells:
        if c.contains(x):
            return p(x)
    return INF


def to_cells(f: ConvexPL) -> CellPL:
    """Linearity regions of a max-form function as a cell complex."""
    if isinstance(f, CellPL):
        return f
    cells = []
    ineqs, eqs = f.domain._any_h()
    for p in f.pieces:
        rows = [
            (tuple(b - a for a, b in zip(p.gradient, o.gradient)), p.offset - o.offset)
            for o in f.pieces
            if o is not p
        ]
        c = Polyhedron.from_h(f.dim, tuple(ineqs) + tuple(rows), eqs)
        if not c.is_empty():
            cells.append((c, p))
    return CellPL(tuple(cells))


def epigraph(f):
    """Epigraph as a polyhedron (max form) or a union (cell form)."""
    n = f.dim
    if isinstance(f, ConvexPL):
        ineqs, eqs = f.domain._any_h()
        rows = [(tuple(a) + (Fraction(0),), b) for a, b in ineqs]
        rows += [(p.gradient + (Fraction(-1),), -p.offset) for p in f.pieces]
        erows = [(tuple(a) + (Fraction(0),), b) for a, b in eqs]
        return Polyhedron.from_h(n + 1, rows, erows)
    parts = []
    for c, p in f.cells:
        ineqs, eqs = c._any_h()
        rows = [(tuple(a) + (Fraction(0),), b) for a, b in ineqs]
        rows.append((p.gradient + (Fraction(-1),), -p.offset))
        erows = [(tuple(a) + (Fraction(0),), b) for a, b in eqs]
        parts.append(Polyhedron.from_h(n + 1, rows, erows))
    return PolyUnion(n + 1, tuple(parts))


def epigraph_union(f) -> PolyUnion:
    e = epigraph(f)
    return e if isinstance(e, PolyUnion) else PolyUnion.of(e)


def _finite_at(f, x):
    v = eval_pl(f, x)
    if v == INF:
        return None
    return v


def subdifferential_convex(f: ConvexPL, x) -> Polyhedron:
    """Convex subdifferential: hull of active slopes plus the domain's normal cone."""
    x = vec(x)
    if _finite_at(f, x) is None:
        return Polyhedron.empty(f.dim)
    grads = Polyhedron.from_v(f.dim, [p.gradient for p in f.active(x)])
    return minkowski_sum(grads, normal_cone_convex(f.domain, x))


def slice_last(c: Polyhedron, value) -> Polyhedron:
    """``{x* : (x*, value) in c}``."""
    return section(c, {c.dim - 1: value})


def singular_subdifferential_convex(f: ConvexPL, x) -> Polyhedron:
    x = vec(x)
    fx = _finite_at(f, x)
    if fx is None:
        return Polyhedron.empty(f.dim)
    n = normal_cone_convex(epigraph(f), x + (fx,))
    return slice_last(n, 0)


def directional_derivative_convex(f: ConvexPL, x, v):
    x, v = vec(x), vec(v)
    if _finite_at(f, x) is None:
        raise ValueError("directional derivative needs a point of the domain")
    if not tangent_cone_convex(f.domain, x).contains(v):
        return INF
    return max(dot(p.gradient, v) for p in f.active(x))


def support(p: Polyhedron, v):
    """``sup {<x, v> : x in p}``; ``INF`` when unbounded, ``-INF`` for an empty set."""
    v = vec(v)
    try:
        res = minimize(p, tuple(-x for x in v))
    except UnboundedError:
        return INF
    if res is None:
        return -INF
    return -res[0]


def build_sum(f: ConvexPL, g: ConvexPL) -> ConvexPL:
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    dom = intersect(f.domain, g.domain)
    if dom.is_empty():
        raise ModelingError("sum has an empty domain")
    return ConvexPL(tuple(a + b for a in f.pieces for b in g.pieces), dom)


def build_max(f: ConvexPL, g: ConvexPL) -> ConvexPL:
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    dom = intersect(f.domain, g.domain)
    if dom.is_empty():
        raise ModelingError("max has an empty domain")
    return ConvexPL(f.pieces + g.pieces, dom)


def scale_pl(c, f: ConvexPL) -> ConvexPL:
    c = q(c)
    if c < 0:
        raise ValueError("only nonnegative scalings preserve convexity")
    return ConvexPL(tuple(AffinePiece(tuple(c * a for a in p.gradient), c * p.offset) for p in f.pieces), f.domain)


def convex_from_epigraph(e: Polyhedron) -> ConvexPL:
    """Max-form function whose epigraph is ``e`` (last coordinate is the value).

    Raises :class:`UnboundedError` when the function takes the value ``-inf``.
    """
    n = e.dim - 1
    if e.is_empty():
        raise ModelingError("empty epigraph")
    down = zeros(n) + (Fraction(-1),)
    rec = cone(e.dim, e.rays, e.lineality)
    if rec.contains(down):
        raise UnboundedError("function is -inf somewhere on its domain")
    pieces, dom_rows = [], []
    for a, b in e.ineqs:
        c = a[n]
        if c < 0:
            s = -c
            pieces.append(AffinePiece(tuple(x / s for x in a[:n]), -b / s))
        elif c == 0:
            dom_rows.append((a[:n], b))
        else:
            raise ModelingError("not an epigraph: a row bounds the value from above")
    dom_eqs = []
    for a, b in e.eqs:
        if a[n] != 0:
            raise ModelingError("not an epigraph: the value is pinned by an equality")
        dom_eqs.append((a[:n], b))
    return ConvexPL(tuple(pieces), Polyhedron.from_h(n, dom_rows, dom_eqs))


def inf_convolution_epigraph(f: ConvexPL, g: ConvexPL) -> Polyhedron:
    """Epigraph of the infimal convolution (exact image of the joint epigraph)."""
    n = f.dim
    ef, eg = epigraph(f), epigraph(g)
    joint = _product(ef, eg)
    M = []
    for i in range(n):
        row = [0] * (2 * n + 2)
        row[i] = 1
        row[n + 1 + i] = 1
        M.append(row)
    row = [0] * (2 * n + 2)
    row[n] = 1
    row[2 * n + 1] = 1
    M.append(row)
    return linear_image(joint, M)


def _product(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    da, db = a.dim, b.dim
    ai, ae = a._any_h()
    bi, be = b._any_h()
    pad_l = lambda rows: tuple((tuple(r) + zeros(db), c) for r, c in rows)  # noqa: E731
    pad_r = lambda rows: tuple((zeros(da) + tuple(r), c) for r, c in rows)  # noqa: E731
    return Polyhedron(da + db, h=(pad_l(ai) + pad_r(bi), pad_l(ae) + pad_r(be)))


def product(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    return _product(a, b)


def build_inf_convolution_value(f: ConvexPL, g: ConvexPL, x):
    """Value of the infimal convolution at ``x`` and a minimizing split.

    Returns ``(INF, None)`` off the domain; raises :class:`UnboundedError`
    when the infimum is ``-inf``.
    """
    x = vec(x)
    n = f.dim
    joint = _product(epigraph(f), epigraph(g))
    eqs = []
    for i in range(n):
        row = [0] * (2 * n + 2)
        row[i] = 1
        row[n + 1 + i] = 1
        eqs.append((row, x[i]))
    feas = intersect(joint, Polyhedron.from_h(2 * n + 2, (), eqs))
    obj = [0] * (2 * n + 2)
    obj[n] = 1
    obj[2 * n + 1] = 1
    res = minimize(feas, obj)  # UnboundedError propagates
    if res is None:
        return INF, None
    val, z = res
    return val, (z[:n], z[n + 1 : 2 * n + 1])


def cell_sum(f: CellPL, g: CellPL) -> CellPL:
    """Common refinement of two cell complexes with summed pieces."""
    f, g = to_cells(f), to_cells(g)
    cells = []
    for c1, p1 in f.cells:
        for c2, p2 in g.cells:
            c = intersect(c1, c2)
            if not c.is_empty():
                cells.append((c, p1 + p2))
    if not cells:
        raise ModelingError("sum has an empty domain")
    return CellPL(tuple(cells))


def cell_sum_all(fs: Sequence) -> CellPL:
    out = to_cells(fs[0])
    for f in fs[1:]:
        out = cell_sum(out, f)
    return out


def pullback(g, A, b) -> CellPL:
    """``x -> g(A x + b)`` for a cell-form (or max-form) ``g``."""
    g = to_cells(g)
    A = tuple(vec(r) for r in A)
    b = vec(b)
    n = len(A[0])
    cells = []
    for c, p in g.cells:
        pc = affine_preimage(c, A, b)
        if pc.is_empty():
            continue
        grad = tuple(sum((p.gradient[i] * A[i][j] for i in range(len(A))), Fraction(0)) for j in range(n))
        cells.append((pc, AffinePiece(grad, dot(p.gradient, b) + p.offset)))
    if not cells:
        raise ModelingError("pullback has an empty domain")
    return CellPL(tuple(cells))


def compose_scalar(outer: ConvexPL, f: ConvexPL) -> ConvexPL:
    """Exact ``outer o f`` for a nondecreasing convex ``outer`` on the line."""
    return compose_vector(outer, [f])


def check_nondecreasing(g: ConvexPL) -> None:
    """Componentwise monotonicity: nonnegative slopes and a domain closed downward."""
    for p in g.pieces:
        if any(a < 0 for a in p.gradient):
            raise ModelingError("outer function has a negative slope")
    for i in range(g.dim):
        d = tuple(Fraction(-1) if j == i else Fraction(0) for j in range(g.dim))
        rec = cone(g.dim, g.domain.rays, g.domain.lineality)
        if not rec.contains(d):
            raise ModelingError("outer domain is not closed under decreasing a coordinate")


def compose_vector(g: ConvexPL, fs: Sequence[ConvexPL]) -> ConvexPL:
    """Exact ``g(f_1(x), ..., f_n(x))`` for ``g`` nondecreasing componentwise."""
    check_nondecreasing(g)
    if g.dim != len(fs):
        raise ValueError("outer dimension must equal the number of inner functions")
    n = fs[0].dim
    dom = fs[0].domain
    for f in fs[1:]:
        dom = intersect(dom, f.domain)

    def combos(weights):
        # max over selections of sum_i w_i * piece_i, valid because w >= 0
        for sel in iproduct(*[f.pieces for f in fs]):
            grad = [Fraction(0)] * n
            off = Fraction(0)
            for w, p in zip(weights, sel):
                grad = [x + w * y for x, y in zip(grad, p.gradient)]
                off += w * p.offset
            yield tuple(grad), off

    pieces = []
    for p in g.pieces:
        for grad, off in combos(p.gradient):
            pieces.append(AffinePiece(grad, off + p.offset))
    rows = []
    ineqs, eqs = g.domain._any_h()
    if eqs:
        raise ModelingError("outer domain with equalities cannot be closed downward")
    for a, b in ineqs:
        for grad, off in combos(a):
            rows.append((grad, b - off))
    di, de = dom._any_h()
    full = Polyhedron.from_h(n, tuple(di) + tuple(rows), de)
    if full.is_empty():
        raise ModelingError("composition has an empty domain")
    return ConvexPL(tuple(pieces), full)
