"""Exact rational polyhedra.

A :class:`Polyhedron` carries a pair of representations

* H: rows ``a . x <= b`` plus equality rows ``a . x == b``
* V: vertices, rays and lineality generators

Conversions use the double description method on the homogenized cone,
run over Python integers after clearing denominators.  Both representations
are kept canonical (irredundant, reduced modulo the lineality space or the
equality system, primitive integer directions, sorted), so two polyhedra are
equal as point sets iff their canonical V-representations coincide.

The empty polyhedron has no generators and the single row ``0 . x <= -1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Optional, Sequence

from .rational import (
    dot,
    integerize,
    is_zero,
    matvec,
    nullspace,
    primitive,
    q,
    reduce_mod,
    rref,
    transpose,
    vec,
    zeros,
)

__all__ = [
    "Polyhedron",
    "PolyUnion",
    "UnboundedError",
    "intersect",
    "minkowski_sum",
    "linear_image",
    "linear_preimage",
    "affine_preimage",
    "project",
    "section",
    "polar",
    "contains",
    "is_subset",
    "set_equal",
    "is_empty",
    "recession_cone",
    "normal_cone_convex",
    "tangent_cone_convex",
    "h_to_v",
    "v_to_h",
    "minimize",
    "relint_point",
    "arrangement_cells",
    "union_subset",
    "union_equal",
    "as_union",
    "cone",
]


class UnboundedError(ArithmeticError):
    """Raised when a linear objective is unbounded below on a polyhedron."""


# ---------------------------------------------------------------------------
# double description over the integers


def _idot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _icomb(c1: int, u: Sequence[int], c2: int, v: Sequence[int]) -> tuple[int, ...]:
    w = [c1 * x + c2 * y for x, y in zip(u, v)]
    g = 0
    for x in w:
        g = gcd(g, x)
    if g > 1:
        w = [x // g for x in w]
    return tuple(w)


def _dd(ineqs: Sequence[tuple[int, ...]], eqs: Sequence[tuple[int, ...]], n: int):
    """Extreme rays and lineality basis of ``{y : a.y <= 0, e.y == 0}``.

    Rays are returned modulo the lineality space only up to the combinatorial
    structure; callers canonicalize.
    """
    lin = [integerize(b) for b in nullspace(eqs, n)]
    rays: list[tuple[int, ...]] = []
    zsets: list[frozenset] = []
    processed: set[int] = set()
    for i, a in enumerate(ineqs):
        if not any(a):
            continue
        vals = [_idot(a, l) for l in lin]
        k = next((j for j, v in enumerate(vals) if v != 0), None)
        if k is not None:
            l, c = lin[k], vals[k]
            if c > 0:
                l, c = tuple(-x for x in l), -c
            new_lin = []
            for j, (l2, v2) in enumerate(zip(lin, vals)):
                if j == k:
                    continue
                new_lin.append(l2 if v2 == 0 else _icomb(-c, l2, v2, l))
            new_rays, new_z = [], []
            for r, z in zip(rays, zsets):
                v = _idot(a, r)
                new_rays.append(r if v == 0 else _icomb(-c, r, v, l))
                new_z.append(z | {i})
            new_rays.append(l)
            new_z.append(frozenset(processed))
            lin, rays, zsets = new_lin, new_rays, new_z
        else:
            vr = [_idot(a, r) for r in rays]
            pos = [j for j, v in enumerate(vr) if v > 0]
            neg = [j for j, v in enumerate(vr) if v < 0]
            if pos:
                new_rays, new_z = [], []
                for j, v in enumerate(vr):
                    if v < 0:
                        new_rays.append(rays[j])
                        new_z.append(zsets[j])
                    elif v == 0:
                        new_rays.append(rays[j])
                        new_z.append(zsets[j] | {i})
                for p in pos:
                    for m in neg:
                        common = zsets[p] & zsets[m]
                        if any(
                            common <= zsets[r] for r in range(len(rays)) if r != p and r != m
                        ):
                            continue
                        new_rays.append(_icomb(vr[p], rays[m], -vr[m], rays[p]))
                        new_z.append(common | {i})
                rays, zsets = new_rays, new_z
            else:
                zsets = [z | {i} if v == 0 else z for z, v in zip(zsets, vr)]
        processed.add(i)
    return rays, lin


def _int_rows(rows: Iterable[Sequence]) -> list[tuple[int, ...]]:
    return [integerize(r) for r in rows]


def _canonical_v(dim, vertices, rays, lineality):
    lin_rref, piv = rref(lineality, dim)
    out_v = sorted({reduce_mod(v, lin_rref, piv) for v in vertices})
    out_r = set()
    for r in rays:
        r = reduce_mod(r, lin_rref, piv)
        if not is_zero(r):
            out_r.add(primitive(r))
    lin_out = tuple(primitive(row) for row in lin_rref)
    return tuple(out_v), tuple(sorted(out_r)), lin_out


def _h_to_v(dim, ineqs, eqs):
    rows = [(0,) * dim + (-1,)]
    rows += _int_rows(tuple(a) + (-b,) for a, b in ineqs)
    erows = _int_rows(tuple(a) + (-b,) for a, b in eqs)
    rays, lin = _dd(rows, erows, dim + 1)
    vertices, out_rays = [], []
    for r in rays:
        t = r[dim]
        if t > 0:
            vertices.append(tuple(Fraction(x, t) for x in r[:dim]))
        else:
            out_rays.append(tuple(Fraction(x) for x in r[:dim]))
    if not vertices:
        return (), (), ()
    lineality = [tuple(Fraction(x) for x in l[:dim]) for l in lin]
    return _canonical_v(dim, vertices, out_rays, lineality)


def _empty_h(dim):
    return ((zeros(dim), Fraction(-1)),), ()


def _v_to_h(dim, vertices, rays, lineality):
    if not vertices:
        return _empty_h(dim)
    rows = _int_rows(tuple(v) + (1,) for v in vertices)
    rows += _int_rows(tuple(r) + (0,) for r in rays)
    erows = _int_rows(tuple(l) + (0,) for l in lineality)
    drays, dlin = _dd(rows, erows, dim + 1)
    eq_rows = [tuple(Fraction(x) for x in l[:dim]) + (Fraction(-l[dim]),) for l in dlin]
    eq_rref, piv = rref(eq_rows, dim + 1)
    ineqs = set()
    for r in drays:
        row = tuple(Fraction(x) for x in r[:dim]) + (Fraction(-r[dim]),)
        row = reduce_mod(row, eq_rref, piv)
        if is_zero(row[:dim]):
            continue
        row = primitive(row)
        ineqs.add((row[:dim], row[dim]))
    eqs = []
    for row in eq_rref:
        row = primitive(row)
        eqs.append((row[:dim], row[dim]))
    return tuple(sorted(ineqs)), tuple(eqs)


# ---------------------------------------------------------------------------


def _norm_rows(dim, rows):
    out = []
    for a, b in rows:
        a = vec(a)
        if len(a) != dim:
            raise ValueError(f"row of length {len(a)} in dimension {dim}")
        out.append((a, q(b)))
    return tuple(out)


def _norm_gens(dim, gens):
    out = []
    for g in gens:
        g = vec(g)
        if len(g) != dim:
            raise ValueError(f"generator of length {len(g)} in dimension {dim}")
        out.append(g)
    return tuple(out)


class Polyhedron:
    """Convex polyhedron in Q^dim with lazily computed canonical H/V data.

    Instances are immutable; the cached canonical forms are written once.
    Equality and hashing are set equality.
    """

    def __init__(self, dim: int, *, h=None, v=None):
        if dim < 0:
            raise ValueError("dimension must be nonnegative")
        if (h is None) == (v is None):
            raise ValueError("exactly one of h or v is required")
        self.dim = dim
        self._raw_h = h
        self._raw_v = v

    # constructors ---------------------------------------------------------

    @classmethod
    def from_h(cls, dim: int, ineqs: Iterable = (), eqs: Iterable = ()) -> "Polyhedron":
        return cls(dim, h=(_norm_rows(dim, ineqs), _norm_rows(dim, eqs)))

    @classmethod
    def from_v(
        cls, dim: int, vertices: Iterable = (), rays: Iterable = (), lineality: Iterable = ()
    ) -> "Polyhedron":
        return cls(
            dim,
            v=(_norm_gens(dim, vertices), _norm_gens(dim, rays), _norm_gens(dim, lineality)),
        )

    @classmethod
    def full(cls, dim: int) -> "Polyhedron":
        return cls.from_h(dim)

    @classmethod
    def empty(cls, dim: int) -> "Polyhedron":
        return cls.from_v(dim)

    @classmethod
    def point(cls, x: Iterable) -> "Polyhedron":
        x = vec(x)
        return cls.from_v(len(x), [x])

    @classmethod
    def box(cls, lo: Sequence, hi: Sequence) -> "Polyhedron":
        n = len(lo)
        rows = []
        for i in range(n):
            e = [0] * n
            e[i] = 1
            rows.append((e, hi[i]))
            rows.append(([-x for x in e], -q(lo[i])))
        return cls.from_h(n, rows)

    # canonical data -------------------------------------------------------

    @cached_property
    def _vrep(self):
        if self._raw_v is not None:
            ineqs, eqs = self._hrep
            return _h_to_v(self.dim, ineqs, eqs)
        return _h_to_v(self.dim, *self._raw_h)

    @cached_property
    def _hrep(self):
        if self._raw_v is not None:
            return _v_to_h(self.dim, *self._raw_v)
        return _v_to_h(self.dim, *self._vrep)

    def _any_h(self):
        return self._raw_h if self._raw_h is not None else self._hrep

    def _any_v(self):
        if self._raw_v is not None:
            return self._raw_v
        return self._vrep

    @property
    def ineqs(self) -> tuple:
        return self._hrep[0]

    @property
    def eqs(self) -> tuple:
        return self._hrep[1]

    @property
    def vertices(self) -> tuple:
        return self._vrep[0]

    @property
    def rays(self) -> tuple:
        return self._vrep[1]

    @property
    def lineality(self) -> tuple:
        return self._vrep[2]

    def key(self) -> tuple:
        return (self.dim,) + self._vrep

    # predicates -----------------------------------------------------------

    def is_empty(self) -> bool:
        if self._raw_v is not None:
            return not self._raw_v[0]
        return not self.vertices

    def is_cone(self) -> bool:
        return self.vertices == (zeros(self.dim),)

    def is_bounded(self) -> bool:
        return not self.rays and not self.lineality

    def affine_dim(self) -> int:
        if self.is_empty():
            return -1
        return self.dim - len(self.eqs)

    def is_full_dimensional(self) -> bool:
        return not self.is_empty() and not self.eqs

    def is_zero_cone(self) -> bool:
        return self.vertices == (zeros(self.dim),) and not self.rays and not self.lineality

    def contains(self, x: Sequence) -> bool:
        x = vec(x)
        ineqs, eqs = self._any_h()
        return all(dot(a, x) <= b for a, b in ineqs) and all(dot(a, x) == b for a, b in eqs)

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polyhedron):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        if self.is_empty():
            return f"Polyhedron(dim={self.dim}, empty)"
        return (
            f"Polyhedron(dim={self.dim}, vertices={_show(self.vertices)}, "
            f"rays={_show(self.rays)}, lineality={_show(self.lineality)})"
        )


def _show(gens) -> str:
    return "[" + ", ".join("(" + ", ".join(str(x) for x in g) + ")" for g in gens) + "]"


def cone(dim: int, rays: Iterable = (), lineality: Iterable = ()) -> Polyhedron:
    """Polyhedral cone generated by rays and a lineality space."""
    return Polyhedron.from_v(dim, [zeros(dim)], rays, lineality)


def h_to_v(p: Polyhedron) -> Polyhedron:
    p.vertices
    return p


def v_to_h(p: Polyhedron) -> Polyhedron:
    p.ineqs
    return p


def _check_dims(a: Polyhedron, b: Polyhedron) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def intersect(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    _check_dims(a, b)
    ai, ae = a._any_h()
    bi, be = b._any_h()
    return Polyhedron(a.dim, h=(ai + bi, ae + be))


def minkowski_sum(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    _check_dims(a, b)
    if a.is_empty() or b.is_empty():
        return Polyhedron.empty(a.dim)
    av, ar, al = a._any_v()
    bv, br, bl = b._any_v()
    verts = [tuple(x + y for x, y in zip(u, w)) for u in av for w in bv]
    return Polyhedron(a.dim, v=(tuple(verts), ar + br, al + bl))


def linear_image(p: Polyhedron, M: Sequence[Sequence]) -> Polyhedron:
    M = tuple(vec(r) for r in M)
    if any(len(r) != p.dim for r in M):
        raise ValueError("matrix column count must equal the polyhedron dimension")
    k = len(M)
    if p.is_empty():
        return Polyhedron.empty(k)
    V, R, L = p._any_v()
    img = lambda gens: tuple(matvec(M, g) for g in gens)  # noqa: E731
    return Polyhedron(k, v=(img(V), img(R), img(L)))


def affine_preimage(p: Polyhedron, M: Sequence[Sequence], c: Sequence | None = None) -> Polyhedron:
    """``{x : M x + c in p}``."""
    M = tuple(vec(r) for r in M)
    if len(M) != p.dim:
        raise ValueError("matrix row count must equal the polyhedron dimension")
    n = len(M[0]) if M else 0
    c = vec(c) if c is not None else zeros(p.dim)
    Mt = transpose(M) if M else ()
    ineqs, eqs = p._any_h()

    def pull(rows):
        out = []
        for a, b in rows:
            out.append((matvec(Mt, a) if n else (), b - dot(a, c)))
        return tuple(out)

    return Polyhedron(n, h=(pull(ineqs), pull(eqs)))


def linear_preimage(p: Polyhedron, M: Sequence[Sequence]) -> Polyhedron:
    return affine_preimage(p, M)


def project(p: Polyhedron, keep: Sequence[int]) -> Polyhedron:
    if any(i < 0 or i >= p.dim for i in keep):
        raise ValueError("projection indices out of range")
    rows = [[1 if j == i else 0 for j in range(p.dim)] for i in keep]
    return linear_image(p, rows)


def section(p: Polyhedron, fixed: dict[int, object]) -> Polyhedron:
    """Points of ``p`` with the given coordinates fixed, expressed in the free coordinates."""
    free = [i for i in range(p.dim) if i not in fixed]
    M = [[1 if col == f else 0 for f in free] for col in range(p.dim)]
    c = [q(fixed[i]) if i in fixed else 0 for i in range(p.dim)]
    return affine_preimage(p, M, c)


def polar(c: Polyhedron) -> Polyhedron:
    """``{v : <v, w> <= 0 for all w in c}`` for a cone ``c``."""
    if c.is_empty():
        return Polyhedron.full(c.dim)
    if not c.is_cone():
        raise ValueError("polar is defined here for cones only")
    ineqs = [(r, 0) for r in c.rays]
    eqs = [(l, 0) for l in c.lineality]
    return Polyhedron.from_h(c.dim, ineqs, eqs)


def contains(p: Polyhedron, x: Sequence) -> bool:
    return p.contains(x)


def is_empty(p: Polyhedron) -> bool:
    return p.is_empty()


def is_subset(a: Polyhedron, b: Polyhedron) -> bool:
    _check_dims(a, b)
    if a.is_empty():
        return True
    if b.is_empty():
        return False
    V, R, L = a._any_v()
    ineqs, eqs = b._any_h()
    for v in V:
        if not b.contains(v):
            return False
    for r in R:
        if any(dot(x, r) > 0 for x, _ in ineqs) or any(dot(x, r) != 0 for x, _ in eqs):
            return False
    for l in L:
        if any(dot(x, l) != 0 for x, _ in ineqs) or any(dot(x, l) != 0 for x, _ in eqs):
            return False
    return True


def set_equal(a: Polyhedron, b: Polyhedron) -> bool:
    return a == b


def recession_cone(p: Polyhedron) -> Polyhedron:
    if p.is_empty():
        return Polyhedron.empty(p.dim)
    return cone(p.dim, p.rays, p.lineality)


def normal_cone_convex(p: Polyhedron, x: Sequence) -> Polyhedron:
    """Normal cone of convex analysis; the empty set when ``x`` is outside ``p``."""
    x = vec(x)
    if not p.contains(x):
        return Polyhedron.empty(p.dim)
    ineqs, eqs = p._any_h()
    rays = [a for a, b in ineqs if dot(a, x) == b]
    return cone(p.dim, rays, [a for a, _ in eqs])


def tangent_cone_convex(p: Polyhedron, x: Sequence) -> Polyhedron:
    x = vec(x)
    if not p.contains(x):
        return Polyhedron.empty(p.dim)
    ineqs, eqs = p._any_h()
    act = [(a, 0) for a, b in ineqs if dot(a, x) == b]
    return Polyhedron.from_h(p.dim, act, [(a, 0) for a, _ in eqs])


def minimize(p: Polyhedron, c: Sequence):
    """Exact LP ``min <c, x>`` over ``p``.

    Returns ``(value, argmin)`` with the lexicographically least optimal
    vertex, ``None`` for an empty ``p``; raises :class:`UnboundedError`.
    """
    c = vec(c)
    if p.is_empty():
        return None
    if any(dot(c, l) != 0 for l in p.lineality) or any(dot(c, r) < 0 for r in p.rays):
        raise UnboundedError("objective unbounded below")
    best = min(p.vertices, key=lambda v: (dot(c, v), v))
    return dot(c, best), best


# ---------------------------------------------------------------------------
# strict feasibility and hyperplane arrangements


def relint_point(dim: int, ineqs=(), eqs=(), strict=()) -> Optional[tuple]:
    """A point with ``a.x <= b`` (ineqs), ``a.x == b`` (eqs), ``a.x < b`` (strict).

    Returns ``None`` when the system is infeasible.
    """
    if not strict:
        p = Polyhedron(dim, h=(tuple(ineqs), tuple(eqs)))
        return p.vertices[0] if not p.is_empty() else None
    one = Fraction(1)
    lifted = [(tuple(a) + (Fraction(0),), b) for a, b in ineqs]
    lifted += [(tuple(a) + (one,), b) for a, b in strict]
    lifted.append((zeros(dim) + (one,), one))
    leqs = [(tuple(a) + (Fraction(0),), b) for a, b in eqs]
    p = Polyhedron(dim + 1, h=(tuple(lifted), tuple(leqs)))
    res = minimize(p, zeros(dim) + (Fraction(-1),))
    if res is None or res[0] >= 0:
        return None
    return res[1][:dim]


def _hyperplane_key(a, b):
    row = primitive(tuple(a) + (b,))
    lead = next(x for x in row if x != 0)
    return row if lead > 0 else tuple(-x for x in row)


def arrangement_cells(dim: int, ineqs, eqs, hyperplanes) -> list[tuple[tuple[int, ...], tuple]]:
    """Nonempty sign classes of an affine hyperplane arrangement inside a polyhedron.

    The region is ``{ineqs, eqs}``; each class is returned as its sign vector
    (one entry in -1/0/+1 per hyperplane, in input order after removing
    duplicates and zero rows) and a rational point realizing it.
    """
    seen = set()
    hps = []
    for a, b in hyperplanes:
        if is_zero(a):
            continue
        k = _hyperplane_key(a, b)
        if k in seen:
            continue
        seen.add(k)
        hps.append((k[:dim], k[dim]))
    start = relint_point(dim, ineqs, eqs)
    if start is None:
        return []
    cells = [((), (), (), start)]
    for a, b in hps:
        nxt = []
        for signs, ceqs, cstrict, pt in cells:
            s0 = dot(a, pt) - b
            s0 = (s0 > 0) - (s0 < 0)
            for s in (-1, 0, 1):
                if s == 0:
                    e2, st2 = ceqs + ((a, b),), cstrict
                elif s < 0:
                    e2, st2 = ceqs, cstrict + ((a, b),)
                else:
                    e2, st2 = ceqs, cstrict + ((tuple(-x for x in a), -b),)
                if s == s0:
                    p2 = pt
                else:
                    p2 = relint_point(dim, ineqs, tuple(eqs) + e2, st2)
                    if p2 is None:
                        continue
                nxt.append((signs + (s,), e2, st2, p2))
        cells = nxt
    return [(signs, pt) for signs, _, _, pt in cells]


# ---------------------------------------------------------------------------
# finite unions


@dataclass(frozen=True, eq=False)
class PolyUnion:
    """Finite union of nonempty polyhedra in a common dimension.

    Construction drops empty parts and parts contained in other parts and
    sorts the remainder, so the part list is deterministic.
    """

    dim: int
    parts: tuple = ()

    def __post_init__(self):
        parts = []
        for p in self.parts:
            if p.dim != self.dim:
                raise ValueError("all parts must share the union's dimension")
            if not p.is_empty():
                parts.append(p)
        uniq = sorted(set(parts), key=lambda p: p.key())
        kept = []
        for i, p in enumerate(uniq):
            if any(j != i and is_subset(p, o) for j, o in enumerate(uniq)):
                continue
            kept.append(p)
        object.__setattr__(self, "parts", tuple(kept))

    @classmethod
    def of(cls, p: Polyhedron) -> "PolyUnion":
        return cls(p.dim, (p,))

    def is_empty(self) -> bool:
        return not self.parts

    def is_convex_part(self) -> bool:
        return len(self.parts) == 1

    def contains(self, x) -> bool:
        return any(p.contains(x) for p in self.parts)

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def hull(self) -> Polyhedron:
        """Closed convex hull of the union."""
        if not self.parts:
            return Polyhedron.empty(self.dim)
        V, R, L = [], [], []
        for p in self.parts:
            V += p.vertices
            R += p.rays
            L += p.lineality
        return Polyhedron.from_v(self.dim, V, R, L)

    def __repr__(self) -> str:
        return f"PolyUnion(dim={self.dim}, parts={list(self.parts)})"


def as_union(x) -> PolyUnion:
    if isinstance(x, PolyUnion):
        return x
    if isinstance(x, Polyhedron):
        return PolyUnion.of(x)
    raise TypeError(f"expected Polyhedron or PolyUnion, got {type(x).__name__}")


def union_subset(a, b) -> tuple[bool, Optional[tuple]]:
    """Exact test ``a ⊆ b`` for polyhedra or unions; returns (holds, witness in a∖b)."""
    a, b = as_union(a), as_union(b)
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    for p in a.parts:
        if any(is_subset(p, o) for o in b.parts):
            continue
        touching = [o for o in b.parts if not intersect(p, o).is_empty()]
        if not touching:
            return False, p.vertices[0]
        hps = []
        for o in touching:
            ineqs, eqs = o._any_h()
            hps += list(ineqs) + list(eqs)
        pi, pe = p._any_h()
        for _, pt in arrangement_cells(p.dim, pi, pe, hps):
            if not any(o.contains(pt) for o in touching):
                return False, pt
    return True, None


def union_equal(a, b) -> bool:
    return union_subset(a, b)[0] and union_subset(b, a)[0]
