"""Fréchet, limiting and Clarke normal cones of finite unions of polyhedra.

Near a point x̄ a union of polyhedra coincides with x̄ plus the union of the
tangent cones of the parts containing x̄.  That local model is a union of
polyhedral cones, so every normal cone of the union at x̄ can be read off
from it:

* the Fréchet cone at w is the polar of the union of tangent cones at w,
  i.e. the intersection of the convex normal cones of the parts containing w;
* the Fréchet cone is constant on each cell of the hyperplane arrangement
  cut out by all facet rows of all local cones, and the model is invariant
  under positive scaling, so each cell's cone is attained arbitrarily close
  to x̄; the limiting cone is the (finite) union of those cell cones;
* the Clarke cone is the convex hull of the limiting cone, which for
  finitely many polyhedral cones is their Minkowski sum.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .pl_functions import (
    INF,
    CellPL,
    ConvexPL,
    epigraph_union,
    eval_pl,
    slice_last,
    to_cells,
)
from .polyhedra import (
    PolyUnion,
    Polyhedron,
    arrangement_cells,
    as_union,
    intersect,
    minkowski_sum,
    normal_cone_convex,
    polar,
    tangent_cone_convex,
)
from .rational import dot, vec


def _active_parts(omega: PolyUnion, x) -> list[Polyhedron]:
    # parts at positive distance from x cannot influence any cone at x
    return [p for p in omega.parts if p.contains(x)]


def frechet_normal_union(omega, x) -> Polyhedron:
    """Fréchet normal cone; the empty set when ``x`` is outside ``omega``."""
    omega, x = as_union(omega), vec(x)
    act = _active_parts(omega, x)
    if not act:
        return Polyhedron.empty(omega.dim)
    out = normal_cone_convex(act[0], x)
    for p in act[1:]:
        out = intersect(out, normal_cone_convex(p, x))
    return out


def local_cones(omega, x) -> list[Polyhedron]:
    """Tangent cones at ``x`` of the parts that contain ``x``."""
    omega, x = as_union(omega), vec(x)
    return [tangent_cone_convex(p, x) for p in _active_parts(omega, x)]


def strata(omega, x) -> list[tuple[tuple, Polyhedron]]:
    """One representative direction per stratum of the local model, with its Fréchet cone.

    A stratum is a cell of the arrangement of all facet hyperplanes of the
    local cones, intersected with the local model.  The zero direction is
    always among the representatives.
    """
    cones = local_cones(omega, x)
    if not cones:
        return []
    dim = cones[0].dim
    hps = []
    for t in cones:
        hps += [(a, Fraction(0)) for a, _ in t.ineqs]
        hps += [(a, Fraction(0)) for a, _ in t.eqs]
    out, seen = [], set()
    for t in cones:
        for signs, w in arrangement_cells(dim, t.ineqs, t.eqs, hps):
            if signs in seen:
                continue
            seen.add(signs)
            containing = [k for k in cones if k.contains(w)]
            n = normal_cone_convex(containing[0], w)
            for k in containing[1:]:
                n = intersect(n, normal_cone_convex(k, w))
            out.append((w, n))
    return out


def limiting_normal_union(omega, x) -> PolyUnion:
    """Limiting normal cone as a union of polyhedral cones (empty union off ``omega``)."""
    omega = as_union(omega)
    return PolyUnion(omega.dim, tuple(n for _, n in strata(omega, x)))


def clarke_normal_union(omega, x) -> Polyhedron:
    """Clarke normal cone: convex hull of the limiting cone."""
    omega = as_union(omega)
    lim = limiting_normal_union(omega, x)
    if lim.is_empty():
        return Polyhedron.empty(omega.dim)
    out = lim.parts[0]
    for c in lim.parts[1:]:
        out = minkowski_sum(out, c)
    return out


def clarke_tangent_cone(omega, x) -> Polyhedron:
    omega = as_union(omega)
    n = clarke_normal_union(omega, x)
    if n.is_empty():
        return Polyhedron.empty(omega.dim)
    return polar(n)


def is_snc(*_args) -> bool:
    """Sequential normal compactness (and its epigraphical/partial variants).

    Every subset of a finite-dimensional space has it, so this is constant.
    """
    return True


# ---------------------------------------------------------------------------
# subdifferentials through the epigraph


def _base(f, x):
    x = vec(x)
    fx = eval_pl(f, x)
    if fx == INF:
        return None
    return x + (fx,)


def _slice_union(u: PolyUnion, value) -> PolyUnion:
    return PolyUnion(u.dim - 1, tuple(slice_last(c, value) for c in u.parts))


def limiting_subdifferential(f, x) -> PolyUnion:
    base = _base(f, x)
    if base is None:
        return PolyUnion(f.dim, ())
    return _slice_union(limiting_normal_union(epigraph_union(f), base), -1)


def limiting_singular_subdifferential(f, x) -> PolyUnion:
    base = _base(f, x)
    if base is None:
        return PolyUnion(f.dim, ())
    return _slice_union(limiting_normal_union(epigraph_union(f), base), 0)


def clarke_subdifferential(f, x) -> Polyhedron:
    base = _base(f, x)
    if base is None:
        return Polyhedron.empty(f.dim)
    return slice_last(clarke_normal_union(epigraph_union(f), base), -1)


def clarke_singular_subdifferential(f, x) -> Polyhedron:
    base = _base(f, x)
    if base is None:
        return Polyhedron.empty(f.dim)
    return slice_last(clarke_normal_union(epigraph_union(f), base), 0)


def frechet_subdifferential(f, x) -> Polyhedron:
    base = _base(f, x)
    if base is None:
        return Polyhedron.empty(f.dim)
    return slice_last(frechet_normal_union(epigraph_union(f), base), -1)


def is_lower_regular(f, x) -> bool:
    """Fréchet and Clarke subdifferentials coincide at ``x``."""
    return frechet_subdifferential(f, x) == clarke_subdifferential(f, x)


def _require_full_domain(f) -> CellPL:
    f = to_cells(f)
    if not f.is_full_domain():
        raise ValueError("requires full-domain PL (a Lipschitz function on the whole space)")
    return f


def active_gradients(f, x) -> list[tuple]:
    """Gradients of the full-dimensional cells of a full-domain function that contain ``x``."""
    f = _require_full_domain(f)
    x = vec(x)
    grads = []
    for c, p in f.cells:
        if c.is_full_dimensional() and c.contains(x) and p.gradient not in grads:
            grads.append(p.gradient)
    return sorted(grads)


def clarke_directional_derivative(f, x, v) -> Fraction:
    v = vec(v)
    return max(dot(g, v) for g in active_gradients(f, x))


__all__ = [
    "ConvexPL",
    "CellPL",
    "frechet_normal_union",
    "limiting_normal_union",
    "clarke_normal_union",
    "clarke_tangent_cone",
    "limiting_subdifferential",
    "limiting_singular_subdifferential",
    "clarke_subdifferential",
    "clarke_singular_subdifferential",
    "frechet_subdifferential",
    "is_lower_regular",
    "clarke_directional_derivative",
    "active_gradients",
    "is_snc",
    "local_cones",
    "strata",
]
