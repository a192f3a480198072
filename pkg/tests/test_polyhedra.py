from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from vacal.oracle import lp_minimize
from vacal.polyhedra import (
    PolyUnion,
    Polyhedron,
    UnboundedError,
    affine_preimage,
    arrangement_cells,
    cone,
    intersect,
    is_subset,
    linear_image,
    minimize,
    minkowski_sum,
    normal_cone_convex,
    polar,
    project,
    recession_cone,
    relint_point,
    section,
    set_equal,
    tangent_cone_convex,
    union_equal,
    union_subset,
)
from vacal.rational import dot

from .conftest import cones, h_polyhedra, polyhedra, polytopes, vectors

F = Fraction


def test_box_vertices_and_facets():
    b = Polyhedron.box([0, 0], [1, 2])
    assert sorted(b.vertices) == [(0, 0), (0, 2), (1, 0), (1, 2)]
    assert len(b.ineqs) == 4 and not b.eqs
    assert b.is_bounded() and b.is_full_dimensional()


def test_empty_has_contradictory_row():
    e = Polyhedron.from_h(2, [((1, 0), -1), ((-1, 0), -1)])
    assert e.is_empty()
    assert e == Polyhedron.empty(2)
    assert e.ineqs == (((0, 0), -1),)


def test_point_and_line():
    p = Polyhedron.point([F(1, 2), 3])
    assert p.affine_dim() == 0 and p.contains((F(1, 2), 3))
    line = Polyhedron.from_v(2, [(0, 0)], lineality=[(1, 1)])
    assert line.affine_dim() == 1 and line.contains((-5, -5)) and not line.contains((1, 0))
    assert line.is_cone()


def test_canonical_equality_across_representations():
    a = Polyhedron.from_h(2, [((-1, 0), 0), ((0, -1), 0), ((1, 1), 1)])
    b = Polyhedron.from_v(2, [(0, 0), (1, 0), (0, 1), (F(1, 3), F(1, 3))])
    assert a == b and hash(a) == hash(b)


def test_minimize_and_unbounded():
    p = Polyhedron.from_h(2, [((-1, 0), 0), ((0, -1), 0)])
    val, arg = minimize(p, (1, 2))
    assert val == 0 and arg == (0, 0)
    with pytest.raises(UnboundedError):
        minimize(p, (-1, 0))
    assert minimize(Polyhedron.empty(2), (1, 0)) is None


def test_relint_point_respects_strict_rows():
    v = relint_point(2, [((1, 0), 1)], (), [((-1, 0), 0)])
    assert v is not None and 0 < v[0] <= 1
    assert relint_point(1, [((1,), 0)], (), [((-1,), 0)]) is None


def test_arrangement_cells_of_two_lines():
    cells = arrangement_cells(2, (), (), [((1, 0), 0), ((0, 1), 0)])
    # 4 open quadrants, 4 open half-axes and the origin
    assert len(cells) == 9
    assert len({s for s, _ in cells}) == 9


def test_project_and_section():
    tri = Polyhedron.from_v(2, [(0, 0), (2, 0), (0, 2)])
    assert project(tri, [0]) == Polyhedron.box([0], [2])
    assert section(tri, {0: 1}) == Polyhedron.box([0], [1])


def test_union_subset_reports_witness():
    a = Polyhedron.box([0], [2])
    b = PolyUnion(1, (Polyhedron.box([0], [1]), Polyhedron.box([F(3, 2)], [2])))
    ok, w = union_subset(a, b)
    assert not ok and 1 < w[0] < F(3, 2)
    c = PolyUnion(1, (Polyhedron.box([0], [1]), Polyhedron.box([1], [2])))
    assert union_subset(a, c) == (True, None)
    assert union_equal(a, c)


def test_polyunion_prunes_and_sorts():
    big = Polyhedron.box([0], [2])
    u = PolyUnion(1, (Polyhedron.box([0], [1]), Polyhedron.empty(1), big))
    assert u.parts == (big,)
    assert PolyUnion(1, (Polyhedron.box([3], [4]), big)).parts == PolyUnion(1, (big, Polyhedron.box([3], [4]))).parts


# ---------------------------------------------------------------------------
# properties


@given(polyhedra(2))
def test_v_h_round_trip(p):
    back = Polyhedron.from_h(2, p.ineqs, p.eqs)
    assert back == p
    again = Polyhedron.from_v(2, back.vertices, back.rays, back.lineality)
    assert again == p


@given(h_polyhedra(3))
def test_h_v_round_trip_3d(p):
    if p.is_empty():
        return
    assert Polyhedron.from_v(3, p.vertices, p.rays, p.lineality) == p


@given(polyhedra(2))
def test_generators_satisfy_rows(p):
    for v in p.vertices:
        assert all(dot(a, v) <= b for a, b in p.ineqs)
        assert all(dot(a, v) == b for a, b in p.eqs)
    for r in p.rays:
        assert all(dot(a, r) <= 0 for a, _ in p.ineqs)
    for l in p.lineality:
        assert all(dot(a, l) == 0 for a, _ in p.ineqs + p.eqs)


@given(cones(2))
def test_polar_involution(c):
    assert polar(polar(c)) == c


@given(cones(3), vectors(3))
def test_polar_membership(c, y):
    inside = all(dot(y, g) <= 0 for g in c.rays) and all(dot(y, g) == 0 for g in c.lineality)
    assert polar(c).contains(y) == inside


@given(polyhedra(2), polyhedra(2), vectors(2))
def test_intersection_membership(a, b, x):
    assert intersect(a, b).contains(x) == (a.contains(x) and b.contains(x))


@given(polytopes(2), polytopes(2))
def test_minkowski_sum_of_polytopes(a, b):
    s = minkowski_sum(a, b)
    for u in a.vertices:
        for v in b.vertices:
            assert s.contains(tuple(x + y for x, y in zip(u, v)))
    for w in s.vertices:
        assert any(
            w == tuple(x + y for x, y in zip(u, v)) for u in a.vertices for v in b.vertices
        )


@given(st.lists(cones(2), min_size=1, max_size=3))
def test_hull_of_cone_union_is_minkowski_sum(cs):
    total = cs[0]
    for c in cs[1:]:
        total = minkowski_sum(total, c)
    assert PolyUnion(2, tuple(cs)).hull() == total


@given(polyhedra(2), st.lists(vectors(2), min_size=2, max_size=2), vectors(2))
def test_preimage_membership(p, M, x):
    pre = affine_preimage(p, M)
    assert pre.contains(x) == p.contains(tuple(dot(r, x) for r in M))


@given(polytopes(2), st.lists(vectors(2), min_size=1, max_size=3))
def test_image_contains_images_of_vertices(p, M):
    img = linear_image(p, M)
    for v in p.vertices:
        assert img.contains(tuple(dot(r, v) for r in M))


@given(h_polyhedra(2), vectors(2))
def test_minimize_agrees_with_simplex(p, c):
    res = lp_minimize(c, p.ineqs, p.eqs)
    try:
        mine = minimize(p, c)
    except UnboundedError:
        assert res.status == "unbounded"
        return
    if mine is None:
        assert res.status == "infeasible"
    else:
        assert res.status == "optimal" and res.value == mine[0]


@given(polyhedra(2))
def test_recession_cone_directions(p):
    rc = recession_cone(p)
    assert rc.is_cone()
    for r in p.rays + p.lineality:
        assert rc.contains(r)


@given(polyhedra(2), st.data())
def test_normal_and_tangent_are_polar(p, data):
    x = data.draw(st.sampled_from(p.vertices))
    n = normal_cone_convex(p, x)
    t = tangent_cone_convex(p, x)
    assert polar(t) == n and polar(n) == t


@given(polyhedra(2), polyhedra(2))
def test_subset_matches_union_subset(a, b):
    assert is_subset(a, b) == union_subset(a, b)[0]
    if is_subset(a, b) and is_subset(b, a):
        assert set_equal(a, b)


def test_cone_constructor():
    c = cone(2, rays=[(1, 0), (0, 1)])
    assert c.contains((3, 4)) and not c.contains((-1, 0))
