from fractions import Fraction

from hypothesis import given, strategies as st

from vacal.normal_cones import (
    active_gradients,
    clarke_directional_derivative,
    clarke_normal_union,
    clarke_subdifferential,
    clarke_tangent_cone,
    frechet_normal_union,
    frechet_subdifferential,
    is_lower_regular,
    limiting_normal_union,
    limiting_singular_subdifferential,
    limiting_subdifferential,
)
from vacal.oracle import SamplingConfig, frechet_normal_reject, limiting_normal_sample
from vacal.pl_functions import (
    CellPL,
    ConvexPL,
    cell_sum,
    indicator,
    indicator_union,
    piece,
    subdifferential_convex,
    support,
    to_cells,
)
from vacal.polyhedra import (
    PolyUnion,
    Polyhedron,
    cone,
    normal_cone_convex,
    polar,
    union_equal,
    union_subset,
)

from .conftest import cone_unions, convex_pl, polyhedra, vectors

F = Fraction
O2 = (F(0), F(0))


def negate(f):
    c = to_cells(f)
    return CellPL(tuple((cell, piece(tuple(-a for a in p.gradient), -p.offset)) for cell, p in c.cells))


def line(*d):
    return cone(len(d), lineality=[d])


CROSS = PolyUnion(2, (line(1, 0), line(0, 1)))


def test_cross_at_origin():
    assert frechet_normal_union(CROSS, O2) == Polyhedron.point(O2)
    assert union_equal(limiting_normal_union(CROSS, O2), CROSS)
    assert clarke_normal_union(CROSS, O2) == Polyhedron.full(2)
    assert clarke_tangent_cone(CROSS, O2) == Polyhedron.point(O2)


def test_point_off_the_set_has_empty_cones():
    assert frechet_normal_union(CROSS, (1, 1)).is_empty()
    assert limiting_normal_union(CROSS, (1, 1)).is_empty()
    assert clarke_normal_union(CROSS, (1, 1)).is_empty()


def test_negative_abs():
    f = negate(ConvexPL.make(1, [((1,), 0), ((-1,), 0)]))
    assert frechet_subdifferential(f, (0,)).is_empty()
    assert union_equal(limiting_subdifferential(f, (0,)), PolyUnion(1, (Polyhedron.point([-1]), Polyhedron.point([1]))))
    assert clarke_subdifferential(f, (0,)) == Polyhedron.box([-1], [1])
    assert not is_lower_regular(f, (0,))
    assert active_gradients(f, (0,)) == [(-1,), (1,)]
    assert clarke_directional_derivative(f, (0,), (1,)) == 1


def test_singular_subdifferential_of_indicator():
    f = indicator(Polyhedron.from_h(1, [((-1,), 0)]))
    sing = limiting_singular_subdifferential(f, (0,))
    assert union_equal(sing, Polyhedron.from_h(1, [((1,), 0)]))


def test_three_dimensional_axis_union_plane():
    axis = line(0, 0, 1)
    plane = cone(3, lineality=[(1, 0, 0), (0, 1, 0)])
    omega = PolyUnion(3, (axis, plane))
    o = (0, 0, 0)
    lim = limiting_normal_union(omega, o)
    assert union_equal(lim, PolyUnion(3, (plane, axis)))
    assert clarke_normal_union(omega, o) == Polyhedron.full(3)
    assert frechet_normal_union(omega, o) == Polyhedron.point(o)


# ---------------------------------------------------------------------------
# properties


@given(polyhedra(2), st.data())
def test_convex_sets_collapse(p, data):
    x = data.draw(st.sampled_from(p.vertices))
    n = normal_cone_convex(p, x)
    assert frechet_normal_union(p, x) == n
    assert union_equal(limiting_normal_union(p, x), n)
    assert clarke_normal_union(p, x) == n


@given(cone_unions(2))
def test_cone_inclusions_and_hull(omega):
    fr = frechet_normal_union(omega, O2)
    lim = limiting_normal_union(omega, O2)
    cl = clarke_normal_union(omega, O2)
    assert union_subset(fr, lim)[0]
    assert union_subset(lim, cl)[0]
    assert cl == lim.hull()
    assert polar(clarke_tangent_cone(omega, O2)) == cl


@given(cone_unions(3, max_parts=2))
def test_cone_inclusions_3d(omega):
    o = (F(0),) * 3
    lim = limiting_normal_union(omega, o)
    assert union_subset(frechet_normal_union(omega, o), lim)[0]
    assert clarke_normal_union(omega, o) == lim.hull()


@given(cone_unions(2))
def test_frechet_generators_survive_sampling(omega):
    cfg = SamplingConfig(seed=1)
    fr = frechet_normal_union(omega, O2)
    for r in fr.rays + fr.lineality + tuple(tuple(-a for a in v) for v in fr.lineality):
        assert not frechet_normal_reject(omega, O2, r, cfg).rejected


@given(cone_unions(2, max_parts=2))
def test_limiting_cone_matches_sampling(omega):
    s = limiting_normal_sample(omega, O2, SamplingConfig(seed=2))
    assert s.contained and s.covered


@given(cone_unions(2))
def test_indicator_subdifferential_is_normal_cone(omega):
    f = indicator_union(omega)
    assert union_equal(limiting_subdifferential(f, O2), limiting_normal_union(omega, O2))
    assert union_equal(limiting_singular_subdifferential(f, O2), limiting_normal_union(omega, O2))
    assert clarke_subdifferential(f, O2) == clarke_normal_union(omega, O2)


@given(convex_pl(2, with_domain=True), st.data())
def test_convex_functions_collapse(f, data):
    x = data.draw(st.sampled_from(f.domain.vertices))
    sd = subdifferential_convex(f, x)
    assert frechet_subdifferential(f, x) == sd
    assert union_equal(limiting_subdifferential(f, x), sd)
    assert clarke_subdifferential(f, x) == sd
    assert is_lower_regular(f, x)


@given(convex_pl(2), convex_pl(2), vectors(2), vectors(2))
def test_lipschitz_clarke_is_hull_of_gradients(f, g, x, v):
    h = cell_sum(to_cells(f), negate(g))
    cl = clarke_subdifferential(h, x)
    assert cl == Polyhedron.from_v(2, active_gradients(h, x))
    assert cl == limiting_subdifferential(h, x).hull()
    assert support(cl, v) == clarke_directional_derivative(h, x, v)
