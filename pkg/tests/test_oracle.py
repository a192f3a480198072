from fractions import Fraction

import pytest
from hypothesis import given

from vacal.normal_cones import clarke_directional_derivative, frechet_normal_union
from vacal.oracle import (
    SamplingConfig,
    clarke_dirderiv_estimate,
    frechet_normal_reject,
    limiting_normal_sample,
    lp_minimize,
    simplex,
    subgradient_membership_exact,
)
from vacal.pl_functions import CellPL, ConvexPL, cell_sum, piece, to_cells
from vacal.polyhedra import PolyUnion, Polyhedron, cone

from .conftest import cone_unions, convex_pl, vectors

F = Fraction
O2 = (F(0), F(0))
ABS = ConvexPL.make(1, [((1,), 0), ((-1,), 0)])


def negate(f):
    c = to_cells(f)
    return CellPL(tuple((cell, piece(tuple(-a for a in p.gradient), -p.offset)) for cell, p in c.cells))


def test_simplex_statuses():
    # min x + y subject to x + y = 1, x, y >= 0
    res = simplex([1, 1], [[1, 1]], [1])
    assert res.status == "optimal" and res.value == 1
    assert lp_minimize([-1], [((1,), 2)]).value == -2
    assert lp_minimize([-1], [((-1,), 0)]).status == "unbounded"
    assert lp_minimize([1], [((1,), -1), ((-1,), -1)]).status == "infeasible"


def test_degenerate_lp_terminates():
    rows = [((1, 1), 0), ((1, -1), 0), ((-1, 0), 0), ((1, 2), 0)]
    res = lp_minimize([-1, 0], rows)
    assert res.status == "optimal" and res.value == 0


def test_sampling_config_validation():
    with pytest.raises(ValueError):
        SamplingConfig(radius_sequence=(1, 2))
    with pytest.raises(ValueError):
        SamplingConfig(grid_density=1)
    with pytest.raises(ValueError):
        SamplingConfig(tolerance="-1/2")
    assert SamplingConfig(tolerance="1/100").tolerance == F(1, 100)


def test_membership_oracle_on_abs():
    assert subgradient_membership_exact(ABS, (0,), (F(1, 2),))
    assert not subgradient_membership_exact(ABS, (0,), (F(3, 2),))
    assert not subgradient_membership_exact(ABS, (1,), (0,))


def test_frechet_rejection_on_cross():
    cross = PolyUnion(2, (cone(2, lineality=[(1, 0)]), cone(2, lineality=[(0, 1)])))
    r = frechet_normal_reject(cross, O2, (1, 0))
    assert r.rejected and r.witness is not None
    assert not frechet_normal_reject(cross, O2, (0, 0)).rejected


def test_limiting_sample_flags_a_wrong_cone():
    cross = PolyUnion(2, (cone(2, lineality=[(1, 0)]), cone(2, lineality=[(0, 1)])))
    wrong = cone(2, lineality=[(1, 0)])
    s = limiting_normal_sample(cross, O2, exact=wrong)
    assert not s.contained and s.containment_witness is not None
    right = limiting_normal_sample(cross, O2)
    assert right.contained and right.covered


def test_limiting_sample_misses_a_spurious_part():
    half = Polyhedron.from_h(2, [((0, 1), 0)])
    bogus = PolyUnion(2, (cone(2, rays=[(0, 1)]), cone(2, rays=[(1, 1)])))
    s = limiting_normal_sample(half, O2, exact=bogus)
    assert s.contained and not s.covered


def test_dirderiv_estimate_for_negative_abs():
    f = negate(ABS)
    est = clarke_dirderiv_estimate(f, (0,), (1,))
    assert est.estimate == clarke_directional_derivative(f, (0,), (1,)) == 1


# ---------------------------------------------------------------------------
# properties


@given(convex_pl(2), vectors(2), vectors(2))
def test_membership_oracle_matches_active_pieces(f, x, xs):
    from vacal.pl_functions import subdifferential_convex

    assert subgradient_membership_exact(f, x, xs) == subdifferential_convex(f, x).contains(xs)


@given(convex_pl(2), convex_pl(2), vectors(2), vectors(2))
def test_dirderiv_estimate_is_close_from_below(f, g, x, v):
    h = cell_sum(to_cells(f), negate(g))
    exact = clarke_directional_derivative(h, x, v)
    est = clarke_dirderiv_estimate(h, x, v).estimate
    assert est <= exact
    assert exact - est <= F(1, 1000)


@given(cone_unions(2))
def test_exact_frechet_generators_pass(omega):
    fr = frechet_normal_union(omega, O2)
    for r in fr.rays:
        assert not frechet_normal_reject(omega, O2, r).rejected


@given(cone_unions(2))
def test_limiting_sampling_agrees(omega):
    s = limiting_normal_sample(omega, O2)
    assert s.contained and s.covered
