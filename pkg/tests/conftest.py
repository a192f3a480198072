from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from vacal.pl_functions import ConvexPL, piece
from vacal.polyhedra import Polyhedron, PolyUnion

settings.register_profile(
    "vacal",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("vacal")

small_int = st.integers(min_value=-3, max_value=3)
small_q = st.builds(Fraction, st.integers(-6, 6), st.sampled_from([1, 2, 3]))


def vectors(dim, elems=small_int):
    return st.tuples(*[elems.map(Fraction) for _ in range(dim)])


def nonzero_vectors(dim):
    return vectors(dim).filter(lambda v: any(v))


@st.composite
def polytopes(draw, dim=2, min_pts=1, max_pts=5):
    pts = draw(st.lists(vectors(dim), min_size=min_pts, max_size=max_pts, unique=True))
    return Polyhedron.from_v(dim, pts)


@st.composite
def polyhedra(draw, dim=2):
    """Nonempty polyhedra given by generators (possibly unbounded, possibly with lines)."""
    pts = draw(st.lists(vectors(dim), min_size=1, max_size=4, unique=True))
    rays = draw(st.lists(nonzero_vectors(dim), max_size=2))
    lin = draw(st.lists(nonzero_vectors(dim), max_size=1))
    return Polyhedron.from_v(dim, pts, rays, lin)


@st.composite
def cones(draw, dim=2):
    rays = draw(st.lists(nonzero_vectors(dim), min_size=0, max_size=3))
    lin = draw(st.lists(nonzero_vectors(dim), max_size=1))
    return Polyhedron.from_v(dim, [(Fraction(0),) * dim], rays, lin)


@st.composite
def h_polyhedra(draw, dim=2, min_rows=1, max_rows=4):
    rows = draw(st.lists(st.tuples(nonzero_vectors(dim), small_int.map(Fraction)), min_size=min_rows, max_size=max_rows))
    return Polyhedron.from_h(dim, rows)


@st.composite
def convex_pl(draw, dim=1, max_pieces=3, with_domain=False):
    pcs = draw(st.lists(st.tuples(vectors(dim), small_int), min_size=1, max_size=max_pieces))
    dom = None
    if with_domain:
        dom = draw(polytopes(dim, min_pts=2, max_pts=4).filter(lambda p: p.is_full_dimensional()))
    return ConvexPL.make(dim, [piece(g, o) for g, o in pcs], dom)


@st.composite
def cone_unions(draw, dim=2, max_parts=3):
    parts = draw(st.lists(cones(dim), min_size=1, max_size=max_parts))
    return PolyUnion(dim, tuple(parts))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not terminalreporter.stats:
        return
    ran = any(
        getattr(r, "nodeid", "").startswith("tests/test_acceptance.py")
        for reps in terminalreporter.stats.values()
        for r in reps
    )
    if not ran:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in mod.CRITERIA:
        terminalreporter.write_line(mod.RESULTS.get(n, f"criterion {n}: FAIL (did not report)"))


@pytest.fixture(scope="session")
def corpus_dir():
    from vacal.cli import default_suite

    return default_suite()
